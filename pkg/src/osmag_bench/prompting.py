"""Prompt assembly: task description levels wrapped around a map text.

Level 1 is explanation only, level 2 adds a short example, level 3 adds a
worked example with its own illustrative mini map. The block texts live in
plain-text resource files and can be overridden per file from a directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .errors import PromptError
from .transform import VariantKind


class TaskKind(str, Enum):
    PATH = "path"
    HIERARCHY = "hierarchy"


BLOCK_FILES = {
    "format_explanation": "format_explanation.txt",
    "task_path": "task_path.txt",
    "task_hierarchy": "task_hierarchy.txt",
    "example_path_simple": "example_path_simple.txt",
    "example_path_detailed": "example_path_detailed.txt",
    "example_hierarchy_simple": "example_hierarchy_simple.txt",
    "example_hierarchy_detailed": "example_hierarchy_detailed.txt",
}

QUESTION_PREFIX = "Question: "


@dataclass(frozen=True)
class PromptSpec:
    level: int
    variant: VariantKind
    task: TaskKind
    map_text: str
    question: str


class PromptLibrary:
    """The named text blocks prompts are assembled from."""

    def __init__(self, blocks: dict[str, str]):
        missing = sorted(set(BLOCK_FILES) - set(blocks))
        if missing:
            raise PromptError(f"missing prompt blocks: {', '.join(missing)}")
        self.blocks = dict(blocks)

    @classmethod
    def packaged(cls) -> "PromptLibrary":
        base = resources.files("osmag_bench") / "resources" / "prompts"
        return cls(
            {
                name: (base / filename).read_text(encoding="utf-8").strip()
                for name, filename in BLOCK_FILES.items()
            }
        )

    @classmethod
    def from_dir(cls, path: str | Path) -> "PromptLibrary":
        """Load blocks from a directory, falling back to the packaged text
        for any file that is absent."""
        packaged = cls.packaged()
        blocks = dict(packaged.blocks)
        root = Path(path)
        for name, filename in BLOCK_FILES.items():
            candidate = root / filename
            if candidate.exists():
                blocks[name] = candidate.read_text(encoding="utf-8").strip()
        return cls(blocks)


_default_library: PromptLibrary | None = None


def default_library() -> PromptLibrary:
    global _default_library
    if _default_library is None:
        _default_library = PromptLibrary.packaged()
    return _default_library


def build_task_description(
    task: TaskKind, level: int, library: PromptLibrary | None = None
) -> str:
    """Explanations plus the examples the level calls for, map excluded."""
    lib = library or default_library()
    if level not in (1, 2, 3):
        raise PromptError(f"prompt level must be 1, 2 or 3, got {level}")
    blocks = [lib.blocks["format_explanation"], lib.blocks[f"task_{task.value}"]]
    if level >= 2:
        blocks.append(lib.blocks[f"example_{task.value}_simple"])
    if level >= 3:
        blocks.append(lib.blocks[f"example_{task.value}_detailed"])
    return "\n\n".join(blocks)


def build_query_input(map_text: str, question: str) -> str:
    if not map_text:
        raise PromptError("map_text must be non-empty")
    return f"{map_text.strip()}\n\n{QUESTION_PREFIX}{question}"


def split_query_input(query_input: str) -> tuple[str, str]:
    """Inverse of build_query_input."""
    map_text, sep, question = query_input.rpartition(f"\n\n{QUESTION_PREFIX}")
    if not sep:
        raise PromptError("not a map question block")
    return map_text, question


def assemble_prompt(spec: PromptSpec, library: PromptLibrary | None = None) -> str:
    description = build_task_description(spec.task, spec.level, library)
    return f"{description}\n\n{build_query_input(spec.map_text, spec.question)}"


def path_question(start: str, goal: str) -> str:
    return f"Find the shortest route from area '{start}' to area '{goal}'."


def hierarchy_question(person: str) -> str:
    return f"Which building is {person} in?"
