"""Benchmark dataset generation from map layout templates.

Templates fix the topology; every instantiation draws fresh labels (one
wing/zone/floor triple per map, distinct shuffled room numbers) so answers
can only come from reading the map, never from numeric order. All
randomness flows from an explicit seed through per-instance derived
streams, making every emitted byte reproducible.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DatasetError, IntegrityError
from .hierarchy import BUILDINGS, locate_owner
from .model import (
    NAME_KEY,
    OWNER_KEY,
    PARENT_KEY,
    TYPE_KEY,
    TYPE_STRUCTURE,
    Area,
    AreaGraph,
    AreaKind,
    OsmNode,
    Passage,
    TagMap,
    build_graph,
)
from .osmio import parse_osm_xml, render_map_text
from .planner import render_path, shortest_paths, validate_path
from .prompting import (
    PromptLibrary,
    TaskKind,
    build_query_input,
    build_task_description,
    hierarchy_question,
    path_question,
)
from .seeds import derive_seed
from .transform import VariantKind, apply_variant, prune_leaf_areas, strip_metric, to_variant2

TEMPLATE_IDS = ("a", "b", "c", "d")
# Zone letters drawn during generation; 'z' is reserved for the worked
# examples inside prompts so generated maps can never collide with them.
ZONE_LETTERS = "abcdefgh"
DEFAULT_TOKEN_CEILING = 4096


class QueryKind(str, Enum):
    TOPOLOGICAL = "topological"
    HIERARCHICAL = "hierarchical"
    GENERAL = "general"


@dataclass(frozen=True)
class TemplateManifest:
    areas: int
    passages: int
    description: str
    test_only: bool = False


@dataclass
class Template:
    template_id: str
    graph: AreaGraph
    manifest: TemplateManifest


@dataclass
class QueryItem:
    kind: QueryKind
    instruction: str
    input: str
    ground_truth: list[str]
    metadata: dict = field(default_factory=dict)

    @property
    def prompt(self) -> str:
        return "\n\n".join(part for part in (self.instruction, self.input) if part)

    @property
    def item_id(self) -> str:
        return self.metadata.get("id", "")


@dataclass(frozen=True)
class DatasetRecord:
    instruction: str
    input: str
    output: str

    @classmethod
    def from_item(cls, item: QueryItem) -> "DatasetRecord":
        return cls(instruction=item.instruction, input=item.input, output=item.ground_truth[0])


def estimate_tokens(text: str) -> int:
    """Conservative tokenizer-free estimate: one token per four bytes."""
    return math.ceil(len(text.encode("utf-8")) / 4)


def _resource_root():
    return resources.files("osmag_bench") / "resources"


def load_template_manifest() -> dict[str, TemplateManifest]:
    raw = json.loads(
        (_resource_root() / "templates" / "manifest.json").read_text(encoding="utf-8")
    )
    return {tid: TemplateManifest(**entry) for tid, entry in raw.items()}


def load_template(template_id: str) -> Template:
    if template_id not in TEMPLATE_IDS:
        raise DatasetError(f"unknown template {template_id!r}")
    manifest = load_template_manifest()[template_id]
    data = (_resource_root() / "templates" / f"template_{template_id}.osm").read_bytes()
    return Template(template_id=template_id, graph=parse_osm_xml(data), manifest=manifest)


def load_templates(template_ids: Iterable[str]) -> list[Template]:
    return [load_template(tid) for tid in template_ids]


def load_owner_names() -> list[str]:
    text = (_resource_root() / "owner_names.txt").read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def relabel_areas(
    graph: AreaGraph, *, wing: int, zone: str, floor: int, rng: random.Random
) -> AreaGraph:
    """Rename every traversable area to a fresh room label.

    Room numbers are drawn distinct and come out of the rng pre-shuffled,
    so label order carries no information about the layout.
    """
    targets = sorted(
        (a for a in graph.areas.values() if a.traversable), key=lambda a: a.way_id
    )
    if len(targets) > 99:
        raise DatasetError("template too large for two-digit room numbers")
    numbers = rng.sample(range(1, 100), len(targets))
    mapping = {
        area.name: f"{wing}{zone}-{floor}{number:02d}"
        for area, number in zip(targets, numbers)
    }

    areas = []
    for area in graph.areas.values():
        tags = area.tags.copy()
        new_name = mapping.get(area.name, area.name)
        tags.set(NAME_KEY, new_name)
        areas.append(Area(area.way_id, new_name, list(area.polygon), tags, area.area_kind))
    passages = []
    for p in graph.passages:
        tags = p.tags.copy()
        from_area = mapping.get(p.from_area, p.from_area)
        to_area = mapping.get(p.to_area, p.to_area)
        tags.set("osmAG:from", from_area)
        tags.set("osmAG:to", to_area)
        passages.append(Passage(p.way_id, tuple(p.node_pair), from_area, to_area, tags))
    return build_graph(areas, passages, graph.nodes.values())


def instantiate_template(template: Template, seed: int) -> AreaGraph:
    """Deterministic label randomization; topology is untouched."""
    rng = random.Random(seed)
    wing = rng.randint(1, 9)
    zone = rng.choice(ZONE_LETTERS)
    floor = rng.randint(1, 9)
    return relabel_areas(template.graph, wing=wing, zone=zone, floor=floor, rng=rng)


def _per_template(value: int | Mapping[str, int], template_id: str, default: int = 0) -> int:
    if isinstance(value, Mapping):
        return value.get(template_id, default)
    return value


def gen_topological(
    templates: list[Template],
    maps_per_template: int | Mapping[str, int],
    seed: int,
    *,
    instance_start: int | Mapping[str, int] = 0,
    level: int = 3,
    variant: VariantKind = VariantKind.VARIANT2,
    token_ceiling: int = DEFAULT_TOKEN_CEILING,
    dataset_id: str = "topo",
    library: PromptLibrary | None = None,
) -> list[QueryItem]:
    """Path-finding items: one per ordered room pair of each map instance.

    Each item's map is the instance converted to the requested variant,
    stripped of metric data and pruned with keep={start, goal}; the ground
    truth comes from the planner on that same pruned map.
    """
    if not templates:
        raise DatasetError("no templates given")
    instruction = build_task_description(TaskKind.PATH, level, library)
    items: list[QueryItem] = []
    for template in templates:
        count = _per_template(maps_per_template, template.template_id)
        first = _per_template(instance_start, template.template_id)
        for index in range(first, first + count):
            instance_seed = derive_seed(seed, "topo", template.template_id, index)
            instance = instantiate_template(template, instance_seed)
            prepared = strip_metric(apply_variant(instance, variant))
            names = prepared.traversable_names()
            for start in names:
                for goal in names:
                    if start == goal:
                        continue
                    items.append(
                        _make_path_item(
                            prepared,
                            start,
                            goal,
                            instruction=instruction,
                            token_ceiling=token_ceiling,
                            metadata={
                                "id": f"{dataset_id}-{len(items):06d}",
                                "dataset": dataset_id,
                                "template": template.template_id,
                                "instance_index": index,
                                "instance_seed": instance_seed,
                                "level": level,
                                "variant": variant.value,
                            },
                        )
                    )
    return items


def _make_path_item(
    prepared: AreaGraph,
    start: str,
    goal: str,
    *,
    instruction: str,
    token_ceiling: int,
    metadata: dict,
) -> QueryItem:
    pruned = prune_leaf_areas(prepared, {start, goal})
    answer = shortest_paths(pruned, start, goal)
    if not answer.reachable:
        raise DatasetError(f"template instance is disconnected between {start} and {goal}")
    for path in answer.paths:
        if not validate_path(pruned, path, start, goal).ok:
            raise DatasetError(f"planner produced an invalid path for {start}->{goal}")
    question = path_question(start, goal)
    query_input = build_query_input(render_map_text(pruned), question)
    item = QueryItem(
        kind=QueryKind.TOPOLOGICAL,
        instruction=instruction,
        input=query_input,
        ground_truth=[render_path(p) for p in answer.paths],
        metadata={**metadata, "start": start, "goal": goal, "hop_length": answer.hop_length},
    )
    _check_budget(item, token_ceiling)
    return item


def _check_budget(item: QueryItem, token_ceiling: int) -> None:
    estimate = estimate_tokens(item.prompt)
    if estimate > token_ceiling:
        raise DatasetError(
            f"prompt for {item.item_id or 'item'} is ~{estimate} tokens, "
            f"over the {token_ceiling} ceiling"
        )


def _renumber(graph: AreaGraph, first_way: int, first_node: int) -> tuple[AreaGraph, int, int]:
    node_map = {old: first_node + i for i, old in enumerate(sorted(graph.nodes))}
    old_ways = sorted(
        [a.way_id for a in graph.areas.values()] + [p.way_id for p in graph.passages]
    )
    way_map = {old: first_way + i for i, old in enumerate(old_ways)}

    areas = []
    for area in graph.areas.values():
        tags = area.tags.copy()
        parent = area.parent_id
        if parent is not None and parent in way_map:
            tags.set(PARENT_KEY, str(way_map[parent]))
        areas.append(
            Area(
                way_map[area.way_id],
                area.name,
                [node_map[r] for r in area.polygon],
                tags,
                area.area_kind,
            )
        )
    passages = [
        Passage(
            way_map[p.way_id],
            tuple(node_map[r] for r in p.node_pair),
            p.from_area,
            p.to_area,
            p.tags.copy(),
        )
        for p in graph.passages
    ]
    nodes = [OsmNode(node_map[n.id], n.lat, n.lon) for n in graph.nodes.values()]
    rebuilt = build_graph(areas, passages, nodes)
    return rebuilt, first_way + len(way_map), first_node + len(node_map)


def merge_graphs(left: AreaGraph, right: AreaGraph) -> AreaGraph:
    """Combine two maps into one document, renumbering ids to stay unique."""
    collisions = set(left.areas) & set(right.areas)
    if collisions:
        raise IntegrityError(f"merged maps share area names: {sorted(collisions)}")
    a, next_way, next_node = _renumber(left, 1, 1)
    b, _, _ = _renumber(right, next_way, next_node)
    return build_graph(
        list(a.areas.values()) + list(b.areas.values()),
        a.passages + b.passages,
        list(a.nodes.values()) + list(b.nodes.values()),
    )


def _attach_hierarchy(
    graph: AreaGraph, members: set[str], *, wing: int, zone: str, floor: int, building: str
) -> AreaGraph:
    """Add zone/floor/wing/building structure ways above the member rooms."""
    next_id = max(
        [a.way_id for a in graph.areas.values()] + [p.way_id for p in graph.passages],
        default=0,
    ) + 1
    levels = [
        (f"{building}", None),
        (f"{wing}_wing", next_id),
        (f"{floor}_floor", next_id + 1),
        (f"{zone}_zone", next_id + 2),
    ]
    structures = []
    for offset, (name, parent_id) in enumerate(levels):
        tags = TagMap([(TYPE_KEY, TYPE_STRUCTURE), (NAME_KEY, name)])
        if parent_id is not None:
            tags.add(PARENT_KEY, str(parent_id))
        structures.append(Area(next_id + offset, name, [], tags, AreaKind.STRUCTURE))
    zone_id = next_id + 3

    areas = []
    for area in graph.areas.values():
        tags = area.tags.copy()
        if area.name in members:
            tags.set(PARENT_KEY, str(zone_id))
        areas.append(Area(area.way_id, area.name, list(area.polygon), tags, area.area_kind))
    areas.extend(structures)
    return build_graph(areas, graph.passages, graph.nodes.values())


def gen_hierarchical(
    pool: list[AreaGraph],
    count: int,
    seed: int,
    *,
    level: int = 3,
    token_ceiling: int = DEFAULT_TOKEN_CEILING,
    dataset_id: str = "hier",
    library: PromptLibrary | None = None,
    owner_names: list[str] | None = None,
) -> list[QueryItem]:
    """Locate-a-person items over pairs of maps with synthesized hierarchies.

    Each item relabels two pool maps with component-disjoint wing/zone/floor
    triples, houses them in different buildings, tags every room with a
    distinct owner and asks for one owner's building.
    """
    if len(pool) < 2:
        raise DatasetError("hierarchical generation needs at least 2 maps in the pool")
    names_pool = owner_names if owner_names is not None else load_owner_names()
    instruction = build_task_description(TaskKind.HIERARCHY, level, library)

    items: list[QueryItem] = []
    for i in range(count):
        rng = random.Random(derive_seed(seed, "hier", i))
        picks = rng.sample(range(len(pool)), 2)
        wings = rng.sample(range(1, 10), 2)
        zones = rng.sample(ZONE_LETTERS, 2)
        floors = rng.sample(range(1, 10), 2)
        sides = [
            strip_metric(
                relabel_areas(
                    pool[pick], wing=wings[k], zone=zones[k], floor=floors[k], rng=rng
                )
            )
            for k, pick in enumerate(picks)
        ]
        side_names = [set(g.areas) for g in sides]
        merged = merge_graphs(sides[0], sides[1])

        buildings = list(BUILDINGS)
        rng.shuffle(buildings)
        for k in range(2):
            merged = _attach_hierarchy(
                merged,
                side_names[k],
                wing=wings[k],
                zone=zones[k],
                floor=floors[k],
                building=buildings[k],
            )

        rooms = merged.traversable_names()
        if len(names_pool) < len(rooms):
            raise DatasetError("owner name list is smaller than the room count")
        owners = rng.sample(names_pool, len(rooms))
        for room, owner in zip(rooms, owners):
            merged.areas[room].tags.add(OWNER_KEY, owner)

        target = rng.randrange(len(rooms))
        person, room = owners[target], rooms[target]
        building = buildings[0] if room in side_names[0] else buildings[1]

        final = to_variant2(merged)
        if locate_owner(final, person) != building:
            raise DatasetError("generator and resolver disagree on a building")

        item = QueryItem(
            kind=QueryKind.HIERARCHICAL,
            instruction=instruction,
            input=build_query_input(render_map_text(final), hierarchy_question(person)),
            ground_truth=[building],
            metadata={
                "id": f"{dataset_id}-{i:06d}",
                "dataset": dataset_id,
                "pool_indices": picks,
                "person": person,
                "room": room,
                "building": building,
                "buildings": list(BUILDINGS),
                "level": level,
            },
        )
        _check_budget(item, token_ceiling)
        items.append(item)
    return items


def load_general(path: str | Path | None = None) -> list[QueryItem]:
    """The fixed general-knowledge probe used to detect forgetting."""
    if path is None:
        text = (_resource_root() / "general_questions.jsonl").read_text(encoding="utf-8")
    else:
        p = Path(path)
        if not p.exists():
            raise DatasetError(f"general question file not found: {p}")
        text = p.read_text(encoding="utf-8")
    items: list[QueryItem] = []
    for i, line in enumerate(text.splitlines()):
        line = line.strip()
        if not line:
            continue
        row = json.loads(line)
        items.append(
            QueryItem(
                kind=QueryKind.GENERAL,
                instruction=row["question"],
                input="",
                ground_truth=list(row["answers"]),
                metadata={"id": f"general-{i:03d}", "dataset": "dataset5"},
            )
        )
    if not items:
        raise DatasetError("general question file is empty")
    return items


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta" + path.suffix)


def export_records(items: list[QueryItem], path: str | Path) -> Path:
    """Write instruction/input/output records plus a metadata sidecar.

    One JSON object per line in both files; the sidecar keys ground truth
    and metadata by line number so the export re-imports losslessly.
    """
    if not items:
        raise DatasetError("refusing to export an empty dataset")
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as records, _sidecar_path(out).open(
        "w", encoding="utf-8"
    ) as sidecar:
        for i, item in enumerate(items):
            record = DatasetRecord.from_item(item)
            records.write(
                json.dumps(
                    {
                        "instruction": record.instruction,
                        "input": record.input,
                        "output": record.output,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
            sidecar.write(
                json.dumps(
                    {
                        "line": i,
                        "kind": item.kind.value,
                        "ground_truth": item.ground_truth,
                        "metadata": item.metadata,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    return out


def import_records(path: str | Path) -> list[QueryItem]:
    source = Path(path)
    if not source.exists():
        raise DatasetError(f"dataset file not found: {source}")
    sidecar = _sidecar_path(source)
    if not sidecar.exists():
        raise DatasetError(f"metadata sidecar not found: {sidecar}")
    items: list[QueryItem] = []
    with source.open(encoding="utf-8") as records, sidecar.open(encoding="utf-8") as meta:
        for record_line, meta_line in zip(records, meta):
            record = json.loads(record_line)
            extra = json.loads(meta_line)
            items.append(
                QueryItem(
                    kind=QueryKind(extra["kind"]),
                    instruction=record["instruction"],
                    input=record["input"],
                    ground_truth=list(extra["ground_truth"]),
                    metadata=extra["metadata"],
                )
            )
    if not items:
        raise DatasetError(f"dataset file is empty: {source}")
    return items


def load_preset(name: str) -> dict:
    candidate = _resource_root() / "configs" / f"{name}.json"
    try:
        return json.loads(candidate.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DatasetError(f"unknown dataset preset {name!r}") from None


def load_generation_config(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def build_hierarchy_pool(pool_cfg: dict, seed: int) -> list[AreaGraph]:
    pool = []
    for tid in pool_cfg["templates"]:
        template = load_template(tid)
        for k in range(pool_cfg["maps_per_template"]):
            pool.append(instantiate_template(template, derive_seed(seed, "pool", tid, k)))
    return pool


def generate_from_config(
    config: dict, seed: int, library: PromptLibrary | None = None
) -> dict[str, list[QueryItem]]:
    """Run one generation config; returns {"main": items, "holdout": items?}.

    Held-out items come from whole map instances numbered after the
    training instances, so the two splits never share a map.
    """
    kind = config.get("kind", "topological")
    dataset_id = config.get("dataset_id", kind)
    level = config.get("level", 3)
    token_ceiling = config.get("token_ceiling", DEFAULT_TOKEN_CEILING)
    if kind == "topological":
        variant = VariantKind(config.get("variant", "variant2"))
        template_cfg: dict[str, dict] = config["templates"]
        templates = load_templates(list(template_cfg))
        maps = {tid: entry["maps"] for tid, entry in template_cfg.items()}
        main = gen_topological(
            templates,
            maps,
            seed,
            level=level,
            variant=variant,
            token_ceiling=token_ceiling,
            dataset_id=dataset_id,
            library=library,
        )
        out = {"main": main}
        holdout_cfg = config.get("holdout") or {}
        if holdout_cfg:
            out["holdout"] = gen_topological(
                load_templates(list(holdout_cfg)),
                holdout_cfg,
                seed,
                instance_start=maps,
                level=level,
                variant=variant,
                token_ceiling=token_ceiling,
                dataset_id=f"{dataset_id}-test",
                library=library,
            )
        return out
    if kind == "hierarchical":
        pool = build_hierarchy_pool(config["pool"], seed)
        return {
            "main": gen_hierarchical(
                pool,
                config["count"],
                seed,
                level=level,
                token_ceiling=token_ceiling,
                dataset_id=dataset_id,
                library=library,
            )
        }
    if kind == "general":
        return {"main": load_general(config.get("source"))}
    raise DatasetError(f"unknown generation kind {kind!r}")
