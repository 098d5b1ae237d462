"""Response grading and success-rate aggregation.

Grading is deliberately rule-based and pure: a room-label scan plus exact
sequence match for path answers, literal building-token matching for
hierarchy answers. Replaying the same responses always reproduces the
same report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .datasetgen import QueryItem, QueryKind
from .hierarchy import BUILDINGS
from .llm import Backend, ChatRequest, ChatResponse, complete_batch
from .model import find_room_labels

SUCCESS = "success"
FAILURE = "failure"
UNPARSEABLE = "unparseable"


@dataclass
class GradeResult:
    item_id: str
    verdict: str
    extracted_answer: str | None = None
    matched_alternative: int | None = None
    detail: str | None = None


@dataclass
class EvalReport:
    dataset_id: str
    results: list[GradeResult]
    counts: dict[str, int] = field(default_factory=dict)
    success_rate: float = 0.0

    @classmethod
    def build(cls, dataset_id: str, results: list[GradeResult]) -> "EvalReport":
        counts = {SUCCESS: 0, FAILURE: 0, UNPARSEABLE: 0}
        for result in results:
            counts[result.verdict] = counts.get(result.verdict, 0) + 1
        rate = counts[SUCCESS] / len(results) if results else 0.0
        return cls(dataset_id=dataset_id, results=results, counts=counts, success_rate=rate)


def extract_room_sequence(response: str) -> list[str]:
    """Room labels mentioned in a response, in order, immediate repeats
    collapsed. Tolerates prose, quoting and list punctuation around them."""
    sequence: list[str] = []
    for label in find_room_labels(response):
        if not sequence or sequence[-1] != label:
            sequence.append(label)
    return sequence


def grade_topological(item: QueryItem, response: str) -> GradeResult:
    """Success iff the extracted sequence equals one ground-truth path
    exactly; a valid but longer route still fails."""
    extracted = extract_room_sequence(response)
    rendered = "[" + ",".join(f"'{r}'" for r in extracted) + "]"
    if not extracted:
        return GradeResult(item.item_id, UNPARSEABLE, detail="no room labels found")
    for i, alternative in enumerate(item.ground_truth):
        if extracted == extract_room_sequence(alternative):
            return GradeResult(item.item_id, SUCCESS, rendered, matched_alternative=i)
    return GradeResult(item.item_id, FAILURE, rendered)


def grade_hierarchical(item: QueryItem, response: str) -> GradeResult:
    """Success iff the answer names the right building and not the rival.

    Paraphrases without the literal building token fail; only an empty
    response is unparseable.
    """
    if not response.strip():
        return GradeResult(item.item_id, UNPARSEABLE, detail="empty response")
    truth = item.ground_truth[0]
    buildings = item.metadata.get("buildings", list(BUILDINGS))
    rivals = [b for b in buildings if b != truth]
    named = [b for b in buildings if b in response]
    if truth in named and not any(r in response for r in rivals):
        return GradeResult(item.item_id, SUCCESS, truth, matched_alternative=0)
    detail = None if named else "no literal building token"
    return GradeResult(item.item_id, FAILURE, ", ".join(named) or None, detail=detail)


def grade_general(item: QueryItem, response: str) -> GradeResult:
    """Success iff any acceptable answer occurs, case-insensitively."""
    lowered = response.lower()
    if not response.strip():
        return GradeResult(item.item_id, UNPARSEABLE, detail="empty response")
    for i, alternative in enumerate(item.ground_truth):
        if alternative.lower() in lowered:
            return GradeResult(item.item_id, SUCCESS, alternative, matched_alternative=i)
    return GradeResult(item.item_id, FAILURE, response.strip()[:80])


_GRADERS = {
    QueryKind.TOPOLOGICAL: grade_topological,
    QueryKind.HIERARCHICAL: grade_hierarchical,
    QueryKind.GENERAL: grade_general,
}


def grade_item(item: QueryItem, response: str) -> GradeResult:
    return _GRADERS[item.kind](item, response)


def evaluate(
    items: list[QueryItem],
    backend: Backend,
    *,
    model: str = "",
    temperature: float = 0.2,
    max_tokens: int = 512,
    max_in_flight: int = 1,
    dataset_id: str | None = None,
) -> tuple[EvalReport, list[ChatRequest], list[ChatResponse]]:
    """Run a backend over a dataset and grade every response.

    Backend failures never abort the run; the affected items are graded
    unparseable with the failure recorded in the result detail.
    """
    if not items:
        raise ValueError("cannot evaluate an empty dataset")
    requests_ = [
        ChatRequest(prompt=item.prompt, model=model, temperature=temperature, max_tokens=max_tokens)
        for item in items
    ]
    responses = complete_batch(backend, requests_, max_in_flight=max_in_flight)
    results = []
    for item, response in zip(items, responses):
        if not response.ok:
            results.append(GradeResult(item.item_id, UNPARSEABLE, detail=response.error))
        else:
            results.append(grade_item(item, response.text))
    name = dataset_id or (items[0].metadata.get("dataset", "dataset") if items else "dataset")
    return EvalReport.build(name, results), requests_, responses
