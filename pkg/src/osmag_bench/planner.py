"""Hop-count shortest paths over the area adjacency.

Metric information is deliberately ignored: a path's cost is the number of
area-to-area steps, matching how the benchmark ground truth is defined.
Only rooms, corridors and elevators are traversable; structures never
appear in paths.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import IntegrityError, UnknownAreaError
from .model import AreaGraph, adjacency

MAX_ALTERNATIVES = 2

VALID = "valid"
BROKEN = "broken"
WRONG_ENDPOINTS = "wrong-endpoints"


@dataclass
class PathAnswer:
    """Up to two equal-length shortest paths, or an unreachable marker."""

    paths: list[list[str]] = field(default_factory=list)
    hop_length: int | None = None

    @property
    def reachable(self) -> bool:
        return self.hop_length is not None


@dataclass(frozen=True)
class PathVerdict:
    status: str
    break_index: int | None = None

    @property
    def ok(self) -> bool:
        return self.status == VALID


def render_path(path: list[str]) -> str:
    """Ground-truth rendering: bracketed, comma-separated, single-quoted."""
    return "[" + ",".join(f"'{name}'" for name in path) + "]"


def shortest_paths(graph: AreaGraph, start: str, goal: str) -> PathAnswer:
    """All-shortest-path query by breadth-first hop count.

    When more than two shortest paths exist, the two lexicographically
    smallest name sequences are kept so datasets stay reproducible.
    """
    neighbors = adjacency(graph)
    _require_known(neighbors, start)
    _require_known(neighbors, goal)
    return _search(neighbors, start, goal)


def plan_avoiding(
    graph: AreaGraph, start: str, goal: str, blocked: set[str]
) -> PathAnswer:
    """Shortest paths on the subgraph with the blocked areas removed."""
    neighbors = adjacency(graph)
    _require_known(neighbors, start)
    _require_known(neighbors, goal)
    for name in sorted(blocked):
        _require_known(neighbors, name)
    if start in blocked or goal in blocked:
        raise IntegrityError("start and goal must not be blocked")
    reduced = {
        name: [n for n in peers if n not in blocked]
        for name, peers in neighbors.items()
        if name not in blocked
    }
    return _search(reduced, start, goal)


def validate_path(
    graph: AreaGraph, path: list[str], start: str, goal: str
) -> PathVerdict:
    """Check endpoints and that every consecutive pair is adjacent.

    A broken verdict carries the index of the first element whose step to
    the next one is not an edge. Optimality is not checked here.
    """
    if not path or path[0] != start or path[-1] != goal:
        return PathVerdict(WRONG_ENDPOINTS)
    neighbors = adjacency(graph)
    for i in range(len(path) - 1):
        here, there = path[i], path[i + 1]
        if here not in neighbors or there not in neighbors[here]:
            return PathVerdict(BROKEN, break_index=i)
    return PathVerdict(VALID)


def _require_known(neighbors: dict[str, list[str]], name: str) -> None:
    if name not in neighbors:
        raise UnknownAreaError(f"unknown or non-traversable area {name!r}")


def _search(neighbors: dict[str, list[str]], start: str, goal: str) -> PathAnswer:
    dist = _bfs_distances(neighbors, goal)
    if start not in dist:
        return PathAnswer(paths=[], hop_length=None)

    # Walking only to neighbors one hop closer to the goal enumerates
    # exactly the shortest paths; visiting neighbors in sorted order emits
    # them in lexicographic order, so the first two are the ones kept.
    found: list[list[str]] = []
    trail = [start]

    def walk(here: str) -> None:
        if len(found) >= MAX_ALTERNATIVES:
            return
        if here == goal:
            found.append(list(trail))
            return
        for peer in neighbors[here]:
            if dist.get(peer) == dist[here] - 1:
                trail.append(peer)
                walk(peer)
                trail.pop()
                if len(found) >= MAX_ALTERNATIVES:
                    return

    walk(start)
    return PathAnswer(paths=found, hop_length=dist[start])


def _bfs_distances(neighbors: dict[str, list[str]], source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        here = queue.popleft()
        for peer in neighbors[here]:
            if peer not in dist:
                dist[peer] = dist[here] + 1
                queue.append(peer)
    return dist
