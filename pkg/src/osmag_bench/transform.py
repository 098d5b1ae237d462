"""Map rewrites that make osmAG easier for language models to read.

All transforms are pure: they clone, never mutate, and they preserve the
neighbor relation over area names. Applying the same transform twice is a
no-op (connection tags are rebuilt, not appended).
"""

from __future__ import annotations

from enum import Enum

from .errors import IntegrityError
from .model import (
    CONNECTED_KEY,
    CONNECTED_SUFFIX,
    AreaGraph,
    AreaKind,
    adjacency,
    build_graph,
    clone_graph,
    passage_degree,
)


class VariantKind(str, Enum):
    ORIGINAL = "original"
    VARIANT1 = "variant1"
    VARIANT2 = "variant2"


def detect_variant(graph: AreaGraph) -> VariantKind:
    """Classify a graph by the connection tags its areas carry."""
    for area in graph.areas.values():
        for key in area.tags.keys():
            if key.endswith(CONNECTED_SUFFIX):
                return VariantKind.VARIANT2
            if key == CONNECTED_KEY:
                return VariantKind.VARIANT1
    return VariantKind.ORIGINAL


def apply_variant(graph: AreaGraph, variant: VariantKind) -> AreaGraph:
    if variant is VariantKind.VARIANT1:
        return to_variant1(graph)
    if variant is VariantKind.VARIANT2:
        return to_variant2(graph)
    return _without_connection_tags(graph)


def to_variant1(graph: AreaGraph) -> AreaGraph:
    """Embed connectivity as one connected_area tag per neighbor."""
    return _with_connection_tags(graph, lambda name: CONNECTED_KEY)


def to_variant2(graph: AreaGraph) -> AreaGraph:
    """As Variant 1, but the tag key repeats the current area's name."""
    return _with_connection_tags(graph, lambda name: f"{name}{CONNECTED_SUFFIX}")


def _with_connection_tags(graph: AreaGraph, key_for) -> AreaGraph:
    base = _without_connection_tags(graph)
    neighbors = adjacency(base)
    for name, area in base.areas.items():
        for neighbor in neighbors.get(name, []):
            area.tags.add(key_for(name), neighbor)
    return _rebuild(base)


def _without_connection_tags(graph: AreaGraph) -> AreaGraph:
    out = clone_graph(graph)
    for area in out.areas.values():
        area.tags.discard(CONNECTED_KEY)
        for key in list(area.tags.keys()):
            if key.endswith(CONNECTED_SUFFIX):
                area.tags.discard(key)
    return out


def strip_metric(graph: AreaGraph) -> AreaGraph:
    """Drop node coordinates, polygons and passage geometry to save tokens.

    Names, tags, passages (as pure connectivity) and the hierarchy stay.
    """
    out = clone_graph(graph)
    out.nodes = {}
    for area in out.areas.values():
        area.polygon = []
    for passage in out.passages:
        passage.node_pair = ()
    return _rebuild(out)


def prune_leaf_areas(graph: AreaGraph, keep: set[str]) -> AreaGraph:
    """Iteratively remove single-door rooms that are not in keep.

    Removal runs in rounds to a fixed point (pruning a room can expose a
    room behind it); each round removes every current leaf at once. Only
    plain rooms are ever pruned: corridors are the circulation spine,
    elevators stay route-critical even behind a single door, structures
    carry the hierarchy. Hop distances between all surviving pairs are
    unchanged, a degree-1 area can never be interior to a path.
    """
    for name in sorted(keep):
        if name not in graph.areas:
            raise IntegrityError(f"unknown area in keep set: {name!r}")

    out = clone_graph(graph)
    removed: set[str] = set()
    while True:
        degree = passage_degree(out)
        leaves = [
            name
            for name, area in out.areas.items()
            if area.area_kind is AreaKind.ROOM
            and name not in keep
            and degree[name] == 1
        ]
        if not leaves:
            break
        removed.update(leaves)
        doomed = set(leaves)
        out.areas = {n: a for n, a in out.areas.items() if n not in doomed}
        out.passages = [
            p
            for p in out.passages
            if p.from_area not in doomed and p.to_area not in doomed
        ]
    if not removed:
        return _rebuild(out)

    _drop_orphan_nodes(out)
    # Connection tags on survivors may still point at removed areas;
    # rebuilding the variant refreshes them from the surviving passages.
    return apply_variant(_rebuild(out), detect_variant(graph))


def _drop_orphan_nodes(graph: AreaGraph) -> None:
    referenced: set[int] = set()
    for area in graph.areas.values():
        referenced.update(area.polygon)
    for passage in graph.passages:
        referenced.update(passage.node_pair)
    graph.nodes = {nid: n for nid, n in graph.nodes.items() if nid in referenced}


def _rebuild(graph: AreaGraph) -> AreaGraph:
    """Re-validate and re-derive caches after a structural edit."""
    return build_graph(
        graph.areas.values(), graph.passages, graph.nodes.values(), graph.warnings
    )
