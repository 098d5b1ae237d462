"""Domain model for osmAG maps.

An osmAG map is a set of areas (rooms, corridors, elevators and structure
containers) whose connectivity is given by passages. Everything is stored
as tagged OSM ways; this module holds the in-memory form plus the room
label grammar and the area adjacency derivation.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import IntegrityError

# Tag schema. Keys below carry map semantics and must be unique per element;
# connection tags (added by the LLM-friendly variants) repeat per neighbor.
TYPE_KEY = "osmAG:type"
NAME_KEY = "name"
FROM_KEY = "osmAG:from"
TO_KEY = "osmAG:to"
PARENT_KEY = "parent"
AREA_TYPE_KEY = "osmAG:areaType"
OWNER_KEY = "owner"
CONNECTED_KEY = "connected_area"
CONNECTED_SUFFIX = "_directly_connected_room"

UNIQUE_KEYS = frozenset(
    {TYPE_KEY, NAME_KEY, FROM_KEY, TO_KEY, PARENT_KEY, AREA_TYPE_KEY, OWNER_KEY}
)

TYPE_AREA = "area"
TYPE_PASSAGE = "passage"
TYPE_STRUCTURE = "structure"


class AreaKind(str, Enum):
    ROOM = "room"
    CORRIDOR = "corridor"
    ELEVATOR = "elevator"
    STRUCTURE = "structure"


class TagMap:
    """Insertion-ordered tag collection for one map element.

    Stored as a sequence of (key, value) pairs because connection tags
    legitimately repeat a key (one tag per connected neighbor); semantic
    keys in UNIQUE_KEYS are kept unique by the parser and builders.
    """

    __slots__ = ("_pairs",)

    def __init__(self, pairs: Iterable[tuple[str, str]] = ()):
        self._pairs: list[tuple[str, str]] = [(str(k), str(v)) for k, v in pairs]

    def get(self, key: str, default: str | None = None) -> str | None:
        for k, v in self._pairs:
            if k == key:
                return v
        return default

    def get_all(self, key: str) -> list[str]:
        return [v for k, v in self._pairs if k == key]

    def add(self, key: str, value: str) -> None:
        self._pairs.append((str(key), str(value)))

    def set(self, key: str, value: str) -> None:
        """Replace the first occurrence in place, or append if absent."""
        for i, (k, _) in enumerate(self._pairs):
            if k == key:
                self._pairs[i] = (key, str(value))
                return
        self.add(key, value)

    def discard(self, key: str) -> None:
        self._pairs = [(k, v) for k, v in self._pairs if k != key]

    def keys(self) -> list[str]:
        return [k for k, _ in self._pairs]

    def items(self) -> list[tuple[str, str]]:
        return list(self._pairs)

    def copy(self) -> "TagMap":
        return TagMap(self._pairs)

    def __contains__(self, key: str) -> bool:
        return any(k == key for k, _ in self._pairs)

    def __iter__(self) -> Iterator[tuple[str, str]]:
        return iter(self._pairs)

    def __len__(self) -> int:
        return len(self._pairs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TagMap):
            return NotImplemented
        return self._pairs == other._pairs

    def __repr__(self) -> str:
        return f"TagMap({self._pairs!r})"


@dataclass
class OsmNode:
    id: int
    lat: float
    lon: float


@dataclass
class Area:
    way_id: int
    name: str
    polygon: list[int]
    tags: TagMap
    area_kind: AreaKind

    @property
    def traversable(self) -> bool:
        return self.area_kind is not AreaKind.STRUCTURE

    @property
    def owner(self) -> str | None:
        return self.tags.get(OWNER_KEY)

    @property
    def parent_id(self) -> int | None:
        raw = self.tags.get(PARENT_KEY)
        return int(raw) if raw is not None else None


@dataclass
class Passage:
    way_id: int
    node_pair: tuple[int, ...]
    from_area: str
    to_area: str
    tags: TagMap


@dataclass
class AreaGraph:
    areas: dict[str, Area]
    passages: list[Passage]
    nodes: dict[int, OsmNode]
    hierarchy_edges: dict[str, int]
    warnings: list[str] = field(default_factory=list, compare=False)

    def area_by_way_id(self, way_id: int) -> Area | None:
        for area in self.areas.values():
            if area.way_id == way_id:
                return area
        return None

    def traversable_names(self) -> list[str]:
        return sorted(n for n, a in self.areas.items() if a.traversable)


def build_graph(
    areas: Iterable[Area],
    passages: Iterable[Passage],
    nodes: Iterable[OsmNode],
    warnings: Iterable[str] = (),
) -> AreaGraph:
    """Assemble an AreaGraph, enforcing every type invariant.

    Raises IntegrityError naming the offending element on any violation.
    All construction paths (parser, transforms, generators) funnel through
    here so downstream code can rely on a valid graph.
    """
    node_map: dict[int, OsmNode] = {}
    for node in nodes:
        if node.id in node_map:
            raise IntegrityError(f"duplicate node id {node.id}")
        if not (-90.0 <= node.lat <= 90.0):
            raise IntegrityError(f"node {node.id} latitude {node.lat} out of range")
        if not (-180.0 <= node.lon <= 180.0):
            raise IntegrityError(f"node {node.id} longitude {node.lon} out of range")
        node_map[node.id] = node

    area_map: dict[str, Area] = {}
    way_ids: dict[int, str] = {}
    for area in areas:
        if not area.name:
            raise IntegrityError(f"way {area.way_id} has an empty area name")
        if area.name in area_map:
            other = area_map[area.name]
            raise IntegrityError(
                f"duplicate area name {area.name!r} on ways "
                f"{other.way_id} and {area.way_id}"
            )
        if area.way_id in way_ids:
            raise IntegrityError(f"duplicate way id {area.way_id}")
        way_ids[area.way_id] = area.name
        if area.polygon:
            if area.polygon[0] != area.polygon[-1]:
                raise IntegrityError(
                    f"area {area.name!r} (way {area.way_id}) polygon is not closed"
                )
            for ref in area.polygon:
                if ref not in node_map:
                    raise IntegrityError(
                        f"way {area.way_id} references missing node {ref}"
                    )
        if len(area.tags.get_all(PARENT_KEY)) > 1:
            raise IntegrityError(f"area {area.name!r} carries more than one parent tag")
        area_map[area.name] = area

    passage_list: list[Passage] = []
    for passage in passages:
        if passage.way_id in way_ids:
            raise IntegrityError(f"duplicate way id {passage.way_id}")
        way_ids[passage.way_id] = f"passage {passage.way_id}"
        if passage.from_area == passage.to_area:
            raise IntegrityError(
                f"passage {passage.way_id} connects {passage.from_area!r} to itself"
            )
        for endpoint in (passage.from_area, passage.to_area):
            if endpoint not in area_map:
                raise IntegrityError(
                    f"passage {passage.way_id} references unknown area {endpoint!r}"
                )
        if passage.node_pair:
            if len(passage.node_pair) != 2:
                raise IntegrityError(
                    f"passage {passage.way_id} must reference exactly 2 nodes"
                )
            for ref in passage.node_pair:
                if ref not in node_map:
                    raise IntegrityError(
                        f"way {passage.way_id} references missing node {ref}"
                    )
            for endpoint in (passage.from_area, passage.to_area):
                polygon = area_map[endpoint].polygon
                if polygon and not all(ref in polygon for ref in passage.node_pair):
                    raise IntegrityError(
                        f"passage {passage.way_id} nodes are not on the boundary "
                        f"of area {endpoint!r}"
                    )
        passage_list.append(passage)
    passage_list.sort(key=lambda p: p.way_id)

    hierarchy: dict[str, int] = {}
    for area in area_map.values():
        parent = area.parent_id
        if parent is not None:
            hierarchy[area.name] = parent
    _check_hierarchy_acyclic(area_map, hierarchy)

    return AreaGraph(
        areas=area_map,
        passages=passage_list,
        nodes=node_map,
        hierarchy_edges=hierarchy,
        warnings=list(warnings),
    )


def _check_hierarchy_acyclic(areas: dict[str, Area], hierarchy: dict[str, int]) -> None:
    by_way = {a.way_id: a.name for a in areas.values()}
    for start in hierarchy:
        seen = {start}
        current = start
        while current in hierarchy:
            parent_name = by_way.get(hierarchy[current])
            if parent_name is None:
                break  # dangling parent ids are reported lazily at resolve time
            if parent_name in seen:
                raise IntegrityError(f"hierarchy cycle through {parent_name!r}")
            seen.add(parent_name)
            current = parent_name


def clone_graph(graph: AreaGraph) -> AreaGraph:
    """Structural deep copy; the copy shares nothing mutable with the original."""
    return AreaGraph(
        areas={
            name: Area(a.way_id, a.name, list(a.polygon), a.tags.copy(), a.area_kind)
            for name, a in graph.areas.items()
        },
        passages=[
            Passage(p.way_id, tuple(p.node_pair), p.from_area, p.to_area, p.tags.copy())
            for p in graph.passages
        ],
        nodes={nid: OsmNode(n.id, n.lat, n.lon) for nid, n in graph.nodes.items()},
        hierarchy_edges=dict(graph.hierarchy_edges),
        warnings=list(graph.warnings),
    )


def adjacency(graph: AreaGraph) -> dict[str, list[str]]:
    """Neighbor map over traversable areas, each list sorted lexicographically.

    Parallel passages between the same pair collapse to a single neighbor
    entry; isolated traversable areas appear with an empty list.
    """
    neighbors: dict[str, set[str]] = {
        name: set() for name, area in graph.areas.items() if area.traversable
    }
    for passage in graph.passages:
        neighbors[passage.from_area].add(passage.to_area)
        neighbors[passage.to_area].add(passage.from_area)
    return {name: sorted(peers) for name, peers in neighbors.items()}


def passage_degree(graph: AreaGraph) -> Counter:
    """Number of passages incident to each area (parallel passages counted)."""
    degree: Counter = Counter()
    for passage in graph.passages:
        degree[passage.from_area] += 1
        degree[passage.to_area] += 1
    return degree


# Room labels look like "1d-201": wing 1, zone d, floor 2, room number 01.
# The trailing two digits are always the room number; any preceding digits
# after the dash are the floor. Leading zeros would break render/parse
# bijectivity, so wing and floor must not start with 0.
_ROOM_LABEL_RE = re.compile(r"([1-9][0-9]*)([a-z])-([1-9][0-9]*)([0-9]{2})\Z")
_ROOM_SCAN_RE = re.compile(r"\b[0-9]+[a-z]-[0-9]{3,}\b")


@dataclass(frozen=True)
class RoomLabel:
    wing: int
    zone: str
    floor: int
    number: str

    def render(self) -> str:
        return f"{self.wing}{self.zone}-{self.floor}{self.number}"


def parse_room_label(name: str) -> RoomLabel | None:
    """Parse a room label, or return None for structure and other names."""
    m = _ROOM_LABEL_RE.fullmatch(name)
    if m is None:
        return None
    wing, zone, floor, number = m.groups()
    return RoomLabel(wing=int(wing), zone=zone, floor=int(floor), number=number)


def find_room_labels(text: str) -> list[str]:
    """All well-formed room labels in text, in order of appearance."""
    return [m for m in _ROOM_SCAN_RE.findall(text) if parse_room_label(m) is not None]
