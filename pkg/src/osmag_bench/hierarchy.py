"""Parent-tag hierarchy queries: room -> zone -> floor -> wing -> building.

Chains are resolved strictly from parent tags; room label digits are a
generator convention, never an input to resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    AmbiguousOwnerError,
    BrokenChainError,
    HierarchyCycleError,
    PersonNotFoundError,
    UnknownAreaError,
)
from .model import OWNER_KEY, AreaGraph

LEVELS = ("zone", "floor", "wing", "building")
BUILDINGS = ("SIST_1", "SIST_2")


@dataclass(frozen=True)
class HierarchyChain:
    room: str
    zone: str
    floor: str
    wing: str
    building: str


def resolve_chain(graph: AreaGraph, room: str) -> HierarchyChain:
    """Follow parent tags from a room to the root building.

    The chain must be exactly four links deep; a shorter or longer walk
    raises BrokenChainError naming the level where it failed, and a
    repeated element raises HierarchyCycleError.
    """
    if room not in graph.areas:
        raise UnknownAreaError(f"unknown area {room!r}")
    by_way = {a.way_id: a for a in graph.areas.values()}

    names: list[str] = []
    current = graph.areas[room]
    seen = {room}
    while True:
        parent_id = current.parent_id
        if parent_id is None:
            break
        parent = by_way.get(parent_id)
        if parent is None:
            raise BrokenChainError(room, _level_name(len(names)))
        if parent.name in seen:
            raise HierarchyCycleError(
                f"hierarchy cycle through {parent.name!r} while resolving {room!r}"
            )
        seen.add(parent.name)
        names.append(parent.name)
        current = parent

    if len(names) != len(LEVELS):
        raise BrokenChainError(room, _level_name(len(names)))
    return HierarchyChain(room, *names)


def _level_name(depth: int) -> str:
    return LEVELS[min(depth, len(LEVELS) - 1)]


def locate_owner(graph: AreaGraph, person: str) -> str:
    """Building housing the unique room whose owner tag equals person."""
    rooms = [
        name
        for name, area in graph.areas.items()
        if area.traversable and area.tags.get(OWNER_KEY) == person
    ]
    if not rooms:
        raise PersonNotFoundError(f"person not found: {person!r}")
    if len(rooms) > 1:
        raise AmbiguousOwnerError(person, sorted(rooms))
    return resolve_chain(graph, rooms[0]).building
