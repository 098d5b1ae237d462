#!/usr/bin/env python3
"""Author the shipped layout templates and fixture maps.

Areas are axis-aligned rectangles on a small grid; each door allocates two
nodes on the shared wall segment which are inserted into both polygons and
referenced by the passage way. The XML is written directly (not through
the package serializer) so the shipped files exercise the parser as
external input.

Run from the repo root:  python scripts/make_templates.py
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from pathlib import Path

BASE_LAT = 10.0
BASE_LON = 20.0
CELL = 0.0001
OUT = Path(__file__).resolve().parents[1] / "src" / "osmag_bench" / "resources"


class Rect:
    def __init__(self, name: str, kind: str, x0: float, y0: float, x1: float, y1: float):
        self.name = name
        self.kind = kind  # room | corridor | elevator
        self.x0, self.y0, self.x1, self.y1 = x0, y0, x1, y1
        self.corner_ids: list[int] = []
        self.door_points: list[tuple[float, float, int]] = []  # (x, y, node id)

    def ring(self) -> list[int]:
        """Polygon node ids, counter-clockwise, closed."""
        c0, c1, c2, c3 = self.corner_ids

        def on_bottom(p):
            return p[1] == self.y0 and self.x0 < p[0] < self.x1

        def on_right(p):
            return p[0] == self.x1 and self.y0 < p[1] < self.y1

        def on_top(p):
            return p[1] == self.y1 and self.x0 < p[0] < self.x1

        def on_left(p):
            return p[0] == self.x0 and self.y0 < p[1] < self.y1

        bottom = sorted((p for p in self.door_points if on_bottom(p)), key=lambda p: p[0])
        right = sorted((p for p in self.door_points if on_right(p)), key=lambda p: p[1])
        top = sorted((p for p in self.door_points if on_top(p)), key=lambda p: -p[0])
        left = sorted((p for p in self.door_points if on_left(p)), key=lambda p: -p[1])

        ring = [c0]
        ring += [p[2] for p in bottom]
        ring.append(c1)
        ring += [p[2] for p in right]
        ring.append(c2)
        ring += [p[2] for p in top]
        ring.append(c3)
        ring += [p[2] for p in left]
        ring.append(c0)
        return ring


class MapBuilder:
    def __init__(self):
        self.nodes: list[tuple[int, float, float]] = []  # (id, x, y)
        self.areas: list[Rect] = []
        self.doors: list[tuple[int, int, str, str]] = []  # (node a, node b, from, to)
        self._next_node = 1000

    def _node(self, x: float, y: float) -> int:
        nid = self._next_node
        self._next_node += 1
        self.nodes.append((nid, x, y))
        return nid

    def area(self, name: str, kind: str, x0, y0, x1, y1) -> Rect:
        rect = Rect(name, kind, x0, y0, x1, y1)
        rect.corner_ids = [
            self._node(x0, y0),
            self._node(x1, y0),
            self._node(x1, y1),
            self._node(x0, y1),
        ]
        self.areas.append(rect)
        return rect

    def door(self, a: Rect, b: Rect) -> None:
        """Two shared nodes on the wall segment common to a and b."""
        if a.x1 == b.x0 or b.x1 == a.x0:
            x = a.x1 if a.x1 == b.x0 else b.x1
            lo, hi = max(a.y0, b.y0), min(a.y1, b.y1)
            assert hi - lo > 0, f"no vertical overlap between {a.name} and {b.name}"
            mid = (lo + hi) / 2
            points = [(x, mid - 0.2), (x, mid + 0.2)]
        elif a.y1 == b.y0 or b.y1 == a.y0:
            y = a.y1 if a.y1 == b.y0 else b.y1
            lo, hi = max(a.x0, b.x0), min(a.x1, b.x1)
            assert hi - lo > 0, f"no horizontal overlap between {a.name} and {b.name}"
            mid = (lo + hi) / 2
            points = [(mid - 0.2, y), (mid + 0.2, y)]
        else:
            raise AssertionError(f"{a.name} and {b.name} do not touch")
        ids = [self._node(px, py) for px, py in points]
        for rect in (a, b):
            for (px, py), nid in zip(points, ids):
                rect.door_points.append((px, py, nid))
        self.doors.append((ids[0], ids[1], a.name, b.name))

    def write(self, path: Path) -> tuple[int, int]:
        root = ET.Element("osm", {"version": "0.6", "generator": "make_templates"})
        for nid, x, y in self.nodes:
            ET.SubElement(
                root,
                "node",
                {
                    "id": str(nid),
                    "lat": repr(BASE_LAT + y * CELL),
                    "lon": repr(BASE_LON + x * CELL),
                },
            )
        for i, rect in enumerate(self.areas):
            way = ET.SubElement(root, "way", {"id": str(100 + i)})
            for ref in rect.ring():
                ET.SubElement(way, "nd", {"ref": str(ref)})
            ET.SubElement(way, "tag", {"k": "osmAG:type", "v": "area"})
            if rect.kind != "room":
                ET.SubElement(way, "tag", {"k": "osmAG:areaType", "v": rect.kind})
            ET.SubElement(way, "tag", {"k": "name", "v": rect.name})
        for j, (na, nb, from_area, to_area) in enumerate(self.doors):
            way = ET.SubElement(root, "way", {"id": str(200 + j)})
            ET.SubElement(way, "nd", {"ref": str(na)})
            ET.SubElement(way, "nd", {"ref": str(nb)})
            ET.SubElement(way, "tag", {"k": "osmAG:type", "v": "passage"})
            ET.SubElement(way, "tag", {"k": "osmAG:from", "v": from_area})
            ET.SubElement(way, "tag", {"k": "osmAG:to", "v": to_area})
        ET.indent(root, space="  ")
        path.write_bytes(ET.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n")
        return len(self.areas), len(self.doors)


def template_a() -> MapBuilder:
    """Corridor with five rooms on each side, plus one room-to-room door."""
    b = MapBuilder()
    corridor = b.area("1a-111", "corridor", 0, 1, 5, 2)
    above = [b.area(f"1a-10{i + 1}", "room", i, 2, i + 1, 3) for i in range(5)]
    below = [b.area(f"1a-1{i + 6:02d}", "room", i, 0, i + 1, 1) for i in range(5)]
    for room in above + below:
        b.door(room, corridor)
    b.door(above[0], above[1])
    return b


def template_b() -> MapBuilder:
    """Eleven areas in one closed ring (the first is double-width)."""
    b = MapBuilder()
    rects = [
        (0, 2, 2, 3),
        (2, 2, 3, 3),
        (3, 2, 4, 3),
        (4, 2, 5, 3),
        (4, 1, 5, 2),
        (4, 0, 5, 1),
        (3, 0, 4, 1),
        (2, 0, 3, 1),
        (1, 0, 2, 1),
        (0, 0, 1, 1),
        (0, 1, 1, 2),
    ]
    rooms = [
        b.area(f"1b-1{i + 1:02d}", "room", *rect) for i, rect in enumerate(rects)
    ]
    for i, room in enumerate(rooms):
        b.door(room, rooms[(i + 1) % len(rooms)])
    return b


def template_c() -> MapBuilder:
    """Two parallel corridors joined by two cross corridors; rooms hang off
    the outside and sit between the junctions."""
    b = MapBuilder()
    h1 = b.area("1c-110", "corridor", 0, 2, 5, 3)
    h2 = b.area("1c-111", "corridor", 0, 0, 5, 1)
    v1 = b.area("1c-112", "corridor", 0, 1, 1, 2)
    v2 = b.area("1c-113", "corridor", 4, 1, 5, 2)
    b.door(h1, v1)
    b.door(v1, h2)
    b.door(h2, v2)
    b.door(v2, h1)
    tops = [b.area(f"1c-10{i + 1}", "room", i + 1, 3, i + 2, 4) for i in range(3)]
    bottoms = [b.area(f"1c-10{i + 4}", "room", i + 1, -1, i + 2, 0) for i in range(3)]
    w1 = b.area("1c-107", "room", -1, 1, 0, 2)
    w2 = b.area("1c-108", "room", 1, 1, 2, 2)
    x1 = b.area("1c-109", "room", 3, 1, 4, 2)
    for room in tops:
        b.door(room, h1)
    for room in bottoms:
        b.door(room, h2)
    b.door(w1, v1)
    b.door(w2, v1)
    b.door(x1, v2)
    return b


def template_d() -> MapBuilder:
    """Held-out layout: corridor loop with a middle shortcut corridor."""
    b = MapBuilder()
    c1 = b.area("1d-107", "corridor", 0, 2, 4, 3)
    c2 = b.area("1d-108", "corridor", 3, 0, 4, 2)
    c3 = b.area("1d-109", "corridor", 0, 0, 3, 1)
    c4 = b.area("1d-110", "corridor", 0, 1, 1, 2)
    c5 = b.area("1d-111", "corridor", 1, 1, 3, 2)
    b.door(c1, c2)
    b.door(c2, c3)
    b.door(c3, c4)
    b.door(c4, c1)
    b.door(c4, c5)
    b.door(c5, c2)
    rooms = [
        (b.area("1d-101", "room", 0, 3, 1, 4), c1),
        (b.area("1d-102", "room", 2, 3, 3, 4), c1),
        (b.area("1d-103", "room", 0, -1, 1, 0), c3),
        (b.area("1d-104", "room", 2, -1, 3, 0), c3),
        (b.area("1d-105", "room", 4, 0, 5, 1), c2),
        (b.area("1d-106", "room", -1, 1, 0, 2), c4),
    ]
    for room, corridor in rooms:
        b.door(room, corridor)
    return b


def campus_floor() -> MapBuilder:
    """Floor used by the replanning scenario: the short route crosses a
    two-way elevator, the detour goes the long way around."""
    b = MapBuilder()
    c1 = b.area("corridor_1", "corridor", 0, 2, 5, 3)
    c2 = b.area("corridor_2", "corridor", 0, 1, 1, 2)
    c3 = b.area("corridor_3", "corridor", 0, 0, 1, 1)
    c4 = b.area("corridor_4", "corridor", 1, 0, 5, 1)
    lift1 = b.area("elevator_1", "elevator", 2, 1, 3, 2)
    lift2 = b.area("elevator_2", "elevator", 5, 0, 6, 1)
    b.door(c1, c2)
    b.door(c2, c3)
    b.door(c3, c4)
    b.door(c1, lift1)
    b.door(lift1, c4)
    b.door(c4, lift2)
    rooms = [
        (b.area("1e-101", "room", 0, 3, 1, 4), c1),
        (b.area("1e-102", "room", 1, 3, 2, 4), c1),
        (b.area("1e-103", "room", 3, 3, 4, 4), c1),
        (b.area("1e-104", "room", 1, -1, 2, 0), c4),
        (b.area("1e-105", "room", 2, -1, 3, 0), c4),
        (b.area("1e-106", "room", -1, 0, 0, 1), c3),
        (b.area("1e-107", "room", 4, -1, 5, 0), c4),
    ]
    for room, corridor in rooms:
        b.door(room, corridor)
    return b


HIERARCHY_FIXTURE = """<?xml version='1.0' encoding='UTF-8'?>
<osm version="0.6" generator="make_templates">
  <way id="1">
    <tag k="osmAG:type" v="area"/>
    <tag k="name" v="3b-701"/>
    <tag k="owner" v="Liam Turner"/>
    <tag k="parent" v="11"/>
  </way>
  <way id="2">
    <tag k="osmAG:type" v="area"/>
    <tag k="name" v="3b-702"/>
    <tag k="owner" v="Sofia Rossi"/>
    <tag k="parent" v="11"/>
  </way>
  <way id="3">
    <tag k="osmAG:type" v="area"/>
    <tag k="name" v="3b-703"/>
    <tag k="owner" v="Noah Kim"/>
    <tag k="parent" v="11"/>
  </way>
  <way id="4">
    <tag k="osmAG:type" v="area"/>
    <tag k="name" v="5d-916"/>
    <tag k="owner" v="Mia Chen"/>
    <tag k="parent" v="15"/>
  </way>
  <way id="5">
    <tag k="osmAG:type" v="area"/>
    <tag k="name" v="5d-912"/>
    <tag k="owner" v="Omar Haddad"/>
    <tag k="parent" v="15"/>
  </way>
  <way id="6">
    <tag k="osmAG:type" v="area"/>
    <tag k="name" v="5d-908"/>
    <tag k="owner" v="Eva Novak"/>
    <tag k="parent" v="15"/>
  </way>
  <way id="11">
    <tag k="osmAG:type" v="structure"/>
    <tag k="name" v="b_zone"/>
    <tag k="parent" v="12"/>
  </way>
  <way id="12">
    <tag k="osmAG:type" v="structure"/>
    <tag k="name" v="7_floor"/>
    <tag k="parent" v="13"/>
  </way>
  <way id="13">
    <tag k="osmAG:type" v="structure"/>
    <tag k="name" v="3_wing"/>
    <tag k="parent" v="14"/>
  </way>
  <way id="14">
    <tag k="osmAG:type" v="structure"/>
    <tag k="name" v="SIST_2"/>
  </way>
  <way id="15">
    <tag k="osmAG:type" v="structure"/>
    <tag k="name" v="d_zone"/>
    <tag k="parent" v="16"/>
  </way>
  <way id="16">
    <tag k="osmAG:type" v="structure"/>
    <tag k="name" v="9_floor"/>
    <tag k="parent" v="17"/>
  </way>
  <way id="17">
    <tag k="osmAG:type" v="structure"/>
    <tag k="name" v="5_wing"/>
    <tag k="parent" v="18"/>
  </way>
  <way id="18">
    <tag k="osmAG:type" v="structure"/>
    <tag k="name" v="SIST_1"/>
  </way>
  <way id="21">
    <tag k="osmAG:type" v="passage"/>
    <tag k="osmAG:from" v="3b-701"/>
    <tag k="osmAG:to" v="3b-702"/>
  </way>
  <way id="22">
    <tag k="osmAG:type" v="passage"/>
    <tag k="osmAG:from" v="3b-702"/>
    <tag k="osmAG:to" v="3b-703"/>
  </way>
  <way id="23">
    <tag k="osmAG:type" v="passage"/>
    <tag k="osmAG:from" v="5d-916"/>
    <tag k="osmAG:to" v="5d-912"/>
  </way>
  <way id="24">
    <tag k="osmAG:type" v="passage"/>
    <tag k="osmAG:from" v="5d-912"/>
    <tag k="osmAG:to" v="5d-908"/>
  </way>
</osm>
"""

DESCRIPTIONS = {
    "a": "Corridor with five rooms on each side and one direct room-to-room door.",
    "b": "Eleven areas joined in a single closed ring.",
    "c": "Two parallel corridors joined by two cross corridors; rooms outside and between the junctions.",
    "d": "Corridor loop with a middle shortcut; reserved for held-out testing.",
}


def main() -> None:
    (OUT / "templates").mkdir(parents=True, exist_ok=True)
    (OUT / "maps").mkdir(parents=True, exist_ok=True)

    manifest = {}
    for tid, build in (("a", template_a), ("b", template_b), ("c", template_c), ("d", template_d)):
        areas, passages = build().write(OUT / "templates" / f"template_{tid}.osm")
        manifest[tid] = {
            "areas": areas,
            "passages": passages,
            "description": DESCRIPTIONS[tid],
            "test_only": tid == "d",
        }
        print(f"template_{tid}.osm: {areas} areas, {passages} passages")
    (OUT / "templates" / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )

    areas, passages = campus_floor().write(OUT / "maps" / "campus_floor.osm")
    print(f"campus_floor.osm: {areas} areas, {passages} passages")
    (OUT / "maps" / "hierarchy_example.osm").write_text(HIERARCHY_FIXTURE, encoding="utf-8")
    print("hierarchy_example.osm written")


if __name__ == "__main__":
    main()
