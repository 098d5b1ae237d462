"""Reading and writing osmAG maps in OSM 0.6 XML.

Serialization is deterministic: nodes by id, ways by id, tags in insertion
order, so identical graphs always produce identical bytes.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

from .errors import IntegrityError, MapParseError
from .model import (
    AREA_TYPE_KEY,
    CONNECTED_KEY,
    CONNECTED_SUFFIX,
    FROM_KEY,
    NAME_KEY,
    TO_KEY,
    TYPE_AREA,
    TYPE_KEY,
    TYPE_PASSAGE,
    TYPE_STRUCTURE,
    UNIQUE_KEYS,
    Area,
    AreaGraph,
    AreaKind,
    OsmNode,
    Passage,
    TagMap,
    build_graph,
)

GENERATOR = "osmag-bench"

_KIND_BY_AREA_TYPE = {
    "room": AreaKind.ROOM,
    "corridor": AreaKind.CORRIDOR,
    "elevator": AreaKind.ELEVATOR,
}


def parse_osm_xml(document: bytes | str) -> AreaGraph:
    """Parse an OSM XML document into an AreaGraph.

    Ways without an osmAG type tag (and relations) are skipped with an
    entry in the returned graph's warnings list; everything else that is
    malformed or inconsistent raises.
    """
    try:
        root = ET.fromstring(document)
    except ET.ParseError as exc:
        line, column = exc.position
        raise MapParseError(
            f"malformed XML at line {line}, column {column}: {exc.msg}",
            line=line,
            column=column,
        ) from exc
    if root.tag != "osm":
        raise MapParseError(f"expected <osm> root element, found <{root.tag}>")

    nodes: list[OsmNode] = []
    areas: list[Area] = []
    passages: list[Passage] = []
    warnings: list[str] = []

    for child in root:
        if child.tag == "node":
            nodes.append(_parse_node(child))
        elif child.tag == "way":
            way_id = _required_int(child, "id", "way")
            refs, tags = _parse_way_members(child, way_id)
            osmag_type = tags.get(TYPE_KEY)
            if osmag_type == TYPE_AREA:
                areas.append(_make_area(way_id, refs, tags, structure=False))
            elif osmag_type == TYPE_STRUCTURE:
                areas.append(_make_area(way_id, refs, tags, structure=True))
            elif osmag_type == TYPE_PASSAGE:
                passages.append(_make_passage(way_id, refs, tags))
            elif osmag_type is None:
                warnings.append(f"way {way_id} has no {TYPE_KEY} tag; ignored")
            else:
                warnings.append(
                    f"way {way_id} has unknown {TYPE_KEY} {osmag_type!r}; ignored"
                )
        elif child.tag == "relation":
            warnings.append(f"relation {child.get('id', '?')} ignored")

    return build_graph(areas, passages, nodes, warnings)


def _required_int(element: ET.Element, attr: str, what: str) -> int:
    raw = element.get(attr)
    if raw is None:
        raise IntegrityError(f"{what} element is missing its {attr!r} attribute")
    try:
        return int(raw)
    except ValueError as exc:
        raise IntegrityError(f"{what} has non-integer {attr!r}: {raw!r}") from exc


def _parse_node(element: ET.Element) -> OsmNode:
    node_id = _required_int(element, "id", "node")
    try:
        lat = float(element.attrib["lat"])
        lon = float(element.attrib["lon"])
    except KeyError as exc:
        raise IntegrityError(f"node {node_id} is missing {exc.args[0]}") from exc
    except ValueError as exc:
        raise IntegrityError(f"node {node_id} has a non-numeric coordinate") from exc
    return OsmNode(id=node_id, lat=lat, lon=lon)


def _parse_way_members(element: ET.Element, way_id: int) -> tuple[list[int], TagMap]:
    refs: list[int] = []
    tags = TagMap()
    for member in element:
        if member.tag == "nd":
            try:
                refs.append(int(member.attrib["ref"]))
            except (KeyError, ValueError) as exc:
                raise IntegrityError(f"way {way_id} has a bad nd ref") from exc
        elif member.tag == "tag":
            try:
                key, value = member.attrib["k"], member.attrib["v"]
            except KeyError as exc:
                raise IntegrityError(
                    f"way {way_id} has a tag without {exc.args[0]!r}"
                ) from exc
            if key in UNIQUE_KEYS and key in tags:
                raise IntegrityError(f"way {way_id} repeats tag key {key!r}")
            tags.add(key, value)
    return refs, tags


def _make_area(way_id: int, refs: list[int], tags: TagMap, structure: bool) -> Area:
    name = tags.get(NAME_KEY) or ""
    if structure:
        kind = AreaKind.STRUCTURE
    else:
        kind = _KIND_BY_AREA_TYPE.get(tags.get(AREA_TYPE_KEY, "room"), AreaKind.ROOM)
    return Area(way_id=way_id, name=name, polygon=refs, tags=tags, area_kind=kind)


def _make_passage(way_id: int, refs: list[int], tags: TagMap) -> Passage:
    from_area = tags.get(FROM_KEY)
    to_area = tags.get(TO_KEY)
    if not from_area or not to_area:
        raise IntegrityError(
            f"passage {way_id} is missing {FROM_KEY!r} or {TO_KEY!r}"
        )
    return Passage(
        way_id=way_id,
        node_pair=tuple(refs),
        from_area=from_area,
        to_area=to_area,
        tags=tags,
    )


def _element_tree(
    graph: AreaGraph, include_nodes: bool, include_passages: bool
) -> ET.Element:
    root = ET.Element("osm", {"version": "0.6", "generator": GENERATOR})
    if include_nodes:
        for node_id in sorted(graph.nodes):
            node = graph.nodes[node_id]
            ET.SubElement(
                root,
                "node",
                {"id": str(node.id), "lat": repr(node.lat), "lon": repr(node.lon)},
            )
    ways: list[tuple[int, list[int], TagMap]] = [
        (a.way_id, a.polygon, a.tags) for a in graph.areas.values()
    ]
    if include_passages:
        ways.extend((p.way_id, list(p.node_pair), p.tags) for p in graph.passages)
    for way_id, refs, tags in sorted(ways, key=lambda w: w[0]):
        way = ET.SubElement(root, "way", {"id": str(way_id)})
        for ref in refs:
            ET.SubElement(way, "nd", {"ref": str(ref)})
        for key, value in tags:
            ET.SubElement(way, "tag", {"k": key, "v": value})
    return root


def serialize_osm_xml(graph: AreaGraph) -> bytes:
    """Full-fidelity serialization; parse(serialize(g)) reproduces g."""
    root = _element_tree(graph, include_nodes=True, include_passages=True)
    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="UTF-8", xml_declaration=True) + b"\n"


def has_connection_tags(graph: AreaGraph) -> bool:
    for area in graph.areas.values():
        for key in area.tags.keys():
            if key == CONNECTED_KEY or key.endswith(CONNECTED_SUFFIX):
                return True
    return False


def render_map_text(graph: AreaGraph) -> str:
    """Map text as injected into prompts.

    Graphs whose areas carry connection tags are variants: their passage
    ways duplicate what the tags already say, so they are omitted to save
    tokens. The coordinate table is omitted whenever it is empty.
    """
    root = _element_tree(
        graph,
        include_nodes=bool(graph.nodes),
        include_passages=not has_connection_tags(graph),
    )
    ET.indent(root, space="  ")
    return ET.tostring(root, encoding="unicode")


def load_map(path: str | Path) -> AreaGraph:
    return parse_osm_xml(Path(path).read_bytes())


def save_map(graph: AreaGraph, path: str | Path) -> None:
    Path(path).write_bytes(serialize_osm_xml(graph))
