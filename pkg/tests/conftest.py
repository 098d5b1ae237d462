"""Shared fixtures: hand-built XML documents (independent of the package
serializer) and brute-force graph oracles used to check the fast paths."""

from __future__ import annotations

from collections import deque
from importlib import resources
from xml.sax.saxutils import escape

import pytest

from osmag_bench.datasetgen import load_template
from osmag_bench.osmio import parse_osm_xml


def resource_path(*parts: str):
    return resources.files("osmag_bench") / "resources" / "/".join(parts)


# ---------------------------------------------------------------------------
# Independent XML authoring (string templating, no ElementTree, no package IO)

def _attr(value) -> str:
    return escape(str(value), {'"': "&quot;"})


def node_xml(nid: int, lat: float, lon: float) -> str:
    return f'<node id="{nid}" lat="{lat}" lon="{lon}"/>'


def area_xml(way_id, name, refs=(), kind=None, structure=False, extra_tags=()) -> str:
    lines = [f'<way id="{way_id}">']
    lines += [f'<nd ref="{r}"/>' for r in refs]
    lines.append(f'<tag k="osmAG:type" v="{"structure" if structure else "area"}"/>')
    if kind:
        lines.append(f'<tag k="osmAG:areaType" v="{kind}"/>')
    lines.append(f'<tag k="name" v="{_attr(name)}"/>')
    lines += [f'<tag k="{_attr(k)}" v="{_attr(v)}"/>' for k, v in extra_tags]
    lines.append("</way>")
    return "".join(lines)


def passage_xml(way_id, from_area, to_area, refs=()) -> str:
    lines = [f'<way id="{way_id}">']
    lines += [f'<nd ref="{r}"/>' for r in refs]
    lines.append('<tag k="osmAG:type" v="passage"/>')
    lines.append(f'<tag k="osmAG:from" v="{from_area}"/>')
    lines.append(f'<tag k="osmAG:to" v="{to_area}"/>')
    lines.append("</way>")
    return "".join(lines)


def osm_doc(*elements: str) -> bytes:
    body = "\n".join(elements)
    return f'<?xml version="1.0" encoding="UTF-8"?>\n<osm version="0.6">\n{body}\n</osm>\n'.encode()


def edges_doc(edges, kinds=None, extra_tags=None) -> bytes:
    """Metric-free map from an edge list; areas inferred from endpoints."""
    kinds = kinds or {}
    extra_tags = extra_tags or {}
    names = sorted({n for edge in edges for n in edge})
    parts = [
        area_xml(100 + i, name, kind=kinds.get(name), extra_tags=extra_tags.get(name, ()))
        for i, name in enumerate(names)
    ]
    parts += [passage_xml(500 + j, a, b) for j, (a, b) in enumerate(edges)]
    return osm_doc(*parts)


def edges_graph(edges, kinds=None, extra_tags=None):
    return parse_osm_xml(edges_doc(edges, kinds, extra_tags))


# ---------------------------------------------------------------------------
# Brute-force oracles

def bfs_distances(adj: dict[str, list[str]], source: str) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def all_simple_paths(adj: dict[str, list[str]], start: str, goal: str) -> list[list[str]]:
    """Exhaustive simple-path enumeration by depth-first search."""
    out: list[list[str]] = []
    path = [start]
    seen = {start}

    def walk(u: str) -> None:
        if u == goal:
            out.append(list(path))
            return
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                path.append(v)
                walk(v)
                path.pop()
                seen.remove(v)

    walk(start)
    return out


def shortest_set(adj, start, goal) -> tuple[int | None, list[list[str]]]:
    paths = all_simple_paths(adj, start, goal)
    if not paths:
        return None, []
    best = min(len(p) for p in paths) - 1
    return best, [p for p in paths if len(p) - 1 == best]


# ---------------------------------------------------------------------------
# Shared fixtures

@pytest.fixture(scope="session")
def template_a():
    return load_template("a")


@pytest.fixture(scope="session")
def template_b():
    return load_template("b")


@pytest.fixture(scope="session")
def template_c():
    return load_template("c")


@pytest.fixture(scope="session")
def template_d():
    return load_template("d")


@pytest.fixture(scope="session")
def all_templates(template_a, template_b, template_c, template_d):
    return [template_a, template_b, template_c, template_d]


@pytest.fixture(scope="session")
def campus():
    return parse_osm_xml(resource_path("maps", "campus_floor.osm").read_bytes())


@pytest.fixture(scope="session")
def hier_fixture():
    return parse_osm_xml(resource_path("maps", "hierarchy_example.osm").read_bytes())


@pytest.fixture()
def two_area_graph():
    return edges_graph([("A", "B")])


@pytest.fixture()
def ring4_graph():
    return edges_graph([("A", "B"), ("B", "C"), ("C", "D"), ("D", "A")])
