from __future__ import annotations

import random

import pytest

from logenriques.cases import find_case, list_cases, load_case
from logenriques.classification import verify_case
from logenriques.graph import CurveVertex, Kind, WeightedCurveGraph

ACCEPTANCE_LINES: dict[int, str] = {}


def record_acceptance(number: int, title: str, passed: bool | None, detail: str = "") -> None:
    """Remember one line for the acceptance summary; ``None`` marks report-only criteria."""
    status = "REPORT" if passed is None else ("PASS" if passed else "FAIL")
    line = f"criterion {number}: {status} {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def cases():
    return {cid: load_case(find_case(cid)) for cid in list_cases()}


@pytest.fixture(scope="session")
def verdicts(cases):
    return {cid: verify_case(rec) for cid, rec in cases.items()}


def random_tree_graph(rng: random.Random, n: int, *, min_weight: int = -5, max_weight: int = -2) -> WeightedCurveGraph:
    """A random tree: vertex 0 is C, the rest exceptional curves."""
    verts = [CurveVertex("c", rng.randint(min_weight, max_weight), Kind.CURVE_C)]
    verts += [CurveVertex(f"e{i}", rng.randint(min_weight, max_weight), Kind.EXCEPTIONAL) for i in range(1, n)]
    edges = [(verts[i].id, verts[rng.randrange(i)].id) for i in range(1, n)]
    return WeightedCurveGraph.build(verts, edges)


def random_graph(rng: random.Random, n: int, extra_edges: int = 1) -> WeightedCurveGraph:
    """A random tree plus a few extra edges (cycles and multiplicities allowed)."""
    g = random_tree_graph(rng, n)
    edges = [e for e, m in g.edges.items() for _ in range(m)]
    for _ in range(extra_edges):
        u, v = rng.sample(g.ids(), 2)
        edges.append((u, v))
    return WeightedCurveGraph.build(g.vertices, edges)
