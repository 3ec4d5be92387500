from __future__ import annotations

import random

import networkx as nx
import pytest
from networkx.algorithms import isomorphism

from conftest import random_graph, random_tree_graph
from logenriques.graph import (
    CurveVertex,
    GraphError,
    GraphMorphism,
    Kind,
    WeightedCurveGraph,
    automorphisms,
    blow_down,
    blow_up_edge,
    connected_components,
    intersection_matrix,
    is_isomorphic,
    resolve_node,
)


def E(vid, w):
    return CurveVertex(vid, w, Kind.EXCEPTIONAL)


def chain(*weights, prefix="e"):
    verts = [E(f"{prefix}{i}", w) for i, w in enumerate(weights)]
    return WeightedCurveGraph.build(verts, [(verts[i].id, verts[i + 1].id) for i in range(len(verts) - 1)])


def to_nx(g: WeightedCurveGraph) -> nx.Graph:
    h = nx.Graph()
    for v in g.vertices:
        h.add_node(v.id, color=(v.kind.value, v.weight))
    for (u, w), m in g.edges.items():
        h.add_edge(u, w, m=m)
    return h


def nx_matcher(g1, g2):
    return isomorphism.GraphMatcher(
        to_nx(g1), to_nx(g2),
        node_match=lambda a, b: a["color"] == b["color"],
        edge_match=lambda a, b: a["m"] == b["m"],
    )


def test_build_validates():
    with pytest.raises(GraphError, match="duplicate vertex id 'a'"):
        WeightedCurveGraph.build([E("a", -2), E("a", -3)], [])
    with pytest.raises(GraphError, match="unknown"):
        WeightedCurveGraph.build([E("a", -2)], [("a", "b")])
    with pytest.raises(GraphError, match="self-loop"):
        WeightedCurveGraph.build([E("a", -2)], [("a", "a")])
    with pytest.raises(GraphError):
        CurveVertex("k", -1, Kind.CANDIDATE)  # no label
    with pytest.raises(GraphError):
        CurveVertex("e", -2, Kind.EXCEPTIONAL, pool="T1")
    with pytest.raises(GraphError):
        WeightedCurveGraph.build([CurveVertex("c", 1, Kind.CURVE_C), CurveVertex("d", 1, Kind.CURVE_C)], [])


def test_repeated_pair_is_multiplicity():
    g = WeightedCurveGraph.build([E("a", -2), E("b", -2)], [("a", "b"), ("b", "a")])
    assert g.multiplicity("a", "b") == 2
    assert intersection_matrix(g).rows == ((-2, 2), (2, -2))


def test_edges_are_canonical():
    g1 = WeightedCurveGraph.build([E("a", -2), E("b", -3)], [("b", "a")])
    g2 = WeightedCurveGraph.build([E("a", -2), E("b", -3)], [("a", "b")])
    assert g1 == g2 and hash(g1) == hash(g2)


def test_components_and_subsets():
    g = WeightedCurveGraph.build([E("a", -2), E("b", -2), E("c", -2)], [("a", "b")])
    assert connected_components(g) == [["a", "b"], ["c"]]
    assert connected_components(g, ["c", "a"]) == [["a"], ["c"]]
    with pytest.raises(GraphError):
        intersection_matrix(g, [])


def test_blow_up_then_down_round_trip():
    g = chain(-2, -3)
    up = blow_up_edge(g, ("e0", "e1"), new_id="x")
    assert up.vertex("x").weight == -1
    assert up.vertex("e0").weight == -3 and up.vertex("e1").weight == -4
    assert up.multiplicity("e0", "e1") == 0
    assert blow_down(up, "x") == g


def test_blow_down_guards():
    g = WeightedCurveGraph.build([E("x", -1), E("a", -2), E("b", -2), E("c", -2)], [("x", "a"), ("x", "b"), ("x", "c")])
    with pytest.raises(GraphError, match="triple point"):
        blow_down(g, "x")
    with pytest.raises(GraphError, match="only"):
        blow_down(g, "a")
    tangent = WeightedCurveGraph.build([E("x", -1), E("a", -2)], [("x", "a"), ("x", "a")])
    with pytest.raises(GraphError, match="multiplicity"):
        blow_down(tangent, "x")


def test_resolve_node():
    g = WeightedCurveGraph.build([CurveVertex("c", 5, Kind.CURVE_C), E("d", -2)], [("c", "d")])
    r = resolve_node(g, "c", new_id="n")
    assert r.vertex("c").weight == 1
    assert r.multiplicity("c", "n") == 2 and r.vertex("n").weight == -1


def test_candidate_blow_up_gets_next_label():
    g = WeightedCurveGraph.build([E("a", -2), CurveVertex("k", -1, Kind.CANDIDATE, 4)], [("a", "k")])
    up = blow_up_edge(g, ("a", "k"), new_id="n", kind=Kind.CANDIDATE)
    assert up.vertex("n").label == 5
    assert up.candidates == {4: "k", 5: "n"}


def test_palindrome_has_two_automorphisms():
    auts = automorphisms(chain(-2, -3, -2))
    assert len(auts) == 2
    assert auts[0].is_identity
    assert auts[1].mapping == {"e0": "e2", "e1": "e1", "e2": "e0"}


def test_morphism_algebra():
    s = GraphMorphism.from_mapping({"a": "b", "b": "a", "c": "c"})
    assert s.compose(s).is_identity
    assert s.inverse() == s
    assert s.image(["a", "c"]) == {"b", "c"}


def test_isomorphism_ignores_ids_and_order():
    g1 = chain(-2, -3, -4)
    g2 = WeightedCurveGraph.build([E("z", -4), E("y", -3), E("x", -2)], [("z", "y"), ("y", "x")])
    m = is_isomorphic(g1, g2)
    assert m is not None and m("e0") == "x"
    assert is_isomorphic(g1, chain(-2, -4, -3)) is None


def test_case_automorphism_counts_match_networkx(cases):
    for rec in cases.values():
        g = rec.figure_graph
        ours = automorphisms(g)
        theirs = list(nx_matcher(g, g).isomorphisms_iter())
        assert len(ours) == len(theirs), rec.case_id
        assert {s.pairs for s in ours} == {tuple(sorted(m.items())) for m in theirs}


def test_automorphisms_fix_curve_c(cases):
    for rec in cases.values():
        g = rec.figure_graph
        assert all(s(g.curve_c) == g.curve_c for s in automorphisms(g))


def test_random_isomorphism_agrees_with_networkx():
    rng = random.Random(7)
    for _ in range(150):
        g = random_graph(rng, rng.randint(2, 8), extra_edges=rng.randint(0, 2))
        perm = g.ids()
        rng.shuffle(perm)
        shuffled = WeightedCurveGraph(tuple(g.vertex(v) for v in perm), g.edges).relabeled({v: f"x{v}" for v in g.ids()})
        assert is_isomorphic(g, shuffled) is not None
        h = random_graph(rng, len(g), extra_edges=rng.randint(0, 2))
        assert (is_isomorphic(g, h) is not None) == nx_matcher(g, h).is_isomorphic()
        assert len(automorphisms(g)) == sum(1 for _ in nx_matcher(g, g).isomorphisms_iter())


def test_every_case_edge_round_trips(cases):
    for rec in cases.values():
        g = rec.figure_graph
        for edge in g.edges:
            up = blow_up_edge(g, edge, new_id="new")
            assert blow_down(up, "new") == g


def test_random_tree_round_trip():
    rng = random.Random(3)
    for _ in range(50):
        g = random_tree_graph(rng, rng.randint(2, 9))
        edge = rng.choice(list(g.edges))
        assert blow_down(blow_up_edge(g, edge, new_id="n"), "n") == g
