"""Weighted dual graphs of rational curves and their blow-up calculus.

A graph is an immutable value: vertices in a fixed (insertion) order and a
multiset of edges stored as ``{(u, v): multiplicity}`` with ``u`` before ``v``
in vertex order.  Every curve is smooth rational; a nodal curve shows up as a
cycle through it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .linalg import SymMatrix

__all__ = [
    "Kind",
    "CurveVertex",
    "WeightedCurveGraph",
    "GraphMorphism",
    "GraphError",
    "intersection_matrix",
    "connected_components",
    "blow_up_edge",
    "blow_down",
    "resolve_node",
    "automorphisms",
    "is_isomorphic",
]

MAX_SEARCH_VERTICES = 64


class Kind(str, Enum):
    CURVE_C = "curveC"
    EXCEPTIONAL = "exceptional"
    CANDIDATE = "candidate"
    WITNESS = "witness"


POOLS = ("T1", "T2", "T3")


class GraphError(ValueError):
    """Malformed graph or an operation outside the modelled calculus."""


@dataclass(frozen=True)
class CurveVertex:
    id: str
    weight: int
    kind: Kind
    label: int | None = None
    pool: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not isinstance(self.weight, int) or isinstance(self.weight, bool):
            raise GraphError(f"vertex {self.id!r}: weight must be an integer")
        if self.kind is Kind.CANDIDATE:
            if not isinstance(self.label, int) or self.label <= 0:
                raise GraphError(f"candidate {self.id!r} needs a positive integer label")
        elif self.label is not None:
            raise GraphError(f"vertex {self.id!r}: only candidates carry labels")
        if self.pool is not None:
            if self.kind is not Kind.CANDIDATE:
                raise GraphError(f"vertex {self.id!r}: only candidates carry a pool tag")
            if self.pool not in POOLS:
                raise GraphError(f"vertex {self.id!r}: unknown pool {self.pool!r}")


def _edge_key(order: Mapping[str, int], u: str, v: str) -> tuple[str, str]:
    return (u, v) if order[u] < order[v] else (v, u)


@dataclass(frozen=True)
class WeightedCurveGraph:
    vertices: tuple[CurveVertex, ...]
    edges: Mapping[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        verts = tuple(self.vertices)
        order: dict[str, int] = {}
        for i, v in enumerate(verts):
            if v.id in order:
                raise GraphError(f"duplicate vertex id {v.id!r}")
            order[v.id] = i
        if sum(v.kind is Kind.CURVE_C for v in verts) > 1:
            raise GraphError("more than one curve-C vertex")
        labels = [v.label for v in verts if v.kind is Kind.CANDIDATE]
        if len(set(labels)) != len(labels):
            raise GraphError("candidate labels are not distinct")
        edges: dict[tuple[str, str], int] = {}
        items = self.edges.items() if isinstance(self.edges, Mapping) else self.edges
        for (u, v), mult in items:
            for x in (u, v):
                if x not in order:
                    raise GraphError(f"edge references unknown vertex {x!r}")
            if u == v:
                raise GraphError(f"self-loop at {u!r}")
            if mult < 0:
                raise GraphError(f"negative multiplicity on edge {u}-{v}")
            if mult:
                key = _edge_key(order, u, v)
                edges[key] = edges.get(key, 0) + mult
        canonical = dict(sorted(edges.items(), key=lambda kv: (order[kv[0][0]], order[kv[0][1]])))
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", canonical)

    @classmethod
    def build(cls, vertices: Iterable[CurveVertex], edges: Iterable[tuple[str, str]]) -> WeightedCurveGraph:
        """Build from a list of vertex pairs; a repeated pair raises the multiplicity."""
        verts = tuple(vertices)
        mults: dict[tuple[str, str], int] = {}
        order = {v.id: i for i, v in enumerate(verts)}
        for u, v in edges:
            if u not in order or v not in order:
                raise GraphError(f"edge {u}-{v} references an unknown vertex")
            if u == v:
                raise GraphError(f"self-loop at {u!r}")
            key = _edge_key(order, u, v)
            mults[key] = mults.get(key, 0) + 1
        return cls(verts, mults)

    def __eq__(self, other):
        if not isinstance(other, WeightedCurveGraph):
            return NotImplemented
        return self.vertices == other.vertices and list(self.edges.items()) == list(other.edges.items())

    def __hash__(self):
        return hash((self.vertices, tuple(self.edges.items())))

    def __len__(self):
        return len(self.vertices)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v.id: i for i, v in enumerate(self.vertices)}

    @cached_property
    def _by_id(self) -> dict[str, CurveVertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def adjacency(self) -> dict[str, dict[str, int]]:
        adj: dict[str, dict[str, int]] = {v.id: {} for v in self.vertices}
        for (u, v), m in self.edges.items():
            adj[u][v] = m
            adj[v][u] = m
        return adj

    def vertex(self, vid: str) -> CurveVertex:
        try:
            return self._by_id[vid]
        except KeyError:
            raise GraphError(f"unknown vertex id {vid!r}") from None

    def ids(self) -> list[str]:
        return [v.id for v in self.vertices]

    def multiplicity(self, u: str, v: str) -> int:
        return self.adjacency[u].get(v, 0)

    def neighbors(self, vid: str) -> dict[str, int]:
        return self.adjacency[vid]

    def degree(self, vid: str) -> int:
        return sum(self.adjacency[vid].values())

    def dot(self, u: str, v: str) -> int:
        """Intersection number of two curves."""
        return self.vertex(u).weight if u == v else self.multiplicity(u, v)

    @property
    def curve_c(self) -> str | None:
        return next((v.id for v in self.vertices if v.kind is Kind.CURVE_C), None)

    def of_kind(self, *kinds: Kind) -> list[str]:
        return [v.id for v in self.vertices if v.kind in kinds]

    @cached_property
    def candidates(self) -> dict[int, str]:
        """Candidate label -> vertex id, ascending by label."""
        found = {v.label: v.id for v in self.vertices if v.kind is Kind.CANDIDATE}
        return dict(sorted(found.items()))

    def without(self, drop: Iterable[str]) -> WeightedCurveGraph:
        drop = set(drop)
        return WeightedCurveGraph(
            tuple(v for v in self.vertices if v.id not in drop),
            {e: m for e, m in self.edges.items() if e[0] not in drop and e[1] not in drop},
        )

    def relabeled(self, mapping: Mapping[str, str]) -> WeightedCurveGraph:
        """Rename vertex ids (vertex order unchanged)."""
        verts = tuple(replace(v, id=mapping.get(v.id, v.id)) for v in self.vertices)
        return WeightedCurveGraph(verts, {(mapping.get(u, u), mapping.get(v, v)): m for (u, v), m in self.edges.items()})

    def fresh_id(self, prefix: str = "n") -> str:
        taken = self._by_id
        i = 1
        while f"{prefix}{i}" in taken:
            i += 1
        return f"{prefix}{i}"

    def next_label(self) -> int:
        return max(self.candidates, default=0) + 1


def _resolve_subset(g: WeightedCurveGraph, subset: Iterable[str] | None) -> list[str]:
    if subset is None:
        return g.ids()
    chosen = set(subset)
    for vid in chosen:
        if vid not in g.index:
            raise GraphError(f"unknown vertex id {vid!r}")
    return [vid for vid in g.ids() if vid in chosen]


def intersection_matrix(g: WeightedCurveGraph, subset: Iterable[str] | None = None) -> SymMatrix:
    """Intersection matrix of the curves in ``subset`` (default: all), in graph order."""
    ids = _resolve_subset(g, subset)
    if not ids and subset is not None:
        raise GraphError("empty vertex subset")
    return SymMatrix(tuple(tuple(g.dot(u, v) for v in ids) for u in ids))


def connected_components(g: WeightedCurveGraph, subset: Iterable[str] | None = None) -> list[list[str]]:
    """Components of the induced subgraph, each in graph order, ordered by first vertex."""
    ids = _resolve_subset(g, subset)
    inside = set(ids)
    seen: set[str] = set()
    comps = []
    for start in ids:
        if start in seen:
            continue
        seen.add(start)
        comp = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in g.adjacency[u]:
                if w in inside and w not in seen:
                    seen.add(w)
                    comp.add(w)
                    queue.append(w)
        comps.append([vid for vid in ids if vid in comp])
    return comps


def blow_up_edge(
    g: WeightedCurveGraph,
    edge: tuple[str, str],
    *,
    new_id: str | None = None,
    kind: Kind = Kind.EXCEPTIONAL,
    label: int | None = None,
) -> WeightedCurveGraph:
    """Blow up one intersection point of the two curves of ``edge``.

    The new (-1)-curve is appended at the end of the vertex order and meets
    each endpoint once; both endpoints lose 1 from their weight.
    """
    u, v = edge
    if g.multiplicity(u, v) < 1:
        raise GraphError(f"no edge between {u!r} and {v!r}")
    new_id = new_id or g.fresh_id()
    if new_id in g.index:
        raise GraphError(f"vertex id {new_id!r} already in use")
    if kind is Kind.CANDIDATE and label is None:
        label = g.next_label()
    verts = [replace(x, weight=x.weight - 1) if x.id in (u, v) else x for x in g.vertices]
    verts.append(CurveVertex(new_id, -1, kind, label))
    edges = dict(g.edges)
    key = _edge_key(g.index, u, v)
    edges[key] -= 1
    edges[(u, new_id)] = 1
    edges[(v, new_id)] = 1
    return WeightedCurveGraph(tuple(verts), edges)


def blow_down(g: WeightedCurveGraph, vid: str) -> WeightedCurveGraph:
    """Contract a (-1)-curve meeting at most two other curves, each transversally once."""
    x = g.vertex(vid)
    if x.weight != -1:
        raise GraphError(f"{vid!r} has weight {x.weight}, only (-1)-curves can be contracted")
    nbrs = g.adjacency[vid]
    if len(nbrs) > 2:
        raise GraphError(f"{vid!r} meets {len(nbrs)} curves; contraction would create a triple point")
    if any(m > 1 for m in nbrs.values()):
        raise GraphError(f"{vid!r} meets a neighbour with multiplicity > 1 (tangency after contraction)")
    verts = tuple(replace(v, weight=v.weight + 1) if v.id in nbrs else v for v in g.vertices if v.id != vid)
    edges = {e: m for e, m in g.edges.items() if vid not in e}
    if len(nbrs) == 2:
        a, b = nbrs
        key = _edge_key(g.index, a, b)
        edges[key] = edges.get(key, 0) + 1
    return WeightedCurveGraph(verts, edges)


def resolve_node(g: WeightedCurveGraph, vid: str, *, new_id: str | None = None) -> WeightedCurveGraph:
    """Blow up an ordinary node of the curve ``vid`` (a curve of arithmetic genus 1 with one node).

    The proper transform is smooth rational with self-intersection lowered by
    4; the new (-1)-curve meets it in two points (an edge of multiplicity 2).
    """
    if vid not in g.index:
        raise GraphError(f"unknown vertex id {vid!r}")
    new_id = new_id or g.fresh_id()
    if new_id in g.index:
        raise GraphError(f"vertex id {new_id!r} already in use")
    verts = tuple(replace(v, weight=v.weight - 4) if v.id == vid else v for v in g.vertices)
    edges = dict(g.edges)
    edges[(vid, new_id)] = 2
    return WeightedCurveGraph(verts + (CurveVertex(new_id, -1, Kind.EXCEPTIONAL),), edges)


@dataclass(frozen=True)
class GraphMorphism:
    """A vertex bijection between two graphs, stored as sorted (source, target) pairs."""

    pairs: tuple[tuple[str, str], ...]

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> GraphMorphism:
        return cls(tuple(sorted(mapping.items())))

    @cached_property
    def mapping(self) -> dict[str, str]:
        return dict(self.pairs)

    def __call__(self, vid: str) -> str:
        return self.mapping[vid]

    def image(self, vids: Iterable[str]) -> set[str]:
        return {self.mapping[v] for v in vids}

    def compose(self, other: GraphMorphism) -> GraphMorphism:
        """``self`` after ``other``."""
        return GraphMorphism.from_mapping({k: self.mapping[v] for k, v in other.mapping.items()})

    def inverse(self) -> GraphMorphism:
        return GraphMorphism.from_mapping({v: k for k, v in self.mapping.items()})

    @property
    def is_identity(self) -> bool:
        return all(k == v for k, v in self.pairs)

    def label_map(self, source: WeightedCurveGraph, target: WeightedCurveGraph) -> dict[int, int]:
        """Induced map on candidate labels."""
        return {
            source.vertex(s).label: target.vertex(t).label
            for s, t in self.pairs
            if source.vertex(s).kind is Kind.CANDIDATE
        }


def _refined_colors(*graphs: WeightedCurveGraph) -> list[dict[str, int]]:
    """Joint colour refinement from (kind, weight); colour names are shared between the graphs."""
    colors = [{v.id: (v.kind.value, v.weight) for v in g.vertices} for g in graphs]
    n_classes = -1
    while True:
        sigs = [
            {
                vid: (col[vid], tuple(sorted((col[w], m) for w, m in g.adjacency[vid].items())))
                for vid in col
            }
            for g, col in zip(graphs, colors)
        ]
        names = {s: i for i, s in enumerate(sorted({s for sig in sigs for s in sig.values()}))}
        colors = [{vid: names[s] for vid, s in sig.items()} for sig in sigs]
        if len(names) == n_classes:
            return colors
        n_classes = len(names)


def _search_order(g: WeightedCurveGraph, colors: Mapping[str, object]) -> list[str]:
    """Breadth-first order starting from the rarest colours so constraints bite early."""
    freq: dict[object, int] = {}
    for c in colors.values():
        freq[c] = freq.get(c, 0) + 1
    remaining = g.ids()
    order: list[str] = []
    placed: set[str] = set()
    while len(order) < len(remaining):
        start = min((v for v in remaining if v not in placed), key=lambda v: (freq[colors[v]], g.index[v]))
        queue = deque([start])
        placed.add(start)
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in sorted(g.adjacency[u], key=lambda w: (freq[colors[w]], g.index[w])):
                if w not in placed:
                    placed.add(w)
                    queue.append(w)
    return order


def _matches(g1: WeightedCurveGraph, g2: WeightedCurveGraph) -> Iterator[dict[str, str]]:
    if len(g1) != len(g2) or len(g1.edges) != len(g2.edges):
        return
    if max(len(g1), len(g2)) > MAX_SEARCH_VERTICES:
        raise GraphError(f"isomorphism search is limited to {MAX_SEARCH_VERTICES} vertices")
    c1, c2 = _refined_colors(g1, g2)
    if sorted(c1.values()) != sorted(c2.values()):
        return
    by_color: dict[object, list[str]] = {}
    for vid in g2.ids():
        by_color.setdefault(c2[vid], []).append(vid)
    order = _search_order(g1, c1)
    mapping: dict[str, str] = {}
    used: set[str] = set()

    def extend(k: int) -> Iterator[dict[str, str]]:
        if k == len(order):
            yield dict(mapping)
            return
        u = order[k]
        for w in by_color[c1[u]]:
            if w in used:
                continue
            ok = True
            for x, y in mapping.items():
                if g1.multiplicity(u, x) != g2.multiplicity(w, y):
                    ok = False
                    break
            if not ok:
                continue
            mapping[u] = w
            used.add(w)
            yield from extend(k + 1)
            del mapping[u]
            used.discard(w)

    yield from extend(0)


def automorphisms(g: WeightedCurveGraph) -> list[GraphMorphism]:
    """All weight/kind/edge-preserving self-bijections; the curve-C vertex is fixed since its kind is unique."""
    found = [GraphMorphism.from_mapping(m) for m in _matches(g, g)]
    ids = g.ids()
    return sorted(found, key=lambda s: (not s.is_identity, [g.index[s(v)] for v in ids]))


def is_isomorphic(g1: WeightedCurveGraph, g2: WeightedCurveGraph) -> GraphMorphism | None:
    """An isomorphism ``g1 -> g2`` if one exists (candidate labels are ignored)."""
    for m in _matches(g1, g2):
        return GraphMorphism.from_mapping(m)
    return None
