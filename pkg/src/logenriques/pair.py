"""Log-pair calculus on weighted curve graphs.

Conventions: a coefficient ``b`` of a curve is minus its discrepancy, so the
pair is ``K + a*C + sum b_i E_i`` and numerical triviality reads, for every
curve ``v``::

    sum_j coeff_j * (v_j . v) = weight(v) + 2

(because ``K . v = -v^2 - 2`` for a smooth rational curve).  Blowing up a
point where curves with coefficients ``b_i`` and ``b_j`` meet produces a
divisor with coefficient ``b_i + b_j - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping

from .graph import Kind, WeightedCurveGraph, blow_up_edge, connected_components, intersection_matrix
from .linalg import SymMatrix, is_negative_definite, solve_exact

__all__ = [
    "DELTA_THRESHOLD",
    "MAX_BLOWUPS",
    "PairSolution",
    "Verdict",
    "KltReport",
    "PairError",
    "SingularSystemError",
    "InconsistentSystemError",
    "NotNegativeDefiniteError",
    "IterationCapError",
    "solve_pair",
    "klt_check",
    "saturate",
    "completeness_check",
    "proper_transform_self_intersection",
    "compute_delta",
    "toric_blowup_discrepancy",
    "canonical_index",
]

DELTA_THRESHOLD = Fraction(6, 7)
MAX_BLOWUPS = 10_000


class PairError(ValueError):
    pass


class SingularSystemError(PairError):
    """The square part of the pair system has no unique solution."""


class InconsistentSystemError(PairError):
    """A witness equation is violated by the solution of the square part."""


class NotNegativeDefiniteError(PairError):
    pass


class IterationCapError(PairError):
    pass


@dataclass(frozen=True)
class PairSolution:
    """Coefficients of the numerically trivial pair on a graph.

    ``a`` belongs to the curve-C vertex, ``b`` to every exceptional or
    candidate vertex; witness vertices are fixed at 0 and only contribute the
    equations whose residuals are kept in ``residuals``.
    """

    c_id: str
    a: Fraction
    b: Mapping[str, Fraction]
    residuals: tuple[Fraction, ...] = ()

    def coefficient(self, vid: str) -> Fraction:
        if vid == self.c_id:
            return self.a
        return self.b.get(vid, Fraction(0))

    def as_dict(self) -> dict[str, Fraction]:
        return {self.c_id: self.a, **self.b}


def _unknowns(g: WeightedCurveGraph) -> list[str]:
    return g.of_kind(Kind.CURVE_C, Kind.EXCEPTIONAL, Kind.CANDIDATE)


def solve_pair(g: WeightedCurveGraph) -> PairSolution:
    c = g.curve_c
    if c is None:
        raise PairError("graph has no curve-C vertex")
    unknowns = _unknowns(g)
    m = intersection_matrix(g, unknowns)
    rhs = [g.vertex(v).weight + 2 for v in unknowns]
    sol = solve_exact(m, rhs)
    if not sol.unique:
        what = "inconsistent" if not sol.consistent else f"kernel of dimension {len(sol.kernel)}"
        raise SingularSystemError(f"pair system is singular ({what}); check the transcription")
    coeff = dict(zip(unknowns, sol.x))
    residuals = []
    for w in g.of_kind(Kind.WITNESS):
        lhs = sum((coeff[u] * m_ for u, m_ in g.neighbors(w).items() if u in coeff), Fraction(0))
        residuals.append(lhs - (g.vertex(w).weight + 2))
    bad = [w for w, r in zip(g.of_kind(Kind.WITNESS), residuals) if r != 0]
    if bad:
        raise InconsistentSystemError(f"witness equations fail at {bad} (residuals {[str(r) for r in residuals if r]})")
    a = coeff.pop(c)
    return PairSolution(c, a, coeff, tuple(residuals))


class Verdict(str, Enum):
    KLT = "klt"
    LC = "log-canonical-not-klt"
    WORSE = "worse"
    NOT_CONTRACTIBLE = "not-contractible"

    @property
    def severity(self) -> int:
        return list(Verdict).index(self)


@dataclass(frozen=True)
class KltReport:
    negative_definite: bool
    coefficients: Mapping[str, Fraction]
    verdict: Verdict
    components: tuple[tuple[tuple[str, ...], Verdict], ...] = field(default=())

    @property
    def is_klt(self) -> bool:
        return self.verdict is Verdict.KLT

    def failing(self) -> list[tuple[tuple[str, ...], Verdict]]:
        return [(comp, v) for comp, v in self.components if v is not Verdict.KLT]


def _component_verdict(g: WeightedCurveGraph, comp: list[str]) -> tuple[Verdict, dict[str, Fraction]]:
    m = intersection_matrix(g, comp)
    if not is_negative_definite(m):
        return Verdict.NOT_CONTRACTIBLE, {}
    sol = solve_exact(m, [g.vertex(v).weight + 2 for v in comp])
    coeff = dict(zip(comp, sol.x))
    top = max(coeff.values())
    if top < 1:
        return Verdict.KLT, coeff
    if top == 1:
        return Verdict.LC, coeff
    return Verdict.WORSE, coeff


def klt_check(g: WeightedCurveGraph, subset: Iterable[str], *, cache: dict | None = None) -> KltReport:
    """Contract ``subset`` component by component and classify the singularities.

    ``cache`` may be a dict shared across calls on the same graph; it memoises
    component verdicts.
    """
    subset = list(subset)
    if not subset:
        raise PairError("klt_check needs a nonempty subset")
    coefficients: dict[str, Fraction] = {}
    comps = []
    for comp in connected_components(g, subset):
        key = frozenset(comp)
        if cache is not None and key in cache:
            verdict, coeff = cache[key]
        else:
            verdict, coeff = _component_verdict(g, comp)
            if cache is not None:
                cache[key] = (verdict, coeff)
        coefficients.update(coeff)
        comps.append((tuple(comp), verdict))
    worst = max((v for _, v in comps), key=lambda v: v.severity)
    negdef = all(v is not Verdict.NOT_CONTRACTIBLE for _, v in comps)
    return KltReport(negdef, coefficients, worst, tuple(comps))


def _check_solution(g: WeightedCurveGraph, sol: PairSolution) -> None:
    for v in _unknowns(g):
        if v != sol.c_id and v not in sol.b:
            raise PairError(f"solution has no coefficient for {v!r}")


def saturate(g: WeightedCurveGraph, sol: PairSolution) -> tuple[WeightedCurveGraph, PairSolution]:
    """Blow up every intersection point whose coefficients sum to at least 1.

    Each step takes the smallest qualifying edge in vertex order.  New curves
    with coefficient exactly 0 are candidates (discrepancy 0), the others are
    exceptional.
    """
    _check_solution(g, sol)
    if sol.a >= 1 or any(b >= 1 for b in sol.b.values()):
        raise PairError("saturate needs all coefficients < 1")
    b = dict(sol.b)
    coeff = lambda v: sol.a if v == sol.c_id else b.get(v, Fraction(0))  # noqa: E731
    for _ in range(MAX_BLOWUPS):
        edge = next(((u, v) for (u, v) in g.edges if coeff(u) + coeff(v) >= 1), None)
        if edge is None:
            return g, PairSolution(sol.c_id, sol.a, b, sol.residuals)
        new = coeff(edge[0]) + coeff(edge[1]) - 1
        new_id = g.fresh_id("s")
        kind = Kind.CANDIDATE if new == 0 else Kind.EXCEPTIONAL
        g = blow_up_edge(g, edge, new_id=new_id, kind=kind)
        b[new_id] = new
    raise IterationCapError(f"saturation did not terminate within {MAX_BLOWUPS} blow-ups")


def completeness_check(g: WeightedCurveGraph, sol: PairSolution) -> bool:
    """No blow-up can produce another divisor of coefficient >= 0.

    Holds iff every edge has coefficient sum < 1: a blow-up of a point on a
    single curve lowers the coefficient by 1, and ``b_i + b_j - 1`` is below
    both ``b_i`` and ``b_j`` whenever they are < 1.
    """
    return all(sol.coefficient(u) + sol.coefficient(v) < 1 for (u, v) in g.edges)


def _hits_zero(bi: Fraction, bj: Fraction) -> bool:
    """Does repeated blowing up over a point with coefficients (bi, bj) ever give coefficient exactly 0?"""
    stack = [(bi, bj)]
    steps = 0
    while stack:
        x, y = stack.pop()
        new = x + y - 1
        if new < 0:
            continue
        if new == 0:
            return True
        steps += 1
        if steps > MAX_BLOWUPS:
            raise IterationCapError(f"exploration exceeded {MAX_BLOWUPS} blow-ups")
        stack.append((x, new))
        stack.append((new, y))
    return False


def zero_discrepancy_edges(g: WeightedCurveGraph, sol: PairSolution) -> list[tuple[str, str]]:
    """Edges over which some divisor of coefficient exactly 0 (discrepancy 0) lies."""
    return [(u, v) for (u, v) in g.edges if _hits_zero(sol.coefficient(u), sol.coefficient(v))]


def zero_discrepancy_complete(g: WeightedCurveGraph, sol: PairSolution) -> bool:
    """True iff no divisor over the graph has coefficient exactly 0 (discrepancy 0).

    Weaker than :func:`completeness_check`: edges with coefficient sum > 1 are
    allowed as long as the recursive blow-ups they spawn never hit 0.
    """
    return not zero_discrepancy_edges(g, sol)


def proper_transform_self_intersection(g: WeightedCurveGraph, contracted: Iterable[str]) -> Fraction:
    """Self-intersection of the image of C once ``contracted`` is blown down."""
    c = g.curve_c
    if c is None:
        raise PairError("graph has no curve-C vertex")
    contracted = [v for v in g.ids() if v in set(contracted)]
    if c in contracted:
        raise PairError("the curve-C vertex cannot be contracted here")
    c2 = Fraction(g.vertex(c).weight)
    if not contracted:
        return c2
    m = intersection_matrix(g, contracted)
    if not is_negative_definite(m):
        raise NotNegativeDefiniteError("contracted set is not negative definite")
    meet = [g.multiplicity(v, c) for v in contracted]
    pull = solve_exact(m, [-x for x in meet]).x
    return c2 + sum((p * x for p, x in zip(pull, meet)), Fraction(0))


def compute_delta(
    g: WeightedCurveGraph,
    sol: PairSolution,
    contracted: Iterable[str],
    threshold: Fraction = DELTA_THRESHOLD,
) -> int:
    """Number of divisors over the contraction of ``contracted`` with coefficient >= ``threshold``.

    Divisors on the graph are counted directly; infinitely near ones can only
    come from blowing up intersection points of two contracted curves (a
    point on one curve gives coefficient b - 1 < 0), so those are explored
    recursively.
    """
    inside = set(contracted)
    if sol.c_id not in inside:
        raise PairError("contracted set must contain the curve-C vertex")
    count = sum(1 for v in inside if sol.coefficient(v) >= threshold)
    stack = [
        (sol.coefficient(u), sol.coefficient(v))
        for (u, v), m in g.edges.items()
        if u in inside and v in inside
        for _ in range(m)
    ]
    steps = 0
    while stack:
        bi, bj = stack.pop()
        new = bi + bj - 1
        if new < threshold:
            continue
        steps += 1
        if steps > MAX_BLOWUPS:
            raise IterationCapError(f"delta exploration exceeded {MAX_BLOWUPS} blow-ups")
        count += 1
        stack.append((bi, new))
        stack.append((new, bj))
    return count


def toric_blowup_discrepancy(alpha: int, beta: int, a: Fraction) -> Fraction:
    """Discrepancy of the weighted blow-up with weights (alpha, beta) for the pair (C^2, a{xy=0})."""
    if alpha < 1 or beta < 1:
        raise ValueError("weights must be positive integers")
    a = Fraction(a)
    if not 0 <= a < 1:
        raise ValueError("boundary coefficient must lie in [0, 1)")
    return alpha + beta - 1 - (alpha + beta) * a


def canonical_index(a: Fraction) -> int:
    """Denominator of the pair coefficient.

    This is an inference: it reproduces the index reported for every bundled
    case, but is not derived here from the definition n*K ~ 0.
    """
    a = Fraction(a)
    if not 0 < a < 1:
        raise ValueError(f"coefficient {a} is outside (0, 1)")
    return a.denominator
