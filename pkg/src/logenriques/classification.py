"""Brute-force classification of extraction sets and comparison with the stated conditions.

An extraction set ``t`` is a set of candidate labels.  Every vertex of the
figure graph that is not a chosen candidate is contracted; ``t`` is
admissible when each connected component of what gets contracted is a klt
configuration.  The candidates are split into three pools T1, T2, T3 by the
point of the base surface they lie over, and each case comes with a
condition on the pools that is claimed to describe exactly the admissible
sets up to graph symmetry.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .formula import Expr, FormulaError, parse_formula
from .graph import POOLS, Kind, WeightedCurveGraph, automorphisms, connected_components
from .pair import (
    KltReport,
    Verdict,
    canonical_index,
    compute_delta,
    klt_check,
    proper_transform_self_intersection,
    solve_pair,
    completeness_check,
    zero_discrepancy_complete,
)

if TYPE_CHECKING:
    from .cases import CaseRecord

__all__ = [
    "CandidateSet",
    "Clause",
    "TheoremFormula",
    "Admissibility",
    "CaseVerdict",
    "Summary",
    "PoolMismatchError",
    "EXPECTED_INDEX_SET",
    "K3_RANK_BOUND",
    "candidate_pools",
    "is_admissible",
    "all_candidate_sets",
    "enumerate_admissible",
    "label_permutations",
    "eval_formula",
    "verify_case",
    "invariants_summary",
]

log = logging.getLogger(__name__)

EXPECTED_INDEX_SET = frozenset({7, 8, 9, 10, 11, 13, 17})
# rank of the lattice spanned by exceptional curves on a K3 cover is at most 19
K3_RANK_BOUND = 19


class PoolMismatchError(ValueError):
    """Pool tags stored with a case disagree with the pools read off the graph."""


@dataclass(frozen=True, order=True)
class CandidateSet:
    """A set of candidate labels together with its split into the pools T1, T2, T3."""

    members: tuple[int, ...]
    T1: frozenset[int] = field(default=frozenset(), compare=False)
    T2: frozenset[int] = field(default=frozenset(), compare=False)
    T3: frozenset[int] = field(default=frozenset(), compare=False)

    def __post_init__(self):
        members = tuple(sorted(set(self.members)))
        object.__setattr__(self, "members", members)
        parts = (self.T1, self.T2, self.T3)
        union = frozenset().union(*parts)
        if sum(map(len, parts)) != len(union) or union != set(members):
            raise ValueError(f"pools {parts} do not partition {set(members)}")

    @classmethod
    def of(cls, members: Iterable[int], pool_of: Mapping[int, str]) -> CandidateSet:
        members = set(members)
        unknown = members - set(pool_of)
        if unknown:
            raise ValueError(f"labels {sorted(unknown)} are not candidates of this case")
        by_pool = {p: frozenset(x for x in members if pool_of[x] == p) for p in POOLS}
        return cls(tuple(members), **by_pool)

    @property
    def pools(self) -> dict[str, frozenset[int]]:
        return {"T1": self.T1, "T2": self.T2, "T3": self.T3}

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, label: object) -> bool:
        return label in self.members

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.members)) + "}"


@dataclass(frozen=True)
class Clause:
    """``guard -> body``; a clause without a guard always matches."""

    body: Expr
    guard: Expr | None = None


@dataclass(frozen=True)
class TheoremFormula:
    """Guarded clauses evaluated in order (first matching guard wins) plus an optional global conjunct."""

    clauses: tuple[Clause, ...]
    global_: Expr | None = None

    @classmethod
    def from_dict(cls, data: Mapping) -> TheoremFormula:
        if not isinstance(data, Mapping):
            raise FormulaError("formula must be an object")
        extra = set(data) - {"global", "clauses"}
        if extra:
            raise FormulaError(f"unknown formula fields {sorted(extra)}")
        raw = data.get("clauses")
        if not isinstance(raw, list) or not raw:
            raise FormulaError("formula needs a nonempty list of clauses")
        clauses = []
        for i, c in enumerate(raw):
            if not isinstance(c, Mapping) or "body" not in c or set(c) - {"guard", "body"}:
                raise FormulaError(f"clause {i} must be an object with 'body' and optional 'guard'")
            guard = parse_formula(c["guard"]) if c.get("guard") is not None else None
            clauses.append(Clause(parse_formula(c["body"]), guard))
        glob = parse_formula(data["global"]) if data.get("global") is not None else None
        return cls(tuple(clauses), glob)

    def to_dict(self) -> dict:
        out: dict = {}
        if self.global_ is not None:
            out["global"] = self.global_.source
        out["clauses"] = [
            ({"guard": c.guard.source} if c.guard is not None else {}) | {"body": c.body.source} for c in self.clauses
        ]
        return out

    def exprs(self) -> list[Expr]:
        out = [self.global_] if self.global_ is not None else []
        for c in self.clauses:
            out.extend(x for x in (c.guard, c.body) if x is not None)
        return out

    def check_references(self, pool_of: Mapping[int, str]) -> None:
        """Every label named must be a candidate; every pool named must be one of T1..T3."""
        for e in self.exprs():
            missing = e.labels_used() - set(pool_of)
            if missing:
                raise FormulaError(f"condition {e.source!r} names labels {sorted(missing)} that are not candidates")

    def decide(self, pools: Mapping[str, frozenset]) -> tuple[bool, int | None]:
        """(accepted, index of the matching clause or None when no guard matches)."""
        for i, clause in enumerate(self.clauses):
            if clause.guard is None or clause.guard(pools):
                ok = clause.body(pools) and (self.global_ is None or self.global_(pools))
                return ok, i
        return False, None


def candidate_pools(g: WeightedCurveGraph, genus_class: str) -> dict[int, str]:
    """Split the candidate labels into T1/T2/T3 from the shape of the graph.

    Removing C leaves components.  A component meeting C at least twice
    holds the node cycle of C (T2).  A component meeting C once is T1 in the
    ``ell`` class; in the ``rational`` class the three branches at C are
    ordered by the pool tags stored on their candidates, or by smallest label
    when there are no tags.  Components away from C are T3.  Stored tags must
    agree with the result.
    """
    if genus_class not in ("ell", "rational"):
        raise ValueError(f"unknown genus class {genus_class!r}")
    c = g.curve_c
    if c is None:
        raise ValueError("graph has no curve-C vertex")
    rest = [v for v in g.ids() if v != c and g.vertex(v).kind is not Kind.WITNESS]
    result: dict[int, str] = {}
    branches: list[list[str]] = []
    for comp in connected_components(g, rest):
        cands = [v for v in comp if g.vertex(v).kind is Kind.CANDIDATE]
        attached = sum(g.multiplicity(v, c) for v in comp)
        if attached >= 2:
            pool = "T2"
        elif attached == 0:
            pool = "T3"
        elif genus_class == "ell":
            pool = "T1"
        else:
            branches.append(cands)
            continue
        for v in cands:
            result[g.vertex(v).label] = pool
    if branches:
        result.update(_rational_branch_pools(g, branches))
    for v in g.of_kind(Kind.CANDIDATE):
        vert = g.vertex(v)
        if vert.pool is not None and vert.pool != result[vert.label]:
            raise PoolMismatchError(
                f"candidate {vert.label} ({v}) is tagged {vert.pool} but the graph puts it in {result[vert.label]}"
            )
    return dict(sorted(result.items()))


def _rational_branch_pools(g: WeightedCurveGraph, branches: list[list[str]]) -> dict[int, str]:
    tagged = [{g.vertex(v).pool for v in b} - {None} for b in branches]
    out: dict[int, str] = {}
    if any(tagged):
        used: dict[str, int] = {}
        for i, (b, tags) in enumerate(zip(branches, tagged)):
            if len(tags) > 1:
                raise PoolMismatchError(f"one branch at C carries several pool tags {sorted(tags)}")
            if not tags:
                if b:
                    raise PoolMismatchError(f"branch holding {b} has untagged candidates")
                continue
            (pool,) = tags
            if pool in used:
                raise PoolMismatchError(f"two branches at C are both tagged {pool}")
            used[pool] = i
            for v in b:
                out[g.vertex(v).label] = pool
        return out
    ordered = sorted((b for b in branches if b), key=lambda b: min(g.vertex(v).label for v in b))
    if len(ordered) > len(POOLS):
        raise PoolMismatchError(f"{len(ordered)} branches at C hold candidates; at most three pools exist")
    for pool, b in zip(POOLS, ordered):
        for v in b:
            out[g.vertex(v).label] = pool
    return out


@dataclass(frozen=True)
class Admissibility:
    """Outcome of the klt test for one extraction set; truthy iff admissible."""

    ok: bool
    failing: tuple[tuple[tuple[str, ...], Verdict], ...] = ()
    report: KltReport | None = None

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "admissible"
        return "; ".join(f"component {list(comp)} is {v.value}" for comp, v in self.failing)


def _contracted(g: WeightedCurveGraph, members: Iterable[int]) -> list[str]:
    chosen = set()
    for lab in members:
        if lab not in g.candidates:
            raise ValueError(f"label {lab} is not a candidate of this graph")
        chosen.add(g.candidates[lab])
    return [v for v in g.ids() if v not in chosen and g.vertex(v).kind is not Kind.WITNESS]


def is_admissible(g: WeightedCurveGraph, t: CandidateSet | Iterable[int], *, cache: dict | None = None) -> Admissibility:
    """Contract everything except the chosen candidates and require klt on every component."""
    members = t.members if isinstance(t, CandidateSet) else tuple(t)
    report = klt_check(g, _contracted(g, members), cache=cache)
    return Admissibility(report.is_klt, tuple(report.failing()), report)


def all_candidate_sets(labels: Sequence[int], pool_of: Mapping[int, str]) -> list[CandidateSet]:
    """Every subset, in binary counting order over the labels sorted ascending (bit k = k-th label)."""
    labels = sorted(labels)
    out = []
    for mask in range(1 << len(labels)):
        out.append(CandidateSet.of((lab for k, lab in enumerate(labels) if mask >> k & 1), pool_of))
    return out


def enumerate_admissible(case: CaseRecord, *, cache: dict | None = None) -> list[CandidateSet]:
    g = case.figure_graph
    pool_of = candidate_pools(g, case.genus_class)
    cache = {} if cache is None else cache
    return [t for t in all_candidate_sets(list(pool_of), pool_of) if is_admissible(g, t, cache=cache)]


def label_permutations(g: WeightedCurveGraph, symmetry: str = "auto") -> list[dict[int, int]]:
    """Distinct permutations of candidate labels induced by graph automorphisms (identity first)."""
    identity = {lab: lab for lab in g.candidates}
    if symmetry == "off":
        return [identity]
    if symmetry != "auto":
        raise ValueError(f"unknown symmetry mode {symmetry!r}")
    seen: list[dict[int, int]] = []
    for sigma in automorphisms(g):
        perm = sigma.label_map(g, g)
        if perm not in seen:
            seen.append(perm)
    return seen


def eval_formula(
    f: TheoremFormula,
    t: CandidateSet,
    perms: Sequence[Mapping[int, int]],
    pool_of: Mapping[int, str],
    warnings: list[str] | None = None,
) -> bool:
    """True iff some symmetry image of ``t`` is accepted by ``f``.

    When no image of ``t`` matches any guard a coverage warning is appended
    to ``warnings`` (if given) and ``t`` is rejected.
    """
    matched = False
    for perm in perms or [{lab: lab for lab in pool_of}]:
        image = CandidateSet.of((perm[x] for x in t.members), pool_of)
        ok, clause = f.decide(image.pools)
        matched = matched or clause is not None
        if ok:
            return True
    if not matched:
        msg = f"no guard matches {t} (T1={sorted(t.T1)})"
        log.warning(msg)
        if warnings is not None:
            warnings.append(msg)
    return False


@dataclass(frozen=True)
class CaseVerdict:
    """Expected invariants next to computed values for one case.

    ``mismatches`` lists every gating check that failed; ``findings`` holds
    non-gating observations.  ``rank_delta`` is the identity
    ``rank Delta + rho = const`` read backwards, not an independent computation.
    """

    case_id: str
    genus_class: str
    expected_a: Fraction
    solved_a: Fraction | None
    expected_index: int
    index: int | None
    expected_rho: tuple[int, int]
    rho: tuple[int, int] | None
    identity_constant: int
    admissible: tuple[CandidateSet, ...]
    accepted: tuple[CandidateSet, ...]
    admissible_only: tuple[CandidateSet, ...]
    accepted_only: tuple[CandidateSet, ...]
    rank_delta: tuple[tuple[int, int], ...]
    delta_values: tuple[int, ...]
    symmetry_order: int
    strict_complete: bool | None
    coverage_warnings: tuple[str, ...]
    mismatches: tuple[str, ...]
    findings: tuple[str, ...] = ()

    @property
    def agreement(self) -> bool:
        return not self.admissible_only and not self.accepted_only

    @property
    def ok(self) -> bool:
        return self.agreement and not self.mismatches


def _failed(case: CaseRecord, solved_a, index, mismatches, findings, strict=None) -> CaseVerdict:
    return CaseVerdict(
        case.case_id, case.genus_class, case.expected_a, solved_a, case.expected_index, index,
        (case.expected_rho_min, case.expected_rho_max), None, case.identity_constant,
        (), (), (), (), (), (), 0, strict, (), tuple(mismatches), tuple(findings),
    )


def verify_case(case: CaseRecord, *, cache: dict | None = None) -> CaseVerdict:
    g = case.figure_graph
    mismatches: list[str] = []
    findings: list[str] = []
    try:
        sol = solve_pair(g)
    except ValueError as exc:
        return _failed(case, None, None, [f"solve failed: {exc}"], findings)
    if sol.a != case.expected_a:
        mismatches.append(f"a = {sol.a}, expected {case.expected_a}")
    try:
        index = canonical_index(sol.a)
    except ValueError as exc:
        return _failed(case, sol.a, None, mismatches + [str(exc)], findings)
    if index != case.expected_index:
        mismatches.append(f"index {index}, expected {case.expected_index}")
    strict = completeness_check(g, sol)
    if not strict:
        findings.append("some edge has coefficient sum >= 1 (divisors of negative discrepancy lie over it)")
    if not zero_discrepancy_complete(g, sol):
        mismatches.append("a divisor of discrepancy 0 over the figure is missing from it")

    try:
        pool_of = candidate_pools(g, case.genus_class)
    except PoolMismatchError as exc:
        return _failed(case, sol.a, index, mismatches + [str(exc)], findings, strict)
    perms = label_permutations(g, case.symmetry)
    cache = {} if cache is None else cache
    warnings: list[str] = []
    admissible, accepted = [], []
    for t in all_candidate_sets(list(pool_of), pool_of):
        if is_admissible(g, t, cache=cache):
            admissible.append(t)
        if eval_formula(case.formula, t, perms, pool_of, warnings):
            accepted.append(t)
    adm, acc = set(admissible), set(accepted)
    admissible_only = tuple(t for t in admissible if t not in acc)
    accepted_only = tuple(t for t in accepted if t not in adm)
    if admissible_only or accepted_only:
        mismatches.append(
            f"classification differs: {len(admissible_only)} admissible sets rejected by the condition, "
            f"{len(accepted_only)} accepted sets not admissible"
        )

    rho = None
    rank_delta: list[tuple[int, int]] = []
    delta_values: set[int] = set()
    if admissible:
        sizes = sorted({len(t) for t in admissible})
        rho = (sizes[0], sizes[-1])
        if rho != (case.expected_rho_min, case.expected_rho_max):
            mismatches.append(f"rho range {rho}, expected {(case.expected_rho_min, case.expected_rho_max)}")
        rank_delta = [(s, case.identity_constant - s) for s in sizes]
        bad_rank = [r for _, r in rank_delta if not 0 <= r <= K3_RANK_BOUND]
        if bad_rank:
            mismatches.append(f"rank Delta values {bad_rank} outside [0, {K3_RANK_BOUND}]")
        for t in admissible:
            contracted = _contracted(g, t.members)
            delta = compute_delta(g, sol, contracted)
            delta_values.add(delta)
            if delta != 1:
                mismatches.append(f"delta = {delta} for {t}")
            c_comp = next(comp for comp in connected_components(g, contracted) if sol.c_id in comp)
            c2 = proper_transform_self_intersection(g, [v for v in c_comp if v != sol.c_id])
            if not c2 < 0:
                mismatches.append(f"image of C has self-intersection {c2} >= 0 for {t}")
            if case.genus_class == "ell" and not t.T2:
                mismatches.append(f"admissible {t} has empty T2")
    else:
        mismatches.append("no admissible extraction set")
    all_labels = tuple(pool_of)
    if admissible and tuple(max(admissible, key=len).members) != all_labels:
        mismatches.append("extracting every candidate is not admissible")

    return CaseVerdict(
        case_id=case.case_id,
        genus_class=case.genus_class,
        expected_a=case.expected_a,
        solved_a=sol.a,
        expected_index=case.expected_index,
        index=index,
        expected_rho=(case.expected_rho_min, case.expected_rho_max),
        rho=rho,
        identity_constant=case.identity_constant,
        admissible=tuple(admissible),
        accepted=tuple(accepted),
        admissible_only=admissible_only,
        accepted_only=accepted_only,
        rank_delta=tuple(rank_delta),
        delta_values=tuple(sorted(delta_values)),
        symmetry_order=len(perms),
        strict_complete=strict,
        coverage_warnings=tuple(dict.fromkeys(warnings)),
        mismatches=tuple(mismatches),
        findings=tuple(findings),
    )


@dataclass(frozen=True)
class Summary:
    rows: tuple[tuple[str, Fraction | None, int | None, tuple[int, int] | None, int], ...]
    index_set: frozenset[int]
    agreements: int
    total: int

    @property
    def index_set_matches(self) -> bool:
        return self.index_set == EXPECTED_INDEX_SET

    def table(self) -> str:
        lines = [f"{'case':<10} {'a':>6} {'I':>3} {'rho':>6} {'const':>5}"]
        for cid, a, idx, rho, const in self.rows:
            r = f"{rho[0]}-{rho[1]}" if rho else "-"
            lines.append(f"{cid:<10} {str(a):>6} {idx if idx is not None else '-':>3} {r:>6} {const:>5}")
        return "\n".join(lines)


def invariants_summary(verdicts: Sequence[CaseVerdict]) -> Summary:
    rows = tuple((v.case_id, v.solved_a, v.index, v.rho, v.identity_constant) for v in verdicts)
    return Summary(
        rows,
        frozenset(v.index for v in verdicts if v.index is not None),
        sum(v.ok for v in verdicts),
        len(verdicts),
    )
