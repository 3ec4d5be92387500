"""Case files: figure graphs, pools, conditions and expected invariants.

Each bundled case is one JSON file under ``data/cases``.  File names carry a
two-digit prefix so that sorting them gives the order in which the cases are
listed in the classification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .classification import PoolMismatchError, TheoremFormula, candidate_pools
from .formula import FormulaError
from .graph import CurveVertex, GraphError, Kind, WeightedCurveGraph, is_isomorphic, resolve_node
from .pair import (
    DELTA_THRESHOLD,
    PairError,
    PairSolution,
    canonical_index,
    completeness_check,
    saturate,
    solve_pair,
    zero_discrepancy_edges,
)

__all__ = [
    "SCHEMA_VERSION",
    "CASE_TABLE",
    "CaseError",
    "CaseRecord",
    "Check",
    "ValidationReport",
    "bundled_dir",
    "list_cases",
    "find_case",
    "load_case",
    "load_graph",
    "parse_case",
    "case_to_dict",
    "dump_case",
    "save_case",
    "graph_from_dict",
    "graph_to_dict",
    "validate_case",
    "RoundTrip",
    "diagram_round_trip",
]

SCHEMA_VERSION = 1

# case id -> (a, weight of C in the figure, index, rho min, rho max, identity constant)
CASE_TABLE: dict[str, tuple[Fraction, int, int, int, int, int]] = {
    "6-2-ell": (Fraction(6, 7), -14, 7, 2, 9, 10),
    "8-1-ell": (Fraction(8, 9), -18, 9, 1, 8, 12),
    "9-1-ell": (Fraction(9, 10), -20, 10, 1, 5, 12),
    "22-1-ell": (Fraction(7, 8), -16, 8, 1, 6, 12),
    "51-2-ell": (Fraction(10, 11), -22, 11, 1, 11, 12),
    "51-6-ell": (Fraction(7, 8), -16, 8, 1, 6, 12),
    "52-2-ell": (Fraction(6, 7), -14, 7, 1, 8, 10),
    "53-2-ell": (Fraction(8, 9), -18, 9, 1, 8, 12),
    "54-ell": (Fraction(6, 7), -14, 7, 1, 8, 10),
    "18-1-p1": (Fraction(12, 13), -26, 13, 1, 9, 10),
    "25-1-p1": (Fraction(15, 17), -17, 17, 1, 6, 6),
    "55-0": (Fraction(10, 11), -22, 11, 1, 11, 12),
    "56-0": (Fraction(6, 7), -5, 7, 1, 3, 13),
}

_TOP_KEYS = {"schema", "case_id", "genus_class", "model", "expected", "vertices", "edges", "formula"}
_OPTIONAL_KEYS = {"symmetry", "theorem_diagram", "notes"}
_EXPECTED_KEYS = {"a", "index", "rho_min", "rho_max", "identity_constant"}
_VERTEX_KEYS = {"id", "kind", "weight", "label", "pool"}


class CaseError(ValueError):
    """A case or graph file cannot be read or violates the schema."""


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    genus_class: str
    model_description: str
    figure_graph: WeightedCurveGraph
    expected_a: Fraction
    expected_index: int
    expected_rho_min: int
    expected_rho_max: int
    identity_constant: int
    formula: TheoremFormula
    symmetry: str = "auto"
    theorem_diagram: WeightedCurveGraph | None = None
    notes: tuple[str, ...] = field(default=())


def bundled_dir() -> Path:
    return Path(str(resources.files("logenriques") / "data" / "cases"))


def list_cases(directory: Path | str | None = None) -> list[str]:
    """Case ids of the ``*.json`` files in ``directory`` ordered by file name."""
    directory = Path(directory) if directory is not None else bundled_dir()
    if not directory.is_dir():
        raise CaseError(f"{directory}: not a readable directory")
    return [load_case(p).case_id for p in sorted(directory.glob("*.json"))]


def find_case(ref: str | Path, directory: Path | str | None = None) -> Path:
    """Resolve a case id (bundled or in ``directory``) or a file path."""
    p = Path(ref)
    if p.suffix == ".json" and p.is_file():
        return p
    directory = Path(directory) if directory is not None else bundled_dir()
    paths = sorted(directory.glob("*.json"))
    for path in paths:
        if path.stem == str(ref) or path.stem.split("_", 1)[-1] == str(ref):
            return path
    # file names need not follow the convention; fall back on the stored id
    for path in paths:
        data = _read_json(path)
        if isinstance(data, Mapping) and data.get("case_id") == str(ref):
            return path
    raise CaseError(f"no case {str(ref)!r} in {directory}")


def _read_json(path: Path | str) -> Any:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise CaseError(f"{path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _need(cond: bool, where: str, msg: str) -> None:
    if not cond:
        raise CaseError(f"{where}: {msg}")


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _fraction(text, where: str) -> Fraction:
    _need(isinstance(text, str), where, 'rationals are written as "p/q" strings')
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise CaseError(f"{where}: {text!r} is not a rational number") from None


def graph_from_dict(data: Mapping, where: str = "graph") -> WeightedCurveGraph:
    _need(isinstance(data.get("vertices"), list), where, "'vertices' must be a list")
    _need(isinstance(data.get("edges"), list), where, "'edges' must be a list")
    verts = []
    for i, v in enumerate(data["vertices"]):
        at = f"{where}.vertices[{i}]"
        _need(isinstance(v, Mapping), at, "vertex must be an object")
        extra = set(v) - _VERTEX_KEYS
        _need(not extra, at, f"unknown fields {sorted(extra)}")
        for key in ("id", "kind", "weight"):
            _need(key in v, at, f"missing field {key!r}")
        _need(isinstance(v["id"], str) and v["id"], at, "'id' must be a nonempty string")
        _need(v["kind"] in {k.value for k in Kind}, at, f"unknown kind {v['kind']!r}")
        _need(_is_int(v["weight"]), at, "'weight' must be an integer")
        try:
            verts.append(CurveVertex(v["id"], v["weight"], Kind(v["kind"]), v.get("label"), v.get("pool")))
        except GraphError as exc:
            raise CaseError(f"{at}: {exc}") from None
    pairs = []
    for i, e in enumerate(data["edges"]):
        at = f"{where}.edges[{i}]"
        _need(isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e), at, "edge must be a pair of ids")
        pairs.append((e[0], e[1]))
    try:
        return WeightedCurveGraph.build(verts, pairs)
    except GraphError as exc:
        raise CaseError(f"{where}: {exc}") from None


def graph_to_dict(g: WeightedCurveGraph) -> dict:
    verts = []
    for v in g.vertices:
        d: dict[str, Any] = {"id": v.id, "kind": v.kind.value}
        if v.label is not None:
            d["label"] = v.label
        if v.pool is not None:
            d["pool"] = v.pool
        d["weight"] = v.weight
        verts.append(d)
    edges = [[u, w] for (u, w), m in g.edges.items() for _ in range(m)]
    return {"vertices": verts, "edges": edges}


def parse_case(data: Any, where: str = "case") -> CaseRecord:
    _need(isinstance(data, Mapping), where, "top level must be an object")
    missing = _TOP_KEYS - set(data)
    _need(not missing, where, f"missing fields {sorted(missing)}")
    extra = set(data) - _TOP_KEYS - _OPTIONAL_KEYS
    _need(not extra, where, f"unknown fields {sorted(extra)}")
    _need(data["schema"] == SCHEMA_VERSION, where, f"schema {data['schema']!r} is not supported (expected {SCHEMA_VERSION})")
    _need(isinstance(data["case_id"], str) and data["case_id"], where, "'case_id' must be a nonempty string")
    _need(data["genus_class"] in ("ell", "rational"), where, "'genus_class' must be 'ell' or 'rational'")
    _need(isinstance(data["model"], str), where, "'model' must be a string")
    exp = data["expected"]
    _need(isinstance(exp, Mapping), f"{where}.expected", "must be an object")
    _need(set(exp) == _EXPECTED_KEYS, f"{where}.expected", f"fields must be exactly {sorted(_EXPECTED_KEYS)}")
    for key in _EXPECTED_KEYS - {"a"}:
        _need(_is_int(exp[key]), f"{where}.expected.{key}", "must be an integer")
    a = _fraction(exp["a"], f"{where}.expected.a")
    graph = graph_from_dict(data, where)
    try:
        formula = TheoremFormula.from_dict(data["formula"])
    except FormulaError as exc:
        raise CaseError(f"{where}.formula: {exc}") from None
    symmetry = data.get("symmetry", "auto")
    _need(symmetry in ("auto", "off"), f"{where}.symmetry", "must be 'auto' or 'off'")
    diagram = None
    if data.get("theorem_diagram") is not None:
        diagram = graph_from_dict(data["theorem_diagram"], f"{where}.theorem_diagram")
    notes = data.get("notes", [])
    _need(isinstance(notes, list) and all(isinstance(n, str) for n in notes), f"{where}.notes", "must be a list of strings")
    _need(graph.curve_c is not None, where, "figure graph has no curveC vertex")
    return CaseRecord(
        case_id=data["case_id"],
        genus_class=data["genus_class"],
        model_description=data["model"],
        figure_graph=graph,
        expected_a=a,
        expected_index=exp["index"],
        expected_rho_min=exp["rho_min"],
        expected_rho_max=exp["rho_max"],
        identity_constant=exp["identity_constant"],
        formula=formula,
        symmetry=symmetry,
        theorem_diagram=diagram,
        notes=tuple(notes),
    )


def load_case(path: Path | str) -> CaseRecord:
    return parse_case(_read_json(path), str(path))


def load_graph(path: Path | str) -> WeightedCurveGraph:
    """Read only the figure graph of a file; other case fields are ignored if present."""
    data = _read_json(path)
    _need(isinstance(data, Mapping), str(path), "top level must be an object")
    return graph_from_dict(data, str(path))


def case_to_dict(rec: CaseRecord) -> dict:
    out: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "case_id": rec.case_id,
        "genus_class": rec.genus_class,
        "model": rec.model_description,
        "expected": {
            "a": str(rec.expected_a),
            "index": rec.expected_index,
            "rho_min": rec.expected_rho_min,
            "rho_max": rec.expected_rho_max,
            "identity_constant": rec.identity_constant,
        },
        **graph_to_dict(rec.figure_graph),
        "formula": rec.formula.to_dict(),
        "symmetry": rec.symmetry,
    }
    if rec.theorem_diagram is not None:
        out["theorem_diagram"] = graph_to_dict(rec.theorem_diagram)
    if rec.notes:
        out["notes"] = list(rec.notes)
    return out


def _dump(value: Any, indent: int) -> str:
    """JSON with one line per leaf object or list, so diffs stay small."""
    pad = " " * indent
    if isinstance(value, dict) and any(isinstance(v, (dict, list)) and v for v in value.values()):
        items = [f'{pad}  {json.dumps(k)}: {_dump(v, indent + 2).lstrip()}' for k, v in value.items()]
        return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, list) and (any(isinstance(v, (dict, list)) for v in value) or sum(isinstance(v, str) for v in value) > 1):
        items = [_dump(v, indent + 2) for v in value]
        return pad + "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return pad + json.dumps(value, ensure_ascii=False)


def dump_case(rec: CaseRecord) -> str:
    return _dump(case_to_dict(rec), 0) + "\n"


def save_case(rec: CaseRecord, path: Path | str) -> None:
    Path(path).write_text(dump_case(rec), encoding="utf-8")


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""
    gating: bool = True


@dataclass(frozen=True)
class ValidationReport:
    case_id: str
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks if c.gating)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok and c.gating]

    def __str__(self) -> str:
        lines = [f"{self.case_id}: {'ok' if self.ok else 'FAILED'}"]
        for c in self.checks:
            mark = "ok" if c.ok else ("FAIL" if c.gating else "note")
            lines.append(f"  [{mark:>4}] {c.name}" + (f": {c.detail}" if c.detail else ""))
        return "\n".join(lines)


def validate_case(rec: CaseRecord) -> ValidationReport:
    """Self-checks of a transcribed case; failures name the vertices or edges involved."""
    g = rec.figure_graph
    checks: list[Check] = []
    try:
        sol = solve_pair(g)
    except PairError as exc:
        checks.append(Check("solve", False, str(exc)))
        return ValidationReport(rec.case_id, tuple(checks))
    checks.append(Check("solve", True, f"a = {sol.a}"))
    checks.append(Check("a", sol.a == rec.expected_a, f"solved {sol.a}, expected {rec.expected_a}"))
    nonzero = [f"{v} (label {g.vertex(v).label}) = {sol.b[v]}" for v in g.of_kind(Kind.CANDIDATE) if sol.b[v] != 0]
    checks.append(Check("candidate coefficients are 0", not nonzero, "; ".join(nonzero)))
    # An isolated (-2)-curve away from C has coefficient exactly 0, so 0 is allowed here.
    out_of_range = [
        f"{v} (weight {g.vertex(v).weight}) = {sol.b[v]}"
        for v in g.of_kind(Kind.EXCEPTIONAL)
        if not 0 <= sol.b[v] < DELTA_THRESHOLD
    ]
    checks.append(Check("exceptional coefficients in [0, 6/7)", not out_of_range, "; ".join(out_of_range)))
    try:
        missing = zero_discrepancy_edges(g, sol)
        checks.append(Check("no discrepancy-0 divisor missing", not missing, "; ".join(f"over {u}-{v}" for u, v in missing)))
    except PairError as exc:
        checks.append(Check("no discrepancy-0 divisor missing", False, str(exc)))
    heavy = [f"{u}-{v} ({sol.coefficient(u)} + {sol.coefficient(v)})" for u, v in g.edges if sol.coefficient(u) + sol.coefficient(v) >= 1]
    checks.append(Check("every edge coefficient sum < 1", completeness_check(g, sol), "; ".join(heavy), gating=False))
    try:
        idx = canonical_index(rec.expected_a)
        checks.append(Check("index", idx == rec.expected_index, f"denominator {idx}, expected {rec.expected_index}"))
    except ValueError as exc:
        checks.append(Check("index", False, str(exc)))
    n_cand = len(g.candidates)
    checks.append(Check("candidate count = rho max", n_cand == rec.expected_rho_max, f"{n_cand} candidates, rho max {rec.expected_rho_max}"))
    try:
        pool_of = candidate_pools(g, rec.genus_class)
        checks.append(Check("pools", True, " ".join(f"{p}={sorted(k for k, q in pool_of.items() if q == p)}" for p in ("T1", "T2", "T3"))))
        try:
            rec.formula.check_references(pool_of)
            checks.append(Check("formula references", True))
        except FormulaError as exc:
            checks.append(Check("formula references", False, str(exc)))
    except (PoolMismatchError, ValueError) as exc:
        checks.append(Check("pools", False, str(exc)))
    return ValidationReport(rec.case_id, tuple(checks))


@dataclass(frozen=True)
class RoundTrip:
    """Exploratory comparison of a minimal-resolution diagram with the figure graph.

    ``literal`` describes saturating the diagram exactly as drawn and comparing
    it with the figure.  ``matched`` is the outcome of the modelled
    comparison: witness curves are left out (the figures do not draw them),
    the node of C is blown up in the ``ell`` class, and both sides are
    saturated before the isomorphism test.
    """

    case_id: str
    literal: str
    matched: bool
    steps: tuple[str, ...]


def _saturated(g: WeightedCurveGraph, sol: PairSolution) -> WeightedCurveGraph:
    sat, _ = saturate(g, sol)
    return WeightedCurveGraph(tuple(v if v.pool is None else CurveVertex(v.id, v.weight, v.kind, v.label) for v in sat.vertices), sat.edges)


def diagram_round_trip(rec: CaseRecord) -> RoundTrip | None:
    d = rec.theorem_diagram
    if d is None:
        return None
    fig = _saturated(rec.figure_graph, solve_pair(rec.figure_graph))
    try:
        dsol = solve_pair(d)
        same = is_isomorphic(_saturated(d, dsol), rec.figure_graph) is not None
        literal = f"a = {dsol.a}; saturated diagram {'is' if same else 'is not'} isomorphic to the figure"
    except PairError as exc:
        literal = str(exc)
    steps = []
    base = d.without(d.of_kind(Kind.WITNESS))
    steps.append(f"dropped {len(d) - len(base)} witness curves")
    if rec.genus_class == "ell":
        base = resolve_node(base, base.curve_c, new_id="node")
        steps.append("blew up the node of C")
    try:
        sol = solve_pair(base)
    except PairError as exc:
        steps.append(f"solve failed: {exc}")
        return RoundTrip(rec.case_id, literal, False, tuple(steps))
    steps.append(f"a = {sol.a} (expected {rec.expected_a})")
    sat = _saturated(base, sol)
    steps.append(f"saturated diagram: {len(sat)} curves, saturated figure: {len(fig)} curves")
    matched = sol.a == rec.expected_a and is_isomorphic(sat, fig) is not None
    steps.append("isomorphic" if matched else "not isomorphic")
    return RoundTrip(rec.case_id, literal, matched, tuple(steps))
