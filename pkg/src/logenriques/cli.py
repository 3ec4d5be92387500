"""Command line front end.

Exit codes: 0 when everything checked agrees, 1 on a mathematical mismatch,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .cases import CaseError, CaseRecord, diagram_round_trip, find_case, list_cases, load_case, load_graph, validate_case
from .classification import (
    CandidateSet,
    CaseVerdict,
    candidate_pools,
    enumerate_admissible,
    invariants_summary,
    verify_case,
)
from .formula import FormulaError
from .graph import GraphError, Kind, WeightedCurveGraph, is_isomorphic
from .pair import (
    PairError,
    compute_delta,
    klt_check,
    saturate,
    solve_pair,
    toric_blowup_discrepancy,
)

REPORT_SCHEMA = 1
LIST_LIMIT = 32

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _frac(x: Fraction | None) -> str | None:
    return None if x is None else str(x)


def _set_list(sets: Sequence[CandidateSet]) -> list[list[int]]:
    return [list(t.members) for t in sets]


def verdict_to_dict(v: CaseVerdict, pool_of: dict[int, str]) -> dict[str, Any]:
    """Serializable form; expectations, computed values and agreement are kept apart."""
    return {
        "case_id": v.case_id,
        "genus_class": v.genus_class,
        "pools": {str(k): p for k, p in pool_of.items()},
        "expected": {
            "a": _frac(v.expected_a),
            "index": v.expected_index,
            "rho": list(v.expected_rho),
            "identity_constant": v.identity_constant,
        },
        "computed": {
            "a": _frac(v.solved_a),
            "index": v.index,
            "rho": list(v.rho) if v.rho else None,
            "rank_delta": [list(x) for x in v.rank_delta],
            "rank_delta_source": "identity constant minus rho (lookup, not computed independently)",
            "delta_values": list(v.delta_values),
            "symmetry_order": v.symmetry_order,
            "strict_complete": v.strict_complete,
            "admissible": _set_list(v.admissible),
            "accepted": _set_list(v.accepted),
        },
        "agreement": {
            "classification": v.agreement,
            "admissible_only": _set_list(v.admissible_only),
            "accepted_only": _set_list(v.accepted_only),
            "ok": v.ok,
        },
        "mismatches": list(v.mismatches),
        "findings": list(v.findings),
        "coverage_warnings": list(v.coverage_warnings),
    }


def verdict_from_dict(d: dict[str, Any]) -> CaseVerdict:
    pool_of = {int(k): p for k, p in d["pools"].items()}
    sets = lambda xs: tuple(CandidateSet.of(x, pool_of) for x in xs)  # noqa: E731
    exp, comp, agr = d["expected"], d["computed"], d["agreement"]
    return CaseVerdict(
        case_id=d["case_id"],
        genus_class=d["genus_class"],
        expected_a=Fraction(exp["a"]),
        solved_a=None if comp["a"] is None else Fraction(comp["a"]),
        expected_index=exp["index"],
        index=comp["index"],
        expected_rho=tuple(exp["rho"]),
        rho=tuple(comp["rho"]) if comp["rho"] else None,
        identity_constant=exp["identity_constant"],
        admissible=sets(comp["admissible"]),
        accepted=sets(comp["accepted"]),
        admissible_only=sets(agr["admissible_only"]),
        accepted_only=sets(agr["accepted_only"]),
        rank_delta=tuple(tuple(x) for x in comp["rank_delta"]),
        delta_values=tuple(comp["delta_values"]),
        symmetry_order=comp["symmetry_order"],
        strict_complete=comp["strict_complete"],
        coverage_warnings=tuple(d["coverage_warnings"]),
        mismatches=tuple(d["mismatches"]),
        findings=tuple(d["findings"]),
    )


def build_report(records: Sequence[CaseRecord], verdicts: Sequence[CaseVerdict]) -> dict[str, Any]:
    summary = invariants_summary(verdicts)
    return {
        "report_schema": REPORT_SCHEMA,
        "tool_version": __version__,
        "cases": [
            verdict_to_dict(v, candidate_pools(r.figure_graph, r.genus_class) if v.solved_a is not None else {})
            for r, v in zip(records, verdicts)
        ],
        "summary": {
            "index_set": sorted(summary.index_set),
            "index_set_matches": summary.index_set_matches if len(verdicts) == 13 else None,
            "agreements": summary.agreements,
            "total": summary.total,
            "warnings": sorted({w for v in verdicts for w in v.coverage_warnings}),
        },
    }


def _load(ref: str, cases_dir: str | None) -> CaseRecord:
    return load_case(find_case(ref, cases_dir))


def _targets(args) -> list[str]:
    if args.all:
        return list_cases(args.cases_dir)
    if not args.case:
        raise InputError("give a case id or --all")
    return list(args.case)


def _fmt_sets(sets: Sequence[CandidateSet]) -> str:
    return "; ".join(str(t) for t in sets)


def cmd_verify(args) -> int:
    ids = _targets(args)
    records = [_load(c, args.cases_dir) for c in ids]
    verdicts, timing = [], {}
    for rec in records:
        t0 = time.perf_counter()
        verdicts.append(verify_case(rec))
        timing[rec.case_id] = round(time.perf_counter() - t0, 3)
    print(f"{'case':<10} {'a':>6} {'I':>3} {'rho':>6} {'const':>5} {'sets':>5}  status")
    for v in verdicts:
        rho = f"{v.rho[0]}-{v.rho[1]}" if v.rho else "-"
        status = "ok" if v.ok else "MISMATCH"
        print(f"{v.case_id:<10} {str(v.solved_a):>6} {v.index if v.index is not None else '-':>3} {rho:>6} "
              f"{v.identity_constant:>5} {len(v.admissible):>5}  {status}")
        for m in v.mismatches:
            print(f"    mismatch: {m}")
        for t in v.admissible_only:
            print(f"    admissible but rejected by the condition: {t}")
        for t in v.accepted_only:
            print(f"    accepted by the condition but not admissible: {t}")
        for w in v.coverage_warnings:
            print(f"    warning: {w}")
    if len(verdicts) == 1 and len(verdicts[0].admissible) <= LIST_LIMIT:
        print("admissible sets: " + _fmt_sets(verdicts[0].admissible))
    summary = invariants_summary(verdicts)
    print(f"index set: {sorted(summary.index_set)}; {summary.agreements}/{summary.total} cases agree")
    if args.json:
        report = build_report(records, verdicts)
        report["timing_seconds"] = timing
        Path(args.json).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK if all(v.ok for v in verdicts) else EXIT_MISMATCH


def cmd_validate(args) -> int:
    ok = True
    for cid in _targets(args):
        report = validate_case(_load(cid, args.cases_dir))
        print(report)
        ok = ok and report.ok
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_enumerate(args) -> int:
    rec = _load(args.case, args.cases_dir)
    sets = enumerate_admissible(rec)
    if args.count:
        sizes = sorted({len(t) for t in sets})
        print(len(sets))
        if sizes:
            print(f"sizes {sizes[0]}..{sizes[-1]}", file=sys.stderr)
    else:
        for t in sets:
            print(t)
    return EXIT_OK


def _read_graph(path: str) -> WeightedCurveGraph:
    return load_graph(path)


def _print_json(obj: Any) -> None:
    print(json.dumps(obj, indent=1, sort_keys=True))


def cmd_solve(args) -> int:
    g = _read_graph(args.graph)
    sol = solve_pair(g)
    if args.json:
        _print_json({"a": str(sol.a), "b": {k: str(v) for k, v in sol.b.items()}})
    else:
        print(f"a = {sol.a}")
        for vid, b in sol.b.items():
            print(f"  {vid:<6} {g.vertex(vid).kind.value:<12} b = {b}")
    return EXIT_OK


def cmd_klt(args) -> int:
    g = _read_graph(args.graph)
    subset = [s for s in args.subset.split(",") if s] if args.subset else g.ids()
    report = klt_check(g, subset)
    if args.json:
        _print_json({
            "verdict": report.verdict.value,
            "negative_definite": report.negative_definite,
            "coefficients": {k: str(v) for k, v in report.coefficients.items()},
            "components": [{"vertices": list(c), "verdict": v.value} for c, v in report.components],
        })
    else:
        print(f"verdict: {report.verdict.value}")
        for comp, verdict in report.components:
            print(f"  {' '.join(comp)}: {verdict.value}")
        for vid, b in report.coefficients.items():
            print(f"  b[{vid}] = {b}")
    return EXIT_OK


def cmd_saturate(args) -> int:
    g = _read_graph(args.graph)
    sol = solve_pair(g)
    sat, ssol = saturate(g, sol)
    added = [v for v in sat.ids() if v not in g.index]
    new_cands = [v for v in added if sat.vertex(v).kind is Kind.CANDIDATE]
    print(f"{len(added)} blow-ups, {len(new_cands)} new discrepancy-0 curves, {len(sat)} curves in total")
    for v in added:
        print(f"  {v}: weight {sat.vertex(v).weight}, b = {ssol.b[v]}")
    if args.compare:
        other = _read_graph(args.compare)
        match = is_isomorphic(sat, other) is not None
        print("compare: " + ("match" if match else "mismatch"))
        return EXIT_OK if match else EXIT_MISMATCH
    return EXIT_OK


def cmd_delta(args) -> int:
    rec = _load(args.case, args.cases_dir)
    g = rec.figure_graph
    sol = solve_pair(g)
    pool_of = candidate_pools(g, rec.genus_class)
    if args.set is not None:
        labels = [int(x) for x in args.set.split(",") if x]
        sets = [CandidateSet.of(labels, pool_of)]
    else:
        sets = enumerate_admissible(rec)
    values: dict[int, int] = {}
    for t in sets:
        chosen = {g.candidates[lab] for lab in t.members}
        contracted = [v for v in g.ids() if v not in chosen and g.vertex(v).kind is not Kind.WITNESS]
        d = compute_delta(g, sol, contracted)
        values[d] = values.get(d, 0) + 1
    for d, n in sorted(values.items()):
        print(f"delta = {d}: {n} set(s)")
    return EXIT_OK if set(values) <= {1} else EXIT_MISMATCH


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"{text!r} is not a rational number") from None


def cmd_toric(args) -> int:
    print(toric_blowup_discrepancy(args.alpha, args.beta, _parse_fraction(args.coeff)))
    return EXIT_OK


def render_dot(g: WeightedCurveGraph, name: str = "G") -> str:
    lines = [f'graph "{name}" {{']
    for v in g.vertices:
        if v.kind is Kind.CURVE_C:
            attrs = f'shape=box, label="C ({v.weight})"'
        elif v.kind is Kind.CANDIDATE:
            attrs = f'shape=doublecircle, label="{v.label}"'
        elif v.kind is Kind.WITNESS:
            attrs = f'shape=circle, label="{v.weight}"'
        else:
            attrs = f'shape=circle, style=filled, fillcolor=black, fontcolor=white, label="{v.weight}"'
        lines.append(f'  "{v.id}" [{attrs}];')
    for (u, w), m in g.edges.items():
        for _ in range(m):
            lines.append(f'  "{u}" -- "{w}";')
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_ascii(g: WeightedCurveGraph) -> str:
    lines = []
    for v in g.vertices:
        if v.kind is Kind.CANDIDATE:
            what = f"candidate {v.label}" + (f" ({v.pool})" if v.pool else "")
        else:
            what = {"curveC": "C", "exceptional": "exceptional", "witness": "witness"}[v.kind.value]
        nbrs = " ".join(w if m == 1 else f"{w}x{m}" for w, m in g.neighbors(v.id).items())
        lines.append(f"{v.id:<6} {what:<18} {v.weight:>4} : {nbrs}")
    return "\n".join(lines) + "\n"


def cmd_render(args) -> int:
    rec = _load(args.case, args.cases_dir)
    g = rec.theorem_diagram if args.diagram else rec.figure_graph
    if g is None:
        raise InputError(f"case {rec.case_id} has no minimal-resolution diagram")
    out = render_dot(g, rec.case_id) if args.format == "dot" else render_ascii(g)
    sys.stdout.write(out)
    return EXIT_OK


def cmd_explore(args) -> int:
    for cid in _targets(args):
        rt = diagram_round_trip(_load(cid, args.cases_dir))
        if rt is None:
            continue
        print(f"{rt.case_id}: {'match' if rt.matched else 'mismatch'}")
        print(f"    as drawn: {rt.literal}")
        for s in rt.steps:
            print(f"    {s}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logenriques", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--cases-dir", help="directory of case files (default: bundled cases)")
    sub = p.add_subparsers(dest="command", required=True)

    def case_targets(sp):
        sp.add_argument("case", nargs="*", help="case id or case file")
        sp.add_argument("--all", action="store_true", help="every case in the case directory")

    sp = sub.add_parser("verify", help="enumerate admissible sets and compare with the stated conditions")
    case_targets(sp)
    sp.add_argument("--json", metavar="PATH", help="write a JSON report")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("validate", help="self-check case transcriptions")
    case_targets(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("enumerate", help="list admissible extraction sets")
    sp.add_argument("case")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--list", action="store_true", help="print every set (default)")
    mode.add_argument("--count", action="store_true", help="print only the number of sets")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("solve", help="solve the numerically trivial pair on a graph")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("klt", help="contract vertices and classify the singularities")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--subset", help="comma separated vertex ids (default: all)")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_klt)

    sp = sub.add_parser("saturate", help="blow up every point with coefficient sum >= 1")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--compare", metavar="FILE", help="check the result is isomorphic to this graph")
    sp.set_defaults(func=cmd_saturate)

    sp = sub.add_parser("delta", help="count divisors with coefficient >= 6/7")
    sp.add_argument("case")
    sp.add_argument("--set", help="comma separated candidate labels (default: every admissible set)")
    sp.set_defaults(func=cmd_delta)

    sp = sub.add_parser("toric", help="discrepancy of a weighted blow-up of (plane, a{xy=0})")
    sp.add_argument("--alpha", type=int, required=True)
    sp.add_argument("--beta", type=int, required=True)
    sp.add_argument("--coeff", required=True, help="boundary coefficient p/q")
    sp.set_defaults(func=cmd_toric)

    sp = sub.add_parser("render", help="draw a case graph")
    sp.add_argument("case")
    sp.add_argument("--format", choices=("dot", "ascii"), default="ascii")
    sp.add_argument("--diagram", action="store_true", help="render the minimal-resolution diagram instead")
    sp.set_defaults(func=cmd_render)

    sp = sub.add_parser("explore", help="compare minimal-resolution diagrams with figure graphs (report only)")
    case_targets(sp)
    sp.set_defaults(func=cmd_explore)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, CaseError, GraphError, FormulaError, PairError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
