from __future__ import annotations

import json

import pytest

from logenriques.cases import case_to_dict, find_case, graph_to_dict, save_case
from logenriques.classification import candidate_pools
from logenriques.cli import main, render_ascii, render_dot, verdict_from_dict, verdict_to_dict
from logenriques.graph import CurveVertex, Kind, WeightedCurveGraph
from logenriques.pair import saturate, solve_pair


def write_graph(path, g: WeightedCurveGraph):
    path.write_text(json.dumps(graph_to_dict(g)), encoding="utf-8")
    return str(path)


def test_verify_single_case(capsys):
    assert main(["verify", "56-0"]) == 0
    out = capsys.readouterr().out
    assert "{1}; {1,2}; {1,3}; {1,2,3}" in out
    assert "1/1 cases agree" in out


def test_verify_unknown_case(capsys):
    assert main(["verify", "99-9"]) == 2
    assert "no case" in capsys.readouterr().err


def test_verify_needs_target(capsys):
    assert main(["verify"]) == 2


def test_verify_mismatch_exit_code(cases, tmp_path, capsys):
    d = case_to_dict(cases["56-0"])
    d["formula"] = {"clauses": [{"body": "size(T1)=1"}]}
    d["case_id"] = "56-0-altered"
    p = tmp_path / "altered.json"
    p.write_text(json.dumps(d), encoding="utf-8")
    assert main(["verify", str(p)]) == 1
    assert "MISMATCH" in capsys.readouterr().out.upper()


def test_json_report_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["verify", "56-0", "9-1-ell", "--json", str(a)]) == 0
    assert main(["verify", "56-0", "9-1-ell", "--json", str(b)]) == 0
    ra, rb = (json.loads(p.read_text()) for p in (a, b))
    assert set(ra["timing_seconds"]) == {"56-0", "9-1-ell"}
    del ra["timing_seconds"], rb["timing_seconds"]
    assert ra == rb
    assert ra["report_schema"] and ra["tool_version"]
    assert [c["case_id"] for c in ra["cases"]] == ["56-0", "9-1-ell"]
    assert ra["summary"]["agreements"] == 2


def test_verdict_dict_round_trip(cases, verdicts):
    for cid in ("56-0", "9-1-ell", "25-1-p1"):
        rec = cases[cid]
        pools = candidate_pools(rec.figure_graph, rec.genus_class)
        d = verdict_to_dict(verdicts[cid], pools)
        assert verdict_from_dict(json.loads(json.dumps(d))) == verdicts[cid]


def test_validate_command(capsys):
    assert main(["validate", "--all"]) == 0
    out = capsys.readouterr().out
    assert out.count(": ok") >= 13


def test_enumerate(capsys):
    assert main(["enumerate", "56-0"]) == 0
    assert capsys.readouterr().out.split() == ["{1}", "{1,2}", "{1,3}", "{1,2,3}"]
    assert main(["enumerate", "9-1-ell", "--count"]) == 0
    captured = capsys.readouterr()
    assert captured.out.strip() == "27"
    assert "sizes" in captured.err


def test_solve_graph(cases, tmp_path, capsys):
    path = tmp_path / "g.json"
    save_case(cases["6-2-ell"], path)
    assert main(["solve", "--graph", str(path)]) == 0
    assert "a = 6/7" in capsys.readouterr().out
    assert main(["solve", "--graph", str(path), "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["a"] == "6/7"


def test_klt_single_curve(tmp_path, capsys):
    g = WeightedCurveGraph.build([CurveVertex("x", -3, Kind.EXCEPTIONAL)], [])
    path = write_graph(tmp_path / "g.json", g)
    assert main(["klt", "--graph", path, "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["coefficients"] == {"x": "1/3"}
    assert out["verdict"] == "klt"


def test_klt_bad_subset(tmp_path, capsys):
    g = WeightedCurveGraph.build([CurveVertex("x", -3, Kind.EXCEPTIONAL)], [])
    path = write_graph(tmp_path / "g.json", g)
    assert main(["klt", "--graph", path, "--subset", "y"]) == 2


def test_saturate_compare(cases, tmp_path, capsys):
    g = cases["56-0"].figure_graph
    sat, _ = saturate(g, solve_pair(g))
    path = write_graph(tmp_path / "g.json", g)
    assert main(["saturate", "--graph", path, "--compare", write_graph(tmp_path / "s.json", sat)]) == 0
    assert "compare: match" in capsys.readouterr().out
    # the figure itself is not saturated, so it does not match its own saturation
    assert main(["saturate", "--graph", path, "--compare", path]) == 1
    assert "compare: mismatch" in capsys.readouterr().out


def test_delta(capsys):
    assert main(["delta", "56-0"]) == 0
    assert "delta = 1: 4 set(s)" in capsys.readouterr().out
    assert main(["delta", "56-0", "--set", "1,3"]) == 0


@pytest.mark.parametrize("alpha, beta, coeff, expected", [("1", "1", "1/2", "0"), ("1", "1", "0", "1"), ("2", "3", "6/7", "-2/7")])
def test_toric(alpha, beta, coeff, expected, capsys):
    assert main(["toric", "--alpha", alpha, "--beta", beta, "--coeff", coeff]) == 0
    assert capsys.readouterr().out.strip() == expected


def test_toric_bad_coefficient(capsys):
    assert main(["toric", "--alpha", "1", "--beta", "1", "--coeff", "half"]) == 2


def test_render(cases, capsys):
    dot = render_dot(cases["56-0"].figure_graph, "56-0")
    assert dot.count("shape=box") == 1 and dot.startswith('graph "56-0"')
    text = render_ascii(cases["56-0"].figure_graph)
    assert sum("candidate" in line for line in text.splitlines()) == 3
    assert main(["render", "56-0", "--format", "dot"]) == 0
    assert capsys.readouterr().out == dot
    assert main(["render", "6-2-ell", "--diagram"]) == 2


def test_explore(capsys):
    assert main(["explore", "--all"]) == 0
    out = capsys.readouterr().out
    assert out.count(": match") == 6


def test_cases_dir_option(tmp_path, capsys):
    (tmp_path / "x.json").write_text(find_case("56-0").read_text(), encoding="utf-8")
    assert main(["--cases-dir", str(tmp_path), "verify", "--all"]) == 0
    assert "1/1 cases agree" in capsys.readouterr().out


def test_bad_json_file(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{", encoding="utf-8")
    assert main(["solve", "--graph", str(p)]) == 2
    assert "line 1" in capsys.readouterr().err
