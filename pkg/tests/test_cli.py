from __future__ import annotations

import json

import pytest

from conftest import FIXTURES, GOLDEN
from pgas_ie import __version__, cli
from pgas_ie.reports import validate


def _fx(name: str) -> str:
    return str(FIXTURES / name)


def test_version(capsys):
    with pytest.raises(SystemExit) as ei:
        cli.main(["--version"])
    assert ei.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_parse(capsys):
    assert cli.main(["parse", _fx("basic.pg")]) == 0
    assert "ok (4 declarations, 1 procedures)" in capsys.readouterr().out
    assert cli.main(["parse", "--print", _fx("basic.pg")]) == 0
    assert "forall i in B.domain {" in capsys.readouterr().out


def test_parse_errors(tmp_path, capsys):
    bad = tmp_path / "bad.pg"
    bad.write_text("proc main( {")
    assert cli.main(["parse", str(bad)]) == 2
    assert "bad.pg: 1:" in capsys.readouterr().err
    assert cli.main(["parse", str(tmp_path / "missing.pg")]) == 2


def test_analyze_report(tmp_path, capsys):
    out = tmp_path / "a.json"
    assert cli.main(["analyze", _fx("invalid_path.pg"), "--report", str(out)]) == 0
    data = json.loads(out.read_text())
    validate("analysis_report", data)
    assert data["candidates"][0]["decision"] == "optimize"
    assert data["invalid_paths"][0]["path"] == ["main", "step"]


def test_analyze_to_stdout(capsys):
    assert cli.main(["analyze", _fx("basic.pg")]) == 0
    validate("analysis_report", json.loads(capsys.readouterr().out))


def test_require_opt_exit_code(capsys):
    assert cli.main(["analyze", _fx("neg_v4.pg"), "--require-opt"]) == 1
    err = capsys.readouterr().err
    assert "V4" in err and "reverted" in err
    assert cli.main(["analyze", _fx("basic.pg"), "--require-opt"]) == 0


def test_transform_golden(tmp_path):
    out = tmp_path / "l4.pg"
    assert cli.main(["transform", _fx("basic.pg"), "-o", str(out)]) == 0
    assert out.read_text() == (GOLDEN / "basic.transformed.pg").read_text()


def test_transform_revert_all(capsys):
    assert cli.main(["transform", _fx("basic.pg"), "--revert-all"]) == 0
    text = capsys.readouterr().out
    assert "doInspector" not in text and "C[i] = A[B[i]];" in text


def test_run_modes(tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert cli.main(["run", _fx("invalid_path.pg"), "--locales", "2", "--report", str(rep)]) == 0
    printed = capsys.readouterr().out.strip()
    data = json.loads(rep.read_text())
    validate("run_report", data)
    assert data["mode"] == "opt" and data["runs"]["optimized"]["sites"]["0"]["skipped_runs"] == 1
    assert cli.main(["run", _fx("invalid_path.pg"), "--locales", "2", "--mode", "unopt"]) == 0
    assert capsys.readouterr().out.strip() == printed


def test_run_cost_preset(tmp_path):
    rep = tmp_path / "r.json"
    assert cli.main(["run", _fx("basic.pg"), "--mode", "diff", "--cost", "ibv", "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert data["cost"]["c_remote"] == 400 and data["equivalent"] is True


def test_bad_cost_preset():
    with pytest.raises(SystemExit) as ei:
        cli.main(["run", _fx("basic.pg"), "--cost", "token-ring"])
    assert ei.value.code == 2


def test_runtime_abort_exit_code(tmp_path, capsys):
    p = tmp_path / "oob.pg"
    p.write_text("domain D = block 0..3;\narray A over D : int;\nproc main() {\n  A[9] = 1;\n}\n")
    assert cli.main(["run", str(p)]) == 3
    assert "out of bounds" in capsys.readouterr().err


def test_diff_all_locales(tmp_path, capsys):
    rep = tmp_path / "d.json"
    assert cli.main(["diff", _fx("staleness.pg"), "--locales", "1,2,4,8", "--report", str(rep)]) == 0
    out = capsys.readouterr().out
    assert out.count("equivalent") == 4
    reps = json.loads(rep.read_text())
    assert [r["locales"] for r in reps] == [1, 2, 4, 8]
    for r in reps:
        validate("run_report", r)
        assert r["runs"]["optimized"]["sites"]["0"]["inspector_runs"] == 2


def test_diff_reports_inequivalence(monkeypatch, capsys):
    monkeypatch.setattr(cli, "compare_outputs", lambda a, b: ["array C differs"])
    assert cli.main(["diff", _fx("basic.pg"), "--locales", "2"]) == 4
    assert "array C differs" in capsys.readouterr().err


def test_bench(tmp_path, capsys):
    rep = tmp_path / "b.json"
    assert cli.main(["bench", "--app", "cg", "--dataset", "random:n=100,nnz=800", "--locales", "2,4",
                     "--repetitions", "3", "--report", str(rep)]) == 0
    assert "speedup" in capsys.readouterr().out
    data = json.loads(rep.read_text())
    validate("experiment_report", data)
    assert [r["inspector_runs"] for r in data["rows"]] == [1, 1]


def test_bench_pagerank_from_mtx(tmp_path, capsys):
    mtx = tmp_path / "g.mtx"
    mtx.write_text("%%MatrixMarket matrix coordinate pattern general\n3 3 2\n1 2\n2 3\n")
    assert cli.main(["bench", "--app", "pagerank", "--dataset", str(mtx), "--locales", "2"]) == 0
    assert "g.mtx" in capsys.readouterr().out


def test_bench_bad_dataset(capsys):
    assert cli.main(["bench", "--app", "cg", "--dataset", "random:n=2,nnz=9"]) == 2
    assert "dataset" in capsys.readouterr().err
