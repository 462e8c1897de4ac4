import csv
import json
from pathlib import Path

import numpy as np
import pytest

from gensec import cli

PROBLEMS = Path(__file__).resolve().parent.parent / "problems"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_fmt_round_trip():
    for v in [0.1, 1 / 3, 1e-300, 2.0**60, -0.0]:
        assert float(cli.fmt(v)) == v
    assert cli.fmt(-0.0) == "0.0"
    assert cli.fmt(None) == ""
    assert cli.fmt(True) == "true"


def test_solve_converges_with_trace(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    code, out, _ = run(capsys, "solve", PROBLEMS / "circle_line.json", "--x0", "1,2.1", "--x-1", "0.9,2.0", "--trace", trace)
    assert code == 0
    assert out.startswith("status=Converged")
    rows = list(csv.reader(trace.open()))
    assert rows[0] == cli.TRACE_HEADER
    assert [int(r[0]) for r in rows[1:]] == list(range(len(rows) - 1))
    assert float(rows[-1][1]) <= 1e-10
    assert float(rows[-1][7]) <= 1e-8


def test_solve_trace_err_blank_without_solution(tmp_path, capsys):
    doc = json.loads((PROBLEMS / "circle_line.json").read_text())
    del doc["known_solution"], doc["lipschitz_L"]
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    trace = tmp_path / "t.csv"
    code, _, _ = run(capsys, "solve", path, "--x0", "1,2.1", "--trace", trace)
    assert code == 0
    assert all(r[7] == "" for r in list(csv.reader(trace.open()))[1:])


def test_solve_max_iter(capsys):
    code, out, _ = run(capsys, "solve", PROBLEMS / "circle_line.json", "--x0", "1,2.1", "--x-1", "0.9,2.0", "--max-iter", "1")
    assert code == 2
    assert out.startswith("status=MaxIterations")


def test_solve_malformed_file(tmp_path, capsys):
    doc = json.loads((PROBLEMS / "circle_line.json").read_text())
    del doc["dimension"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "solve", path, "--x0", "1,2")
    assert code == 1
    assert "dimension" in err


def test_solve_unknown_field_rejected(tmp_path, capsys):
    doc = json.loads((PROBLEMS / "circle_line.json").read_text())
    doc["colour"] = "blue"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "solve", path, "--x0", "1,2")
    assert code == 1 and "colour" in err


def test_solve_bad_flags(capsys):
    assert run(capsys, "solve", PROBLEMS / "circle_line.json", "--x0", "1,2,3")[0] == 1
    assert run(capsys, "solve", PROBLEMS / "circle_line.json")[0] == 1
    assert run(capsys, "solve", PROBLEMS / "circle_line.json", "--x0", "1,2", "--b0", "magic")[0] == 1


def test_solve_infeasible_start(capsys):
    code, _, _ = run(capsys, "solve", PROBLEMS / "circle_line_box.json", "--x0", "0,5")
    assert code == 1


def test_bench_csv_json_equivalent(tmp_path, capsys):
    c_path, j_path = tmp_path / "r.csv", tmp_path / "r.json"
    assert run(capsys, "bench", "--out", c_path)[0] == 0
    assert run(capsys, "bench", "--out", j_path, "--format", "json")[0] == 0
    csv_rows = list(csv.DictReader(c_path.open()))
    json_rows = json.loads(j_path.read_text())
    assert len(csv_rows) == len(json_rows) > 0
    for c, j in zip(csv_rows, json_rows):
        assert list(c) == list(j)
        for key, val in j.items():
            if val is None:
                assert c[key] == ""
            elif isinstance(val, bool):
                assert c[key] == ("true" if val else "false")
            elif isinstance(val, (int, float)):
                assert float(c[key]) == val
            else:
                assert c[key] == val


def test_bench_unwritable(tmp_path, capsys):
    code, _, _ = run(capsys, "bench", "--out", tmp_path / "missing" / "r.csv")
    assert code == 1


def test_bench_seed_env(tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    monkeypatch.setenv("GENSEC_SEED", "11")
    run(capsys, "bench", "--out", a)
    monkeypatch.delenv("GENSEC_SEED")
    run(capsys, "bench", "--out", b, "--seed", "11")
    assert a.read_bytes() == b.read_bytes()


def test_check_lcp(capsys):
    code, out, _ = run(capsys, "check", PROBLEMS / "lcp_2d.json", "--x0=0.3,0.3", "--x-1=0.2,0.2", "--require-deterioration")
    assert code == 0
    assert "FAIL" not in out
    assert "tail_ratios=" in out


def test_check_guard(tmp_path, capsys):
    doc = json.loads((PROBLEMS / "lcp_2d.json").read_text())
    doc.pop("known_solution")
    path = tmp_path / "p.json"
    path.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "check", path, "--x0", "0.3,0.3", "--require-deterioration")
    assert code == 1


def test_check_circle_line_deterioration(capsys):
    code, out, _ = run(capsys, "check", PROBLEMS / "circle_line.json", "--x0", "1,2.1", "--x-1", "0.9,2.0", "--require-deterioration")
    det = [line for line in out.splitlines() if " deterioration " in line]
    assert det and all(" PASS" in line for line in det)
    assert code == 0


def test_project_example(capsys):
    code, out, _ = run(capsys, "project", "--set", '{"box": {"lower": [0, 0], "upper": [1, 1]}}', "--v", "2,0.5", "--u", "1,0.5", "--w0", "1,0.5", "--theta", "0.25")
    assert code == 0
    lines = dict(line.split("=", 1) for line in out.splitlines())
    np.testing.assert_allclose(cli.parse_vector(lines["w_plus"]), [1.0, 0.5])
    assert float(lines["sup_inner"]) <= float(lines["threshold"]) + 1e-12


def test_project_inside(capsys):
    code, out, _ = run(capsys, "project", "--set", '{"ball": {"center": [0, 0], "radius": 1}}', "--v", "0.2,0.1", "--w0", "1,0")
    assert code == 0
    assert "w_plus=0.2,0.1" in out and "inner_iterations=0" in out


def test_project_w0_outside(capsys):
    code, _, _ = run(capsys, "project", "--set", '{"box": {"lower": [0, 0], "upper": [1, 1]}}', "--v", "2,0.5", "--w0", "3,0.5")
    assert code == 1


def test_solve_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        run(capsys, "solve", PROBLEMS / "circle_line_box.json", "--x0=-0.06,2.92", "--trace", p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
