import csv
import io
import json

import pytest
from numpy.testing import assert_allclose

from rfim_morita.cli import parse_sweep, run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def test_solve_reference_json(capsys):
    code, out, _ = call(capsys, "solve", "--beta", "2", "--eps", "0.3", "--h0", "0", "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert set(rec) == {"spec", "payload", "version", "wall_time_s"}
    cols = rec["payload"]["columns"]
    rows = [dict(zip(cols, r)) for r in rec["payload"]["rows"]]
    assert_allclose([r["m"] for r in rows], [-0.9129341576395639, 0.0, 0.9129341576395639], atol=1e-13)
    top = rows[-1]
    assert_allclose(top["lambda"], -0.562575369870244, rtol=1e-12)
    assert top["metastable"] is True


def test_gap_subcritical_is_zero(capsys):
    code, out, _ = call(capsys, "gap", "--beta", "0.9", "--eps", "0.3")
    assert code == 0
    rec = json.loads(out)
    assert rec["payload"]["rows"][0][0] == 0.0


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--beta", "2", "--eps", "0.3"],
        ["landscape", "--beta", "2", "--eps", "0.3", "--lambda", "-0.5"],
        ["neutral-set", "--beta", "2", "--eps", "0.3", "--points", "7"],
        ["finite-n", "--beta", "2", "--eps", "0.3", "--n", "12", "--table", "joint-law"],
        ["finite-n", "--beta", "2", "--eps", "0.3", "--n", "40", "--table", "profile", "--bias=-0.1,0,0.1"],
        ["mc", "--beta", "1", "--eps", "0.3", "--n", "3", "--sweeps", "200", "--burn-in", "10"],
        ["solve", "--beta", "2", "--eps", "0.3", "--sweep", "h0=-0.1:0.1:3", "--sweep", "eps=0.1,0.2"],
    ],
)
def test_csv_and_json_encode_same_values(capsys, argv):
    code, js, _ = call(capsys, *argv, "--format", "json")
    assert code == 0
    code, cs, _ = call(capsys, *argv, "--format", "csv")
    assert code == 0
    payload = json.loads(js)["payload"]
    header, rows = parse_csv(cs)
    assert header == payload["columns"]
    assert len(rows) == len(payload["rows"])
    for crow, jrow in zip(rows, payload["rows"]):
        for c, j in zip(crow, jrow):
            if isinstance(j, bool):
                assert c == ("true" if j else "false")
            elif isinstance(j, (int, float)):
                assert float(c) == j  # 17 significant digits round-trip exactly
            elif j is None:
                assert c == ""
            else:
                assert c == j


def test_sweep_rows_in_row_major_order(capsys):
    code, out, _ = call(capsys, "gap", "--beta", "2", "--eps", "0.3", "--sweep", "beta=1.5,2,2.5", "--sweep", "eps=0.1,0.2", "--format", "csv")
    assert code == 0
    _, rows = parse_csv(out)
    assert [(float(r[0]), float(r[1])) for r in rows] == [(b, e) for b in (1.5, 2, 2.5) for e in (0.1, 0.2)]


def test_phase_diagram_root_count(capsys):
    code, out, _ = call(capsys, "solve", "--eps", "0", "--beta", "1", "--sweep", "beta=0.5,0.9,1.1,3", "--format", "csv")
    _, rows = parse_csv(out)
    counts = {float(r[0]): int(r[1]) for r in rows}
    assert counts == {0.5: 1, 0.9: 1, 1.1: 3, 3.0: 3}


def test_output_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(["neutral-set", "--beta", "2", "--eps", "0.3", "--points", "20", "--format", "csv", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_defaults_and_override(capsys, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("# reference point\nbeta = 2\neps = 0.3\nh0 = 0.2\n")
    _, out, _ = call(capsys, "solve", "--config", str(conf), "--h0", "0", "--format", "csv")
    _, rows = parse_csv(out)
    assert int(rows[0][0]) == 3


@pytest.mark.parametrize(
    "argv, flag",
    [
        (["solve", "--eps", "0.3"], "--beta"),
        (["solve", "--beta", "2", "--eps", "0.3", "--sweep", "h0=1:0:5"], "--sweep"),
        (["solve", "--beta", "2", "--eps", "0.3", "--sweep", "bogus=1,2"], "--sweep"),
        (["solve", "--beta", "2", "--eps", "0.3", "--unknown", "1"], "--unknown"),
        (["solve", "--beta", "-2", "--eps", "0.3"], "beta"),
    ],
)
def test_invalid_arguments_exit_2(capsys, argv, flag):
    code, _, err = call(capsys, *argv)
    assert code == 2
    assert flag in err


def test_grid_too_large_exit_3(capsys):
    code, _, _ = call(capsys, "gap", "--beta", "2", "--eps", "0.3", "--sweep", "beta=1:2:1001", "--sweep", "eps=0:1:1001")
    assert code == 3


def test_resource_cap_exit_3(capsys, monkeypatch):
    monkeypatch.setenv("RFIM_MAX_N_JOINT", "10")
    code, _, _ = call(capsys, "finite-n", "--beta", "2", "--eps", "0.3", "--n", "11")
    assert code == 3


def test_verify_single_suite(capsys):
    code, out, err = call(capsys, "verify", "--suite", "core")
    assert code == 0
    assert "[PASS]" in err
    assert json.loads(out)["payload"]["rows"][0][1] is True


def test_parse_sweep_forms():
    assert parse_sweep("beta=0:1:3") == ("beta", [0.0, 0.5, 1.0])
    assert parse_sweep("n=10,20") == ("n", [10, 20])
