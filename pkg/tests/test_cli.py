import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from anticonc import __version__
from anticonc.cli import (
    EXIT_CONFIG,
    EXIT_IO,
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_VERIFY,
    SEED_ENV,
    _fmt_float,
    dump_json,
    main,
)
from anticonc.core import ModelParams
from anticonc.metrics import theorem1_bound


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def run_json(argv, capsys):
    code, out, _ = run(argv, capsys)
    assert code == EXIT_OK
    return json.loads(out)


def test_run_brickwork_report(capsys):
    doc = run_json(["run", "--n", "4", "--depth", "6"], capsys)
    rep = doc["report"]
    assert doc["version"] == __version__ and doc["seed"] == 0
    assert doc["config"]["n"] == 4 and doc["config"]["depth"] == 6
    assert rep["eps_ac"] < 1 and rep["theorem1_holds"] is True
    assert rep["eps_state"] <= theorem1_bound(rep["eps_ac"], ModelParams(4, 2)) + 1e-9
    assert rep["eps_prime"] == theorem1_bound(rep["eps_ac"], ModelParams(4, 2))
    assert rep["architecture"] == {"kind": "brickwork", "n": 4, "q": 2, "depth": 6,
                                   "boundary": "open"}


def test_run_single_pair_layout(tmp_path, capsys):
    layout = tmp_path / "pair.json"
    layout.write_text(json.dumps({"n": 2, "q": 2, "layers": [[[0, 1]]]}))
    rep = run_json(["run", "--arch", "file", "--file", str(layout)], capsys)["report"]
    assert rep["Z_nu"] == pytest.approx(0.1, abs=1e-12)
    assert rep["eps_state"] == pytest.approx(0.0, abs=1e-10)


def test_run_csv_and_unitary_diagnostics(capsys):
    code, out, _ = run(["run", "--n", "4", "--depth", "5", "--format", "csv",
                        "--unitary-diagnostics"], capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1
    row = rows[0]
    assert row["max_on_diagonal"] == "true"
    assert float(row["unitary_design_error"]) >= float(row["eps_ac"])


def test_invalid_layout_file(tmp_path, capsys):
    layout = tmp_path / "bad.json"
    layout.write_text('{"n": 3, "q": 2, "layers": [[[0, 1], [1, 2]]]}')
    out = tmp_path / "report.json"
    code, stdout, err = run(["run", "--arch", "file", "--file", str(layout), "--out", str(out)],
                            capsys)
    assert code == EXIT_CONFIG
    assert "more than one pair" in err
    assert not out.exists() and stdout == ""
    layout.write_text('{"n": 3, "q": 2, "layers": [[[0, 1]]')
    code, _, err = run(["run", "--arch", "file", "--file", str(layout), "--out", str(out)], capsys)
    assert code == EXIT_CONFIG and "line 1" in err
    assert not out.exists()


def test_io_errors(tmp_path, capsys):
    code, _, _ = run(["run", "--arch", "file", "--file", str(tmp_path / "missing.json")], capsys)
    assert code == EXIT_IO
    code, _, _ = run(["run", "--n", "3", "--depth", "1", "--out",
                      str(tmp_path / "no" / "such" / "dir.json")], capsys)
    assert code == EXIT_IO


def test_resource_caps(capsys):
    assert run(["run", "--n", "14", "--depth", "1", "--unitary-diagnostics"], capsys)[0] == EXIT_RESOURCE
    assert run(["run", "--n", "6", "--depth", "1", "--unitary-diagnostics",
                "--cap-n-transfer", "5"], capsys)[0] == EXIT_RESOURCE
    assert run(["verify", "--n", "11", "--depth", "1"], capsys)[0] == EXIT_RESOURCE


@pytest.mark.parametrize("argv", [
    ["run", "--n", "4"],
    ["run", "--depth", "3"],
    ["run", "--n", "3", "--depth", "2", "--boundary", "periodic"],
    ["run", "--n", "3", "--depth", "2", "--samples", "1"],
    ["run", "--n", "3", "--depth", "2", "--workers", "0"],
    ["run", "--n", "3", "--depth", "-1"],
    ["run", "--n", "3", "--q", "1", "--depth", "2"],
    ["sweep", "--n", "3", "--depth-range", "1-4"],
    ["run", "--n", "3", "--depth", "2", "--file", "x.json"],
])
def test_config_errors(argv, capsys):
    assert run(argv, capsys)[0] == EXIT_CONFIG


def test_distinct_exit_codes():
    assert len({EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_VERIFY, EXIT_IO}) == 5


def test_empty_sweep(capsys):
    code, out, _ = run(["sweep", "--n", "4", "--depth-range", "5:3", "--format", "csv"], capsys)
    assert code == EXIT_OK
    assert out.strip().split(",")[:4] == ["n", "depth", "Z_nu", "eps_ac"]
    assert len(out.strip().splitlines()) == 1


def test_sweep_rows_and_onset(capsys):
    code, out, _ = run(["sweep", "--n-list", "6,8", "--depth-range", "1:40", "--format", "csv"],
                       capsys)
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 80
    by_n = {n: [r for r in rows if r["n"] == str(n)] for n in (6, 8)}
    assert by_n[8][0]["d_star"] == "3"
    for n, rs in by_n.items():
        assert [int(r["depth"]) for r in rs] == list(range(1, 41))
        assert float(rs[-1]["eps_ac"]) < 0.01
        d_star = int(rs[0]["d_star"])
        assert float(rs[d_star - 1]["eps_ac"]) <= 1 < float(rs[d_star - 2]["eps_ac"])
        for r in rs:
            if float(r["eps_ac"]) < 1:
                assert float(r["eps_state"]) <= float(r["eps_prime"]) + 1e-9
            else:
                assert r["eps_prime"] == ""


def test_sweep_json_and_unitary_columns(capsys):
    doc = run_json(["sweep", "--n", "4", "--depth-range", "0:3", "--unitary-diagnostics"], capsys)
    assert doc["d_star"] == {"4": 0}
    assert [r["depth"] for r in doc["rows"]] == [0, 1, 2, 3]
    assert all(r["max_on_diagonal"] for r in doc["rows"][1::2])


def test_sweep_file_architecture(tmp_path, capsys):
    layout = tmp_path / "chain.json"
    layout.write_text(json.dumps({"n": 3, "q": 3, "layers": [[[0, 1]], [[1, 2]], [[0, 2]]]}))
    doc = run_json(["sweep", "--arch", "file", "--file", str(layout), "--depth-range", "0:3"],
                   capsys)
    assert len(doc["rows"]) == 4
    assert run(["sweep", "--arch", "file", "--file", str(layout), "--depth-range", "0:4"],
               capsys)[0] == EXIT_CONFIG


def test_sweep_workers_do_not_change_output(capsys):
    argv = ["sweep", "--n-list", "4,5,6", "--depth-range", "0:6", "--format", "csv"]
    serial = run(argv, capsys)[1]
    parallel = run(argv + ["--workers", "2"], capsys)[1]
    assert serial == parallel


def test_verify_passes(capsys):
    code, out, _ = run(["verify", "--n", "4", "--depth", "5", "--samples", "10000"], capsys)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["passed"] and len(doc["checks"]) == 1 + 16 + 3
    assert all(c["samples"] == 10000 for c in doc["checks"])


def test_verify_detects_corrupted_weight(capsys):
    code, out, err = run(["verify", "--n", "4", "--depth", "5", "--samples", "10000",
                          "--fault-gamma-scale", "1.1"], capsys)
    assert code == EXIT_VERIFY
    assert "verification failed" in err
    assert not json.loads(out)["passed"]


def test_verify_reproducible_bytes(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"]
    base = ["verify", "--n", "3", "--depth", "2", "--samples", "1500", "--seed", "5",
            "--format", "csv"]
    for p, extra in zip(paths, [[], [], ["--workers", "2"]]):
        assert run(base + ["--out", str(p)] + extra, capsys)[0] == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes() == paths[2].read_bytes()


def test_seed_precedence(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(SEED_ENV, "7")
    doc = run_json(["run", "--arch", "alltoall", "--n", "5", "--depth", "3"], capsys)
    assert doc["seed"] == 7 and doc["report"]["architecture"]["seed"] == 7
    doc = run_json(["run", "--arch", "alltoall", "--n", "5", "--depth", "3", "--seed", "3"], capsys)
    assert doc["seed"] == 3
    monkeypatch.setenv(SEED_ENV, "seven")
    assert run(["run", "--n", "5", "--depth", "3"], capsys)[0] == EXIT_CONFIG


def test_config_file_overrides_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"depth_range": [2, 4], "n_list": [4, 6], "q": 3}))
    doc = run_json(["sweep", "--n", "8", "--depth", "9", "--config", str(cfg)], capsys)
    assert doc["config"]["q"] == 3
    assert sorted({(r["n"], r["depth"]) for r in doc["rows"]}) == [
        (4, 2), (4, 3), (4, 4), (6, 2), (6, 3), (6, 4)]
    cfg.write_text(json.dumps({"depht": 3}))
    assert run(["run", "--n", "4", "--depth", "2", "--config", str(cfg)], capsys)[0] == EXIT_CONFIG


def test_float_format():
    assert _fmt_float(0.1) == "0.10000000000000001"
    assert _fmt_float(1.0) == "1.0"
    assert dump_json({"a": [1.0, None, True]}) == '{\n  "a": [\n    1.0,\n    null,\n    true\n  ]\n}'
    with pytest.raises(ValueError):
        _fmt_float(float("nan"))


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_round_trip(x):
    assert float(_fmt_float(x)) == x
    assert json.loads(dump_json({"v": x}))["v"] == x
    assert json.loads(dump_json([np.float64(x)]))[0] == x


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "anticonc", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == f"anticonc {__version__}"
