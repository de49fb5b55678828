import json
import os

import numpy as np
import pytest

from graphscatter.cli import main


def run(args, tmp_path):
    return main(args + ["--out-dir", str(tmp_path)])


def test_single_csv_deterministic(tmp_path):
    assert run(["single", "--family", "AC:4", "--points", "41"], tmp_path) == 0
    data1 = (tmp_path / "single_AC(4).csv").read_bytes()
    sidecar = json.loads((tmp_path / "single_AC(4).params.json").read_text())
    assert sidecar["family"] == "AC:4"
    assert run(["single", "--family", "AC:4", "--points", "41"], tmp_path) == 0
    assert (tmp_path / "single_AC(4).csv").read_bytes() == data1


def test_single_rejects_empty_scan(tmp_path):
    with pytest.raises(SystemExit):
        run(["single", "--family", "AC:4", "--points", "0"], tmp_path)


def test_single_csv_content(tmp_path):
    run(["single", "--family", "C:10:5", "--points", "21"], tmp_path)
    rows = (tmp_path / "single_C(10,5).csv").read_text().strip().splitlines()
    assert rows[0] == "E,m,n,Re_t,Im_t,abs_t2"
    # unitarity row sums from the emitted file
    data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    for e in np.unique(data[:, 0]):
        sel = data[(data[:, 0] == e) & (data[:, 2] == 1)]
        assert abs(sel[:, 5].sum() - 1.0) < 1e-9


def test_bound_counts_cli(tmp_path, capsys):
    assert run(["bound", "--family", "AC:6"], tmp_path) == 0
    out = capsys.readouterr().out
    assert "n_ev=2 n_c=2 n_h=0" in out
    payload = json.loads((tmp_path / "bound_AC(6).json").read_text())
    assert payload["counts"] == {"n_ev": 2, "n_c": 2, "n_h": 0}
    assert run(["bound", "--family", "Line:7"], tmp_path) == 0
    out = capsys.readouterr().out
    assert "n_ev=0 n_c=0 n_h=2" in out
    assert run(["bound", "--family", "C:4:2"], tmp_path) == 0
    assert "n_ev=2 n_c=1 n_h=0" in capsys.readouterr().out


def test_graph_file_input(tmp_path):
    from graphscatter import make_family, family_from_string, write_graph_file
    g = make_family(family_from_string("AL:3"))
    gpath = tmp_path / "al3.graph"
    write_graph_file(g, gpath)
    assert run(["bound", "--graph", str(gpath)], tmp_path) == 0


def test_two_grid_emits(tmp_path):
    assert run(["two", "--family", "AL:4", "--p1", "-1.0472", "--p2",
                "-0.4488", "--points", "15", "--nodes", "512"], tmp_path) == 0
    rows = (tmp_path / "two_AL(4).csv").read_text().strip().splitlines()
    assert rows[0] == "k1,k2,ReR,ImR"
    assert len(rows) > 100


def test_two_onshell_emits(tmp_path):
    assert run(["two", "--family", "AL:4", "--p1", "-1.0472", "--p2",
                "-0.4488", "--onshell", "--points", "31", "--nodes", "512"],
               tmp_path) == 0
    assert (tmp_path / "onshell_AL(4).csv").exists()


def test_budget_cli(tmp_path):
    assert run(["budget", "--family", "AC:4", "--chi", "2", "--points", "5",
                "--nodes", "1024", "--band-cutoff", "1.5"], tmp_path) == 0
    rows = (tmp_path / "budget_AC(4)_chi2.csv").read_text().splitlines()
    data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    assert np.all(np.abs(data[:, 5] - 1.0) < 2e-2)


def test_xsec_cli(tmp_path):
    assert run(["xsec", "--family", "AC:4", "--e1", "0.3", "--e2", "1.1",
                "--deltas", "0.05", "--nodes", "1024"], tmp_path) == 0
    rows = (tmp_path / "xsec_AC(4).csv").read_text().splitlines()
    delta, sigma, re_i, im_i = (float(x) for x in rows[1].split(","))
    assert 0.0 <= sigma <= 4.0


def test_oracle_cli(tmp_path):
    rc = run(["oracle", "--family", "AC:4", "--p0", "-0.7853981633974483",
              "--rail-length", "300"], tmp_path)
    assert rc == 0
    verdict = json.loads((tmp_path / "oracle_AC(4).json").read_text())
    assert verdict["max_abs_error"] < 2e-2


def test_verify_cli(tmp_path):
    rc = run(["verify", "--family", "AC:4", "--eps", "1e-3",
              "--nodes", "4096"], tmp_path)
    assert rc == 0
    verdict = json.loads((tmp_path / "verify_AC(4).json").read_text())
    assert verdict["passed"]
    assert verdict["checks"]["optical_theorem"]["value"] <= 1e-3


def test_config_file_merge(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[run]\npoints = 11\nband-cutoff = 1.2\n")
    assert run(["single", "--family", "AC:4", "--config", str(cfg)],
               tmp_path) == 0
    rows = (tmp_path / "single_AC(4).csv").read_text().strip().splitlines()
    data = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    assert np.unique(data[:, 0]).size == 11
    assert abs(data[:, 0].min() + 1.2) < 1e-12


def test_config_rejects_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 3\n")
    with pytest.raises(SystemExit):
        run(["single", "--family", "AC:4", "--config", str(cfg)], tmp_path)
