import csv
import json
import math

import pytest

from fracbvp.cli import (EXIT_HYPOTHESIS, EXIT_NONCONVERGENCE, EXIT_OK, main,
                         parse_alphas, parse_nonlinearity, parse_weight, run)
from fracbvp.errors import HypothesisError


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_parse_weight_specs():
    assert parse_weight("constant:2.5")(0.1) == 2.5
    hp = parse_weight("power_offset:4:0.5")
    assert hp(0.75) == pytest.approx(0.25 ** 4)
    poly = parse_weight("polynomial:1,0,1")
    assert poly(1.0) == pytest.approx(2.0)
    with pytest.raises(HypothesisError):
        parse_weight("gaussian:1")
    with pytest.raises(HypothesisError):
        parse_weight("constant:-1")


def test_parse_nonlinearity_specs():
    f = parse_nonlinearity("power:1:0.5")
    assert f.f(4.0) == pytest.approx(2.0)
    g = parse_nonlinearity("affine_power:2:0.5")
    assert g.f(1.0) == pytest.approx(4.0)
    with pytest.raises(HypothesisError):
        parse_nonlinearity("exp:1")


def test_parse_alphas_schedule():
    vals = parse_alphas("1.5:2.0:0.01")
    assert len(vals) == 51
    assert vals[0] == 1.5 and vals[-1] == 2.0
    assert parse_alphas("1.5,1.9,2.0") == [1.5, 1.9, 2.0]


def test_eig_command_writes_artifacts(tmp_path):
    out = tmp_path / "run"
    rc = main(["eig", "--alpha", "2", "--weight", "constant:1",
               "--n", "200", "--out", str(out)])
    assert rc == EXIT_OK
    rows = _read_csv(out / "eig.csv")
    assert rows[0] == ["alpha", "lambda1", "residual", "iterations"]
    assert float(rows[1][1]) == pytest.approx(math.pi ** 2, rel=1e-4)
    phi = _read_csv(out / "phi1.csv")
    assert phi[0] == ["t", "value"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "eig"
    assert manifest["outputs"] == ["eig.csv", "phi1.csv"]
    assert "timestamp" in manifest and "versions" in manifest


def test_bounds_schema(tmp_path):
    out = tmp_path / "b"
    rc = main(["bounds", "--alpha", "2", "--weight", "constant:1",
               "--out", str(out)])
    assert rc == EXIT_OK
    rows = _read_csv(out / "bounds.csv")
    assert rows[0] == ["alpha", "lower", "upper"]
    assert float(rows[1][1]) == 8.0
    assert float(rows[1][2]) == pytest.approx(120.0, rel=1e-9)


def test_sweep_schema_and_containment(tmp_path):
    out = tmp_path / "s"
    rc = main(["sweep", "--alphas", "1.8:2.0:0.1", "--weight", "constant:1",
               "--n", "100", "--out", str(out)])
    assert rc == EXIT_OK
    rows = _read_csv(out / "sweep.csv")
    assert rows[0] == ["alpha", "lambda1", "lower_bound", "upper_bound",
                       "residual", "iterations"]
    assert len(rows) == 4
    for row in rows[1:]:
        assert float(row[2]) <= float(row[1]) <= float(row[3])


def test_solve_sub_command(tmp_path):
    out = tmp_path / "sub"
    rc = main(["solve-sub", "--alpha", "2", "--weight", "constant:1",
               "--nonlin", "power:1:0.5", "--n", "200", "--out", str(out)])
    assert rc == EXIT_OK
    report = json.loads((out / "solve_report.json").read_text())
    assert report["from_side"] == "both_agree"
    assert report["residual"] <= 1e-8
    assert _read_csv(out / "solution.csv")[0] == ["t", "value"]


def test_solve_super_command(tmp_path):
    out = tmp_path / "sup"
    rc = main(["solve-super", "--alpha", "2", "--weight", "constant:1",
               "--nonlin", "power:1:2", "--n", "200", "--out", str(out)])
    assert rc == EXIT_OK
    report = json.loads((out / "newton_report.json").read_text())
    assert report["converged"] and report["positive"]
    assert not report["degenerate"]


def test_nonexist_command(tmp_path):
    out = tmp_path / "ne"
    rc = main(["nonexist", "--alpha", "2", "--weight", "constant:1",
               "--nonlin", "power:1:1", "--n", "150", "--trials", "2",
               "--out", str(out)])
    assert rc == EXIT_OK
    probe = json.loads((out / "probe.json").read_text())
    assert probe["regime"] in ("super", "sub", "borderline")
    rows = _read_csv(out / "trials.csv")
    assert rows[0] == ["trial", "amplitude", "shape", "outcome", "iterations",
                      "final_norm"]


def test_henon_shoot_command(tmp_path):
    out = tmp_path / "shoot"
    rc = main(["henon-shoot", "--l", "4", "--p", "2", "--zeta", "1",
               "--beta-min", "50", "--beta-max", "300",
               "--scan-points", "80", "--out", str(out)])
    assert rc == EXIT_OK
    rows = _read_csv(out / "crossings.csv")
    assert rows[0] == ["beta", "z", "morse_index", "w_end_sign", "z_prime"]
    assert len(rows) - 1 >= 3


def test_henon_continue_command(tmp_path):
    out = tmp_path / "cont"
    rc = main(["henon-continue", "--l", "4", "--p", "2", "--zeta", "1",
               "--beta-min", "50", "--beta-max", "300", "--scan-points", "80",
               "--target-alpha", "1.99", "--step", "0.005", "--n", "200",
               "--out", str(out)])
    assert rc == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seeds"] >= 3
    for k, trace in enumerate(summary["traces"]):
        assert trace["status"] == "completed"
        assert trace["end_alpha"] == 1.99
        assert trace["scale_exponent"] == 6.0
        assert (out / f"trace_{k}.jsonl").exists()
        assert _read_csv(out / f"endpoint_{k}.csv")[0] == ["t", "value"]
    seps = summary["pairwise_sup_distances"]
    assert all(seps[i][j] > 0.01 for i in range(3) for j in range(3) if i != j)


def test_hypothesis_violation_exit_code(tmp_path):
    out = tmp_path / "bad"
    rc = main(["eig", "--alpha", "3", "--weight", "constant:1",
               "--out", str(out)])
    assert rc == EXIT_HYPOTHESIS
    error = json.loads((out / "error.json").read_text())
    assert error["error"] == "hypothesis_violation"
    assert error["hypothesis"] == "order-range"
    assert not (out / "manifest.json").exists()


def test_wrong_regime_exit_code(tmp_path):
    out = tmp_path / "regime"
    rc = main(["solve-sub", "--alpha", "2", "--weight", "constant:1",
               "--nonlin", "power:1:2", "--n", "100", "--out", str(out)])
    assert rc == EXIT_HYPOTHESIS
    error = json.loads((out / "error.json").read_text())
    assert error["hypothesis"] == "sublinear-ratio-condition"


def test_nonconvergence_exit_code(tmp_path):
    out = tmp_path / "noconv"
    rc = main(["eig", "--alpha", "2", "--weight", "constant:1", "--n", "100",
               "--tol", "1e-16", "--maxit", "3", "--out", str(out)])
    assert rc == EXIT_NONCONVERGENCE
    error = json.loads((out / "error.json").read_text())
    assert error["error"] == "non_convergence"


def test_tabulated_weight_from_csv(tmp_path):
    import numpy as np
    from fracbvp.grid import GridFunction, make_mesh
    table = GridFunction.sample(make_mesh(16, "uniform"),
                                lambda t: 1.0 + t * (1.0 - t))
    wpath = tmp_path / "weight.csv"
    table.to_csv(wpath)
    out = tmp_path / "tab"
    rc = main(["eig", "--alpha", "1.8", "--weight", f"tabulated:{wpath}",
               "--n", "100", "--out", str(out)])
    assert rc == EXIT_OK
    rows = _read_csv(out / "eig.csv")
    lam = float(rows[1][1])
    # weight between 1 and 1.25 squeezes lambda1 between the scaled constants
    assert 0.0 < lam < 10.0


def test_config_file_with_flag_override(tmp_path):
    config = {
        "command": "eig",
        "problem": {"alpha": 2.0, "weight": "constant:1"},
        "numerics": {"n": 100},
        "output": str(tmp_path / "from_config"),
    }
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(config))
    rc = main(["--config", str(cfg)])
    assert rc == EXIT_OK
    assert (tmp_path / "from_config" / "eig.csv").exists()
    # flag overrides the config mesh size
    rc = main(["--config", str(cfg), "--n", "150",
               "--out", str(tmp_path / "override")])
    assert rc == EXIT_OK
    m = json.loads((tmp_path / "override" / "manifest.json").read_text())
    assert m["config"]["numerics"]["n"] == 150


def test_rerun_byte_reproduces_csvs(tmp_path):
    args = ["eig", "--alpha", "1.7", "--weight", "power_offset:4:0.5",
            "--n", "150"]
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(args + ["--out", str(out1)]) == EXIT_OK
    assert main(args + ["--out", str(out2)]) == EXIT_OK
    for name in ("eig.csv", "phi1.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
