import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from selfnorm.cli import main as cli_main
from selfnorm.harness import (
    ConfigError,
    ExperimentConfig,
    run_bandit,
    run_coverage,
    run_onedim_diagnostic,
    run_supermartingale,
    run_widths,
    simulate_stream,
)
from selfnorm.radii import Method, RadiusConfig


def _cfg(**kw):
    base = dict(
        experiment="coverage",
        replicas=20,
        horizon=40,
        seed=123,
        kernel={"family": "Linear", "input_dim": 5},
        noise={"family": "RescaledUniform"},
    )
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def test_config_round_trip(tmp_path):
    cfg = _cfg(radius={"method": "FixedBennett", "delta": 0.05})
    d = cfg.to_dict()
    cfg2 = ExperimentConfig.from_dict(d)
    assert cfg2.to_dict() == d
    p = tmp_path / "c.json"
    p.write_text(json.dumps(d))
    cfg3 = ExperimentConfig.from_json(p)
    assert cfg3.to_dict() == d


def test_config_defaults_match_experiments():
    cfg = ExperimentConfig()
    assert cfg.radius.rho == 0.05
    assert cfg.radius.delta == 0.1
    assert cfg.radius.theta == 1.0


def test_config_rejects_bad_input(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "nope"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"replicas": 0})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(bad)


def test_simulate_stream_deterministic():
    cfg = _cfg()
    a = simulate_stream(cfg, 3)
    b = simulate_stream(cfg, 3)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    c = simulate_stream(cfg, 4)
    assert not np.array_equal(a[0], c[0])


def test_run_coverage_artifacts(tmp_path, monkeypatch):
    monkeypatch.setenv("SELFNORM_THREADS", "1")
    cfg = _cfg(output_dir=str(tmp_path), replicas=15, horizon=30)
    report = run_coverage(cfg)
    assert report["pass"] in (True, False)
    assert (tmp_path / "config-echo.json").exists()
    assert (tmp_path / "report.json").exists()
    with open(tmp_path / "coverage.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 15 * 30
    assert set(rows[0]) == {"replica", "t", "s_t", "radius", "nu", "violated"}
    # CSV round-trips numerically
    r0 = rows[0]
    s, g2, logdet, resid = simulate_stream(cfg, int(r0["replica"]))
    assert float(r0["s_t"]) == pytest.approx(s[int(r0["t"]) - 1], rel=1e-9)
    echo = json.loads((tmp_path / "config-echo.json").read_text())
    assert echo["radius"]["rho"] == 0.05
    assert echo["horizon"] == 30


def test_run_coverage_detects_undersized_radii(tmp_path, monkeypatch):
    monkeypatch.setenv("SELFNORM_THREADS", "1")
    # deliberately understate B and sigma^2: the radii are far too small
    # and the violation check must fail
    cfg = _cfg(
        output_dir=str(tmp_path),
        replicas=30,
        horizon=60,
        radius={"method": "MixedBennett", "B": 0.005, "sigma_sq": 1e-6,
                "delta": 0.2, "theta": 0.01},
        noise={"family": "Rademacher"},
        emit_rows=False,
    )
    report = run_coverage(cfg)
    assert report["violation_rate"] > 0.5
    assert not report["pass"]


def test_run_widths(tmp_path):
    cfg = _cfg(experiment="widths", output_dir=str(tmp_path), horizon=120)
    report = run_widths(cfg)
    assert report["times"] == [10, 50, 100]
    with open(tmp_path / "widths.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert set(r["method"] for r in rows) == {m.value for m in Method}
    # fixed Bennett is never wider than fixed Bernstein
    w = report["widths"]
    for t in report["times"]:
        assert w["FixedBennett"][t] <= w["FixedBernstein"][t] + 1e-9
        # all radii positive and decreasing in none (they grow with t)
        for m in w:
            assert w[m][t] > 0


def test_run_supermartingale_small(tmp_path, monkeypatch):
    monkeypatch.setenv("SELFNORM_THREADS", "2")
    cfg = _cfg(
        experiment="supermartingale",
        output_dir=str(tmp_path),
        replicas=60,
        horizon=50,
        checkpoints=(10, 50),
        noise={"family": "Rademacher"},
    )
    report = run_supermartingale(cfg)
    assert report["pass"]
    means = [e for e in report["entries"] if "mean" in e]
    assert all(e["mean"] <= 1.0 + 3 * e["se"] for e in means)


def test_run_onedim_diagnostic(tmp_path):
    cfg = _cfg(experiment="onedim-diagnostic", output_dir=str(tmp_path),
               radius={"method": "FixedBernstein"})
    report = run_onedim_diagnostic(cfg)
    assert report["pass"]
    # analytic harmonic sums
    e0 = report["entries"][0]
    assert e0["harmonic_sum"] == pytest.approx(
        sum(1.0 / (0.05 + i) for i in range(1, 101)), rel=1e-12
    )


def test_run_bandit_small(tmp_path, monkeypatch):
    monkeypatch.setenv("SELFNORM_THREADS", "2")
    cfg = _cfg(
        experiment="bandit",
        output_dir=str(tmp_path),
        replicas=2,
        horizon=25,
        methods=("MixedBennett",),
        scenarios=({"name": "u", "family": "RescaledUniform", "beta_a": 0.0},),
    )
    report = run_bandit(cfg)
    assert "u/MixedBennett" in report["median_cum_regret"]
    with open(tmp_path / "bandit_summary.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2
    assert {r["seed"] for r in rows} == {"0", "1"}
    assert (tmp_path / "trace_u_MixedBennett_0.csv").exists()
    with open(tmp_path / "curves.csv") as fh:
        curves = list(csv.DictReader(fh))
    assert len(curves) == 200  # one row per arm for the recorded seed


def test_cli_exit_codes(tmp_path):
    cfg = _cfg(output_dir=str(tmp_path / "ok"), replicas=5, horizon=10,
               emit_rows=False)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert cli_main(["coverage", "--config", str(p)]) == 0

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"experiment": "bogus"}))
    assert cli_main(["coverage", "--config", str(bad)]) == 2

    fail_cfg = _cfg(
        output_dir=str(tmp_path / "fail"),
        replicas=10,
        horizon=40,
        radius={"method": "MixedBennett", "B": 0.005, "sigma_sq": 1e-6,
                "delta": 0.2, "theta": 0.01},
        noise={"family": "Rademacher"},
        emit_rows=False,
    )
    pf = tmp_path / "fail.json"
    pf.write_text(json.dumps(fail_cfg.to_dict()))
    assert cli_main(["coverage", "--config", str(pf)]) == 1


def test_cli_overrides(tmp_path):
    cfg = _cfg(replicas=4, horizon=8, emit_rows=False)
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg.to_dict()))
    out = tmp_path / "ovr"
    assert cli_main(["coverage", "--config", str(p), "--seed", "9", "--out", str(out)]) == 0
    echo = json.loads((out / "config-echo.json").read_text())
    assert echo["seed"] == 9


def test_cli_entry_point_installed():
    proc = subprocess.run(
        [sys.executable, "-m", "selfnorm.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "coverage" in proc.stdout
