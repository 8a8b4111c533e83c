"""End-to-end acceptance suite.

Each test exercises one headline guarantee of the library at its stated
tolerance and prints a single PASS/FAIL line (visible under pytest -s, and
in the captured output otherwise).
"""

import math

import numpy as np
import pytest

from conftest import dense_predict, dense_ridge_norm_sq, dense_stats
from selfnorm.bandit import NoiseModel, make_env, run_episode
from selfnorm.harness import (
    ExperimentConfig,
    run_coverage,
    run_onedim_diagnostic,
    run_supermartingale,
)
from selfnorm.kernels import KernelSpec
from selfnorm.radii import (
    Method,
    RadiusConfig,
    bennett_radius,
    bernstein_radius,
    mixed_bennett_radius,
    mixture_value,
)
from selfnorm.regression import RegressionState, add_observation, predict
from selfnorm.streams import (
    draw_covariates,
    kernel_matrix,
    mixed_radius_path,
    stream_stats,
)
from selfnorm.tracker import TrackerState, step


_CAPSYS = [None]


@pytest.fixture(autouse=True)
def _live_output(capsys):
    # keep the one-line PASS/FAIL verdicts visible even under capture
    _CAPSYS[0] = capsys
    yield
    _CAPSYS[0] = None


def _report(name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    line = f"[{tag}] {name}: {detail}"
    if _CAPSYS[0] is not None:
        with _CAPSYS[0].disabled():
            print(line)
    else:
        print(line)
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------- criterion 1

def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(101)
    rho = 0.05
    spec = KernelSpec("Linear", input_dim=5)
    worst = 0.0
    for _ in range(100):
        X = rng.standard_normal((50, 5)) * 0.4
        eps = rng.uniform(-1, 1, 50)
        y = rng.uniform(-1, 1, 50)
        s_ref, g2_ref, logdet_ref = dense_stats(X, eps, rho)
        tr = TrackerState(spec, rho)
        reg = RegressionState(spec, rho, D=1.0)
        for t in range(50):
            step(tr, X[t], eps[t], 1.0 / 3.0)
            add_observation(reg, X[t], y[t])
        worst = max(worst, abs(tr.s - s_ref[-1]))
        worst = max(worst, abs(tr.gram.logdet_ratio - logdet_ref[-1]))
        q = rng.standard_normal(5)
        from selfnorm.kernels import ridge_norm_sq

        worst = max(worst, abs(ridge_norm_sq(tr.gram, q) - dense_ridge_norm_sq(X, q, rho)))
        worst = max(worst, abs(predict(reg, q) - dense_predict(X, y, q, rho)))
    _report("criterion 1 (kernel-trick vs dense oracle)", worst <= 1e-8,
            f"max abs err {worst:.2e} <= 1e-8")


# ---------------------------------------------------------------- criterion 2

def test_criterion_2_structural_invariants():
    rng = np.random.default_rng(202)
    rho = 0.05
    specs = [
        KernelSpec("Linear", input_dim=5),
        KernelSpec("RBF", lengthscale=0.05, input_dim=1),
        KernelSpec("RBF", lengthscale=0.3, input_dim=2),
    ]
    bad = 0
    for i in range(1000):
        spec = specs[i % len(specs)]
        X = draw_covariates(spec, 40, rng)
        eps = rng.uniform(-1, 1, 40)
        K = kernel_matrix(spec, X)
        s, g2, logdet, resid = stream_stats(K, eps, rho)
        if not np.all(g2 <= 1.0 + 1e-12):
            bad += 1
        elif not np.all(np.cumsum(g2) <= 2.0 * logdet + 1e-10):
            bad += 1
    _report("criterion 2 (||G||<=1 and potential <= 2 logdet, 1000 streams)",
            bad == 0, f"{bad} violating streams")


# ---------------------------------------------------------------- criterion 3

def test_criterion_3_supermartingale_and_ville(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "experiment": "supermartingale",
        "replicas": 10_000,
        "horizon": 200,
        "seed": 303,
        "checkpoints": [10, 100, 200],
        "kernel": {"family": "Linear", "input_dim": 5},
        "noise": {"family": "Rademacher"},
        "radius": {"delta": 0.1, "B": 1.0, "sigma_sq": 1.0},
        "output_dir": str(tmp_path),
    })
    report = run_supermartingale(cfg)
    means = [e for e in report["entries"] if "mean" in e]
    mean_ok = all(e["mean"] <= 1.0 + 3.0 * e["se"] for e in means)
    villes = [e for e in report["entries"] if "ville_rate" in e]
    N = cfg.replicas
    delta = 0.1
    ville_ok = all(
        e["ville_rate"] <= delta + 3.0 * math.sqrt(delta * (1 - delta) / N)
        for e in villes
    )
    worst_mean = max(e["mean"] for e in means)
    worst_ville = max(e["ville_rate"] for e in villes)
    _report(
        "criterion 3 (E[S_t] <= 1 + 3SE and Ville crossings, N=10^4)",
        mean_ok and ville_ok,
        f"max mean {worst_mean:.4f}, max crossing rate {worst_ville:.4f} vs delta=0.1",
    )


# ---------------------------------------------------------------- criterion 4

def _grid_min(B, C, delta, form, n=10_000):
    L = math.log(2.0 / delta)
    lam_star = 1.0 / (B + math.sqrt(C * C / (2.0 * L)))
    if form == "bernstein":
        lams = np.geomspace(lam_star / 30.0, min(lam_star * 30.0, 0.999999 / B), n)
        e = lams**2 * C * C / (2.0 * (1.0 - lams * B))
    else:
        lams = np.geomspace(lam_star / 30.0, lam_star * 30.0, n)
        lb = lams * B
        e = (np.expm1(lb) - lb) / (B * B) * C * C
    return float(np.min((e + L) / lams))


def test_criterion_4_optimizer_validation():
    worst = 0.0
    for B in (0.5, 1.0, 2.0):
        for C in (0.3, 1.0, 4.0):
            for delta in (0.01, 0.05, 0.1):
                rb = bernstein_radius(B, C, delta)
                gb = _grid_min(B, C, delta, "bernstein")
                worst = max(worst, abs(rb - gb) / gb)
                rn = bennett_radius(B, C, delta)
                gn = _grid_min(B, C, delta, "bennett")
                worst = max(worst, abs(rn - gn) / gn)
    _report("criterion 4 (closed forms vs 10^4-point grid minimization)",
            worst <= 1e-6, f"max rel err {worst:.2e} <= 1e-6")


# ---------------------------------------------------------------- criterion 5

def test_criterion_5_mixture_correctness():
    from test_radii import gamma_mixture_quadrature

    ok0 = abs(mixture_value(0.0, 0.0, 1.0, 1.0) - 1.0) <= 1e-10
    worst_q = 0.0
    for s in (0.5, 1.0, 2.0, 4.0, 8.0):
        for nu in (0.1, 0.5, 1.0, 2.0, 5.0):
            ours = mixture_value(s, nu, 1.0, 1.0)
            ref = gamma_mixture_quadrature(s, nu, 1.0, 1.0)
            worst_q = max(worst_q, abs(ours - ref) / ref)
    cfg = RadiusConfig(delta=0.1)
    worst_r = 0.0
    for nu in (0.01, 0.3, 2.0, 20.0):
        s_star = mixed_bennett_radius(nu, cfg)
        v = mixture_value(s_star, nu, cfg.theta, cfg.B)
        worst_r = max(worst_r, abs(v - 2.0 / cfg.delta) / (2.0 / cfg.delta))
    ok = ok0 and worst_q <= 1e-6 and worst_r <= 1e-8
    _report("criterion 5 (Gamma mixture vs quadrature + radius round-trip)", ok,
            f"origin ok={ok0}, quadrature rel {worst_q:.2e}, round-trip rel {worst_r:.2e}")


# ---------------------------------------------------------------- criterion 6

COVERAGE_NOISES = [
    {"family": "Rademacher"},
    {"family": "RescaledUniform"},
    {"family": "RescaledBeta", "beta_a": 20.0},
]
COVERAGE_METHODS = [
    "FixedBernstein", "FixedBennett", "MixedBennett", "EmpiricalMixedBennett",
]


def test_criterion_6_time_uniform_coverage(tmp_path):
    lines = []
    all_ok = True
    for noise in COVERAGE_NOISES:
        nm = NoiseModel.from_dict(noise)
        for method in COVERAGE_METHODS:
            cfg = ExperimentConfig.from_dict({
                "experiment": "coverage",
                "replicas": 2000,
                "horizon": 200,
                "seed": 606,
                "kernel": {"family": "Linear", "input_dim": 5},
                "noise": noise,
                "radius": {
                    "delta": 0.1, "delta1": 0.05, "delta2": 0.05,
                    "rho": 0.05, "B": 1.0, "sigma_sq": nm.sigma_sq,
                    "method": method,
                },
                "emit_rows": False,
                "output_dir": str(tmp_path / f"{nm.family}_{method}"),
            })
            rep = run_coverage(cfg)
            ok = rep["violation_rate"] <= rep["threshold"]
            all_ok &= ok
            lines.append(
                f"{nm.family}({getattr(nm, 'beta_a', '')})/{method}: "
                f"{rep['violation_rate']:.4f} <= {rep['threshold']:.4f}"
            )
    _report("criterion 6 (coverage, 12 noise x method cells, N=2000)", all_ok,
            "; ".join(lines))


# ---------------------------------------------------------------- criterion 7

def test_criterion_7_ellipsoid_coverage():
    rng = np.random.default_rng(707)
    rho, delta, d, T = 0.05, 0.1, 5, 200
    sigma_sq = 1.0 / 3.0
    cfg = RadiusConfig(delta=delta, rho=rho, B=1.0, sigma_sq=sigma_sq,
                       method=Method.MIXED_BENNETT)
    failures = 0
    runs = 1000
    I = np.eye(d)
    for _ in range(runs):
        theta = rng.standard_normal(d)
        theta /= np.linalg.norm(theta)  # D = 1
        X = draw_covariates(KernelSpec("Linear", input_dim=d), T, rng)
        eps = rng.uniform(-1, 1, T)
        y = X @ theta + eps
        V = np.zeros((d, d))
        Xy = np.zeros(d)
        g2 = np.empty(T)
        dist = np.empty(T)
        for t in range(T):
            x = X[t]
            V += np.outer(x, x)
            Xy += x * y[t]
            A = rho * I + V
            g2[t] = float(x @ np.linalg.solve(A, x))
            theta_hat = np.linalg.solve(A, Xy)
            diff = theta_hat - theta
            dist[t] = math.sqrt(float(diff @ A @ diff))
        nu = sigma_sq * np.cumsum(g2)
        J = mixed_radius_path(nu, cfg.theta, cfg.B, math.log(2.0 / delta))
        eta = J + math.sqrt(rho) * 1.0
        if np.any(dist > eta):
            failures += 1
    rate = failures / runs
    se = math.sqrt(max(rate * (1 - rate), 1e-12) / runs)
    ok = rate <= delta + 3 * se
    _report("criterion 7 (ellipsoid contains theta* at all t <= 200)", ok,
            f"failure rate {rate:.4f} <= {delta + 3 * se:.4f}")


# ---------------------------------------------------------------- criterion 8

def test_criterion_8_regret_ordering():
    T, seeds = 500, 20
    results = {}
    for fam, beta_a in (("RescaledBeta", 50.0), ("RescaledUniform", None)):
        noise = (NoiseModel(family=fam, beta_a=beta_a) if beta_a
                 else NoiseModel(family=fam))
        for method in (Method.MIXED_BENNETT, Method.SUBGAUSSIAN_BASELINE):
            cfg = RadiusConfig(delta=0.1, rho=0.05, B=1.0, theta=1.0,
                               sigma_sq=noise.sigma_sq, method=method)
            regrets = [
                run_episode(make_env(noise, seed=1 + s), cfg, T).cum_regret[-1]
                for s in range(seeds)
            ]
            results[(fam, method)] = float(np.median(regrets))
    low_var_ok = (results[("RescaledBeta", Method.MIXED_BENNETT)]
                  < results[("RescaledBeta", Method.SUBGAUSSIAN_BASELINE)])
    high_var_ok = (results[("RescaledUniform", Method.SUBGAUSSIAN_BASELINE)]
                   < results[("RescaledUniform", Method.MIXED_BENNETT)])
    detail = (
        f"beta(50,50): mixed {results[('RescaledBeta', Method.MIXED_BENNETT)]:.1f} vs "
        f"subG {results[('RescaledBeta', Method.SUBGAUSSIAN_BASELINE)]:.1f}; "
        f"uniform: mixed {results[('RescaledUniform', Method.MIXED_BENNETT)]:.1f} vs "
        f"subG {results[('RescaledUniform', Method.SUBGAUSSIAN_BASELINE)]:.1f}"
    )
    _report("criterion 8 (regret ordering flips with noise variance, 20 seeds)",
            low_var_ok and high_var_ok, detail)


# ---------------------------------------------------------------- criterion 9

def test_criterion_9_onedim_diagnostic(tmp_path):
    cfg = ExperimentConfig.from_dict({
        "experiment": "onedim-diagnostic",
        "seed": 909,
        "radius": {"method": "FixedBernstein", "delta": 0.1, "rho": 0.05,
                   "B": 1.0, "sigma_sq": 1.0 / 3.0},
        "output_dir": str(tmp_path),
    })
    rep = run_onedim_diagnostic(cfg)
    ok = rep["ratio_variation"] < 0.2 and rep["classical_variation"] < 0.1
    _report(
        "criterion 9 (sqrt(log T) growth diagnostic)",
        ok,
        f"J_T/sqrt(ln T) varies {rep['ratio_variation']:.3f} < 0.2, "
        f"classical reference varies {rep['classical_variation']:.3f} < 0.1",
    )
