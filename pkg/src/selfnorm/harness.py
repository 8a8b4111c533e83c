"""Experiment drivers: coverage Monte Carlo, width curves, supermartingale
checks, the one-dimensional looseness diagnostic, and bandit ablations.

Every experiment takes an ExperimentConfig, writes config-echo.json plus CSV
artifacts under the output directory, and returns a report dict.  Replicas
are distributed over a process pool capped by SELFNORM_THREADS.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bandit import NoiseModel, make_env, run_episode
from .kernels import KernelSpec
from .radii import Method, RadiusConfig
from .streams import (
    draw_covariates,
    kernel_matrix,
    mixed_radius_path,
    radius_path,
    stream_stats,
)
from .tracker import log_cosh

EXPERIMENTS = ("coverage", "widths", "supermartingale", "bandit", "onedim-diagnostic")

DEFAULT_BANDIT_SCENARIOS = (
    {"name": "uniform", "family": "RescaledUniform", "beta_a": 0.0},
    {"name": "beta_5_5", "family": "RescaledBeta", "beta_a": 5.0},
    {"name": "beta_20_20", "family": "RescaledBeta", "beta_a": 20.0},
    {"name": "beta_50_50", "family": "RescaledBeta", "beta_a": 50.0},
)


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "coverage"
    replicas: int = 2000
    horizon: int = 200
    seed: int = 1
    radius: RadiusConfig = field(default_factory=RadiusConfig)
    kernel: KernelSpec = field(default_factory=lambda: KernelSpec("Linear", input_dim=5))
    noise: NoiseModel = field(default_factory=NoiseModel)
    output_dir: str = "out"
    # experiment-specific knobs
    lambdas: tuple = ()            # supermartingale; defaults to (0.1/B, 0.5/B)
    methods: tuple = ()            # coverage/widths/bandit method list
    scenarios: tuple = DEFAULT_BANDIT_SCENARIOS
    checkpoints: tuple = (10, 100, 200)
    emit_rows: bool = True         # per-(replica, t) coverage rows in the CSV

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.replicas < 1 or self.horizon < 1:
            raise ConfigError("replicas and horizon must be >= 1")

    @classmethod
    def from_dict(cls, d):
        try:
            kw = dict(d)
            if "radius" in kw:
                kw["radius"] = RadiusConfig.from_dict(kw["radius"])
            if "kernel" in kw:
                k = kw["kernel"]
                kw["kernel"] = KernelSpec(
                    family=k.get("family", "RBF"),
                    lengthscale=float(k.get("lengthscale", 0.01)),
                    input_dim=int(k.get("input_dim", 1)),
                )
            if "noise" in kw:
                kw["noise"] = NoiseModel.from_dict(kw["noise"])
            for tup in ("lambdas", "methods", "scenarios", "checkpoints"):
                if tup in kw:
                    kw[tup] = tuple(kw[tup])
            return cls(**kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path):
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc

    def to_dict(self):
        return {
            "experiment": self.experiment,
            "replicas": self.replicas,
            "horizon": self.horizon,
            "seed": self.seed,
            "radius": self.radius.to_dict(),
            "kernel": {
                "family": self.kernel.family,
                "lengthscale": self.kernel.lengthscale,
                "input_dim": self.kernel.input_dim,
            },
            "noise": self.noise.to_dict(),
            "output_dir": self.output_dir,
            "lambdas": list(self.lambdas),
            "methods": list(self.methods),
            "scenarios": [dict(s) for s in self.scenarios],
            "checkpoints": list(self.checkpoints),
            "emit_rows": self.emit_rows,
        }


def n_workers():
    cap = os.environ.get("SELFNORM_THREADS")
    avail = os.cpu_count() or 1
    if cap:
        return max(1, min(int(cap), avail))
    return max(1, min(4, avail))


def _chunks(n, k):
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    out, start = [], 0
    for s in sizes:
        if s:
            out.append(range(start, start + s))
        start += s
    return out


def _pool_map(worker, arg_list):
    if len(arg_list) == 1:
        return [worker(arg_list[0])]
    workers = min(n_workers(), len(arg_list))
    if workers == 1:
        return [worker(a) for a in arg_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, arg_list))


def _write_echo(cfg, out):
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config-echo.json", "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_report(out, report):
    with open(out / "report.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def simulate_stream(cfg, replica):
    """One (X, eps) stream and its per-t statistics."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, replica]))
    X = draw_covariates(cfg.kernel, cfg.horizon, rng)
    eps = cfg.noise.sample(rng, cfg.horizon)
    K = kernel_matrix(cfg.kernel, X)
    s, g2, logdet, resid = stream_stats(K, eps, cfg.radius.rho)
    return s, g2, logdet, resid


# ----------------------------------------------------------------------
# coverage
# ----------------------------------------------------------------------

def _coverage_chunk(args):
    cfg_dict, replicas = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    out = []
    for r in replicas:
        s, g2, logdet, resid = simulate_stream(cfg, r)
        J = radius_path(cfg.radius.method, cfg.radius, g2, logdet, resid)
        nu = cfg.radius.sigma_sq * np.cumsum(g2)
        violated = s > J
        out.append((r, s, J, nu, violated))
    return out


def run_coverage(cfg):
    """Empirical rate of sup_t [s_t - J_t] > 0 over independent streams."""
    out = Path(cfg.output_dir)
    _write_echo(cfg, out)
    chunks = _chunks(cfg.replicas, n_workers() * 4)
    results = _pool_map(_coverage_chunk, [(cfg.to_dict(), list(c)) for c in chunks])
    n_violate = 0
    rows = []
    for chunk in results:
        for r, s, J, nu, violated in chunk:
            if violated.any():
                n_violate += 1
            if cfg.emit_rows:
                for t in range(len(s)):
                    rows.append(
                        (r, t + 1, f"{s[t]:.10g}", f"{J[t]:.10g}", f"{nu[t]:.10g}",
                         int(violated[t]))
                    )
    if cfg.emit_rows:
        _write_csv(out / "coverage.csv", ["replica", "t", "s_t", "radius", "nu", "violated"], rows)
    rate = n_violate / cfg.replicas
    se = math.sqrt(max(rate * (1 - rate), 1e-12) / cfg.replicas)
    threshold = cfg.radius.delta + 3.0 * se
    report = {
        "experiment": "coverage",
        "method": cfg.radius.method.value,
        "noise": cfg.noise.to_dict(),
        "replicas": cfg.replicas,
        "horizon": cfg.horizon,
        "violation_rate": rate,
        "standard_error": se,
        "delta": cfg.radius.delta,
        "threshold": threshold,
        "pass": rate <= threshold,
    }
    _write_report(out, report)
    return report


# ----------------------------------------------------------------------
# widths
# ----------------------------------------------------------------------

WIDTH_TIMES = (10, 50, 100, 200, 500)


def run_widths(cfg):
    """J_t for every method on one common stream at fixed checkpoints."""
    out = Path(cfg.output_dir)
    _write_echo(cfg, out)
    s, g2, logdet, resid = simulate_stream(cfg, 0)
    nu = cfg.radius.sigma_sq * np.cumsum(g2)
    methods = [Method(m) for m in (cfg.methods or [m.value for m in Method])]
    times = [t for t in WIDTH_TIMES if t <= cfg.horizon]
    rows = []
    table = {}
    for m in methods:
        J = radius_path(m, cfg.radius, g2, logdet, resid)
        table[m.value] = {t: float(J[t - 1]) for t in times}
        for t in times:
            rows.append(
                (t, m.value, f"{J[t - 1]:.10g}", f"{nu[t - 1]:.10g}", f"{logdet[t - 1]:.10g}")
            )
    _write_csv(out / "widths.csv", ["t", "method", "radius", "nu", "logdet"], rows)
    report = {"experiment": "widths", "times": times, "widths": table}
    _write_report(out, report)
    return report


# ----------------------------------------------------------------------
# supermartingale
# ----------------------------------------------------------------------

def _superm_chunk(args):
    cfg_dict, replicas, lambdas = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    B = cfg.radius.B
    sigma_sq = cfg.noise.sigma_sq
    cps = [t for t in cfg.checkpoints if t <= cfg.horizon]
    # accumulators: per (form, lambda) -> checkpoint sums, sumsq, ville hits
    n_forms = 2
    n_lam = len(lambdas)
    sums = np.zeros((n_forms, n_lam, len(cps)))
    sumsq = np.zeros((n_forms, n_lam, len(cps)))
    ville = np.zeros((n_forms, n_lam), dtype=np.int64)
    thresh = 1.0 / cfg.radius.delta
    for r in replicas:
        s, g2, logdet, resid = simulate_stream(cfg, r)
        g2cum = np.cumsum(g2)
        for li, lam in enumerate(lambdas):
            lb = lam * B
            psis = []
            if lb < 1.0:
                psis.append((0, lam**2 / (2.0 * (1.0 - lb))))
            psis.append((1, (math.expm1(lb) - lb) / B**2))
            for fi, psi in psis:
                e_sum = psi * sigma_sq * g2cum
                logS = np.array([log_cosh(lam * si) for si in s]) - e_sum
                S = np.exp(logS)
                for ci, t in enumerate(cps):
                    sums[fi, li, ci] += S[t - 1]
                    sumsq[fi, li, ci] += S[t - 1] ** 2
                if S.max() >= thresh:
                    ville[fi, li] += 1
    return sums, sumsq, ville


def run_supermartingale(cfg):
    """Monte-Carlo means of S_t plus the Ville crossing frequency."""
    out = Path(cfg.output_dir)
    _write_echo(cfg, out)
    B = cfg.radius.B
    lambdas = list(cfg.lambdas) or [0.1 / B, 0.5 / B]
    cps = [t for t in cfg.checkpoints if t <= cfg.horizon]
    chunks = _chunks(cfg.replicas, n_workers() * 4)
    results = _pool_map(
        _superm_chunk, [(cfg.to_dict(), list(c), lambdas) for c in chunks]
    )
    sums = sum(r[0] for r in results)
    sumsq = sum(r[1] for r in results)
    ville = sum(r[2] for r in results)
    N = cfg.replicas
    forms = ("bernstein", "bounded")
    rows = []
    all_pass = True
    report_entries = []
    for fi, form in enumerate(forms):
        for li, lam in enumerate(lambdas):
            if form == "bernstein" and lam * B >= 1.0:
                continue
            for ci, t in enumerate(cps):
                mean = float(sums[fi, li, ci] / N)
                var = max(float(sumsq[fi, li, ci]) / N - mean**2, 0.0)
                se = math.sqrt(var / N)
                ok = bool(mean <= 1.0 + 3.0 * se)
                all_pass &= ok
                rows.append((form, f"{lam:.10g}", t, f"{mean:.10g}", f"{se:.10g}", int(ok)))
                report_entries.append(
                    {"form": form, "lambda": lam, "t": t, "mean": mean, "se": se, "pass": ok}
                )
            v_rate = float(ville[fi, li]) / N
            v_thresh = cfg.radius.delta + 3.0 * math.sqrt(cfg.radius.delta / N)
            ok = v_rate <= v_thresh
            all_pass &= ok
            report_entries.append(
                {
                    "form": form,
                    "lambda": lam,
                    "ville_rate": v_rate,
                    "ville_threshold": v_thresh,
                    "pass": ok,
                }
            )
    _write_csv(out / "supermartingale.csv", ["form", "lambda", "t", "mean", "se", "pass"], rows)
    report = {"experiment": "supermartingale", "entries": report_entries, "pass": all_pass}
    _write_report(out, report)
    return report


# ----------------------------------------------------------------------
# one-dimensional looseness diagnostic
# ----------------------------------------------------------------------

ONEDIM_TIMES = (100, 1000, 10000)


def run_onedim_diagnostic(cfg):
    """Constant-direction stream: our radii grow as sqrt(log T) while the
    scaled classical univariate Bernstein reference stays O(1).

    Everything here is analytic: for X_t = e_1 the whitened-covariate
    norms are exactly 1/(rho + i)."""
    out = Path(cfg.output_dir)
    _write_echo(cfg, out)
    rho = cfg.radius.rho
    B = cfg.radius.B
    sigma_sq = cfg.radius.sigma_sq
    delta = cfg.radius.delta
    L = math.log(2.0 / delta)
    method = cfg.radius.method
    rows = []
    entries = []
    for T in ONEDIM_TIMES:
        H = float(np.sum(1.0 / (rho + np.arange(1, T + 1))))
        C = math.sqrt(sigma_sq * H)
        if method == Method.FIXED_BERNSTEIN:
            J = B * L + C * math.sqrt(2.0 * L)
        elif method == Method.MIXED_BENNETT:
            J = float(
                mixed_radius_path(np.array([sigma_sq * H]), cfg.radius.theta, B, L)[0]
            )
        else:
            raise ConfigError("onedim-diagnostic supports FixedBernstein or MixedBennett")
        ratio = J / math.sqrt(math.log(T))
        classical = (math.sqrt(2.0 * sigma_sq * T * L) + B / 3.0 * L) / math.sqrt(rho + T)
        rows.append(
            (T, method.value, f"{H:.10g}", f"{J:.10g}", f"{ratio:.10g}",
             f"{classical:.10g}")
        )
        entries.append(
            {"T": T, "harmonic_sum": H, "radius": J, "ratio_sqrt_log": ratio,
             "classical_radius": classical}
        )
    _write_csv(
        out / "onedim.csv",
        ["T", "method", "harmonic_sum", "radius", "ratio_sqrt_log", "classical_radius"],
        rows,
    )
    r_mid, r_hi = entries[-2]["ratio_sqrt_log"], entries[-1]["ratio_sqrt_log"]
    c_mid, c_hi = entries[-2]["classical_radius"], entries[-1]["classical_radius"]
    ours_var = abs(r_hi - r_mid) / r_mid
    classical_var = abs(c_hi - c_mid) / c_mid
    report = {
        "experiment": "onedim-diagnostic",
        "entries": entries,
        "ratio_variation": ours_var,
        "classical_variation": classical_var,
        "pass": ours_var < 0.2 and classical_var < 0.1,
    }
    _write_report(out, report)
    return report


# ----------------------------------------------------------------------
# bandit ablation
# ----------------------------------------------------------------------

def _bandit_run(args):
    cfg_dict, scenario, method, seed, record_curves = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    noise = NoiseModel(family=scenario["family"], beta_a=scenario.get("beta_a", 5.0))
    env = make_env(noise, seed=seed, lengthscale=cfg.kernel.lengthscale)
    rcfg = RadiusConfig(
        delta=cfg.radius.delta,
        rho=cfg.radius.rho,
        B=noise.B,
        sigma_sq=noise.sigma_sq,
        theta=cfg.radius.theta,
        method=Method(method),
        delta_split=cfg.radius.delta_split,
    )
    trace = run_episode(env, rcfg, cfg.horizon, record_curves=record_curves)
    return scenario["name"], method, seed, trace, env


def run_bandit(cfg):
    """Noise scenarios x methods x seeds GP-UCB ablation."""
    out = Path(cfg.output_dir)
    _write_echo(cfg, out)
    methods = [Method(m).value for m in (
        cfg.methods
        or (Method.SUBGAUSSIAN_BASELINE.value, Method.MIXED_BENNETT.value,
            Method.EMPIRICAL_MIXED_BENNETT.value)
    )]
    jobs = []
    for scenario in cfg.scenarios:
        for method in methods:
            for seed in range(cfg.replicas):
                jobs.append((cfg.to_dict(), dict(scenario), method, cfg.seed + seed,
                             seed == 0))
    workers = n_workers()
    groups = _chunks(len(jobs), workers * 4)
    results = []
    for batch in _pool_map(_bandit_many, [[jobs[i] for i in g] for g in groups]):
        results.extend(batch)

    summary_rows = []
    curve_rows = []
    point_rows = []
    regrets = {}
    for name, method, seed, trace, env in results:
        RT = float(trace.cum_regret[-1]) if len(trace.cum_regret) else math.nan
        eta_final = float(trace.eta[-1]) if len(trace.eta) else math.nan
        rel_seed = seed - cfg.seed
        summary_rows.append(
            (name, method, rel_seed, len(trace.t), f"{RT:.10g}", f"{eta_final:.10g}")
        )
        regrets.setdefault((name, method), []).append(RT)
        trace_path = out / f"trace_{name}_{method}_{rel_seed}.csv"
        _write_csv(
            trace_path,
            ["t", "arm", "reward", "eta", "inst_regret", "cum_regret", "s_t", "nu"],
            [
                (int(trace.t[i]), int(trace.arm[i]), f"{trace.reward[i]:.10g}",
                 f"{trace.eta[i]:.10g}", f"{trace.inst_regret[i]:.10g}",
                 f"{trace.cum_regret[i]:.10g}", f"{trace.s[i]:.10g}",
                 f"{trace.nu[i]:.10g}")
                for i in range(len(trace.t))
            ],
        )
        if trace.post_mean is not None:
            xs = env.arms[:, 0]
            for a in range(env.n_arms):
                curve_rows.append(
                    (name, method, f"{xs[a]:.10g}", f"{env.arm_means[a]:.10g}",
                     f"{trace.post_mean[a]:.10g}", f"{trace.post_ucb[a]:.10g}")
                )
            for i in range(len(trace.t)):
                point_rows.append(
                    (name, method, int(trace.t[i]),
                     f"{env.arms[trace.arm[i], 0]:.10g}", f"{trace.reward[i]:.10g}")
                )
    _write_csv(
        out / "bandit_summary.csv",
        ["scenario", "method", "seed", "T", "cum_regret", "eta_final"],
        summary_rows,
    )
    _write_csv(
        out / "curves.csv",
        ["scenario", "method", "arm_x", "true_mean", "post_mean", "post_ucb"],
        curve_rows,
    )
    _write_csv(
        out / "points.csv",
        ["scenario", "method", "t", "arm_x", "reward"],
        point_rows,
    )
    medians = {
        f"{name}/{method}": float(np.median(v)) for (name, method), v in regrets.items()
    }
    report = {
        "experiment": "bandit",
        "methods": methods,
        "scenarios": [s["name"] for s in cfg.scenarios],
        "seeds": cfg.replicas,
        "median_cum_regret": medians,
    }
    _write_report(out, report)
    return report


def _bandit_many(job_list):
    return [_bandit_run(j) for j in job_list]


RUNNERS = {
    "coverage": run_coverage,
    "widths": run_widths,
    "supermartingale": run_supermartingale,
    "bandit": run_bandit,
    "onedim-diagnostic": run_onedim_diagnostic,
}
