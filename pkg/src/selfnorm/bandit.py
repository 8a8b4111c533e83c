"""Kernelized GP-UCB simulator with pluggable confidence radii.

The environment embeds a one-dimensional arm grid through an RBF (or
Linear) kernel; the mean-reward function is a weighted sum of kernel
embeddings whose centers concentrate around two modes.  Episodes are
deterministic given (seed, config).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelSpec, _forward_solve
from .radii import (
    Method,
    bennett_radius,
    bernstein_radius,
    empirical_mixed_bennett_radius,
    mixed_bennett_radius,
    subgaussian_baseline_radius,
    variance_ucb,
)
from .regression import ucb_value

RADEMACHER = "Rademacher"
RESCALED_UNIFORM = "RescaledUniform"
RESCALED_BETA = "RescaledBeta"
ZERO = "Zero"


@dataclass(frozen=True)
class NoiseModel:
    """Bounded zero-mean noise rescaled to (-1, 1)."""

    family: str = RESCALED_UNIFORM
    beta_a: float = 5.0
    B: float = 1.0

    def __post_init__(self):
        if self.family not in (RADEMACHER, RESCALED_UNIFORM, RESCALED_BETA, ZERO):
            raise ValueError(f"unknown noise family {self.family!r}")
        if self.family == RESCALED_BETA and not self.beta_a > 0:
            raise ValueError("beta_a must be positive")

    @property
    def sigma_sq(self):
        if self.family == RADEMACHER:
            return self.B**2
        if self.family == RESCALED_UNIFORM:
            return self.B**2 / 3.0
        if self.family == RESCALED_BETA:
            # beta(a, a) rescaled by x -> B (2x - 1)
            return self.B**2 / (2.0 * self.beta_a + 1.0)
        return 1e-12

    def sample(self, rng, size):
        if self.family == RADEMACHER:
            return self.B * rng.choice(np.array([-1.0, 1.0]), size=size)
        if self.family == RESCALED_UNIFORM:
            return self.B * (2.0 * rng.random(size) - 1.0)
        if self.family == RESCALED_BETA:
            return self.B * (2.0 * rng.beta(self.beta_a, self.beta_a, size) - 1.0)
        return np.zeros(size)

    @classmethod
    def from_dict(cls, d):
        return cls(
            family=d.get("family", RESCALED_UNIFORM),
            beta_a=float(d.get("beta_a", 5.0)),
            B=float(d.get("B", 1.0)),
        )

    def to_dict(self):
        return {"family": self.family, "beta_a": self.beta_a, "B": self.B}


@dataclass
class BanditEnv:
    spec: KernelSpec
    arms: np.ndarray           # (n_arms, input_dim)
    centers: np.ndarray        # (n_centers, input_dim)
    weights: np.ndarray        # (n_centers,)
    noise: NoiseModel
    seed: int
    arm_kernel: np.ndarray = field(default=None)   # (n_arms, n_arms)
    arm_means: np.ndarray = field(default=None)    # mean reward per arm
    D: float = 0.0

    @property
    def n_arms(self):
        return self.arms.shape[0]

    @property
    def best_arm(self):
        return int(np.argmax(self.arm_means))


def _kernel_matrix(spec, A, B_pts):
    if spec.family == "Linear":
        return A @ B_pts.T
    d2 = np.sum((A[:, None, :] - B_pts[None, :, :]) ** 2, axis=-1)
    return np.exp(-d2 / (2.0 * spec.lengthscale**2))


def make_env(
    noise,
    seed,
    n_arms=200,
    n_centers=50,
    modes=(0.25, 0.75),
    mode_sd=0.05,
    lengthscale=0.01,
    mean_scale=1.0,
):
    """Two-mode regression function over an equally spaced arm grid on [0, 1]."""
    spec = KernelSpec(family="RBF", lengthscale=lengthscale, input_dim=1)
    rng = np.random.default_rng(seed)
    arms = np.linspace(0.0, 1.0, n_arms)[:, None]
    mode_idx = rng.integers(0, len(modes), size=n_centers)
    centers = np.clip(
        np.asarray(modes)[mode_idx] + mode_sd * rng.standard_normal(n_centers), 0.0, 1.0
    )[:, None]
    weights = rng.uniform(0.2, 1.0, size=n_centers) * rng.choice(
        np.array([-1.0, 1.0]), size=n_centers, p=np.array([0.3, 0.7])
    )
    means = _kernel_matrix(spec, arms, centers) @ weights
    peak = np.max(np.abs(means))
    weights = weights * (mean_scale / peak)
    means = means * (mean_scale / peak)
    Kc = _kernel_matrix(spec, centers, centers)
    D = math.sqrt(max(float(weights @ Kc @ weights), 1e-30))
    return BanditEnv(
        spec=spec,
        arms=arms,
        centers=centers,
        weights=weights,
        noise=noise,
        seed=seed,
        arm_kernel=_kernel_matrix(spec, arms, arms),
        arm_means=means,
        D=D,
    )


@dataclass
class BanditTrace:
    """Per-round records of one episode."""

    t: np.ndarray
    arm: np.ndarray
    reward: np.ndarray
    eta: np.ndarray            # radius used when selecting, i.e. eta_{t-1}
    inst_regret: np.ndarray
    cum_regret: np.ndarray
    s: np.ndarray
    nu: np.ndarray
    aborted: bool = False
    containment_ok: bool = True
    post_mean: np.ndarray = None   # posterior mean over arms at T (optional)
    post_ucb: np.ndarray = None


def select_arm(state, arms, eta, tie_rule="lowest"):
    """argmax of ucb_value over the arm set; ties broken by lowest index."""
    if len(arms) == 0:
        raise ValueError("arm set must be nonempty")
    if tie_rule != "lowest":
        raise ValueError("only the 'lowest' tie rule is supported")
    best_idx = 0
    best_val = -math.inf
    for i, x in enumerate(arms):
        v = ucb_value(state, x, eta)
        if v > best_val + 1e-15:
            best_val = v
            best_idx = i
    return best_idx


def _radius(method, cfg, t, g2sum, logdet, nu_true, rss):
    if t == 0:
        return 0.0
    if method == Method.FIXED_BERNSTEIN:
        C = math.sqrt(cfg.sigma_sq * 2.0 * logdet)
        return bernstein_radius(cfg.B, C, cfg.delta)
    if method == Method.FIXED_BENNETT:
        C = math.sqrt(cfg.sigma_sq * 2.0 * logdet)
        if C == 0.0:
            return bernstein_radius(cfg.B, 0.0, cfg.delta)
        return bennett_radius(cfg.B, C, cfg.delta)
    if method == Method.MIXED_BENNETT:
        return mixed_bennett_radius(nu_true, cfg)
    if method == Method.EMPIRICAL_MIXED_BENNETT:
        v = variance_ucb(rss, t, cfg.B, cfg.delta_split[0])
        return empirical_mixed_bennett_radius(g2sum, v, cfg)
    if method == Method.SUBGAUSSIAN_BASELINE:
        return subgaussian_baseline_radius(cfg.B / 2.0, logdet, cfg.delta)
    raise ValueError(f"unknown method {method!r}")


def run_episode(env, cfg, T, record_curves=False):
    """Run T GP-UCB rounds; returns a BanditTrace.

    The selection threshold is eta_{t-1} = J_{t-1}(delta) + sqrt(rho) D,
    with eta_0 = sqrt(rho) D (prior ball of radius D around 0).
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([env.seed, 977]))
    n_arms = env.n_arms
    rho = cfg.rho
    sigma_sq = env.noise.sigma_sq
    Kaa = env.arm_kernel
    kdiag = np.diag(Kaa).copy()
    best_mean = float(np.max(env.arm_means))

    L = np.zeros((T, T))
    W = np.zeros((T, n_arms))          # rows of L^{-1} K(hist, arms)
    colnorm_sq = np.zeros(n_arms)
    u_y = np.zeros(T)
    u_eps = np.zeros(T)
    eps_sq_sum = 0.0
    u_eps_norm_sq = 0.0
    g2sum = 0.0
    logdet = 0.0
    nu = 0.0
    rss = 0.0
    hist = np.empty(T, dtype=np.int64)
    noise_draws = env.noise.sample(rng, T)

    rec = {k: np.zeros(T) for k in ("reward", "eta", "inst", "cum", "s", "nu")}
    arms_rec = np.zeros(T, dtype=np.int64)
    eta0 = math.sqrt(rho) * env.D
    eta = eta0
    cum = 0.0
    aborted = False

    for t in range(T):
        if t == 0:
            scores = eta * np.sqrt(kdiag / rho)
        else:
            pred = W[:t].T @ u_y[:t]
            var = np.maximum(kdiag - colnorm_sq, 0.0) / rho
            scores = pred + eta * np.sqrt(var)
        arm = int(np.argmax(scores))   # np.argmax takes the lowest index on ties
        hist[t] = arm
        arms_rec[t] = arm

        eps = float(noise_draws[t])
        y = float(env.arm_means[arm]) + eps
        k_vec = Kaa[arm, hist[:t]]
        w = _forward_solve(L, t, k_vec) if t else np.zeros(0)
        beta = float(kdiag[arm]) - float(w @ w)
        piv_sq = beta + rho
        if piv_sq <= 0.0:
            aborted = True
            break
        piv = math.sqrt(piv_sq)
        L[t, :t] = w
        L[t, t] = piv

        new_row = (Kaa[arm] - w @ W[:t]) / piv
        W[t] = new_row
        colnorm_sq += new_row**2

        uy = (y - float(w @ u_y[:t])) / piv
        ue = (eps - float(w @ u_eps[:t])) / piv
        u_y[t] = uy
        u_eps[t] = ue
        eps_sq_sum += eps * eps
        u_eps_norm_sq += ue * ue

        g2 = max(beta, 0.0) / (max(beta, 0.0) + rho)
        g2sum += g2
        logdet += math.log1p(max(beta, 0.0) / rho)
        nu += sigma_sq * g2
        rss += (piv * uy) ** 2   # predictable residual y - f_{t-1}(x_t)

        s_t = math.sqrt(max(eps_sq_sum - rho * u_eps_norm_sq, 0.0))
        inst = best_mean - float(env.arm_means[arm])
        cum += inst

        rec["reward"][t] = y
        rec["eta"][t] = eta
        rec["inst"][t] = inst
        rec["cum"][t] = cum
        rec["s"][t] = s_t
        rec["nu"][t] = nu

        J = _radius(cfg.method, cfg, t + 1, g2sum, logdet, nu, rss)
        eta = J + eta0

    n = t + 1 if not aborted else t
    post_mean = post_ucb = None
    if record_curves and n > 0:
        pred = W[:n].T @ u_y[:n]
        var = np.maximum(kdiag - colnorm_sq, 0.0) / rho
        post_mean = pred
        post_ucb = pred + eta * np.sqrt(var)
    return BanditTrace(
        t=np.arange(1, n + 1),
        arm=arms_rec[:n],
        reward=rec["reward"][:n],
        eta=rec["eta"][:n],
        inst_regret=rec["inst"][:n],
        cum_regret=rec["cum"][:n],
        s=rec["s"][:n],
        nu=rec["nu"][:n],
        aborted=aborted,
        post_mean=post_mean,
        post_ucb=post_ucb,
    )
