"""Online tracking of the self-normalized statistic and pseudo-variance.

Streams (x_t, eps_t) pairs into the Gram factor and maintains

    s_t   = || (rho I + V_t)^{-1/2} M_t ||
    nu_t  = sum_i sigma_i^2 ||G_i||^2
    ||G_t||^2 = beta_t / (beta_t + rho)

where the append-then-query order is enforced structurally: the covariate
joins V_t before ||G_t|| is measured, which is what makes ||G_t|| <= 1.

The kernel-trick identity used throughout: with u = L^{-1} eps for the
factor L of (K_t + rho I),

    s_t^2 = eps^T K_t (K_t + rho I)^{-1} eps = ||eps||^2 - rho ||u||^2.
"""

import math

import numpy as np

from .kernels import GramState, _forward_solve


class TrackerState:
    def __init__(self, spec, rho):
        self.gram = GramState(spec, rho)
        self._noises = []
        self.g_norm_sq_history = []
        self.g_norm_sq_sum = 0.0
        self.nu = 0.0
        self.s = 0.0
        # incremental forward-solve of the factor against the noise vector
        self._u = []
        self._u_norm_sq = 0.0
        self._eps_sq_sum = 0.0

    @property
    def t(self):
        return self.gram.n

    @property
    def noises(self):
        return np.asarray(self._noises)


def step(state, x, eps, sigma_sq):
    """Stream one (covariate, noise) pair with its variance proxy."""
    if sigma_sq < 0:
        raise ValueError("sigma_sq must be nonnegative")
    w, piv, beta = state.gram._extend(x)
    g_sq = max(beta, 0.0) / (max(beta, 0.0) + state.gram.rho)
    state.g_norm_sq_history.append(g_sq)
    state.g_norm_sq_sum += g_sq
    state.nu += sigma_sq * g_sq

    u_prev = np.asarray(state._u)
    u_new = (eps - float(w @ u_prev)) / piv
    state._u.append(u_new)
    state._u_norm_sq += u_new * u_new
    state._eps_sq_sum += eps * eps
    state._noises.append(eps)
    state.s = math.sqrt(max(state._eps_sq_sum - state.gram.rho * state._u_norm_sq, 0.0))
    return state


def self_norm_stat(state):
    """s_t recomputed from the stored factor and noise vector."""
    t = state.t
    if t == 0:
        return 0.0
    eps = state.noises
    u = _forward_solve(state.gram.chol, t, eps)
    return math.sqrt(max(float(eps @ eps) - state.gram.rho * float(u @ u), 0.0))


def info_gain_bound(state):
    """2 ln det(I + K_t / rho); dominates sum ||G_i||^2."""
    return 2.0 * state.gram.logdet_ratio


def log_cosh(x):
    ax = abs(x)
    return ax + math.log1p(math.exp(-2.0 * ax)) - math.log(2.0)


def supermartingale_value(state, lam, e_sum):
    """cosh(lam * s_t) * exp(-e_sum), evaluated in log space."""
    if lam < 0 or e_sum < 0:
        raise ValueError("lam and e_sum must be nonnegative")
    return math.exp(log_cosh(lam * state.s) - e_sum)


def bernstein_e_term(lam, B, sigma_sq, g_norm_sq):
    """e_i(lam) under the Bernstein moment condition; requires lam < 1/B."""
    if not 0 <= lam * B < 1:
        raise ValueError("Bernstein MGF control needs 0 <= lam < 1/B")
    return g_norm_sq * lam**2 / (2.0 * (1.0 - lam * B)) * sigma_sq


def bounded_e_term(lam, B, sigma_sq, g_norm_sq):
    """e_i(lam) for noise bounded by B with variance sigma_sq."""
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    lb = lam * B
    return g_norm_sq * (math.expm1(lb) - lb) / B**2 * sigma_sq
