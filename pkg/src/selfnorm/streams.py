"""Batch stream simulation kernels for the Monte-Carlo harness.

`stream_stats` replays one (X, eps) stream through the same incremental
Cholesky arithmetic as the online tracker, returning whole paths at once;
equality with the tracker module is covered by tests.  The radius-path
helpers evaluate J_t for every prefix of a stream.
"""

import math

import numpy as np

from ._backend import maybe_njit
from .specfun import _bennett_h_inv
from .radii import Method, _mixed_radius


@maybe_njit
def stream_stats(K, eps, rho):
    """Paths (s_t, ||G_t||^2, logdet_t, resid_t) for a full kernel matrix K.

    resid_t = eps_t - f_{t-1}(X_t) is the predictable ridge residual of the
    stream regressed on itself (targets equal to the noise).
    """
    T = K.shape[0]
    L = np.zeros((T, T))
    u = np.zeros(T)
    s = np.empty(T)
    g2 = np.empty(T)
    logdet = np.empty(T)
    resid = np.empty(T)
    w = np.zeros(T)
    sum_eps_sq = 0.0
    u_norm_sq = 0.0
    ld = 0.0
    for t in range(T):
        for i in range(t):
            acc = K[t, i]
            for j in range(i):
                acc -= L[i, j] * w[j]
            w[i] = acc / L[i, i]
        wn = 0.0
        wu = 0.0
        for i in range(t):
            wn += w[i] * w[i]
            wu += w[i] * u[i]
        beta = K[t, t] - wn
        if beta < 0.0:
            beta = 0.0
        piv = math.sqrt(beta + rho)
        for i in range(t):
            L[t, i] = w[i]
        L[t, t] = piv
        u[t] = (eps[t] - wu) / piv
        resid[t] = piv * u[t]
        sum_eps_sq += eps[t] * eps[t]
        u_norm_sq += u[t] * u[t]
        val = sum_eps_sq - rho * u_norm_sq
        if val < 0.0:
            val = 0.0
        s[t] = math.sqrt(val)
        g2[t] = beta / (beta + rho)
        ld += math.log1p(beta / rho)
        logdet[t] = ld
    return s, g2, logdet, resid


@maybe_njit
def mixed_radius_path(nu_path, theta, B, log_target):
    out = np.empty(nu_path.shape[0])
    for i in range(nu_path.shape[0]):
        out[i] = _mixed_radius(nu_path[i], theta, B, log_target)
    return out


@maybe_njit
def bennett_radius_path(B, C_path, L):
    out = np.empty(C_path.shape[0])
    for i in range(C_path.shape[0]):
        C = C_path[i]
        if C <= 0.0:
            out[i] = B * L
        else:
            y = B * B / (C * C) * L
            out[i] = C * C / B * _bennett_h_inv(y, 1e-14, 200)
    return out


@maybe_njit
def variance_ucb_path(resid, B, delta1, mix_t0):
    """Anytime variance upper-confidence path from squared residuals."""
    T = resid.shape[0]
    out = np.empty(T)
    b_sq = B * B
    sg_sq = (2.0 * b_sq) ** 2
    v0 = mix_t0 * sg_sq
    rss = 0.0
    for t in range(T):
        rss += resid[t] * resid[t]
        n = t + 1.0
        v = n * sg_sq
        bound = math.sqrt((v + v0) * (math.log((v + v0) / v0) + 2.0 * math.log(1.0 / delta1)))
        val = rss / n + bound / n
        out[t] = min(b_sq, val)
    return out


def radius_path(method, cfg, g2, logdet, resid):
    """J_t for t = 1..T given the per-step stream statistics."""
    method = Method(method)
    g2cum = np.cumsum(g2)
    L = math.log(2.0 / cfg.delta)
    if method == Method.FIXED_BERNSTEIN:
        C = np.sqrt(cfg.sigma_sq * 2.0 * logdet)
        return cfg.B * L + C * math.sqrt(2.0 * L)
    if method == Method.FIXED_BENNETT:
        C = np.sqrt(cfg.sigma_sq * 2.0 * logdet)
        return bennett_radius_path(cfg.B, C, L)
    if method == Method.MIXED_BENNETT:
        nu = cfg.sigma_sq * g2cum
        return mixed_radius_path(nu, cfg.theta, cfg.B, L)
    if method == Method.EMPIRICAL_MIXED_BENNETT:
        from .radii import _VUCB_MIX_T0

        d1, d2 = cfg.delta_split
        vucb = variance_ucb_path(resid, cfg.B, d1, _VUCB_MIX_T0)
        nu_hat = vucb * g2cum
        return mixed_radius_path(nu_hat, cfg.theta, cfg.B, math.log(2.0 / d2))
    if method == Method.SUBGAUSSIAN_BASELINE:
        return cfg.B / 2.0 * np.sqrt(2.0 * math.log(1.0 / cfg.delta) + logdet)
    raise ValueError(f"unknown method {method!r}")


def kernel_matrix(spec, points):
    """Full kernel matrix of a stream of points (T x input_dim)."""
    points = np.asarray(points, dtype=float)
    if spec.family == "Linear":
        return points @ points.T
    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1)
    return np.exp(-d2 / (2.0 * spec.lengthscale**2))


def draw_covariates(spec, T, rng):
    """Random covariate stream: unit-ball Gaussian directions for Linear
    kernels, uniform points on [0, 1] for RBF."""
    if spec.family == "Linear":
        X = rng.standard_normal((T, spec.input_dim))
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        scale = rng.random((T, 1)) ** (1.0 / spec.input_dim)
        return X / norms * scale
    return rng.random((T, spec.input_dim))
