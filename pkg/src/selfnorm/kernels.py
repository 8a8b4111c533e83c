"""Kernel evaluation and incremental Gram-matrix state.

All Hilbert-space quantities are reduced to finite kernel algebra through
the lower-triangular factor of (K_t + rho I).  The factor is extended by
rank-one updates; a full refactorization every REFRESH_EVERY appends guards
against numerical drift.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import maybe_njit
from .specfun import NumericError

RBF = "RBF"
LINEAR = "Linear"

REFRESH_EVERY = 128
_JITTER_SCALE = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    family: str = RBF
    lengthscale: float = 0.01
    input_dim: int = 1

    def __post_init__(self):
        if self.family not in (RBF, LINEAR):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == RBF and not self.lengthscale > 0:
            raise ValueError("RBF lengthscale must be positive")
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")


def eval_kernel(spec, x, y):
    """k(x, y) for a single pair of input vectors."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != (spec.input_dim,) or y.shape != (spec.input_dim,):
        raise ValueError(
            f"dimension mismatch: expected {spec.input_dim}, "
            f"got {x.shape} and {y.shape}"
        )
    if spec.family == LINEAR:
        return float(x @ y)
    d2 = float(np.sum((x - y) ** 2))
    return math.exp(-d2 / (2.0 * spec.lengthscale**2))


def cross_kernel(spec, points, x):
    """Vector of k(p_i, x) over the rows of `points`."""
    if points.shape[0] == 0:
        return np.zeros(0)
    if spec.family == LINEAR:
        return points @ x
    d2 = np.sum((points - x[None, :]) ** 2, axis=1)
    return np.exp(-d2 / (2.0 * spec.lengthscale**2))


@maybe_njit
def _forward_solve(L, n, b):
    # solve L[:n,:n] w = b for lower-triangular L
    w = np.empty(n)
    for i in range(n):
        acc = b[i]
        for j in range(i):
            acc -= L[i, j] * w[j]
        w[i] = acc / L[i, i]
    return w


@maybe_njit
def _backward_solve(L, n, b):
    # solve L[:n,:n]^T v = b
    v = np.empty(n)
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for j in range(i + 1, n):
            acc -= L[j, i] * v[j]
        v[i] = acc / L[i, i]
    return v


class GramState:
    """Incremental factor of (K_t + rho I) with accumulated log-det ratio.

    Owned by a single logical task; queries are read-only, mutations
    exclusive.
    """

    def __init__(self, spec, rho):
        if not rho > 0:
            raise ValueError("rho must be positive")
        self.spec = spec
        self.rho = float(rho)
        self.n = 0
        cap = 16
        self.points = np.empty((cap, spec.input_dim))
        self.chol = np.zeros((cap, cap))
        self.logdet_ratio = 0.0

    def _grow(self):
        cap = self.points.shape[0]
        if self.n < cap:
            return
        new_cap = cap * 2
        pts = np.empty((new_cap, self.spec.input_dim))
        pts[:cap] = self.points
        self.points = pts
        chol = np.zeros((new_cap, new_cap))
        chol[:cap, :cap] = self.chol
        self.chol = chol

    def _extend(self, x):
        """Append x; returns (w, piv, beta) of the new factor row."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.spec.input_dim,):
            raise ValueError(f"dimension mismatch: expected {self.spec.input_dim}, got {x.shape}")
        self._grow()
        n = self.n
        kxx = eval_kernel(self.spec, x, x)
        k_vec = cross_kernel(self.spec, self.points[:n], x)
        w = _forward_solve(self.chol, n, k_vec) if n else np.zeros(0)
        beta = kxx - float(w @ w)
        piv_sq = beta + self.rho
        if piv_sq <= 0.0:
            piv_sq += _JITTER_SCALE * self.rho
        if piv_sq <= 0.0:
            raise NumericError(
                f"lost positive definiteness at t={n + 1}: pivot^2={piv_sq:.3e} "
                f"(beta={beta:.3e}, rho={self.rho})"
            )
        piv = math.sqrt(piv_sq)
        self.points[n] = x
        self.chol[n, :n] = w
        self.chol[n, n] = piv
        self.n = n + 1
        self.logdet_ratio += max(math.log1p(max(beta, 0.0) / self.rho), 0.0)
        if self.n % REFRESH_EVERY == 0:
            self._refactorize()
        return w, piv, beta

    def _refactorize(self):
        n = self.n
        pts = self.points[:n]
        if self.spec.family == LINEAR:
            K = pts @ pts.T
        else:
            d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
            K = np.exp(-d2 / (2.0 * self.spec.lengthscale**2))
        A = K + self.rho * np.eye(n)
        try:
            L = np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            A += _JITTER_SCALE * self.rho * np.eye(n)
            L = np.linalg.cholesky(A)
        self.chol[:n, :n] = L
        self.logdet_ratio = float(
            2.0 * np.sum(np.log(np.diag(L))) - n * math.log(self.rho)
        )

    def cross_to_points(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return cross_kernel(self.spec, self.points[: self.n], x)


def append_point(state, x):
    """Extend the factor with one covariate; returns the mutated state."""
    state._extend(x)
    return state


def ridge_norm_sq(state, x):
    """|| (rho I + V_t)^{-1/2} phi(x) ||^2 via the kernel identity."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    kxx = eval_kernel(state.spec, x, x)
    if state.n == 0:
        return kxx / state.rho
    k_vec = state.cross_to_points(x)
    w = _forward_solve(state.chol, state.n, k_vec)
    val = (kxx - float(w @ w)) / state.rho
    return max(val, 0.0)
