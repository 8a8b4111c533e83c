"""Shared dense-linear-algebra oracles for the kernel-trick implementation.

Everything here deliberately avoids the incremental Cholesky code paths:
statistics are recomputed from scratch with numpy.linalg on explicit
feature-space matrices, so agreement with the package is meaningful.
"""

import numpy as np
import pytest


def dense_stats(X, eps, rho):
    """Per-step (s_t, g_sq_t, logdet_t) from explicit V_t and M_t."""
    T, d = X.shape
    V = np.zeros((d, d))
    M = np.zeros(d)
    s = np.empty(T)
    g2 = np.empty(T)
    logdet = np.empty(T)
    I = np.eye(d)
    for t in range(T):
        x = X[t]
        V += np.outer(x, x)
        M += x * eps[t]
        A = rho * I + V
        s[t] = float(np.sqrt(M @ np.linalg.solve(A, M)))
        g2[t] = float(x @ np.linalg.solve(A, x))
        sign, ld = np.linalg.slogdet(I + V / rho)
        logdet[t] = ld
    return s, g2, logdet


def dense_ridge_norm_sq(X, x, rho):
    d = X.shape[1]
    A = rho * np.eye(d) + X.T @ X
    return float(x @ np.linalg.solve(A, x))


def dense_predict(X, y, x, rho):
    d = X.shape[1]
    A = rho * np.eye(d) + X.T @ X
    theta = np.linalg.solve(A, X.T @ y)
    return float(theta @ x)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260824)
