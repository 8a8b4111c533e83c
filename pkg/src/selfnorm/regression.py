"""Online kernel ridge regression with anytime confidence ellipsoids.

The ellipsoid is never materialized: only its support function (ucb_value)
is exposed, which is all that GP-UCB and the tests need.
"""

import math

import numpy as np

from .kernels import GramState, _forward_solve


class RegressionState:
    def __init__(self, spec, rho, D, radius_cfg=None):
        if not D > 0:
            raise ValueError("D must be positive")
        self.gram = GramState(spec, rho)
        self._targets = []
        self.D = float(D)
        self.radius_cfg = radius_cfg
        # incremental forward-solve of the factor against the target vector
        self._u_y = []

    @property
    def t(self):
        return self.gram.n

    @property
    def targets(self):
        return np.asarray(self._targets)


def add_observation(state, x, y):
    """Record one (covariate, target) pair; returns the mutated state."""
    w, piv, _beta = state.gram._extend(x)
    u_prev = np.asarray(state._u_y)
    state._u_y.append((y - float(w @ u_prev)) / piv)
    state._targets.append(float(y))
    return state


def predict(state, x):
    """Ridge prediction <theta_t(rho), phi(x)> via kernel algebra."""
    if state.t == 0:
        return 0.0
    k_vec = state.gram.cross_to_points(x)
    w = _forward_solve(state.gram.chol, state.t, k_vec)
    return float(w @ np.asarray(state._u_y))


def ellipsoid_radius(state, J):
    """eta_t = J_t(delta) + sqrt(rho) * D."""
    if J < 0:
        raise ValueError("J must be nonnegative")
    return J + math.sqrt(state.gram.rho) * state.D


def ucb_value(state, x, eta):
    """Support function of the confidence ellipsoid in direction phi(x)."""
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    from .kernels import ridge_norm_sq

    return predict(state, x) + eta * math.sqrt(ridge_norm_sq(state.gram, x))
