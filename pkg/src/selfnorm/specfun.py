"""Scalar special functions and root finders for the Bennett-type bounds.

The regularized upper incomplete gamma function is evaluated with the
standard split: lower series for x < a + 1, continued fraction otherwise.
Everything that can overflow is computed in log space.
"""

import math
from dataclasses import dataclass

from ._backend import maybe_njit


class NumericError(RuntimeError):
    """An iterative evaluation failed to converge."""


@dataclass(frozen=True)
class ToleranceSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_TOL = ToleranceSpec()


def log_gamma(a):
    """ln Gamma(a) for a > 0."""
    if not (isinstance(a, (int, float)) and math.isfinite(a) and a > 0):
        raise ValueError(f"log_gamma requires finite a > 0, got {a!r}")
    return math.lgamma(a)


@maybe_njit
def _lower_gamma_series(a, x, rel_tol, max_iter):
    # P(a, x) via the standard series; returns (P, converged flag).
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(max_iter):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * rel_tol:
            log_pref = a * math.log(x) - x - math.lgamma(a)
            return math.exp(log_pref) * total, True
    return math.nan, False


@maybe_njit
def _upper_gamma_cf(a, x, rel_tol, max_iter):
    # Continued fraction for Q(a, x) (modified Lentz); returns the CF part
    # only, i.e. Q = exp(-x + a*log(x) - lgamma(a)) * cf.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    cf = d
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        cf *= delta
        if abs(delta - 1.0) < rel_tol:
            return cf, True
    return math.nan, False


@maybe_njit
def _log_reg_upper_gamma(a, x, rel_tol, max_iter):
    """ln Q(a, x); nan signals non-convergence."""
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        p, ok = _lower_gamma_series(a, x, rel_tol, max_iter)
        if not ok:
            return math.nan
        if p >= 1.0:
            return -math.inf
        return math.log1p(-p)
    cf, ok = _upper_gamma_cf(a, x, rel_tol, max_iter)
    if not ok or cf <= 0.0:
        return math.nan
    return -x + a * math.log(x) - math.lgamma(a) + math.log(cf)


@maybe_njit
def _reg_upper_gamma(a, x, rel_tol, max_iter):
    lq = _log_reg_upper_gamma(a, x, rel_tol, max_iter)
    return math.exp(lq)


def reg_upper_gamma(a, x, tol=DEFAULT_TOL):
    """Regularized upper incomplete gamma Q(a, x) for a > 0, x >= 0."""
    if not (math.isfinite(a) and a > 0):
        raise ValueError(f"reg_upper_gamma requires finite a > 0, got {a!r}")
    if not (math.isfinite(x) and x >= 0):
        raise ValueError(f"reg_upper_gamma requires finite x >= 0, got {x!r}")
    # the series needs O(sqrt(a)) terms for large a; scale the cap
    max_iter = max(tol.max_iter, int(10 * math.sqrt(a)) + 50)
    q = _reg_upper_gamma(a, x, tol.rel_tol, max_iter)
    if math.isnan(q):
        raise NumericError(f"reg_upper_gamma({a}, {x}) did not converge")
    return min(max(q, 0.0), 1.0)


def log_reg_upper_gamma(a, x, tol=DEFAULT_TOL):
    """ln Q(a, x), safe when Q underflows."""
    if not (math.isfinite(a) and a > 0):
        raise ValueError(f"log_reg_upper_gamma requires finite a > 0, got {a!r}")
    if not (math.isfinite(x) and x >= 0):
        raise ValueError(f"log_reg_upper_gamma requires finite x >= 0, got {x!r}")
    max_iter = max(tol.max_iter, int(10 * math.sqrt(a)) + 50)
    lq = _log_reg_upper_gamma(a, x, tol.rel_tol, max_iter)
    if math.isnan(lq):
        raise NumericError(f"log_reg_upper_gamma({a}, {x}) did not converge")
    return lq


@maybe_njit
def _bennett_h(u):
    return (1.0 + u) * math.log1p(u) - u


def bennett_h(u):
    """h(u) = (1 + u) ln(1 + u) - u for u >= 0."""
    if not (math.isfinite(u) and u >= 0):
        raise ValueError(f"bennett_h requires finite u >= 0, got {u!r}")
    return _bennett_h(u)


@maybe_njit
def _bennett_h_inv(y, abs_tol, max_iter):
    if y <= 0.0:
        return 0.0
    lo = 0.0
    hi = math.sqrt(2.0 * y) + y / 3.0  # provably valid upper end
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if _bennett_h(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo < abs_tol * max(1.0, lo):
            break
    u = 0.5 * (lo + hi)
    # Newton polish; h'(u) = log(1 + u)
    for _ in range(4):
        d = math.log1p(u)
        if d <= 0.0:
            break
        step = (_bennett_h(u) - y) / d
        nxt = u - step
        if nxt < 0.0:
            nxt = 0.0
        u = nxt
    return u


def bennett_h_inv(y, tol=DEFAULT_TOL):
    """Inverse of bennett_h on [0, inf), bisection plus Newton polish."""
    if not (math.isfinite(y) and y >= 0):
        raise ValueError(f"bennett_h_inv requires finite y >= 0, got {y!r}")
    u = _bennett_h_inv(y, tol.abs_tol, tol.max_iter)
    if abs(_bennett_h(u) - y) > max(tol.abs_tol, tol.rel_tol * y) * 10:
        raise NumericError(f"bennett_h_inv({y}) did not converge")
    return u
