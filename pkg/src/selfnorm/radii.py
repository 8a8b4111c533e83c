"""Confidence-radius calculators for the self-normalized statistic.

Five methods are exposed:

* fixed Bernstein  -- B L + C sqrt(2 L), the exact optimum of the generic
  fixed-lambda bound under the sub-exponential MGF control;
* fixed Bennett    -- (C^2/B) h^{-1}((B^2/C^2) L) for bounded noise;
* mixed Bennett    -- root of a Gamma-mixture boundary, valid at stopping
  times without a deterministic variance cap;
* empirical mixed Bennett -- same boundary with a variance upper confidence
  sequence plugged in, failure budget split delta1 + delta2;
* sub-Gaussian baseline -- the classical comparison radius
  scale * sqrt(2 ln(1/delta) + ln det(I + K/rho)).
"""

import math
from dataclasses import dataclass, field
from enum import Enum

from ._backend import maybe_njit
from .specfun import NumericError, _bennett_h_inv, _log_reg_upper_gamma


class Method(str, Enum):
    FIXED_BERNSTEIN = "FixedBernstein"
    FIXED_BENNETT = "FixedBennett"
    MIXED_BENNETT = "MixedBennett"
    EMPIRICAL_MIXED_BENNETT = "EmpiricalMixedBennett"
    SUBGAUSSIAN_BASELINE = "SubGaussianBaseline"


@dataclass(frozen=True)
class RadiusConfig:
    delta: float = 0.1
    rho: float = 0.05
    B: float = 1.0
    sigma_sq: float = 1.0 / 3.0
    theta: float = 1.0
    method: Method = Method.MIXED_BENNETT
    delta_split: tuple = field(default=None)

    def __post_init__(self):
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not self.theta > 0:
            raise ValueError("theta must be positive")
        if not self.B > 0:
            raise ValueError("B must be positive")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if self.delta_split is None:
            object.__setattr__(self, "delta_split", (self.delta / 2, self.delta / 2))
        d1, d2 = self.delta_split
        if d1 <= 0 or d2 <= 0 or d1 + d2 > self.delta + 1e-12:
            raise ValueError("delta_split must be positive with delta1 + delta2 <= delta")
        object.__setattr__(self, "method", Method(self.method))

    @classmethod
    def from_dict(cls, d):
        split = None
        if "delta1" in d or "delta2" in d:
            split = (float(d["delta1"]), float(d["delta2"]))
        return cls(
            delta=float(d.get("delta", 0.1)),
            rho=float(d.get("rho", 0.05)),
            B=float(d.get("B", 1.0)),
            sigma_sq=float(d.get("sigma_sq", 1.0 / 3.0)),
            theta=float(d.get("theta", 1.0)),
            method=Method(d.get("method", "MixedBennett")),
            delta_split=split,
        )

    def to_dict(self):
        return {
            "delta": self.delta,
            "rho": self.rho,
            "B": self.B,
            "sigma_sq": self.sigma_sq,
            "theta": self.theta,
            "method": self.method.value,
            "delta1": self.delta_split[0],
            "delta2": self.delta_split[1],
        }


def generic_radius(lam, e_sum, delta):
    """(e_sum + ln(2/delta)) / lam, the fixed-lambda bound."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return (e_sum + math.log(2.0 / delta)) / lam


def bernstein_radius(B, C, delta):
    """B ln(2/delta) + C sqrt(2 ln(2/delta))."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if B < 0 or C < 0:
        raise ValueError("B and C must be nonnegative")
    L = math.log(2.0 / delta)
    return B * L + C * math.sqrt(2.0 * L)


def bennett_radius(B, C, delta):
    """(C^2/B) h^{-1}((B^2/C^2) ln(2/delta)); always <= bernstein_radius."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if not B > 0:
        raise ValueError("B must be positive")
    if not C > 0:
        # h^{-1} scaling degenerates; use bernstein_radius with C=0 instead
        raise ValueError("bennett_radius requires C > 0")
    L = math.log(2.0 / delta)
    y = B * B / (C * C) * L
    u = _bennett_h_inv(y, 1e-14, 200)
    return C * C / B * u


@maybe_njit
def _log_mixture(s, nu, theta, B):
    """ln of the Gamma-mixture boundary process at (s_t, nu_t)."""
    b2 = B * B
    a = theta / b2
    A = (B * s + nu + theta) / b2
    b = (nu + theta) / b2
    rel_tol = 1e-13
    it = 200 + int(10.0 * math.sqrt(A)) + 50
    lq_a = _log_reg_upper_gamma(a, a, rel_tol, it)
    lq_A = _log_reg_upper_gamma(A, b, rel_tol, it)
    if math.isnan(lq_a) or math.isnan(lq_A):
        return math.nan
    return (
        nu / b2
        + a * math.log(a)
        - math.lgamma(a)
        - lq_a
        + math.lgamma(A)
        + lq_A
        - A * math.log(b)
    )


def mixture_value(s, nu, theta, B):
    """The Gamma-mixture boundary statistic; strictly increasing in s."""
    if s < 0 or nu < 0:
        raise ValueError("s and nu must be nonnegative")
    if not (theta > 0 and B > 0):
        raise ValueError("theta and B must be positive")
    lm = _log_mixture(float(s), float(nu), float(theta), float(B))
    if math.isnan(lm):
        raise NumericError(f"mixture_value({s}, {nu}) did not converge")
    return math.exp(lm)


@maybe_njit
def _mixed_radius(nu, theta, B, log_target):
    # root of log-mixture(s) = log_target; bracket grown geometrically from
    # the Bernstein closed form, then bisected.
    hi = B * log_target + math.sqrt(2.0 * nu * log_target) + 1e-3
    lo = 0.0
    for _ in range(200):
        v = _log_mixture(hi, nu, theta, B)
        if math.isnan(v):
            return math.nan
        if v >= log_target:
            break
        lo = hi
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        v = _log_mixture(mid, nu, theta, B)
        if math.isnan(v):
            return math.nan
        if v < log_target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def mixed_bennett_radius(nu, cfg, delta=None):
    """The s* with mixture_value(s*, nu, theta, B) = 2/delta."""
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    d = cfg.delta if delta is None else delta
    s = _mixed_radius(float(nu), cfg.theta, cfg.B, math.log(2.0 / d))
    if math.isnan(s):
        raise NumericError(f"mixed_bennett_radius root finding failed at nu={nu}")
    return s


# tuning constant of the normal-mixture variance boundary, in units of the
# per-increment sub-Gaussian variance
_VUCB_MIX_T0 = 5.0


def variance_ucb(residual_sq_sum, count, B, delta1):
    """Anytime upper confidence value for the noise variance.

    Squared prediction residuals are bounded by 4 B^2, hence their running
    mean concentrates at sub-Gaussian scale 2 B^2 per step; a one-sided
    normal-mixture boundary gives a time-uniform upper confidence sequence,
    clipped at the worst-case variance B^2 of a [-B, B] variable.
    """
    if count < 0 or residual_sq_sum < 0:
        raise ValueError("inputs must be nonnegative")
    if not 0 < delta1 < 1:
        raise ValueError("delta1 must lie in (0, 1)")
    b_sq = B * B
    if count == 0:
        return b_sq
    sg_sq = (2.0 * b_sq) ** 2
    v = count * sg_sq
    v0 = _VUCB_MIX_T0 * sg_sq
    bound = math.sqrt((v + v0) * (math.log((v + v0) / v0) + 2.0 * math.log(1.0 / delta1)))
    mean = residual_sq_sum / count
    return min(b_sq, mean + bound / count)


def empirical_mixed_bennett_radius(g_norm_sq_sum, variance_ucb_value, cfg):
    """Mixed Bennett radius driven by the empirical pseudo-variance."""
    if g_norm_sq_sum < 0 or variance_ucb_value < 0:
        raise ValueError("inputs must be nonnegative")
    nu_hat = variance_ucb_value * g_norm_sq_sum
    return mixed_bennett_radius(nu_hat, cfg, delta=cfg.delta_split[1])


def subgaussian_baseline_radius(sub_gauss_scale, logdet_ratio, delta):
    """scale * sqrt(2 ln(1/delta) + ln det(I + K/rho))."""
    if sub_gauss_scale < 0 or logdet_ratio < 0:
        raise ValueError("inputs must be nonnegative")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return sub_gauss_scale * math.sqrt(2.0 * math.log(1.0 / delta) + logdet_ratio)
