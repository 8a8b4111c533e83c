"""Dimension-free self-normalized confidence radii for online kernel
regression, with Monte-Carlo verification harnesses and a GP-UCB simulator.
"""

from ._backend import NUMBA_ENABLED, backend_name
from .bandit import BanditEnv, BanditTrace, NoiseModel, make_env, run_episode, select_arm
from .harness import ExperimentConfig, RUNNERS
from .kernels import GramState, KernelSpec, append_point, eval_kernel, ridge_norm_sq
from .radii import (
    Method,
    RadiusConfig,
    bennett_radius,
    bernstein_radius,
    empirical_mixed_bennett_radius,
    generic_radius,
    mixed_bennett_radius,
    mixture_value,
    subgaussian_baseline_radius,
    variance_ucb,
)
from .regression import (
    RegressionState,
    add_observation,
    ellipsoid_radius,
    predict,
    ucb_value,
)
from .specfun import (
    NumericError,
    ToleranceSpec,
    bennett_h,
    bennett_h_inv,
    log_gamma,
    log_reg_upper_gamma,
    reg_upper_gamma,
)
from .tracker import TrackerState, info_gain_bound, self_norm_stat, step, supermartingale_value

__version__ = "1.0.0"

__all__ = [
    "NUMBA_ENABLED",
    "backend_name",
    "BanditEnv",
    "BanditTrace",
    "NoiseModel",
    "make_env",
    "run_episode",
    "select_arm",
    "ExperimentConfig",
    "RUNNERS",
    "GramState",
    "KernelSpec",
    "append_point",
    "eval_kernel",
    "ridge_norm_sq",
    "Method",
    "RadiusConfig",
    "bennett_radius",
    "bernstein_radius",
    "empirical_mixed_bennett_radius",
    "generic_radius",
    "mixed_bennett_radius",
    "mixture_value",
    "subgaussian_baseline_radius",
    "variance_ucb",
    "RegressionState",
    "add_observation",
    "ellipsoid_radius",
    "predict",
    "ucb_value",
    "NumericError",
    "ToleranceSpec",
    "bennett_h",
    "bennett_h_inv",
    "log_gamma",
    "log_reg_upper_gamma",
    "reg_upper_gamma",
    "TrackerState",
    "info_gain_bound",
    "self_norm_stat",
    "step",
    "supermartingale_value",
]
