"""Gaussian process regression with shape constraints satisfied everywhere.

A zero-mean GP is approximated by a basis expansion with jointly Gaussian
coefficients chosen so that boundedness, monotonicity, and convexity of the
function are equivalent to finitely many linear inequalities on the
coefficients.  Fitting conditions the coefficients on noisy data, the mode
under the constraints solves a strictly convex QP, and exact posterior draws
come from rejection sampling recentered at that mode.
"""

from .basis import DomainMap, KnotGrid, design_matrix, design_row
from .constraints import (
    Bounded,
    Convex,
    ConvexAlongAxes,
    Isotonic,
    LinearInequalitySystem,
    Monotone,
    Unconstrained,
    check_function_shape,
    encode,
    is_member,
)
from .estimator import ConstrainedGPRegressor, parse_constraint
from .kernels import Kernel
from .model import (
    CoefficientPosterior,
    CoefficientPrior,
    ObservationSet,
    approx_kernel,
    build_prior,
    condition,
    observation_matrix,
    reference_kriging,
    unconstrained_mean,
)
from .qp import QpSolution, map_curve, solve_map
from .sampler import (
    PosteriorSummary,
    SampleBatch,
    credible_band,
    derive_rng,
    posterior_mean,
    sample_truncated,
)
from .tuning import CvConfig, cv_select

__version__ = "0.1.0"

__all__ = [
    "Bounded",
    "CoefficientPosterior",
    "CoefficientPrior",
    "ConstrainedGPRegressor",
    "Convex",
    "ConvexAlongAxes",
    "CvConfig",
    "DomainMap",
    "Isotonic",
    "Kernel",
    "KnotGrid",
    "LinearInequalitySystem",
    "Monotone",
    "ObservationSet",
    "PosteriorSummary",
    "QpSolution",
    "SampleBatch",
    "Unconstrained",
    "approx_kernel",
    "build_prior",
    "check_function_shape",
    "condition",
    "credible_band",
    "cv_select",
    "derive_rng",
    "design_matrix",
    "design_row",
    "encode",
    "is_member",
    "map_curve",
    "observation_matrix",
    "parse_constraint",
    "posterior_mean",
    "reference_kriging",
    "sample_truncated",
    "solve_map",
    "unconstrained_mean",
]
