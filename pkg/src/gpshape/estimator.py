"""Scikit-learn style regressor wrapping the constrained GP pipeline.

`ConstrainedGPRegressor.fit` rescales inputs to the unit cube, optionally
centers the outputs, conditions the coefficient prior on the data, and
solves the QP for the mode; `predict` evaluates the mode curve (the shape
constraint therefore holds at every point of the domain, not just the
training data).  Posterior draws and credible bands come from the rejection
sampler.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .basis import DomainMap, KnotGrid
from .constraints import (
    Bounded,
    Monotone,
    ShapeConstraint,
    Unconstrained,
    check_function_shape,
    encode,
    required_kind,
)
from .exceptions import ConfigurationError
from .kernels import FAMILIES, SQUARED_EXPONENTIAL, Kernel
from .model import build_prior, condition, observation_matrix, unconstrained_mean
from .qp import solve_map
from .sampler import (
    PosteriorSummary,
    SampleBatch,
    credible_band,
    derive_rng,
    posterior_mean,
    sample_truncated,
)

__all__ = ["ConstrainedGPRegressor", "parse_constraint"]

_SHORTHANDS = {
    "none": Unconstrained(),
    "unconstrained": Unconstrained(),
    "increasing": Monotone("increasing"),
    "decreasing": Monotone("decreasing"),
    "positive": Bounded(0.0, np.inf),
}


def parse_constraint(spec) -> ShapeConstraint:
    """Accept a ShapeConstraint or a string shorthand.

    Strings: none | increasing | decreasing | convex | convex2d | positive |
    bounded:<a>,<b> (inf allowed) | isotonic[:<flags>] with flags like 10/01/11.
    """
    from .constraints import Convex, ConvexAlongAxes, Isotonic

    if not isinstance(spec, str):
        return spec
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name in _SHORTHANDS:
        return _SHORTHANDS[name]
    if name == "convex":
        return Convex()
    if name == "convex2d":
        return ConvexAlongAxes()
    if name == "isotonic":
        if not arg:
            return Isotonic((True, True))
        flags = arg.strip()
        if len(flags) != 2 or set(flags) - {"0", "1"}:
            raise ConfigurationError(f"isotonic flags must be two of 0/1, got {arg!r}")
        return Isotonic((flags[0] == "1", flags[1] == "1"))
    if name == "bounded":
        parts = [v.strip() for v in arg.split(",")] if arg else []
        if len(parts) != 2:
            raise ConfigurationError("bounded constraint needs 'bounded:<a>,<b>'")
        return Bounded(float(parts[0]), float(parts[1]))
    raise ConfigurationError(f"unknown constraint spec {spec!r}")


class ConstrainedGPRegressor(RegressorMixin, BaseEstimator):
    """GP regression whose predictions satisfy a shape constraint everywhere.

    Parameters
    ----------
    constraint : ShapeConstraint or str, default="none"
        Shape property to enforce; see `parse_constraint` for shorthands.
    kernel : str, default="squared_exponential"
        Covariance family name.
    variance : float, default=1.0
        Signal variance of the kernel.
    lengthscale : float or sequence, default=1.0
        Lengthscale per input dimension, in original input units.
    grid_size : int, default=50
        Number of subdivisions of the (rescaled) domain per dimension.
    noise_std : float, default=1.0
        Observation noise standard deviation.
    domain : sequence of (low, high) or None
        Input box; inferred from the training data when None.
    center : bool, default=True
        Subtract the training-output mean before fitting, add it back when
        predicting.
    random_state : int, default=0
        Seed for posterior sampling.

    Attributes (after fit)
    ----------------------
    kind_ : str                    coefficient layout in use
    grid_ : KnotGrid               knot grid
    prior_, posterior_             coefficient prior / data posterior
    system_ : LinearInequalitySystem
    mean_coefficients_ : ndarray   data-only posterior mean coefficients
    map_coefficients_ : ndarray    mode of the constrained posterior
    """

    def __init__(
        self,
        constraint="none",
        kernel=SQUARED_EXPONENTIAL,
        variance=1.0,
        lengthscale=1.0,
        grid_size=50,
        noise_std=1.0,
        domain=None,
        center=True,
        random_state=0,
    ):
        self.constraint = constraint
        self.kernel = kernel
        self.variance = variance
        self.lengthscale = lengthscale
        self.grid_size = grid_size
        self.noise_std = noise_std
        self.domain = domain
        self.center = center
        self.random_state = random_state

    def _resolve_domain(self, X: np.ndarray) -> DomainMap:
        if self.domain is not None:
            box = np.atleast_2d(np.asarray(self.domain, dtype=float))
            if box.shape != (X.shape[1], 2):
                raise ConfigurationError(
                    f"domain must give (low, high) per input dimension, got {box.shape}"
                )
            return DomainMap(tuple(box[:, 0]), tuple(box[:, 1]))
        lo, hi = X.min(axis=0), X.max(axis=0)
        span = hi - lo
        if np.any(span <= 0):
            raise ConfigurationError(
                "cannot infer a domain from constant input columns; pass `domain`"
            )
        return DomainMap(tuple(lo), tuple(hi))

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_2d=True, y_numeric=True)
        if self.kernel not in FAMILIES:
            raise ConfigurationError(f"unknown kernel family {self.kernel!r}")
        constraint = parse_constraint(self.constraint)
        dim = X.shape[1]
        self.domain_map_ = self._resolve_domain(X)
        if self.domain_map_.dim != dim:
            raise ConfigurationError("domain dimension does not match the data")

        kind = required_kind(constraint, dim)
        grid = KnotGrid(dim, int(self.grid_size))

        scales = np.broadcast_to(
            np.atleast_1d(np.asarray(self.lengthscale, dtype=float)), (dim,)
        )
        unit_ls = tuple(scales / self.domain_map_.widths)
        kernel = Kernel(self.kernel, variance=self.variance, lengthscales=unit_ls)

        U = self.domain_map_.to_unit(X)
        offset = float(np.mean(y)) if self.center else 0.0
        yc = y - offset

        # bound levels live on the original output scale; the centered model
        # sees them shifted (monotonicity and convexity are shift-invariant)
        if isinstance(constraint, Bounded):
            fitted_constraint = Bounded(constraint.lower - offset, constraint.upper - offset)
        else:
            fitted_constraint = constraint

        prior = build_prior(kind, grid, kernel)
        A = observation_matrix(kind, grid, U)
        posterior = condition(prior, A, yc, float(self.noise_std))
        system = encode(fitted_constraint, grid, kind)
        if isinstance(constraint, Unconstrained):
            map_coef = posterior.mean.copy()
            self.qp_solution_ = None
        else:
            self.qp_solution_ = solve_map(posterior, system)
            map_coef = self.qp_solution_.solution

        self.constraint_ = constraint
        self.fitted_constraint_ = fitted_constraint
        self.kind_ = kind
        self.grid_ = grid
        self.kernel_ = kernel
        self.prior_ = prior
        self.posterior_ = posterior
        self.system_ = system
        self.mean_coefficients_ = posterior.mean
        self.map_coefficients_ = map_coef
        self.y_offset_ = offset
        self.n_features_in_ = dim
        return self

    def _unit_points(self, X) -> np.ndarray:
        check_is_fitted(self, "map_coefficients_")
        X = check_array(X, ensure_2d=True)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, expected {self.n_features_in_}"
            )
        return self.domain_map_.to_unit(X)

    def predict(self, X):
        """Mode (maximum a posteriori) curve of the constrained posterior."""
        from .basis import design_matrix

        U = self._unit_points(X)
        return design_matrix(self.grid_, self.kind_, U) @ self.map_coefficients_ + self.y_offset_

    def predict_unconstrained(self, X):
        """Data-only posterior-mean curve (may violate the constraint)."""
        U = self._unit_points(X)
        return (
            unconstrained_mean(self.posterior_, self.kind_, self.grid_, U)
            + self.y_offset_
        )

    def sample_posterior(self, size: int, random_state=None, **kwargs) -> SampleBatch:
        """Exact coefficient samples of the constrained posterior."""
        check_is_fitted(self, "map_coefficients_")
        seed = self.random_state if random_state is None else random_state
        rng = seed if isinstance(seed, np.random.Generator) else derive_rng(int(seed))
        return sample_truncated(
            self.posterior_, self.system_, self.map_coefficients_, size, rng, **kwargs
        )

    def posterior_summary(
        self, X, level: float = 0.95, size: int = 200, random_state=None
    ) -> PosteriorSummary:
        """Mode, Monte-Carlo mean, and pointwise credible band at X."""
        U = self._unit_points(X)
        batch = self.sample_posterior(size, random_state=random_state)
        lo, hi = credible_band(batch, self.kind_, self.grid_, U, level=level)
        return PosteriorSummary(
            mode_coefficients=self.map_coefficients_,
            mean_coefficients=batch.samples.mean(axis=0),
            level=level,
            band_lower=lo + self.y_offset_,
            band_upper=hi + self.y_offset_,
            probes=np.asarray(X, dtype=float),
            batch=batch,
        )

    def posterior_mean_curve(self, X, batch: SampleBatch):
        """Monte-Carlo posterior-mean curve at X for an existing batch."""
        U = self._unit_points(X)
        return posterior_mean(batch, self.kind_, self.grid_, U) + self.y_offset_

    def constraint_satisfied(self, probes_per_dim: int = 1000) -> bool:
        """Verify the fitted mode curve against the functional shape check."""
        check_is_fitted(self, "map_coefficients_")
        if isinstance(self.constraint_, Unconstrained):
            return True
        return check_function_shape(
            self.fitted_constraint_,
            self.grid_,
            self.kind_,
            self.map_coefficients_,
            probes_per_dim=probes_per_dim,
        )
