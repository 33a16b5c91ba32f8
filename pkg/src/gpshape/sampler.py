"""Exact truncated-Gaussian sampling by rejection from the mode.

To draw from N(mean, C) restricted to a convex inequality system, proposals
are taken from N(mode, C) with the mode obtained from the QP module.  A
feasible proposal z is accepted with probability

    t = exp(w^T (z - mode)),   w = C^{-1} (mean - mode),

which is the target/proposal density ratio normalized by its supremum over
the feasible set; first-order optimality of the mode makes the exponent
nonpositive for every feasible z, so t is a valid probability.  Accepted
draws are exact samples of the truncated law.

Streams are counter-based (Philox) so that a seed fully determines the
sample sequence on any platform; `derive_rng` documents the splitting rule
used for replications and sub-batches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from . import linalg
from .basis import KnotGrid, design_matrix
from .constraints import LinearInequalitySystem, membership_mask
from .exceptions import SamplerStallError
from .model import CoefficientPosterior

__all__ = [
    "derive_rng",
    "SampleBatch",
    "PosteriorSummary",
    "sample_truncated",
    "posterior_mean",
    "credible_band",
]

DEFAULT_MAX_PROPOSALS = 10_000_000
STALL_RATE = 1e-6


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Philox generator for (seed, *path); identical inputs, identical stream.

    Sub-streams (replications, parallel sub-batches) are derived by
    appending integers to the path, e.g. ``derive_rng(seed, rep)``; the
    splitting is injective, so distinct paths never collide.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *map(int, path)])))


@dataclass
class SampleBatch:
    """Accepted coefficient samples plus rejection diagnostics."""

    samples: np.ndarray
    proposals: int
    acceptance_rate: float
    max_exponent: float  # largest acceptance exponent seen on feasible proposals

    @property
    def size(self) -> int:
        return self.samples.shape[0]


@dataclass
class PosteriorSummary:
    """Mode and Monte-Carlo summaries of the constrained posterior."""

    mode_coefficients: np.ndarray
    mean_coefficients: np.ndarray
    level: float
    band_lower: np.ndarray
    band_upper: np.ndarray
    probes: np.ndarray
    batch: SampleBatch = field(repr=False)


def sample_truncated(
    posterior: CoefficientPosterior,
    system: LinearInequalitySystem,
    mode: np.ndarray,
    size: int,
    rng: np.random.Generator,
    max_proposals: int = DEFAULT_MAX_PROPOSALS,
    stall_rate: float = STALL_RATE,
) -> SampleBatch:
    """Draw `size` exact samples of the truncated coefficient posterior.

    Raises SamplerStallError once `max_proposals` proposals have been made
    with an acceptance rate below `stall_rate`.
    """
    if size < 1:
        raise ValueError("size must be >= 1")
    mode = np.asarray(mode, dtype=float)
    p = posterior.size
    if mode.shape != (p,):
        raise ValueError("mode length must match the posterior")
    L, _ = linalg.jittered_cholesky(posterior.covariance)
    half = solve_triangular(L, posterior.mean - mode, lower=True)
    w = solve_triangular(L.T, half, lower=False)  # C^{-1}(mean - mode)

    chunk = int(min(65536, max(1024, 2 * size)))
    collected = []
    accepted = 0
    proposals = 0
    max_exponent = -np.inf
    while accepted < size:
        Z = rng.standard_normal((chunk, p)) @ L.T + mode
        U = rng.random(chunk)
        proposals += chunk
        feasible = membership_mask(system, Z)
        if np.any(feasible):
            expo = (Z[feasible] - mode) @ w
            max_exponent = max(max_exponent, float(np.max(expo)))
            keep = U[feasible] <= np.exp(np.minimum(expo, 0.0))
            kept = Z[feasible][keep]
            if kept.shape[0]:
                collected.append(kept)
                accepted += kept.shape[0]
        if accepted < size and proposals >= max_proposals:
            rate = accepted / proposals
            if rate < stall_rate:
                raise SamplerStallError(
                    f"acceptance rate {rate:.2e} after {proposals} proposals",
                    proposals=proposals,
                    accepted=accepted,
                )
    samples = np.vstack(collected)[:size]
    return SampleBatch(samples, proposals, accepted / proposals, max_exponent)


def posterior_mean(batch: SampleBatch, kind: str, grid: KnotGrid, X) -> np.ndarray:
    """Monte-Carlo posterior-mean curve at points X."""
    if batch.size == 0:
        raise ValueError("empty sample batch")
    return design_matrix(grid, kind, X) @ batch.samples.mean(axis=0)


def credible_band(
    batch: SampleBatch, kind: str, grid: KnotGrid, X, level: float = 0.95
) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise equal-tailed empirical band of the sampled curves at X."""
    if batch.size < 100:
        raise ValueError("credible bands need at least 100 samples")
    if not 0.0 <= level <= 1.0:
        raise ValueError("level must lie in [0, 1]")
    curves = batch.samples @ design_matrix(grid, kind, X).T  # (m, n_probes)
    lo = np.quantile(curves, 0.5 * (1.0 - level), axis=0)
    hi = np.quantile(curves, 0.5 * (1.0 + level), axis=0)
    return lo, hi
