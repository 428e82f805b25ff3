"""Non-parametric bootstrap of cross-validation residuals.

Residuals are resampled with replacement (no model retraining); each
bootstrap set B_j yields RMSE_Bj = sqrt(sum(eps*^2)/n) and
CoP_Bj = 1 - sum(eps*^2)/SS_T with SS_T held fixed at the original value.
Confidence intervals are empirical percentile intervals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError
from .util import as_float_vector

DEFAULT_REPS = 100_000
_CHUNK_ELEMENTS = 4_000_000  # bounds the resample index matrix per chunk


@dataclass(frozen=True)
class BootstrapDistribution:
    """Resampled RMSE / CoP values for one residual vector."""

    reps: int
    seed: int
    n: int
    ss_t: float
    rmse_samples: np.ndarray = field(repr=False)
    cop_samples: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ConfidenceInterval:
    level: float
    lower: float
    upper: float

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def bootstrap_residuals(
    cv_residuals, ss_t: float, reps: int = DEFAULT_REPS, seed: int = 0
) -> BootstrapDistribution:
    """Resample the residual vector ``reps`` times with replacement.

    Deterministic for a fixed seed; the resample order is that of one
    sequential stream regardless of internal chunking.
    """
    res = as_float_vector(cv_residuals, "cv_residuals")
    n = res.size
    if n < 2:
        raise ArgumentError("bootstrap needs at least two residuals")
    if not ss_t > 0.0:
        raise ArgumentError("ss_t must be positive")
    if reps < 1:
        raise ArgumentError("reps must be >= 1")

    rng = np.random.default_rng(seed)
    rmse = np.empty(reps)
    cop = np.empty(reps)
    sq = res**2
    chunk = max(1, _CHUNK_ELEMENTS // n)
    pos = 0
    while pos < reps:
        k = min(chunk, reps - pos)
        idx = rng.integers(0, n, size=(k, n))
        sse = sq[idx].sum(axis=1)
        rmse[pos:pos + k] = np.sqrt(sse / n)
        cop[pos:pos + k] = 1.0 - sse / ss_t
        pos += k
    return BootstrapDistribution(
        reps=reps, seed=seed, n=n, ss_t=float(ss_t), rmse_samples=rmse, cop_samples=cop
    )


def confidence_interval(
    dist: BootstrapDistribution, measure: str = "cop", level: float = 0.99
) -> ConfidenceInterval:
    """Percentile interval at the given level (linearly interpolated
    empirical quantiles)."""
    if not 0.0 < level < 1.0:
        raise ArgumentError(f"confidence level must be in (0, 1), got {level}")
    if measure == "cop":
        samples = dist.cop_samples
    elif measure == "rmse":
        samples = dist.rmse_samples
    else:
        raise ArgumentError(f"unknown measure {measure!r}; choose 'rmse' or 'cop'")
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(samples, [alpha, 1.0 - alpha])
    return ConfidenceInterval(level=level, lower=float(lo), upper=float(hi))


def histogram(samples: np.ndarray, bins: int = 50) -> dict:
    """Uniform-bin histogram in a JSON-friendly form."""
    counts, edges = np.histogram(samples, bins=bins)
    return {"counts": counts.tolist(), "edges": edges.tolist()}
