"""Variance-based sensitivity indices on a trained surrogate.

First-order indices use the Saltelli-2010 estimator, total-effect indices the
Jansen estimator, both over uniform independent inputs inside the sampling
bounds. Because a surrogate only represents the explained part of the true
response variance, indices can be rescaled by the model's CoP.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ArgumentError, DegenerateOutputError, DimensionError
from .sampling import Bounds
from .surrogate import TrainedSurrogate


@dataclass(frozen=True)
class SaltelliBundle:
    """Sample matrices A, B and the column-swapped AB^i blocks."""

    a: np.ndarray
    b: np.ndarray
    ab: tuple[np.ndarray, ...]
    bounds: Bounds
    base_n: int

    @property
    def m(self) -> int:
        return self.a.shape[1]

    @property
    def total_evaluations(self) -> int:
        return self.base_n * (self.m + 2)


@dataclass(frozen=True)
class SensitivityResult:
    """First-order and total-effect estimates, optionally CoP-scaled."""

    s_first: np.ndarray
    s_total: np.ndarray
    variance: float
    base_n: int
    cop: float | None = None
    s_first_cv: np.ndarray | None = field(default=None, repr=False)
    s_total_cv: np.ndarray | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.s_first.size

    def ranking(self) -> np.ndarray:
        """Input indices ordered from most to least influential (total effect)."""
        return np.argsort(-self.s_total, kind="stable")


def saltelli_design(m: int, n: int, bounds: Bounds, seed: int) -> SaltelliBundle:
    """Uniform A/B/AB^i sample bundle; n*(m+2) model evaluations in total."""
    if m < 1:
        raise ArgumentError("need at least one input")
    if n < 64:
        raise ArgumentError(f"base sample size must be >= 64, got {n}")
    if bounds.dim != m:
        raise DimensionError(f"bounds describe {bounds.dim} columns, expected {m}")
    rng = np.random.default_rng(seed)
    a = bounds.denormalize(rng.uniform(size=(n, m)))
    b = bounds.denormalize(rng.uniform(size=(n, m)))
    ab = []
    for i in range(m):
        block = a.copy()
        block[:, i] = b[:, i]
        ab.append(block)
    return SaltelliBundle(a=a, b=b, ab=tuple(ab), bounds=bounds, base_n=n)


def sobol_indices(model: TrainedSurrogate, bundle: SaltelliBundle) -> SensitivityResult:
    """Estimate first-order and total-effect indices of the surrogate response."""
    if bundle.m != model.input_dim:
        raise DimensionError(
            f"bundle has {bundle.m} inputs, model expects {model.input_dim}"
        )
    fa = model.predict(bundle.a)
    fb = model.predict(bundle.b)
    variance = float(np.var(np.concatenate([fa, fb]), ddof=1))
    if variance < 1e-14:
        raise DegenerateOutputError("surrogate response variance is numerically zero")

    m = bundle.m
    s_first = np.empty(m)
    s_total = np.empty(m)
    for i in range(m):
        fab = model.predict(bundle.ab[i])
        s_first[i] = float(np.mean(fb * (fab - fa))) / variance
        s_total[i] = 0.5 * float(np.mean((fa - fab) ** 2)) / variance
    return SensitivityResult(
        s_first=s_first, s_total=s_total, variance=variance, base_n=bundle.base_n
    )


def scale_by_cop(result: SensitivityResult, cop: float) -> SensitivityResult:
    """Attach CoP-scaled index vectors; the raw estimates stay untouched."""
    return replace(
        result,
        cop=float(cop),
        s_first_cv=cop * result.s_first,
        s_total_cv=cop * result.s_total,
    )


def clamp_indices(values: np.ndarray) -> np.ndarray:
    """Non-negative copy for reporting; estimators may go slightly negative."""
    return np.maximum(np.asarray(values, dtype=float), 0.0)
