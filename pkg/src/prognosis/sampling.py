"""Space-filling designs and analytical benchmark responses.

Designs are Latin Hypercube samples (one uniform draw per equal-width stratum
per column), optionally post-processed by a correlation-reducing swap search.
The benchmark registry holds the closed-form test responses used by the
repeated-run studies and the 1D demo functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import (
    ArgumentError,
    BoundsError,
    DataError,
    DimensionError,
    UnknownBenchmarkError,
)

# Rows closer than this (per coordinate) are rejected as duplicates; keeps the
# Kriging correlation matrix away from exact singularity.
DUPLICATE_ROW_TOL = 1e-12


@dataclass(frozen=True)
class Bounds:
    """Per-column lower/upper input bounds."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if lower.ndim != 1 or upper.ndim != 1 or lower.size != upper.size or lower.size < 1:
            raise BoundsError("bounds need two equal-length vectors with at least one column")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise BoundsError("bounds must be finite")
        if not np.all(lower < upper):
            bad = int(np.argmin(upper - lower))
            raise BoundsError(
                f"lower must be strictly below upper in every column "
                f"(column {bad}: [{lower[bad]}, {upper[bad]}])"
            )

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def normalize(self, x: np.ndarray) -> np.ndarray:
        """Map raw inputs onto the unit hypercube."""
        return (np.asarray(x, dtype=float) - self.lower) / self.span

    def denormalize(self, u: np.ndarray) -> np.ndarray:
        return self.lower + np.asarray(u, dtype=float) * self.span

    def contains(self, x: np.ndarray, atol: float = 0.0) -> bool:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))


def uniform_bounds(dim: int, lower: float, upper: float) -> Bounds:
    """Identical [lower, upper] bounds for every one of ``dim`` columns."""
    return Bounds(np.full(dim, float(lower)), np.full(dim, float(upper)))


def _reject_duplicate_rows(values: np.ndarray) -> None:
    n = values.shape[0]
    if n < 2:
        return
    order = np.lexsort(values.T[::-1])
    srt = values[order]
    dup = np.all(np.abs(np.diff(srt, axis=0)) <= DUPLICATE_ROW_TOL, axis=1)
    if np.any(dup):
        k = int(np.argmax(dup))
        raise DataError(
            f"duplicate design rows {int(order[k])} and {int(order[k + 1])} "
            f"(coordinates equal within {DUPLICATE_ROW_TOL:g})"
        )


@dataclass(frozen=True)
class DesignMatrix:
    """n x m table of input samples plus the column bounds it lives in."""

    values: np.ndarray
    bounds: Bounds

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        object.__setattr__(self, "values", values)
        if values.ndim != 2 or values.shape[0] < 1:
            raise DataError("design matrix needs at least one row")
        if values.shape[1] != self.bounds.dim:
            raise DimensionError(
                f"design has {values.shape[1]} columns but bounds describe {self.bounds.dim}"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("design contains non-finite values")
        if not self.bounds.contains(values):
            raise BoundsError("design values fall outside the declared bounds")
        _reject_duplicate_rows(values)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def normalized(self) -> np.ndarray:
        return self.bounds.normalize(self.values)


@dataclass(frozen=True)
class OutputVector:
    """Scalar response values, one per design row."""

    values: np.ndarray
    noise_seed: int | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)
        if values.size < 1:
            raise DataError("output vector is empty")
        if not np.all(np.isfinite(values)):
            raise DataError("output vector contains non-finite values")

    def __len__(self) -> int:
        return self.values.size


def output_values(y) -> np.ndarray:
    """Accept an OutputVector or any array-like; return a flat float vector."""
    if isinstance(y, OutputVector):
        return y.values
    return np.asarray(y, dtype=float).ravel()


# ---------------------------------------------------------------------------
# Latin Hypercube sampling
# ---------------------------------------------------------------------------

def lhs_sample(n: int, bounds: Bounds, seed: int) -> DesignMatrix:
    """Latin Hypercube design: per column, one uniform draw in each of the
    n equal-width strata, stratum order shuffled independently per column.
    """
    if n < 1:
        raise ArgumentError(f"need at least one sample, got n={n}")
    rng = np.random.default_rng(seed)
    m = bounds.dim
    u = np.empty((n, m))
    for j in range(m):
        u[:, j] = (rng.permutation(n) + rng.uniform(size=n)) / n
    return DesignMatrix(bounds.denormalize(u), bounds)


def _max_abs_offdiag(corr: np.ndarray) -> float:
    a = np.abs(corr).copy()
    np.fill_diagonal(a, 0.0)
    return float(a.max())


def improve_lhs(design: DesignMatrix, iterations: int | None = None, seed: int = 0) -> DesignMatrix:
    """Reduce pairwise column correlations by random in-column row swaps.

    Swapping two entries within a single column preserves each column's
    stratification, so the result is still a Latin Hypercube. A swap is kept
    only if it strictly lowers the maximum absolute off-diagonal correlation;
    the objective is therefore monotone non-increasing. Default budget is
    10*n*m proposed swaps.
    """
    n, m = design.rows, design.cols
    if iterations is not None and iterations < 0:
        raise ArgumentError("iterations must be >= 0")
    if m < 2 or n < 3 or iterations == 0:
        return design
    if iterations is None:
        iterations = 10 * n * m

    rng = np.random.default_rng(seed)
    x = design.values.copy()
    # Column means/sds are permutation-invariant, so standardized columns only
    # change by the same swap and correlations stay cheap to refresh.
    z = (x - x.mean(axis=0)) / x.std(axis=0)
    z /= np.sqrt(n)
    corr = z.T @ z
    best = _max_abs_offdiag(corr)

    for _ in range(iterations):
        j = int(rng.integers(m))
        a, b = rng.choice(n, size=2, replace=False)
        z[a, j], z[b, j] = z[b, j], z[a, j]
        col = z.T @ z[:, j]
        trial = corr.copy()
        trial[j, :] = col
        trial[:, j] = col
        candidate = _max_abs_offdiag(trial)
        if candidate < best:
            best = candidate
            corr = trial
            x[a, j], x[b, j] = x[b, j], x[a, j]
        else:
            z[a, j], z[b, j] = z[b, j], z[a, j]
    return DesignMatrix(x, design.bounds)


# ---------------------------------------------------------------------------
# Benchmark registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Benchmark:
    """A closed-form test response with fixed domain and optional noise term."""

    name: str
    arity: int
    bounds: Bounds
    noise_scale: float
    deterministic: Callable[[np.ndarray], np.ndarray]


def _coupled5d(x: np.ndarray) -> np.ndarray:
    return (
        0.5 * x[:, 0]
        + x[:, 1]
        + 0.5 * x[:, 0] * x[:, 1]
        + 5.0 * np.sin(x[:, 2])
        + 0.2 * x[:, 3]
        + 0.1 * x[:, 4]
    )


def _noisy20d(x: np.ndarray) -> np.ndarray:
    return (
        0.5 * x[:, 0]
        + x[:, 1]
        + 0.5 * x[:, 0] * x[:, 1]
        + 5.0 * np.sin(x[:, 2])
        + 0.5 * x[:, 3]
        + 0.5 * x[:, 3] ** 2
        + 0.1 * x[:, 4]
        + 0.01 * x[:, 5:20].sum(axis=1)
    )


def _quad1d(x: np.ndarray) -> np.ndarray:
    return x[:, 0] ** 2


def _nonlin1d(x: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * x[:, 0]) + x[:, 0]


_BENCHMARKS = {
    "coupled5d": Benchmark(
        "coupled5d", 5, uniform_bounds(5, -np.pi, np.pi), 0.0, _coupled5d
    ),
    "noisy20d": Benchmark(
        "noisy20d", 20, uniform_bounds(20, -np.pi, np.pi), 0.5, _noisy20d
    ),
    "quad1d-noisy": Benchmark(
        "quad1d-noisy", 1, uniform_bounds(1, -2.0, 2.0), 0.25, _quad1d
    ),
    "nonlin1d-noisy": Benchmark(
        "nonlin1d-noisy", 1, uniform_bounds(1, 0.0, 5.0), 0.2, _nonlin1d
    ),
}


def benchmark_names() -> tuple[str, ...]:
    return tuple(sorted(_BENCHMARKS))


def get_benchmark(name: str) -> Benchmark:
    try:
        return _BENCHMARKS[name]
    except KeyError:
        raise UnknownBenchmarkError(
            f"unknown benchmark {name!r}; available: {', '.join(benchmark_names())}"
        ) from None


def eval_benchmark(name: str, design: DesignMatrix, noise_seed: int | None = None) -> OutputVector:
    """Evaluate a registered benchmark row-wise.

    ``noise_seed=None`` disables the noise term entirely, yielding the
    deterministic part; any fixed seed makes the noisy response reproducible.
    """
    bench = get_benchmark(name)
    if design.cols != bench.arity:
        raise DimensionError(
            f"benchmark {name!r} expects {bench.arity} inputs, design has {design.cols}"
        )
    y = bench.deterministic(design.values)
    if noise_seed is not None and bench.noise_scale > 0.0:
        rng = np.random.default_rng(noise_seed)
        y = y + bench.noise_scale * rng.standard_normal(design.rows)
    return OutputVector(y, noise_seed=noise_seed)
