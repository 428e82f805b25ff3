"""Quality measures for discretized field outputs on a shared reference grid.

Every grid point gets its own surrogate under one shared fold assignment.
Per-point CoD normalizes by the local variance SS_T(t_i); the stationary
variants normalize by the grid-averaged variance SS_T_stat instead, which
keeps low-variation regions interpretable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .crossval import CvResult, FoldAssignment, assign_folds, k_fold_cv
from .errors import DataError, DegenerateOutputError, DimensionError, PrognosisError
from .sampling import DesignMatrix
from .surrogate import ModelSpec
from .util import ordered_map

# SS_T(t) below this fraction of SS_T_stat leaves CoD(t) undefined.
UNDEFINED_COD_FRACTION = 1e-10


@dataclass(frozen=True)
class FieldDataset:
    """n samples of a field response discretized at n_d grid coordinates."""

    design: DesignMatrix
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.size < 1:
            raise DataError("field grid is empty")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise DataError("field grid must be strictly increasing")
        if values.shape != (self.design.rows, grid.size):
            raise DimensionError(
                f"field values have shape {values.shape}, expected "
                f"({self.design.rows}, {grid.size})"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("field values contain non-finite entries")

    @property
    def n_points(self) -> int:
        return self.grid.size


@dataclass(frozen=True)
class FieldCvResult:
    """Per-grid-point cross-validation results under one fold assignment."""

    grid: np.ndarray
    assignment: FoldAssignment
    results: tuple[CvResult | None, ...]
    errors: dict[int, str] = field(default_factory=dict)

    def residual_matrix(self, kind: str = "cv") -> np.ndarray:
        """n x n_d residuals; columns of failed grid points are NaN."""
        n = self.assignment.n
        out = np.full((n, len(self.results)), np.nan)
        for i, cv in enumerate(self.results):
            if cv is not None:
                out[:, i] = cv.cv_residuals if kind == "cv" else cv.fit_residuals
        return out


def field_cross_validate(
    spec: ModelSpec, data: FieldDataset, q: int, seed: int, threads: int = 1
) -> FieldCvResult:
    """Cross-validate an independent surrogate per grid point.

    One fold assignment is shared by all grid points so the stationary
    measures are comparable along the axis. A training failure at one point
    is recorded and the remaining points proceed.
    """
    assignment = assign_folds(data.design, q, seed)

    def run_point(i: int):
        try:
            return k_fold_cv(spec, data.design, data.values[:, i], assignment), None
        except PrognosisError as exc:
            return None, str(exc)

    results: list[CvResult | None] = []
    errors: dict[int, str] = {}
    for i, (cv, err) in enumerate(ordered_map(run_point, range(data.n_points), threads)):
        results.append(cv)
        if err is not None:
            errors[i] = err
    return FieldCvResult(
        grid=data.grid, assignment=assignment, results=tuple(results), errors=errors
    )


@dataclass(frozen=True)
class FieldQualityReport:
    """Per-point and stationary quality curves along the grid."""

    grid: np.ndarray
    ss_t_stat: float
    ss_e: np.ndarray
    ss_t: np.ndarray
    ss_e_cv: np.ndarray
    rmse_fit: np.ndarray
    rmse_cv: np.ndarray
    cod: np.ndarray       # NaN where SS_T(t) is degenerate or the point failed
    cod_stat: np.ndarray
    cop_stat: np.ndarray

    @property
    def n_points(self) -> int:
        return self.grid.size


def field_report(data: FieldDataset, field_cv: FieldCvResult) -> FieldQualityReport:
    """Assemble per-point sums of squares and the stationary measures."""
    if field_cv.grid.size != data.n_points:
        raise DimensionError("cross-validation result does not match the dataset grid")
    n = data.design.rows
    n_d = data.n_points

    mu = data.values.mean(axis=0)
    ss_t = ((data.values - mu) ** 2).sum(axis=0)
    ss_t_stat = float(ss_t.mean())
    if not ss_t_stat > 0.0:
        raise DegenerateOutputError("field output is constant; SS_T_stat is zero")

    fit_res = field_cv.residual_matrix("fit")
    cv_res = field_cv.residual_matrix("cv")
    ss_e = np.nansum(fit_res**2, axis=0)
    ss_e_cv = np.nansum(cv_res**2, axis=0)
    failed = np.array([cv is None for cv in field_cv.results])
    ss_e[failed] = np.nan
    ss_e_cv[failed] = np.nan

    with np.errstate(invalid="ignore", divide="ignore"):
        cod = 1.0 - ss_e / ss_t
    cod[ss_t < UNDEFINED_COD_FRACTION * ss_t_stat] = np.nan

    return FieldQualityReport(
        grid=data.grid,
        ss_t_stat=ss_t_stat,
        ss_e=ss_e,
        ss_t=ss_t,
        ss_e_cv=ss_e_cv,
        rmse_fit=np.sqrt(ss_e / n),
        rmse_cv=np.sqrt(ss_e_cv / n),
        cod=cod,
        cod_stat=1.0 - ss_e / ss_t_stat,
        cop_stat=1.0 - ss_e_cv / ss_t_stat,
    )
