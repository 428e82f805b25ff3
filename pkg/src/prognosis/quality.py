"""Scalar and local goodness-of-fit / prognosis measures.

All quantities derive from the fitting residuals y - yhat and the
cross-validation prediction residuals y - yhat_cv:

* RMSE        = sqrt(SS_E / n), same for the CV variant
* CoD_1       = 1 - SS_E / SS_T       (scaled unexplained variation)
* CoD_2       = SS_R / SS_T           (scaled explained variation)
* CoP         = 1 - SS_E_cv / SS_T    (explained variation on unseen data)
* sample CoP  = 1 - n * eps_cv_i^2 / SS_T, whose mean is exactly the CoP
* local RMSE / local CoP: kernel-weighted residual fields in input space
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .crossval import CvResult
from .errors import (
    ArgumentError,
    DegenerateOutputError,
    DimensionError,
    ExtrapolationWarning,
    IsolationError,
)
from .sampling import Bounds, DesignMatrix, output_values

OUTLIER_SIGMA = 3.0  # |eps_cv| beyond 3*RMSE_cv flags a potential outlier

_WEIGHT_FLOOR = 1e-300


def _check_ss_t(ss_t: float, n: int, y: np.ndarray) -> None:
    gate = 1e-14 * n * float(np.max(np.abs(y))) ** 2
    if not ss_t > gate:
        raise DegenerateOutputError(
            f"total sum of squares {ss_t:.3e} is below the degeneracy gate {gate:.3e}"
        )


@dataclass(frozen=True)
class QualityReport:
    """Global quality measures of one cross-validated model."""

    n: int
    mean_y: float
    ss_e: float
    ss_r: float
    ss_t: float
    ss_e_cv: float
    rmse_fit: float
    rmse_cv: float
    cod1: float
    cod2: float
    cop: float
    sample_cop: np.ndarray = field(repr=False)
    outlier_indices: np.ndarray = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "mean_y": self.mean_y,
            "ss_e": self.ss_e,
            "ss_r": self.ss_r,
            "ss_t": self.ss_t,
            "ss_e_cv": self.ss_e_cv,
            "rmse_fit": self.rmse_fit,
            "rmse_cv": self.rmse_cv,
            "cod1": self.cod1,
            "cod2": self.cod2,
            "cop": self.cop,
            "cop_clamped": min(1.0, max(0.0, self.cop)),
            "sample_cop": self.sample_cop.tolist(),
            "outlier_indices": self.outlier_indices.tolist(),
        }


def compute_report(cv: CvResult) -> QualityReport:
    """All global measures from one cross-validation result."""
    y = cv.y
    n = cv.n
    mean_y = float(y.mean())
    ss_t = float(((y - mean_y) ** 2).sum())
    _check_ss_t(ss_t, n, y)

    eps = cv.fit_residuals
    eps_cv = cv.cv_residuals
    ss_e = float((eps**2).sum())
    ss_r = float(((cv.fitted - mean_y) ** 2).sum())
    ss_e_cv = float((eps_cv**2).sum())

    rmse_fit = np.sqrt(ss_e / n)
    rmse_cv = np.sqrt(ss_e_cv / n)
    scop = 1.0 - n * eps_cv**2 / ss_t
    outliers = np.flatnonzero(np.abs(eps_cv) > OUTLIER_SIGMA * rmse_cv)

    return QualityReport(
        n=n,
        mean_y=mean_y,
        ss_e=ss_e,
        ss_r=ss_r,
        ss_t=ss_t,
        ss_e_cv=ss_e_cv,
        rmse_fit=float(rmse_fit),
        rmse_cv=float(rmse_cv),
        cod1=1.0 - ss_e / ss_t,
        cod2=ss_r / ss_t,
        cop=1.0 - ss_e_cv / ss_t,
        sample_cop=scop,
        outlier_indices=outliers,
    )


def sample_cop(cv: CvResult, scaled: bool = True) -> np.ndarray:
    """Per-point CoP contributions.

    With ``scaled=True`` (default) each term carries the factor n so the mean
    of the vector equals the global CoP exactly. ``scaled=False`` drops the
    factor, which is the per-point form used in residual plots.
    """
    y = cv.y
    n = cv.n
    ss_t = float(((y - y.mean()) ** 2).sum())
    _check_ss_t(ss_t, n, y)
    factor = n if scaled else 1
    return 1.0 - factor * cv.cv_residuals**2 / ss_t


def delta_sse(cv: CvResult, test_y, test_pred) -> float:
    """Normalized gap between the CV error estimate and the test-verified one.

    (SS_E_cv / n - SS_E_test / n_t) / (SS_T_test / n_t); positive values mean
    the cross-validation estimate was conservative.
    """
    yt = output_values(test_y)
    pt = output_values(test_pred)
    if yt.size != pt.size:
        raise DimensionError("test outputs and test predictions differ in length")
    n_t = yt.size
    ss_t_test = float(((yt - yt.mean()) ** 2).sum())
    _check_ss_t(ss_t_test, n_t, yt)
    ss_e_cv = float((cv.cv_residuals**2).sum())
    ss_e_test = float(((yt - pt) ** 2).sum())
    return (ss_e_cv / cv.n - ss_e_test / n_t) / (ss_t_test / n_t)


# ---------------------------------------------------------------------------
# Local error field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalErrorField:
    """Kernel-weighted CV-residual field, evaluable anywhere in input space.

    Weights are w_i(x) = exp(-||x - x_i||^2 / h^2) on normalized inputs. The
    bandwidth h is solved per query so the effective sample size
    (sum w)^2 / sum w^2 matches ``target_ess`` points.
    """

    support_x: np.ndarray
    residuals: np.ndarray
    ss_t: float
    bounds: Bounds
    target_ess: float

    @property
    def n(self) -> int:
        return self.residuals.size

    def _weights(self, x, bandwidth: float | None) -> np.ndarray:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.bounds.dim:
            raise DimensionError(f"query has {x.size} coordinates, field expects {self.bounds.dim}")
        if not self.bounds.contains(x):
            warnings.warn(
                "local error query lies outside the training bounds; extrapolating",
                ExtrapolationWarning,
                stacklevel=3,
            )
        d2 = ((self.support_x - self.bounds.normalize(x)) ** 2).sum(axis=1)
        if bandwidth is not None:
            w = np.exp(-d2 / bandwidth**2)
            if w.max() < _WEIGHT_FLOOR:  # widen once before giving up
                w = np.exp(-d2 / (10.0 * bandwidth) ** 2)
                if w.max() < _WEIGHT_FLOOR:
                    raise IsolationError("all local weights underflowed at the given bandwidth")
            return w
        target = min(self.target_ess, float(self.n))
        if target >= self.n:
            return np.ones(self.n)

        def ess(h: float) -> float:
            w = np.exp(-d2 / h**2)
            s = w.sum()
            if s < _WEIGHT_FLOOR:
                return 1.0
            return float(s * s / (w @ w))

        lo, hi = 1e-6, 1e3
        for _ in range(80):
            mid = np.sqrt(lo * hi)
            if ess(mid) < target:
                lo = mid
            else:
                hi = mid
        return np.exp(-d2 / hi**2)

    def rmse(self, x, bandwidth: float | None = None) -> float:
        w = self._weights(x, bandwidth)
        return float(np.sqrt((w @ self.residuals**2) / w.sum()))

    def cop(self, x, bandwidth: float | None = None) -> float:
        r = self.rmse(x, bandwidth)
        return 1.0 - self.n * r**2 / self.ss_t


def local_error_field(
    design: DesignMatrix, cv: CvResult, target_ess: float | None = None
) -> LocalErrorField:
    """Build the local CV-error field for a cross-validated model."""
    if cv.n != design.rows:
        raise DimensionError("cross-validation result does not match the design")
    y = cv.y
    ss_t = float(((y - y.mean()) ** 2).sum())
    _check_ss_t(ss_t, cv.n, y)
    if target_ess is None:
        target_ess = max(5.0, 0.05 * cv.n)
    if target_ess < 1.0:
        raise ArgumentError("target effective sample size must be >= 1")
    return LocalErrorField(
        support_x=design.normalized(),
        residuals=cv.cv_residuals,
        ss_t=ss_t,
        bounds=design.bounds,
        target_ess=float(target_ess),
    )


def local_rmse(field: LocalErrorField, x, bandwidth: float | None = None) -> float:
    return field.rmse(x, bandwidth)


def local_cop(field: LocalErrorField, x, bandwidth: float | None = None) -> float:
    return field.cop(x, bandwidth)
