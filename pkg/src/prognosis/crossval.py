"""Fold assignment and k-fold / leave-one-out cross-validation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DimensionError, PrognosisError
from .sampling import DesignMatrix, output_values
from .surrogate import ModelSpec, TrainedSurrogate, polynomial_hat_diagonal, train
from .util import ordered_map

FOLD_METHODS = ("cluster", "random")


@dataclass(frozen=True)
class FoldAssignment:
    """Maps each support point to one of q folds; balanced within one point."""

    q: int
    map: np.ndarray

    def __post_init__(self):
        fold_map = np.asarray(self.map, dtype=int)
        object.__setattr__(self, "map", fold_map)
        if self.q < 1 or fold_map.ndim != 1 or fold_map.size < self.q:
            raise ArgumentError("fold map must assign at least one point per fold")
        if fold_map.min() < 0 or fold_map.max() >= self.q:
            raise ArgumentError("fold indices must lie in [0, q)")
        counts = np.bincount(fold_map, minlength=self.q)
        if counts.min() == 0:
            raise ArgumentError("every fold must be non-empty")
        if counts.max() - counts.min() > 1:
            raise ArgumentError("fold sizes may differ by at most one point")

    @property
    def n(self) -> int:
        return self.map.size

    @property
    def is_loo(self) -> bool:
        return self.q == self.n


def _kmeans_labels(xn: np.ndarray, q: int, rng: np.random.Generator, iters: int = 100) -> np.ndarray:
    n = xn.shape[0]
    centers = xn[rng.choice(n, size=q, replace=False)].copy()
    labels = np.full(n, -1)
    for _ in range(iters):
        d2 = ((xn[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new = d2.argmin(axis=1)
        for c in range(q):  # re-seed empty clusters with the worst-covered point
            if not np.any(new == c):
                new[int(d2.min(axis=1).argmax())] = c
        if np.array_equal(new, labels):
            break
        labels = new
        for c in range(q):
            centers[c] = xn[labels == c].mean(axis=0)
    return labels


def assign_folds(design: DesignMatrix, q: int, seed: int, method: str = "cluster") -> FoldAssignment:
    """Partition the design into q balanced folds.

    The default method clusters the normalized inputs into q regions and then
    deals every cluster's points round-robin across folds, so each fold
    samples all regions of the input space. ``method="random"`` is a plain
    seeded balanced split, kept for ablation.
    """
    n = design.rows
    if not 2 <= q <= n:
        raise ArgumentError(f"need 2 <= q <= n, got q={q}, n={n}")
    if method not in FOLD_METHODS:
        raise ArgumentError(f"unknown fold method {method!r}; choose from {FOLD_METHODS}")
    rng = np.random.default_rng(seed)
    if q == n:
        return FoldAssignment(q=q, map=np.arange(n))
    if method == "random":
        return FoldAssignment(q=q, map=rng.permutation(n) % q)

    labels = _kmeans_labels(design.normalized(), q, rng)
    fold_map = np.empty(n, dtype=int)
    counter = 0
    for c in range(q):
        for i in np.flatnonzero(labels == c):
            fold_map[i] = counter % q
            counter += 1
    return FoldAssignment(q=q, map=fold_map)


@dataclass(frozen=True)
class CvResult:
    """Fitted values, held-out predictions and both residual vectors."""

    y: np.ndarray
    fitted: np.ndarray
    cv_pred: np.ndarray
    assignment: FoldAssignment
    model: TrainedSurrogate | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("y", "fitted", "cv_pred"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float).ravel())
        n = self.y.size
        if self.fitted.size != n or self.cv_pred.size != n or self.assignment.n != n:
            raise DimensionError("all cross-validation vectors must share length n")

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def fit_residuals(self) -> np.ndarray:
        return self.y - self.fitted

    @property
    def cv_residuals(self) -> np.ndarray:
        return self.y - self.cv_pred


def k_fold_cv(
    spec: ModelSpec,
    design: DesignMatrix,
    y,
    assignment: FoldAssignment,
    threads: int = 1,
) -> CvResult:
    """Train one full-data model plus q held-out models and collect residuals.

    Hyperparameters (Kriging length-scales, MLS local fits) are re-derived
    inside every fold so the held-out predictions are honest.
    """
    yv = output_values(y)
    n = design.rows
    if assignment.n != n or yv.size != n:
        raise DimensionError("fold assignment does not match the design")

    full = train(spec, design, yv)
    fitted = full.predict(design)

    def run_fold(f: int):
        held = assignment.map == f
        keep = ~held
        sub = DesignMatrix(design.values[keep], design.bounds)
        try:
            model = train(spec, sub, yv[keep])
        except PrognosisError as exc:
            raise type(exc)(f"fold {f}: {exc}") from exc
        return held, model.predict(design.values[held])

    cv_pred = np.empty(n)
    for held, pred in ordered_map(run_fold, range(assignment.q), threads):
        cv_pred[held] = pred
    return CvResult(y=yv, fitted=fitted, cv_pred=cv_pred, assignment=assignment, model=full)


def loo_cv(spec: ModelSpec, design: DesignMatrix, y, threads: int = 1) -> CvResult:
    """Leave-one-out cross-validation (q = n).

    Polynomial fits use the closed-form leverage identity
    e_i / (1 - h_ii); everything else retrains n models explicitly.
    """
    yv = output_values(y)
    n = design.rows
    assignment = FoldAssignment(q=n, map=np.arange(n))
    full = train(spec, design, yv)
    fitted = full.predict(design)

    if spec.family == "polynomial":
        h = polynomial_hat_diagonal(full, design)
        if np.all(h < 1.0 - 1e-10):
            cv_pred = yv - (yv - fitted) / (1.0 - h)
            return CvResult(y=yv, fitted=fitted, cv_pred=cv_pred,
                            assignment=assignment, model=full)
        # saturated leverage: the shortcut divides by ~0, retrain explicitly

    def run_point(i: int) -> float:
        keep = np.ones(n, dtype=bool)
        keep[i] = False
        sub = DesignMatrix(design.values[keep], design.bounds)
        try:
            model = train(spec, sub, yv[keep])
        except PrognosisError as exc:
            raise type(exc)(f"fold {i}: {exc}") from exc
        return float(model.predict(design.values[i:i + 1])[0])

    cv_pred = np.asarray(ordered_map(run_point, range(n), threads))
    return CvResult(y=yv, fitted=fitted, cv_pred=cv_pred, assignment=assignment, model=full)
