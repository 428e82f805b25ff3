"""Metamodel of Optimal Prognosis: model-class and input-subspace competition.

Six candidate families (linear/quadratic polynomial, linear/quadratic MLS,
isotropic/anisotropic Kriging) are scored on a nested sequence of input
subspaces with one shared fold assignment; the candidate with the maximum
CoP wins. Ties prefer fewer inputs, then the simpler family.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .crossval import CvResult, FoldAssignment, assign_folds, k_fold_cv
from .errors import ArgumentError, CompetitionError, PrognosisError
from .quality import QualityReport, compute_report
from .sampling import DesignMatrix, output_values
from .sensitivity import saltelli_design, sobol_indices
from .surrogate import ModelSpec, TrainedSurrogate, basis_size
from .util import ordered_map, substream_seed

MLS_RADIUS_GRID = tuple(np.geomspace(0.05, 2.0, 8))
PILOT_BASE_SAMPLES = 256

# CoP values closer than this are treated as tied and resolved by parsimony.
COP_TIE_DECIMALS = 9

_FAMILY_RANK = {"polynomial": 0, "mls": 1, "kriging": 2}
_BASIS_RANK = {"linear": 0, "quadratic": 1}
_ANISO_RANK = {"isotropic": 0, "anisotropic": 1}


def candidate_specs(active: tuple[int, ...]) -> list[ModelSpec]:
    return [
        ModelSpec("polynomial", basis="linear", active_inputs=active),
        ModelSpec("polynomial", basis="quadratic", active_inputs=active),
        ModelSpec("mls", basis="linear", active_inputs=active),
        ModelSpec("mls", basis="quadratic", active_inputs=active),
        ModelSpec("kriging", anisotropy="isotropic", active_inputs=active),
        ModelSpec("kriging", anisotropy="anisotropic", active_inputs=active),
    ]


@dataclass(frozen=True)
class LeaderboardEntry:
    spec: ModelSpec
    cop: float

    @property
    def sort_key(self):
        spec = self.spec
        return (
            -round(self.cop, COP_TIE_DECIMALS),
            len(spec.active_inputs),
            _FAMILY_RANK[spec.family],
            _BASIS_RANK[spec.basis] if spec.family != "kriging" else _ANISO_RANK[spec.anisotropy],
            spec.active_inputs,
        )


@dataclass(frozen=True)
class MopResult:
    winner_spec: ModelSpec
    winner_model: TrainedSurrogate = field(repr=False)
    winner_report: QualityReport
    winner_cv: CvResult = field(repr=False)
    leaderboard: tuple[LeaderboardEntry, ...]
    selected_inputs: tuple[int, ...]
    assignment: FoldAssignment = field(repr=False)
    failures: tuple[str, ...] = ()

    @property
    def cop(self) -> float:
        return self.winner_report.cop


def _pilot_ranking(design: DesignMatrix, yv: np.ndarray, seed: int) -> np.ndarray:
    """Order inputs by estimated influence, most important first."""
    from .surrogate import train  # local import to keep module load light

    m = design.cols
    pilot_seed = substream_seed(seed, "pilot")
    for spec in (
        ModelSpec("kriging", anisotropy="anisotropic"),
        ModelSpec("polynomial", basis="quadratic"),
    ):
        try:
            model = train(spec, design, yv)
            bundle = saltelli_design(m, PILOT_BASE_SAMPLES, design.bounds, pilot_seed)
            importance = sobol_indices(model, bundle).s_total
            return np.lexsort((np.arange(m), -importance))
        except PrognosisError:
            continue
    # last resort: rank by absolute Pearson correlation with the output
    xn = design.normalized()
    with np.errstate(invalid="ignore"):
        corr = np.array([
            np.corrcoef(xn[:, j], yv)[0, 1] if xn[:, j].std() > 0 else 0.0
            for j in range(m)
        ])
    corr = np.nan_to_num(corr)
    return np.lexsort((np.arange(m), -np.abs(corr)))


def subspace_sequence(design: DesignMatrix, y, q: int, seed: int) -> list[tuple[int, ...]]:
    """Nested input subsets {top-1, top-2, ..., all}, ranked by a quick pilot."""
    yv = output_values(y)
    m = design.cols
    if m == 1:
        return [(0,)]
    order = _pilot_ranking(design, yv, seed)
    return [tuple(sorted(int(j) for j in order[:k])) for k in range(1, m + 1)]


def _feasible(spec: ModelSpec, n: int) -> bool:
    if spec.family == "kriging":
        return n >= 3
    return n >= 2 * basis_size(spec.basis, len(spec.active_inputs))


def run_competition(
    design: DesignMatrix,
    y,
    q: int = 5,
    seed: int = 0,
    threads: int = 1,
    fold_method: str = "cluster",
) -> MopResult:
    """Score every feasible candidate by k-fold CoP and return the winner.

    Every candidate is evaluated against the same fold assignment so the
    comparison is not polluted by fold noise. The MLS radius is tuned per
    candidate over a log grid by the same CoP criterion.
    """
    yv = output_values(y)
    n = design.rows
    if n < 10:
        raise ArgumentError(f"competition needs at least 10 support points, got {n}")
    mean_y = yv.mean()
    ss_t = float(((yv - mean_y) ** 2).sum())
    if not ss_t > 1e-14 * n * float(np.max(np.abs(yv))) ** 2:
        raise ArgumentError("output variance is degenerate; nothing to model")

    assignment = assign_folds(design, q, substream_seed(seed, "folds"), method=fold_method)
    subsets = subspace_sequence(design, yv, q, seed)

    jobs: list[ModelSpec] = []
    for subset in subsets:
        for spec in candidate_specs(subset):
            if not _feasible(spec, n):
                continue
            if spec.family == "mls":
                jobs.extend(
                    ModelSpec("mls", basis=spec.basis, radius=float(r), active_inputs=subset)
                    for r in MLS_RADIUS_GRID
                )
            else:
                jobs.append(spec)

    def evaluate(spec: ModelSpec):
        try:
            cv = k_fold_cv(spec, design, yv, assignment)
            cop = 1.0 - float((cv.cv_residuals**2).sum()) / ss_t
            return spec, cop, cv, None
        except PrognosisError as exc:
            return spec, None, None, f"{spec.label} on inputs {spec.active_inputs}: {exc}"

    entries: list[tuple[LeaderboardEntry, CvResult]] = []
    failures: list[str] = []
    best_mls: dict[tuple, tuple[LeaderboardEntry, CvResult]] = {}
    for spec, cop, cv, err in ordered_map(evaluate, jobs, threads):
        if err is not None:
            failures.append(err)
            continue
        entry = LeaderboardEntry(spec=spec, cop=cop)
        if spec.family == "mls":
            key = (spec.basis, spec.active_inputs)
            incumbent = best_mls.get(key)
            if incumbent is None or entry.sort_key < incumbent[0].sort_key:
                best_mls[key] = (entry, cv)
        else:
            entries.append((entry, cv))
    entries.extend(best_mls.values())

    if not entries:
        raise CompetitionError(
            "every candidate failed to train: " + "; ".join(failures[:10])
        )

    entries.sort(key=lambda pair: pair[0].sort_key)
    winner_entry, winner_cv = entries[0]
    return MopResult(
        winner_spec=winner_entry.spec,
        winner_model=winner_cv.model,
        winner_report=compute_report(winner_cv),
        winner_cv=winner_cv,
        leaderboard=tuple(e for e, _ in entries),
        selected_inputs=winner_entry.spec.active_inputs,
        assignment=assignment,
        failures=tuple(failures),
    )
