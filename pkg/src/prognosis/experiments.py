"""Repeated-run benchmark studies: CV conservatism and CI coverage.

A study draws ``runs`` independent support designs against one fixed test
set, cross-validates a model (fixed spec or a full MOP competition) with both
k-fold and leave-one-out, bootstraps the CoP confidence interval, and
verifies everything against the test data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bootstrap import bootstrap_residuals, confidence_interval
from .crossval import assign_folds, k_fold_cv, loo_cv
from .errors import ArgumentError, PrognosisError, StudyError
from .mop import run_competition
from .quality import compute_report, delta_sse
from .sampling import eval_benchmark, get_benchmark, improve_lhs, lhs_sample
from .surrogate import ModelSpec
from .util import ordered_map, substream_seed


@dataclass(frozen=True)
class StudyConfig:
    benchmark: str
    n_support: int
    n_test: int = 500
    runs: int = 50
    q: int = 5
    seed: int = 0
    model: ModelSpec | None = None  # None -> MOP competition per run
    bootstrap_reps: int = 100_000
    level: float = 0.99

    def __post_init__(self):
        get_benchmark(self.benchmark)
        if self.runs < 1:
            raise ArgumentError("a study needs at least one run")
        if self.n_test < self.n_support:
            raise ArgumentError("the test set must be at least as large as the support set")
        if self.n_support < 3:
            raise ArgumentError("need at least 3 support points")


@dataclass(frozen=True)
class RunRecord:
    run: int
    cop: float
    ci_lo: float
    ci_hi: float
    cod_test: float
    dss_kfold: float
    dss_loo: float
    model_label: str


@dataclass(frozen=True)
class StudyResult:
    config: StudyConfig
    runs: tuple[RunRecord, ...]
    failures: tuple[str, ...] = field(default=())

    @property
    def coverage(self) -> float:
        """Fraction of runs whose CoP interval contains the test CoD."""
        hits = [r.ci_lo <= r.cod_test <= r.ci_hi for r in self.runs]
        return float(np.mean(hits))

    def positive_fraction(self, mode: str = "kfold") -> float:
        vals = self._dss(mode)
        return float(np.mean(vals > 0.0))

    def median_abs_dss(self, mode: str = "kfold") -> float:
        return float(np.median(np.abs(self._dss(mode))))

    def _dss(self, mode: str) -> np.ndarray:
        if mode not in ("kfold", "loo"):
            raise ArgumentError(f"unknown mode {mode!r}; choose 'kfold' or 'loo'")
        attr = "dss_kfold" if mode == "kfold" else "dss_loo"
        return np.array([getattr(r, attr) for r in self.runs])

    def sorted_by_cop(self) -> tuple[RunRecord, ...]:
        return tuple(sorted(self.runs, key=lambda r: r.cop))


def _sample_supports(config: StudyConfig, run_seed: int):
    bench = get_benchmark(config.benchmark)
    design = lhs_sample(config.n_support, bench.bounds, substream_seed(run_seed, "sampling"))
    design = improve_lhs(design, seed=substream_seed(run_seed, "improve"))
    y = eval_benchmark(config.benchmark, design, noise_seed=substream_seed(run_seed, "noise"))
    return design, y


def run_study(config: StudyConfig, threads: int = 1) -> StudyResult:
    """Execute all runs of a study; individual failures are recorded and the
    study aborts only when more than 20% of the runs failed."""
    bench = get_benchmark(config.benchmark)

    # One fixed test set shared bit-identically by every run.
    test_design = lhs_sample(config.n_test, bench.bounds, substream_seed(config.seed, "test-sampling"))
    test_design = improve_lhs(test_design, seed=substream_seed(config.seed, "test-improve"))
    test_y = eval_benchmark(config.benchmark, test_design,
                            noise_seed=substream_seed(config.seed, "test-noise"))

    def one_run(r: int):
        run_seed = config.seed + r
        design, y = _sample_supports(config, run_seed)
        if config.model is None:
            mop = run_competition(design, y, q=config.q, seed=run_seed)
            spec = mop.winner_spec
            cv_k = mop.winner_cv
            report = mop.winner_report
        else:
            spec = config.model
            assignment = assign_folds(design, config.q, substream_seed(run_seed, "folds"))
            cv_k = k_fold_cv(spec, design, y, assignment)
            report = compute_report(cv_k)
        cv_loo = loo_cv(spec, design, y)

        boot = bootstrap_residuals(
            cv_k.cv_residuals, report.ss_t,
            reps=config.bootstrap_reps, seed=substream_seed(run_seed, "bootstrap"),
        )
        ci = confidence_interval(boot, "cop", config.level)

        test_pred = cv_k.model.predict(test_design)
        tv = test_y.values
        ss_t_test = float(((tv - tv.mean()) ** 2).sum())
        cod_test = 1.0 - float(((tv - test_pred) ** 2).sum()) / ss_t_test

        return RunRecord(
            run=r,
            cop=report.cop,
            ci_lo=ci.lower,
            ci_hi=ci.upper,
            cod_test=cod_test,
            dss_kfold=delta_sse(cv_k, test_y, test_pred),
            dss_loo=delta_sse(cv_loo, test_y, test_pred),
            model_label=spec.label,
        )

    def guarded(r: int):
        try:
            return one_run(r), None
        except PrognosisError as exc:
            return None, f"run {r}: {exc}"

    records: list[RunRecord] = []
    failures: list[str] = []
    for rec, err in ordered_map(guarded, range(1, config.runs + 1), threads):
        if rec is not None:
            records.append(rec)
        else:
            failures.append(err)

    if len(failures) > 0.2 * config.runs:
        raise StudyError(
            f"{len(failures)}/{config.runs} runs failed: " + "; ".join(failures[:5])
        )
    return StudyResult(config=config, runs=tuple(records), failures=tuple(failures))
