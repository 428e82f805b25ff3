"""Command-line entry point.

Subcommands: sample, eval, train, assess, bootstrap, sensitivity, mop,
field-assess, study. Every subcommand takes --seed (an integer, or the
literal 'auto' to draw one); omitting it is an error so accidental
non-reproducibility cannot happen. Exit codes: 0 ok, 2 argument error,
3 data error, 4 numeric/training error.
"""

from __future__ import annotations

import argparse
import csv
import json
import secrets
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .bootstrap import bootstrap_residuals, confidence_interval, histogram
from .crossval import assign_folds, k_fold_cv, loo_cv
from .errors import ArgumentError, DataError, NumericError, PrognosisError
from .experiments import StudyConfig, run_study
from .field import FieldDataset, field_cross_validate, field_report
from .mop import run_competition
from .quality import compute_report, local_error_field
from .sampling import Bounds, DesignMatrix, eval_benchmark, improve_lhs, lhs_sample
from .sensitivity import clamp_indices, saltelli_design, scale_by_cop, sobol_indices
from .surrogate import ModelSpec, from_json_dict, to_json_dict, train
from .util import default_threads, substream_seed

_FMT = "%.17g"


def _parse_seed(value: str | None) -> int:
    if value is None:
        raise ArgumentError("--seed is required; pass an integer or '--seed auto'")
    if value == "auto":
        seed = secrets.randbits(63)
        print(f"using auto seed {seed}", file=sys.stderr)
        return seed
    try:
        return int(value)
    except ValueError:
        raise ArgumentError(f"--seed must be an integer or 'auto', got {value!r}") from None


def _parse_bounds(text: str) -> Bounds:
    lows, highs = [], []
    for part in text.split(","):
        piece = part.strip()
        try:
            lo, hi = piece.split(":")
            lows.append(float(lo))
            highs.append(float(hi))
        except ValueError:
            raise ArgumentError(f"bad bounds segment {piece!r}; expected 'lo:hi'") from None
    return Bounds(np.asarray(lows), np.asarray(highs))


def _csv_list(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [t.strip() for t in text.split(",") if t.strip()]


def _add_model_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--family", choices=("polynomial", "mls", "kriging"), default="polynomial")
    sub.add_argument("--basis", choices=("linear", "quadratic"), default="linear")
    sub.add_argument("--radius", type=float, default=0.3,
                     help="MLS radius as a fraction of the normalized diagonal")
    sub.add_argument("--anisotropy", choices=("isotropic", "anisotropic"), default="isotropic")
    sub.add_argument("--active-inputs", default=None,
                     help="comma-separated 0-based column indices (default: all)")


def _spec_from_args(args) -> ModelSpec:
    active = None
    if args.active_inputs:
        active = tuple(int(i) for i in args.active_inputs.split(","))
    return ModelSpec(family=args.family, basis=args.basis, radius=args.radius,
                     anisotropy=args.anisotropy, active_inputs=active)


def _add_data_flags(sub: argparse.ArgumentParser, output_default: bool = True) -> None:
    sub.add_argument("--data", required=True, help="input CSV with a header row")
    sub.add_argument("--inputs", default=None, help="comma-separated input column names")
    if output_default:
        sub.add_argument("--output", default=None,
                         help="output column name (default: last column)")
    sub.add_argument("--bounds", default=None, help="override bounds as 'lo:hi,lo:hi,...'")


def _load_dataset(args):
    header, _ = dataio.read_table(args.data)
    output_col = getattr(args, "output", None) or header[-1]
    input_cols = _csv_list(args.inputs)
    bounds = _parse_bounds(args.bounds) if args.bounds else None
    return dataio.load_csv(args.data, input_cols=input_cols, output_col=output_col, bounds=bounds)


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, float(x)))


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_sample(args) -> int:
    seed = _parse_seed(args.seed)
    bounds = _parse_bounds(args.bounds)
    design = lhs_sample(args.n, bounds, substream_seed(seed, "sampling"))
    if args.improve_iters != 0:
        design = improve_lhs(design, iterations=args.improve_iters,
                             seed=substream_seed(seed, "improve"))
    dataio.write_design_csv(args.out, design)
    print(f"wrote {design.rows} x {design.cols} design to {args.out}")
    return 0


def cmd_eval(args) -> int:
    design, _ = dataio.load_csv(args.data)
    y = eval_benchmark(args.benchmark, design, noise_seed=args.noise_seed)
    dataio.write_design_csv(args.out, design, y=y)
    print(f"evaluated {args.benchmark} on {design.rows} rows -> {args.out}")
    return 0


def cmd_train(args) -> int:
    design, y = _load_dataset(args)
    model = train(_spec_from_args(args), design, y)
    Path(args.out).write_text(json.dumps(to_json_dict(model), indent=2) + "\n")
    print(f"trained {model.spec.label} on {design.rows} points -> {args.out}")
    return 0


def _cross_validate(args, design, y):
    spec = _spec_from_args(args)
    seed = _parse_seed(args.seed)
    if args.loo:
        cv = loo_cv(spec, design, y, threads=args.threads)
    else:
        assignment = assign_folds(design, args.q, substream_seed(seed, "folds"),
                                  method=args.fold_method)
        cv = k_fold_cv(spec, design, y, assignment, threads=args.threads)
    return cv, seed


def cmd_assess(args) -> int:
    design, y = _load_dataset(args)
    cv, seed = _cross_validate(args, design, y)
    report = compute_report(cv)

    if args.report:
        dataio.emit_report(report, "json", args.report)
    if args.residuals:
        with open(args.residuals, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "y", "fitted", "cv_pred",
                             "fit_residual", "cv_residual", "fold"])
            for i in range(cv.n):
                writer.writerow([
                    i, _FMT % cv.y[i], _FMT % cv.fitted[i], _FMT % cv.cv_pred[i],
                    _FMT % cv.fit_residuals[i], _FMT % cv.cv_residuals[i],
                    int(cv.assignment.map[i]),
                ])
    if args.local_grid:
        _write_local_grid(args, design, cv)
    print(f"CoD1={report.cod1:.4f}  CoD2={report.cod2:.4f}  CoP={report.cop:.4f}  "
          f"RMSE_cv={report.rmse_cv:.6g}  outliers={report.outlier_indices.tolist()}")
    return 0


def _write_local_grid(args, design, cv) -> None:
    field = local_error_field(design, cv)
    k = args.local_grid
    dims = [int(d) for d in args.local_dims.split(",")] if args.local_dims else None
    if dims is None:
        dims = list(range(min(2, design.cols)))
    if any(d < 0 or d >= design.cols for d in dims):
        raise ArgumentError(f"--local-dims out of range for {design.cols} inputs")
    b = design.bounds
    mid = (b.lower + b.upper) / 2.0
    axes = [np.linspace(b.lower[d], b.upper[d], k) for d in dims]
    mesh = np.meshgrid(*axes, indexing="ij")
    out = args.local_out or "local_grid.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{j + 1}" for j in range(design.cols)]
                        + ["local_rmse", "local_cop"])
        for idx in np.ndindex(*[k] * len(dims)):
            x = mid.copy()
            for ax, d in enumerate(dims):
                x[d] = mesh[ax][idx]
            writer.writerow([_FMT % v for v in x]
                            + [_FMT % field.rmse(x), _FMT % field.cop(x)])


def cmd_bootstrap(args) -> int:
    design, y = _load_dataset(args)
    cv, seed = _cross_validate(args, design, y)
    report = compute_report(cv)
    if args.reps < 1000:
        print(f"warning: {args.reps} repetitions is low; intervals will be coarse",
              file=sys.stderr)
    dist = bootstrap_residuals(cv.cv_residuals, report.ss_t, reps=args.reps,
                               seed=substream_seed(seed, "bootstrap"))
    ci_cop = confidence_interval(dist, "cop", args.level)
    ci_rmse = confidence_interval(dist, "rmse", args.level)
    doc = {
        "kind": "bootstrap",
        "reps": dist.reps,
        "level": args.level,
        "point": {"cop": report.cop, "rmse_cv": report.rmse_cv},
        "ci": {
            "cop": [ci_cop.lower, ci_cop.upper],
            "rmse": [ci_rmse.lower, ci_rmse.upper],
        },
        "histogram": {
            "cop": histogram(dist.cop_samples),
            "rmse": histogram(dist.rmse_samples),
        },
    }
    dataio.emit_report(doc, "json", args.out)
    print(f"CoP={report.cop:.4f}  {args.level:.0%} CI=[{ci_cop.lower:.4f}, {ci_cop.upper:.4f}]"
          f" -> {args.out}")
    return 0


def _competition_or_fixed(args, design, y, seed):
    if args.mop:
        mop = run_competition(design, y, q=args.q, seed=seed, threads=args.threads)
        return mop.winner_spec, mop.winner_cv, mop.winner_report, mop
    spec = _spec_from_args(args)
    assignment = assign_folds(design, args.q, substream_seed(seed, "folds"))
    cv = k_fold_cv(spec, design, y, assignment, threads=args.threads)
    return spec, cv, compute_report(cv), None


def cmd_sensitivity(args) -> int:
    seed = _parse_seed(args.seed)
    header, _ = dataio.read_table(args.data)
    outputs = _csv_list(args.outputs) or [header[-1]]
    input_cols = _csv_list(args.inputs) or [h for h in header if h not in outputs]
    bounds = _parse_bounds(args.bounds) if args.bounds else None

    rows = []
    for name in outputs:
        design, y = dataio.load_csv(args.data, input_cols=input_cols,
                                    output_col=name, bounds=bounds)
        spec, cv, report, _ = _competition_or_fixed(args, design, y, seed)
        bundle = saltelli_design(design.cols, args.n_base, design.bounds,
                                 substream_seed(seed, "saltelli"))
        result = scale_by_cop(sobol_indices(cv.model, bundle), report.cop)
        rows.append({
            "output": name,
            "model": spec.label,
            "cop": report.cop,
            "s_total_scaled": clamp_indices(result.s_total_cv).tolist(),
            "s_first_scaled": clamp_indices(result.s_first_cv).tolist(),
            "s_total": result.s_total.tolist(),
            "s_first": result.s_first.tolist(),
        })

    if args.json_out:
        dataio.emit_report({"kind": "sensitivity", "inputs": input_cols, "rows": rows},
                           "json", args.json_out)
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["output", "cop"] + [f"st_{c}" for c in input_cols])
            for r in rows:
                writer.writerow([r["output"], f"{_clamp01(r['cop']):.3f}"]
                                + [f"{v:.4f}" for v in r["s_total_scaled"]])
    for r in rows:
        top = input_cols[int(np.argmax(r["s_total_scaled"]))]
        print(f"{r['output']}: CoP={r['cop']:.4f} ({r['model']}), strongest input {top}")
    return 0


def cmd_mop(args) -> int:
    seed = _parse_seed(args.seed)
    header, _ = dataio.read_table(args.data)
    outputs = _csv_list(args.outputs) or [header[-1]]
    input_cols = _csv_list(args.inputs) or [h for h in header if h not in outputs]
    bounds = _parse_bounds(args.bounds) if args.bounds else None

    rows = []
    for name in outputs:
        design, y = dataio.load_csv(args.data, input_cols=input_cols,
                                    output_col=name, bounds=bounds)
        mop = run_competition(design, y, q=args.q, seed=seed, threads=args.threads)
        dist = bootstrap_residuals(mop.winner_cv.cv_residuals, mop.winner_report.ss_t,
                                   reps=args.reps, seed=substream_seed(seed, "bootstrap"))
        ci = confidence_interval(dist, "cop", args.level)
        cod_test = None
        if args.test_data:
            test_design, test_y = dataio.load_csv(args.test_data, input_cols=input_cols,
                                                  output_col=name, bounds=design.bounds)
            pred = mop.winner_model.predict(test_design)
            tv = test_y.values
            cod_test = 1.0 - float(((tv - pred) ** 2).sum() / ((tv - tv.mean()) ** 2).sum())
        rows.append(dataio.MopReportRow(
            name=name,
            n=design.rows,
            model=mop.winner_spec.label,
            k_inputs=len(mop.selected_inputs),
            cop=_clamp01(mop.cop),
            ci_lo=_clamp01(ci.lower),
            ci_hi=_clamp01(ci.upper),
            cod_test=None if cod_test is None else _clamp01(cod_test),
        ))
        print(f"{name}: {mop.winner_spec.label} on {len(mop.selected_inputs)} inputs, "
              f"CoP={mop.cop:.4f} CI=[{ci.lower:.4f}, {ci.upper:.4f}]")
    dataio.emit_report(rows, args.format, args.report)
    return 0


def cmd_field_assess(args) -> int:
    seed = _parse_seed(args.seed)
    design, _ = dataio.load_csv(args.design,
                                bounds=_parse_bounds(args.bounds) if args.bounds else None)
    grid, values = dataio.load_field_csv(args.values)
    data = FieldDataset(design=design, grid=grid, values=values)
    cv = field_cross_validate(_spec_from_args(args), data, q=args.q,
                              seed=substream_seed(seed, "folds"), threads=args.threads)
    rep = field_report(data, cv)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "rmse_fit", "rmse_cv", "cod_stat", "cop_stat"])
        for i in range(rep.n_points):
            writer.writerow([_FMT % rep.grid[i], _FMT % rep.rmse_fit[i],
                             _FMT % rep.rmse_cv[i], _FMT % rep.cod_stat[i],
                             _FMT % rep.cop_stat[i]])
    if cv.errors:
        print(f"warning: {len(cv.errors)} grid points failed: "
              f"{sorted(cv.errors)[:5]}...", file=sys.stderr)
    print(f"field report for {rep.n_points} grid points -> {args.out}")
    return 0


def cmd_study(args) -> int:
    cfg_doc = json.loads(Path(args.config).read_text())
    model_doc = cfg_doc.get("model")
    model = None
    if model_doc:
        model = ModelSpec(
            family=model_doc["family"],
            basis=model_doc.get("basis", "linear"),
            radius=model_doc.get("radius", 0.3),
            anisotropy=model_doc.get("anisotropy", "isotropic"),
            active_inputs=tuple(model_doc["active_inputs"]) if model_doc.get("active_inputs") else None,
        )
    config = StudyConfig(
        benchmark=cfg_doc["benchmark"],
        n_support=cfg_doc["n_support"],
        n_test=cfg_doc.get("n_test", 500),
        runs=cfg_doc.get("runs", 50),
        q=cfg_doc.get("q", 5),
        seed=cfg_doc.get("seed", _parse_seed(args.seed) if args.seed else 0),
        model=model,
        bootstrap_reps=cfg_doc.get("bootstrap_reps", 100_000),
        level=cfg_doc.get("level", 0.99),
    )
    result = run_study(config, threads=args.threads)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "cop", "ci_lo", "ci_hi", "cod_test", "dss_kfold", "dss_loo"])
        for r in result.runs:
            writer.writerow([r.run] + [_FMT % v for v in
                                       (r.cop, r.ci_lo, r.ci_hi, r.cod_test,
                                        r.dss_kfold, r.dss_loo)])
    print(f"{len(result.runs)} runs ({len(result.failures)} failed); "
          f"coverage={result.coverage:.2f}, "
          f"kfold dss>0: {result.positive_fraction('kfold'):.2f}, "
          f"loo dss>0: {result.positive_fraction('loo'):.2f} -> {args.out}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prognosis",
                                     description="Surrogate prediction-quality toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, q_default=5):
        p.add_argument("--seed", default=None, help="integer seed or 'auto'")
        p.add_argument("--threads", type=int, default=default_threads())

    p = sub.add_parser("sample", help="generate a Latin Hypercube design CSV")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bounds", required=True, help="'lo:hi,lo:hi,...' per column")
    p.add_argument("--improve-iters", type=int, default=None,
                   help="correlation-reduction swaps (default 10*n*m; 0 disables)")
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="evaluate a benchmark on a design CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--benchmark", required=True)
    p.add_argument("--noise-seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval, seed="0", threads=1)

    p = sub.add_parser("train", help="train one surrogate and save it as JSON")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("assess", help="cross-validate a surrogate and report quality")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--loo", action="store_true", help="leave-one-out instead of k-fold")
    p.add_argument("--fold-method", choices=("cluster", "random"), default="cluster")
    p.add_argument("--report", default=None, help="QualityReport JSON path")
    p.add_argument("--residuals", default=None, help="residual-plot CSV path")
    p.add_argument("--local-grid", type=int, default=None,
                   help="lattice resolution for the local error field")
    p.add_argument("--local-dims", default=None, help="two 0-based dims for the lattice")
    p.add_argument("--local-out", default=None)
    common(p)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("bootstrap", help="bootstrap RMSE/CoP confidence intervals")
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--loo", action="store_true")
    p.add_argument("--fold-method", choices=("cluster", "random"), default="cluster")
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--level", type=float, default=0.99)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("sensitivity", help="CoP-scaled Sobol indices per output")
    p.add_argument("--data", required=True)
    p.add_argument("--inputs", default=None)
    p.add_argument("--outputs", default=None, help="comma-separated output columns")
    p.add_argument("--bounds", default=None)
    p.add_argument("--mop", action="store_true", help="select the model by competition")
    _add_model_flags(p)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--n-base", type=int, default=2**14)
    p.add_argument("--csv-out", default=None)
    p.add_argument("--json-out", default=None)
    common(p)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("mop", help="model/subspace competition, table-style report")
    p.add_argument("--data", required=True)
    p.add_argument("--inputs", default=None)
    p.add_argument("--outputs", default=None)
    p.add_argument("--bounds", default=None)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--reps", type=int, default=100_000)
    p.add_argument("--level", type=float, default=0.99)
    p.add_argument("--test-data", default=None)
    p.add_argument("--report", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    common(p)
    p.set_defaults(func=cmd_mop)

    p = sub.add_parser("field-assess", help="per-point and stationary field quality")
    p.add_argument("--design", required=True, help="input design CSV")
    p.add_argument("--values", required=True,
                   help="field CSV: first row grid, then one sample per row")
    p.add_argument("--bounds", default=None)
    _add_model_flags(p)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_field_assess)

    p = sub.add_parser("study", help="repeated-run benchmark study from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return int(args.func(args) or 0)
    except ArgumentError as exc:
        print(f"argument error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (NumericError, np.linalg.LinAlgError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4
    except PrognosisError as exc:  # any remaining library error counts as data-ish
        print(f"error: {exc}", file=sys.stderr)
        return 3


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
