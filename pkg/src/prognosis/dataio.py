"""CSV/JSON input and report output.

Data CSVs are rectangular numeric tables with a header row; numbers are
written with 17 significant digits so a write/read round trip is exact.
Reports carry the schema tag "prognosis/1".
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ArgumentError, BoundsError, DataError
from .quality import QualityReport
from .sampling import Bounds, DesignMatrix, OutputVector

REPORT_SCHEMA = "prognosis/1"
_FLOAT_FMT = "%.17g"


def read_table(path) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV with a header row.

    Errors name the offending file line (the header is line 1).
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names in header")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: row {line_no} has {len(row)} cells, expected {len(header)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise DataError(f"{path}: non-numeric cell at row {line_no}") from None
    if len(rows) < 3:
        raise DataError(f"{path}: need at least 3 data rows, found {len(rows)}")
    return header, np.asarray(rows, dtype=float)


def load_csv(
    path,
    input_cols: list[str] | None = None,
    output_col: str | None = None,
    bounds: Bounds | None = None,
) -> tuple[DesignMatrix, OutputVector | None]:
    """Load a tabular dataset into a design matrix plus optional output.

    Defaults: ``output_col=None`` takes no output column, and
    ``input_cols=None`` takes every column not claimed as output. Bounds are
    inferred as per-column min/max unless given explicitly.
    """
    header, data = read_table(path)
    if output_col is not None and output_col not in header:
        raise DataError(f"{path}: no column named {output_col!r}")
    if input_cols is None:
        input_cols = [h for h in header if h != output_col]
    missing = [c for c in input_cols if c not in header]
    if missing:
        raise DataError(f"{path}: missing input columns {missing}")
    if not input_cols:
        raise DataError(f"{path}: no input columns left")

    x = data[:, [header.index(c) for c in input_cols]]
    if bounds is None:
        try:
            bounds = Bounds(x.min(axis=0), x.max(axis=0))
        except BoundsError as exc:
            raise DataError(f"{path}: cannot infer bounds ({exc})") from exc
    design = DesignMatrix(x, bounds)
    if output_col is None:
        return design, None
    return design, OutputVector(data[:, header.index(output_col)])


def write_design_csv(path, design: DesignMatrix, y: OutputVector | None = None,
                     input_names: list[str] | None = None, output_name: str = "y") -> None:
    path = Path(path)
    names = input_names or [f"x{j + 1}" for j in range(design.cols)]
    header = list(names) + ([output_name] if y is not None else [])
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(design.rows):
            row = [_FLOAT_FMT % v for v in design.values[i]]
            if y is not None:
                row.append(_FLOAT_FMT % y.values[i])
            writer.writerow(row)


def load_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Field-value CSV: first row grid coordinates, then one sample per row."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        rows = []
        for line_no, row in enumerate(reader, start=1):
            if not row:
                continue
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise DataError(f"{path}: non-numeric cell at row {line_no}") from None
    if len(rows) < 2:
        raise DataError(f"{path}: need a grid row plus at least one sample row")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DataError(f"{path}: ragged rows (widths {sorted(widths)})")
    grid = np.asarray(rows[0])
    values = np.asarray(rows[1:])
    return grid, values


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MopReportRow:
    """One output's competition summary, table-style."""

    name: str
    n: int
    model: str
    k_inputs: int
    cop: float
    ci_lo: float
    ci_hi: float
    cod_test: float | None = None


MOP_REPORT_COLUMNS = ("name", "n", "model", "k_inputs", "cop", "ci_lo", "ci_hi", "cod_test")


def _mop_rows_csv(rows: list[MopReportRow], path: Path) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MOP_REPORT_COLUMNS)
        for r in rows:
            writer.writerow([
                r.name,
                r.n,
                r.model,
                r.k_inputs,
                f"{r.cop:.3f}",
                f"{r.ci_lo:.3f}",
                f"{r.ci_hi:.3f}",
                "" if r.cod_test is None else f"{r.cod_test:.3f}",
            ])


def _mop_rows_json(rows: list[MopReportRow], path: Path) -> None:
    doc = {
        "schema": REPORT_SCHEMA,
        "kind": "mop",
        "rows": [
            {
                "name": r.name,
                "n": r.n,
                "model": r.model,
                "k_inputs": r.k_inputs,
                "cop": r.cop,
                "ci_lo": r.ci_lo,
                "ci_hi": r.ci_hi,
                "cod_test": r.cod_test,
            }
            for r in rows
        ],
    }
    path.write_text(json.dumps(doc, indent=2) + "\n")


def emit_report(report, fmt: str, path) -> None:
    """Write a report structure as JSON or CSV with stable field ordering."""
    path = Path(path)
    if fmt not in ("json", "csv"):
        raise ArgumentError(f"unknown report format {fmt!r}; choose 'json' or 'csv'")

    if isinstance(report, list) and all(isinstance(r, MopReportRow) for r in report):
        if not report:
            raise ArgumentError("refusing to emit an empty leaderboard report")
        if fmt == "csv":
            _mop_rows_csv(report, path)
        else:
            _mop_rows_json(report, path)
        return

    if isinstance(report, QualityReport):
        doc = {"schema": REPORT_SCHEMA, "kind": "quality", **report.as_dict()}
        if fmt == "json":
            path.write_text(json.dumps(doc, indent=2) + "\n")
        else:
            with path.open("w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["key", "value"])
                for key, value in doc.items():
                    if isinstance(value, list):
                        value = " ".join(_FLOAT_FMT % v for v in value)
                    writer.writerow([key, value])
        return

    if isinstance(report, dict):
        if fmt != "json":
            raise ArgumentError("dict reports can only be emitted as JSON")
        doc = {"schema": REPORT_SCHEMA, **report}
        path.write_text(json.dumps(doc, indent=2) + "\n")
        return

    raise ArgumentError(f"cannot emit a report of type {type(report).__name__}")
