"""Command-line interface.

Subcommands: ``metrics``, ``fit-constant``, ``fit-linear``, ``profile``,
``experiment``, ``calibrate``.  Output format is ``json``, ``csv`` or
``table`` (``--format``, falling back to the ``AGREELOSS_FORMAT``
environment variable, then ``table``).

Every output document embeds the tool version, the fully resolved options
(including the seed) and SHA-256 digests of all input files, so a run can
be reproduced bit-identically.  No timestamps are emitted.

Exit codes: 0 success, 1 input error, 2 mathematically undefined request,
3 convergence failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import __version__
from .estimators import (
    MinimizerConfig,
    fit_constant_lnr2,
    fit_constant_lw,
    fit_linear_lnr2,
    fit_linear_lw,
    fit_linear_ols,
    lnr2_constant_profile,
    lw_constant_profile,
)
from .exceptions import (
    ConvergenceError,
    CsvFormatError,
    InvalidInputError,
    UndefinedValueError,
)
from .hydro import CALIBRATION_LOSSES, load_csv, run_calibration
from .losses import (
    MetricEntry,
    MetricReport,
    NEGATIVELY_ORIENTED,
    POSITIVELY_ORIENTED,
    SeriesPair,
    is_agreement_metric,
    l_kbb,
    l_lmc_mean,
    l_lmc_median,
    l_nr2,
    l_nrp,
    l_w,
    mae,
    mse,
    nse,
    v_mean_avg,
    v_median_avg,
)
from .simulate import Gaussian, Rng, run_climatology_experiment, run_linear_experiment

PROG = "agreeloss"
FORMATS = ("json", "csv", "table")
FORMAT_ENV_VAR = "AGREELOSS_FORMAT"

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_UNDEFINED = 2
EXIT_NO_CONVERGENCE = 3


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list]


@dataclass
class Output:
    command: str
    options: dict
    inputs: dict
    result: dict
    tables: list[Table]
    exit_code: int = EXIT_OK


class _Parser(argparse.ArgumentParser):
    """Argument parser that exits with code 1 on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_INPUT_ERROR)


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from None


def _span(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected a span like 2001-01-01:2008-12-31, got {text!r}")
    return parts[0], parts[1]


def build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description="Agreement-loss metrics, fits and experiments")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=FORMATS, default=None, help="output format")

    p = sub.add_parser("metrics", help="compute metrics on a prediction/observation file")
    p.add_argument("--input", required=True, help="CSV file with header z,y")
    p.add_argument("--metrics", required=True, help="comma-separated metric list")
    p.add_argument(
        "--as-index",
        action="store_true",
        help="report agreement losses as positively oriented indices (1 - loss)",
    )
    add_format(p)
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("fit-constant", help="closed-form constant fit")
    p.add_argument("--loss", required=True, choices=("lw", "lnr2"))
    p.add_argument("--input", required=True, help="CSV file with header y")
    add_format(p)
    p.set_defaults(handler=cmd_fit_constant)

    p = sub.add_parser("fit-linear", help="linear fit under a chosen loss")
    p.add_argument("--loss", required=True, choices=("se", "lnr2", "lw"))
    p.add_argument("--train", required=True, help="CSV file with header x,y")
    p.add_argument("--test", default=None, help="optional CSV file with header x,y")
    add_format(p)
    p.set_defaults(handler=cmd_fit_linear)

    p = sub.add_parser("profile", help="constant-prediction loss profile over a theta grid")
    p.add_argument("--loss", required=True, choices=("lw", "lnr2"))
    p.add_argument("--input", required=True, help="CSV file with header y")
    p.add_argument("--min", required=True, type=float, dest="theta_min")
    p.add_argument("--max", required=True, type=float, dest="theta_max")
    p.add_argument("--steps", required=True, type=int)
    add_format(p)
    p.set_defaults(handler=cmd_profile)

    p = sub.add_parser("experiment", help="run a seeded simulation experiment")
    p.add_argument("kind", choices=("climatology", "linear"))
    p.add_argument("--seed", required=True, type=_u64, help="RNG seed (required)")
    p.add_argument("--stream-id", type=_u64, default=0)
    p.add_argument("--n-total", type=int, default=None)
    p.add_argument("--split", type=int, default=None)
    p.add_argument("--mu", type=float, default=0.0, help="gaussian mean (climatology)")
    p.add_argument("--sigma", type=float, default=1.0, help="gaussian sd (climatology)")
    p.add_argument("--a1", type=_float_list, default=None, help="slope list (linear)")
    add_format(p)
    p.set_defaults(handler=cmd_experiment)

    p = sub.add_parser("calibrate", help="calibrate the bucket model on a catchment file")
    p.add_argument("--data", required=True, help="CSV file with header date,precip_mm,pet_mm,flow_mm")
    p.add_argument("--warmup-days", required=True, type=int)
    p.add_argument("--cal", required=True, type=_span, help="calibration span d1:d2")
    p.add_argument("--val", required=True, type=_span, help="validation span d1:d2")
    p.add_argument("--loss", default=",".join(CALIBRATION_LOSSES), help="comma-separated loss list")
    p.add_argument("--max-iterations", type=int, default=MinimizerConfig.max_iterations)
    p.add_argument("--restarts", type=int, default=MinimizerConfig.restarts)
    add_format(p)
    p.set_defaults(handler=cmd_calibrate)

    return parser


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_table_csv(path: str, expected_header: tuple[str, ...]) -> list[np.ndarray]:
    """Read a small numeric CSV with an exact expected header."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("row 1: file is empty, expected a header") from None
        if [h.strip() for h in header] != list(expected_header):
            raise CsvFormatError(
                f"row 1: expected header {','.join(expected_header)!r}, got {','.join(header)!r}"
            )
        columns: list[list[float]] = [[] for _ in expected_header]
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(expected_header):
                raise CsvFormatError(
                    f"row {line_no}: expected {len(expected_header)} columns, got {len(row)}"
                )
            for i, cell in enumerate(row):
                cell = cell.strip()
                if not cell:
                    raise CsvFormatError(
                        f"row {line_no}: missing value in column {expected_header[i]}"
                    )
                try:
                    columns[i].append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"row {line_no}: invalid number {cell!r} in column {expected_header[i]}"
                    ) from None
    if not columns[0]:
        raise CsvFormatError("row 2: no data rows found")
    return [np.array(col) for col in columns]


_SIMPLE_METRICS = {
    "mae": (mae, NEGATIVELY_ORIENTED),
    "mse": (mse, NEGATIVELY_ORIENTED),
    "nse": (nse, POSITIVELY_ORIENTED),
    "one_minus_nse": (lambda pair: 1.0 - nse(pair), NEGATIVELY_ORIENTED),
    "lw": (l_w, NEGATIVELY_ORIENTED),
    "lnr2": (l_nr2, NEGATIVELY_ORIENTED),
    "vbar_mean": (v_mean_avg, NEGATIVELY_ORIENTED),
    "vbar_median": (v_median_avg, NEGATIVELY_ORIENTED),
}


def _resolve_metric(spec: str):
    """Map a metric spec string to (callable, orientation)."""
    base, _, param = spec.partition(":")
    if base in _SIMPLE_METRICS:
        if param:
            raise InvalidInputError(f"metric {base!r} takes no parameter")
        return _SIMPLE_METRICS[base]
    if base == "lmc":
        if param == "f=mean":
            return l_lmc_mean, NEGATIVELY_ORIENTED
        if param == "f=median":
            return l_lmc_median, NEGATIVELY_ORIENTED
        raise InvalidInputError(f"metric lmc requires f=mean or f=median, got {spec!r}")
    if base in ("kbb", "nrp"):
        if not param.startswith("p="):
            raise InvalidInputError(f"metric {base} requires p=<value>, got {spec!r}")
        try:
            p = float(param[2:])
        except ValueError:
            raise InvalidInputError(f"invalid exponent in {spec!r}") from None
        fn = l_kbb if base == "kbb" else l_nrp
        return (lambda pair, _p=p, _fn=fn: _fn(pair, _p)), NEGATIVELY_ORIENTED
    raise InvalidInputError(f"unknown metric {spec!r}")


def cmd_metrics(args) -> Output:
    z, y = _read_table_csv(args.input, ("z", "y"))
    pair = SeriesPair(z, y)
    specs = [s.strip() for s in args.metrics.split(",") if s.strip()]
    if not specs:
        raise InvalidInputError("no metrics requested")
    entries = []
    for spec in specs:
        fn, orientation = _resolve_metric(spec)
        try:
            value = fn(pair)
        except UndefinedValueError:
            value = None
        if args.as_index and value is not None and is_agreement_metric(spec):
            value = 1.0 - value
            orientation = POSITIVELY_ORIENTED
        entries.append(MetricEntry(spec, value, orientation))
    report = MetricReport(tuple(entries))
    rows = [[e.name, e.value, e.orientation] for e in report.entries]
    result = {
        "n": pair.n,
        "metrics": [
            {"name": e.name, "value": e.value, "orientation": e.orientation}
            for e in report.entries
        ],
    }
    return Output(
        command="metrics",
        options={
            "input": args.input,
            "metrics": specs,
            "as_index": bool(args.as_index),
        },
        inputs={args.input: _digest(args.input)},
        result=result,
        tables=[Table("metrics", ["metric", "value", "orientation"], rows)],
        exit_code=EXIT_UNDEFINED if report.has_undefined() else EXIT_OK,
    )


def cmd_fit_constant(args) -> Output:
    (y,) = _read_table_csv(args.input, ("y",))
    fit = fit_constant_lw(y) if args.loss == "lw" else fit_constant_lnr2(y)
    result = {
        "loss": fit.loss_name,
        "theta_plus": fit.theta_plus,
        "theta_minus": fit.theta_minus,
        "min_loss": fit.min_loss,
        "n": int(y.size),
    }
    rows = [[fit.loss_name, fit.theta_plus, fit.theta_minus, fit.min_loss]]
    return Output(
        command="fit-constant",
        options={"loss": args.loss, "input": args.input},
        inputs={args.input: _digest(args.input)},
        result=result,
        tables=[Table("fit", ["loss", "theta_plus", "theta_minus", "min_loss"], rows)],
    )


def cmd_fit_linear(args) -> Output:
    x, y = _read_table_csv(args.train, ("x", "y"))
    if args.loss == "se":
        fit = fit_linear_ols(x, y)
    elif args.loss == "lnr2":
        fit = fit_linear_lnr2(x, y)
    else:
        fit = fit_linear_lw(x, y)
    result = {
        "loss": args.loss,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "achieved_loss": fit.achieved_loss,
        "method": fit.method,
        "degenerate": fit.degenerate,
        "n_train": int(x.size),
    }
    inputs = {args.train: _digest(args.train)}
    tables = [
        Table(
            "fit",
            ["loss", "slope", "intercept", "achieved_loss", "method", "degenerate"],
            [[args.loss, fit.slope, fit.intercept, fit.achieved_loss, fit.method, fit.degenerate]],
        )
    ]
    if args.test is not None:
        x_test, y_test = _read_table_csv(args.test, ("x", "y"))
        pair = SeriesPair(fit.predict(x_test), y_test)
        test_metrics = {
            "mse": mse(pair),
            "lnr2": l_nr2(pair),
            "lw": l_w(pair),
            "vbar_mean": v_mean_avg(pair),
        }
        result["test"] = dict(test_metrics, n=int(x_test.size))
        inputs[args.test] = _digest(args.test)
        tables.append(
            Table(
                "test",
                ["mse", "lnr2", "lw", "vbar_mean"],
                [[test_metrics["mse"], test_metrics["lnr2"], test_metrics["lw"], test_metrics["vbar_mean"]]],
            )
        )
    return Output(
        command="fit-linear",
        options={"loss": args.loss, "train": args.train, "test": args.test},
        inputs=inputs,
        result=result,
        tables=tables,
    )


def cmd_profile(args) -> Output:
    (y,) = _read_table_csv(args.input, ("y",))
    if args.steps < 2:
        raise InvalidInputError("profile grid needs at least 2 steps")
    if not args.theta_min < args.theta_max:
        raise InvalidInputError("--min must be smaller than --max")
    if args.loss == "lw":
        profile = lw_constant_profile
        fit = fit_constant_lw(y)
    else:
        profile = lnr2_constant_profile
        fit = fit_constant_lnr2(y)
    grid = np.linspace(args.theta_min, args.theta_max, args.steps)
    points = [(float(theta), profile(float(theta), y), "") for theta in grid]
    points.append((fit.theta_minus, profile(fit.theta_minus, y), "minimum"))
    points.append((fit.theta_plus, profile(fit.theta_plus, y), "minimum"))
    points.sort(key=lambda item: item[0])
    result = {
        "loss": args.loss,
        "theta_plus": fit.theta_plus,
        "theta_minus": fit.theta_minus,
        "min_loss": fit.min_loss,
        "rows": [{"theta": t, "loss": v, "annotation": a} for t, v, a in points],
    }
    return Output(
        command="profile",
        options={
            "loss": args.loss,
            "input": args.input,
            "min": args.theta_min,
            "max": args.theta_max,
            "steps": args.steps,
        },
        inputs={args.input: _digest(args.input)},
        result=result,
        tables=[Table("profile", ["theta", "loss", "annotation"], [list(p) for p in points])],
    )


_EXPERIMENT_DEFAULTS = {
    "climatology": {"n_total": 1000, "split": 500},
    "linear": {"n_total": 4000, "split": 2000},
}


def cmd_experiment(args) -> Output:
    defaults = _EXPERIMENT_DEFAULTS[args.kind]
    n_total = args.n_total if args.n_total is not None else defaults["n_total"]
    split = args.split if args.split is not None else defaults["split"]
    options = {
        "kind": args.kind,
        "seed": args.seed,
        "stream_id": args.stream_id,
        "n_total": n_total,
        "split": split,
    }
    if args.kind == "climatology":
        options.update(mu=args.mu, sigma=args.sigma)
        report = run_climatology_experiment(
            n_total, split, Gaussian(args.mu, args.sigma), Rng(args.seed, args.stream_id)
        )
        result = report.to_dict()
        tables = [
            Table(
                "models",
                list(report.columns),
                [[row[c] for c in report.columns] for row in report.models],
            )
        ]
    else:
        slopes = args.a1 if args.a1 else [0.6, 6.0, 20.0]
        options.update(a1=slopes)
        # Each slope block reruns the generator from the same seed, so the
        # predictor and noise realizations are shared across blocks.
        reports = [
            run_linear_experiment(a1, n_total, split, Rng(args.seed, args.stream_id))
            for a1 in slopes
        ]
        result = {"blocks": [r.to_dict() for r in reports]}
        columns = ["a1"] + list(reports[0].columns)
        rows = []
        for a1, report in zip(slopes, reports):
            for row in report.models:
                rows.append([a1] + [row[c] for c in report.columns])
        tables = [Table("models", columns, rows)]
    return Output(
        command="experiment",
        options=options,
        inputs={},
        result=result,
        tables=tables,
    )


def cmd_calibrate(args) -> Output:
    losses = tuple(s.strip() for s in args.loss.split(",") if s.strip())
    for name in losses:
        if name not in CALIBRATION_LOSSES:
            raise InvalidInputError(f"unknown calibration loss {name!r}")
    series = load_csv(args.data)
    config = MinimizerConfig(max_iterations=args.max_iterations, restarts=args.restarts)
    report = run_calibration(series, args.warmup_days, args.cal, args.val, losses, config)
    result = report.to_dict()
    cal_rows, val_rows, vbar_rows = [], [], []
    for row in report.rows:
        p = row.params
        cal_rows.append(
            [row.loss_name, p.capacity, p.recession, p.split, row.cal_mse, row.cal_lnr2, row.cal_lw]
        )
        val_rows.append([row.loss_name, row.val_mse, row.val_lnr2, row.val_lw])
        vbar_rows.append([row.loss_name, row.val_vbar_mean])
    return Output(
        command="calibrate",
        options={
            "data": args.data,
            "warmup_days": args.warmup_days,
            "cal": list(args.cal),
            "val": list(args.val),
            "loss": list(losses),
            "max_iterations": args.max_iterations,
            "restarts": args.restarts,
        },
        inputs={args.data: _digest(args.data)},
        result=result,
        tables=[
            Table(
                "calibration",
                ["loss", "capacity", "recession", "split", "mse", "lnr2", "lw"],
                cal_rows,
            ),
            Table("validation", ["loss", "mse", "lnr2", "lw"], val_rows),
            Table("vbar_mean", ["loss", "vbar_mean"], vbar_rows),
        ],
    )


def _cell_csv(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _cell_table(value) -> str:
    if value is None:
        return "undefined"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _flatten(prefix: str, value, out: dict) -> None:
    if isinstance(value, dict):
        for key in sorted(value):
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], out)
    elif isinstance(value, (list, tuple)):
        out[prefix] = ",".join(str(v) for v in value)
    else:
        out[prefix] = value


def render(output: Output, fmt: str) -> str:
    envelope = {
        "tool": PROG,
        "version": __version__,
        "command": output.command,
        "options": output.options,
        "inputs": output.inputs,
        "result": output.result,
    }
    if fmt == "json":
        return json.dumps(envelope, sort_keys=True, indent=2) + "\n"
    meta: dict = {}
    _flatten("", {"tool": PROG, "version": __version__, "command": output.command}, meta)
    _flatten("options", output.options, meta)
    _flatten("inputs", output.inputs, meta)
    if fmt == "csv":
        buf = io.StringIO()
        for key, value in meta.items():
            buf.write(f"# {key}={_cell_csv(value)}\n")
        for table in output.tables:
            if len(output.tables) > 1:
                buf.write(f"# table={table.name}\n")
            buf.write(",".join(table.columns) + "\n")
            for row in table.rows:
                buf.write(",".join(_cell_csv(v) for v in row) + "\n")
        return buf.getvalue()
    # Plain-text tables.
    buf = io.StringIO()
    for key, value in meta.items():
        buf.write(f"{key}: {_cell_table(value)}\n")
    for table in output.tables:
        buf.write(f"\n[{table.name}]\n")
        cells = [[_cell_table(v) for v in row] for row in table.rows]
        widths = [
            max(len(col), *(len(r[i]) for r in cells)) if cells else len(col)
            for i, col in enumerate(table.columns)
        ]
        buf.write("  ".join(col.ljust(w) for col, w in zip(table.columns, widths)).rstrip() + "\n")
        for row in cells:
            buf.write("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() + "\n")
    return buf.getvalue()


def _resolve_format(args) -> str:
    if args.format is not None:
        return args.format
    env = os.environ.get(FORMAT_ENV_VAR)
    if env is None or env == "":
        return "table"
    if env not in FORMATS:
        raise InvalidInputError(
            f"invalid {FORMAT_ENV_VAR} value {env!r}; expected one of {', '.join(FORMATS)}"
        )
    return env


def main(argv=None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT_ERROR
    try:
        fmt = _resolve_format(args)
        output = args.handler(args)
        sys.stdout.write(render(output, fmt))
        return output.exit_code
    except UndefinedValueError as exc:
        sys.stderr.write(f"{PROG}: undefined: {exc}\n")
        return EXIT_UNDEFINED
    except ConvergenceError as exc:
        sys.stderr.write(f"{PROG}: no convergence: {exc}\n")
        return EXIT_NO_CONVERGENCE
    except (InvalidInputError, OSError) as exc:
        sys.stderr.write(f"{PROG}: error: {exc}\n")
        return EXIT_INPUT_ERROR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
