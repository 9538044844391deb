"""Lumped bucket rainfall-runoff model and its calibration harness.

The model is a single store with three parameters:

* ``capacity`` (mm): store size; also scales the evaporation demand;
* ``recession`` (per day, in (0, 1)): fraction of the store released as
  baseflow each day;
* ``split`` (in [0, 1]): fraction of rainfall bypassing the store as
  direct runoff.

Daily update, in order: direct runoff, infiltration, evaporation
(demand ``pet * min(1, store/capacity)``, capped by the store), spill of
any excess above capacity, then baseflow.  Water balance closes exactly:
total precipitation equals total simulated flow plus actual evaporation
plus storage change.

Calibration minimizes a chosen average loss (squared error or either
agreement loss) between simulated and observed flow over a calibration
span, with the embedded simplex minimizer running on unconstrained
parameters (log capacity, logit recession, logit split).  The simulation
always starts at the head of the series with the store half full; scored
days begin after the warm-up.
"""

from __future__ import annotations

import csv
import datetime as _dt
import math
from dataclasses import dataclass

import numpy as np

from .estimators import MinimizeResult, MinimizerConfig, minimize
from .exceptions import (
    ConvergenceError,
    CsvFormatError,
    InvalidInputError,
    UndefinedValueError,
)
from .losses import SeriesPair, l_nr2, l_w, mse, v_mean_avg

__all__ = [
    "BucketParams",
    "BucketTrace",
    "CalibrationReport",
    "CalibrationRow",
    "HydroSeries",
    "calibrate",
    "load_csv",
    "run_calibration",
    "simulate_flow",
    "write_csv",
]

CSV_HEADER = ("date", "precip_mm", "pet_mm", "flow_mm")

CALIBRATION_LOSSES = ("se", "lnr2", "lw")

_LOSS_FUNCTIONS = {"se": mse, "lnr2": l_nr2, "lw": l_w}


@dataclass(frozen=True)
class BucketParams:
    capacity: float
    recession: float
    split: float

    def __post_init__(self):
        if not (math.isfinite(self.capacity) and self.capacity > 0.0):
            raise InvalidInputError("capacity must be a positive, finite depth")
        if not 0.0 < self.recession < 1.0:
            raise InvalidInputError("recession must lie strictly between 0 and 1")
        if not 0.0 <= self.split <= 1.0:
            raise InvalidInputError("split must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {"capacity": self.capacity, "recession": self.recession, "split": self.split}


@dataclass(frozen=True)
class HydroSeries:
    """Daily precipitation, potential evapotranspiration and flow (all mm).

    Dates must increase by exactly one day with no gaps; all values must
    be present, finite and non-negative.
    """

    dates: np.ndarray
    precip: np.ndarray
    pet: np.ndarray
    flow: np.ndarray

    def __post_init__(self):
        dates = np.asarray(self.dates, dtype="datetime64[D]")
        if dates.ndim != 1 or dates.size == 0:
            raise InvalidInputError("dates must form a non-empty 1-D sequence")
        arrays = {}
        for name in ("precip", "pet", "flow"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != dates.shape:
                raise InvalidInputError(f"{name} length does not match dates")
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"{name} contains non-finite values")
            if np.any(arr < 0.0):
                raise InvalidInputError(f"{name} contains negative values")
            arr = arr.copy()
            arr.setflags(write=False)
            arrays[name] = arr
        if dates.size > 1 and not np.all(np.diff(dates) == np.timedelta64(1, "D")):
            raise InvalidInputError("dates must increase by exactly one day")
        dates = dates.copy()
        dates.setflags(write=False)
        object.__setattr__(self, "dates", dates)
        for name, arr in arrays.items():
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.dates.size

    def index_of(self, day) -> int:
        """Index of *day* in the series; raises if outside the record."""
        stamp = _as_day(day)
        offset = int((stamp - self.dates[0]) / np.timedelta64(1, "D"))
        if not 0 <= offset < self.n:
            raise InvalidInputError(f"date {stamp} is outside the series record")
        return offset

    def span_slice(self, span) -> slice:
        """Inclusive (start, end) date span as an index slice."""
        start, end = span
        i0 = self.index_of(start)
        i1 = self.index_of(end)
        if i1 < i0:
            raise InvalidInputError("span end precedes span start")
        return slice(i0, i1 + 1)


def _as_day(value) -> np.datetime64:
    if isinstance(value, np.datetime64):
        return value.astype("datetime64[D]")
    if isinstance(value, _dt.date):
        return np.datetime64(value.isoformat(), "D")
    if isinstance(value, str):
        try:
            parsed = _dt.date.fromisoformat(value)
        except ValueError as exc:
            raise InvalidInputError(f"invalid ISO date {value!r}") from exc
        return np.datetime64(parsed.isoformat(), "D")
    raise InvalidInputError(f"cannot interpret {value!r} as a date")


@dataclass(frozen=True)
class BucketTrace:
    """Full simulation record: flow, actual evaporation and end-of-day store."""

    flow: np.ndarray
    evaporation: np.ndarray
    store: np.ndarray


def run_bucket(
    params: BucketParams, precip: np.ndarray, pet: np.ndarray, initial_store: float
) -> BucketTrace:
    """Run the daily store recurrence over the full forcing record."""
    if not (math.isfinite(initial_store) and initial_store >= 0.0):
        raise InvalidInputError("initial_store must be non-negative and finite")
    n = precip.size
    flow = np.empty(n)
    evap_out = np.empty(n)
    store_out = np.empty(n)
    capacity = params.capacity
    recession = params.recession
    split = params.split
    s = float(initial_store)
    for i in range(n):
        p = float(precip[i])
        direct = split * p
        s += (1.0 - split) * p
        demand = float(pet[i]) * min(1.0, s / capacity)
        evap = min(demand, s)
        s -= evap
        spill = s - capacity if s > capacity else 0.0
        s -= spill
        baseflow = recession * s
        s -= baseflow
        flow[i] = direct + spill + baseflow
        evap_out[i] = evap
        store_out[i] = s
    return BucketTrace(flow=flow, evaporation=evap_out, store=store_out)


def simulate_flow(params: BucketParams, series: HydroSeries, initial_store: float) -> np.ndarray:
    """Simulated daily flow for the whole series."""
    return run_bucket(params, series.precip, series.pet, initial_store).flow


# Unconstrained parametrization used by the minimizer.
_U_CAP_LIMIT = 20.0
_U_LOGIT_LIMIT = 30.0


def _logistic(t: float) -> float:
    t = min(_U_LOGIT_LIMIT, max(-_U_LOGIT_LIMIT, t))
    if t >= 0.0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def _logit(p: float) -> float:
    p = min(1.0 - 1e-12, max(1e-12, p))
    return math.log(p / (1.0 - p))


def _params_from_point(point: np.ndarray) -> BucketParams:
    u_cap = min(_U_CAP_LIMIT, max(-_U_CAP_LIMIT, float(point[0])))
    return BucketParams(
        capacity=math.exp(u_cap),
        recession=_logistic(float(point[1])),
        split=_logistic(float(point[2])),
    )


def _point_from_params(params: BucketParams) -> np.ndarray:
    return np.array(
        [math.log(params.capacity), _logit(params.recession), _logit(params.split)]
    )


# Two default warm starts spanning slow and flashy store behavior.
DEFAULT_STARTS = (
    BucketParams(capacity=100.0, recession=0.3, split=0.3),
    BucketParams(capacity=400.0, recession=0.05, split=0.1),
)


@dataclass(frozen=True)
class CalibrationRow:
    """One calibrated model: fitted parameters plus metrics on both spans."""

    loss_name: str
    params: BucketParams
    cal_mse: float
    cal_lnr2: float
    cal_lw: float
    val_mse: float
    val_lnr2: float
    val_lw: float
    val_vbar_mean: float
    converged: bool

    def cal_value(self, loss_name: str) -> float:
        return {"se": self.cal_mse, "lnr2": self.cal_lnr2, "lw": self.cal_lw}[loss_name]

    def val_value(self, loss_name: str) -> float:
        return {"se": self.val_mse, "lnr2": self.val_lnr2, "lw": self.val_lw}[loss_name]

    def to_dict(self) -> dict:
        return {
            "loss": self.loss_name,
            "params": self.params.to_dict(),
            "calibration": {"mse": self.cal_mse, "lnr2": self.cal_lnr2, "lw": self.cal_lw},
            "validation": {
                "mse": self.val_mse,
                "lnr2": self.val_lnr2,
                "lw": self.val_lw,
                "vbar_mean": self.val_vbar_mean,
            },
            "converged": self.converged,
        }


@dataclass(frozen=True)
class CalibrationReport:
    metadata: dict
    rows: tuple[CalibrationRow, ...]

    def row(self, loss_name: str) -> CalibrationRow:
        for row in self.rows:
            if row.loss_name == loss_name:
                return row
        raise KeyError(loss_name)

    def to_dict(self) -> dict:
        return {"metadata": dict(self.metadata), "rows": [r.to_dict() for r in self.rows]}


def _resolve_spans(series: HydroSeries, warmup_days: int, cal_span, val_span):
    if warmup_days < 0:
        raise InvalidInputError("warmup_days must be non-negative")
    cal = series.span_slice(cal_span)
    val = series.span_slice(val_span)
    if cal.start < warmup_days:
        raise InvalidInputError("calibration span must start after the warm-up period")
    if val.start <= cal.stop - 1:
        raise InvalidInputError("validation span must follow the calibration span")
    return cal, val


def calibrate(
    series: HydroSeries,
    warmup_days: int,
    cal_span,
    val_span,
    loss: str,
    config: MinimizerConfig | None = None,
    starts=None,
) -> CalibrationRow:
    """Fit the bucket model to observed flow by minimizing one average loss.

    The chosen loss (``"se"``, ``"lnr2"`` or ``"lw"``) is evaluated on the
    calibration span only; the warm-up days are simulated but never
    scored.  Returns the fitted parameters together with MSE and both
    agreement losses on the calibration and validation spans, plus the
    mean error on the validation span.

    Raises:
        ConvergenceError: no simplex descent converged; carries the best
            iterate found.
    """
    if loss not in _LOSS_FUNCTIONS:
        raise InvalidInputError(f"unknown calibration loss {loss!r}")
    cfg = config if config is not None else MinimizerConfig()
    cal, val = _resolve_spans(series, warmup_days, cal_span, val_span)
    metric = _LOSS_FUNCTIONS[loss]
    obs_cal = series.flow[cal]
    if loss != "se" and bool(np.all(obs_cal == obs_cal[0])):
        raise UndefinedValueError(
            "agreement-loss calibration is undefined for constant observed flow"
        )

    def objective(point: np.ndarray) -> float:
        try:
            params = _params_from_point(point)
        except InvalidInputError:
            return math.inf
        trace = run_bucket(params, series.precip, series.pet, params.capacity / 2.0)
        sim = trace.flow[cal]
        if not np.all(np.isfinite(sim)):
            return math.inf
        try:
            return metric(SeriesPair(sim, obs_cal))
        except UndefinedValueError:
            return math.inf

    start_params = tuple(starts) if starts is not None else DEFAULT_STARTS
    best: MinimizeResult | None = None
    any_converged = False
    for p in start_params:
        result = minimize(objective, _point_from_params(p), cfg)
        any_converged = any_converged or result.converged
        if best is None or result.value < best.value:
            best = result
    assert best is not None
    if not any_converged:
        raise ConvergenceError(
            f"calibration did not converge within {cfg.max_iterations} iterations",
            point=best.point,
            value=best.value,
        )

    fitted = _params_from_point(best.point)
    trace = run_bucket(fitted, series.precip, series.pet, fitted.capacity / 2.0)
    cal_pair = SeriesPair(trace.flow[cal], series.flow[cal])
    val_pair = SeriesPair(trace.flow[val], series.flow[val])
    return CalibrationRow(
        loss_name=loss,
        params=fitted,
        cal_mse=mse(cal_pair),
        cal_lnr2=l_nr2(cal_pair),
        cal_lw=l_w(cal_pair),
        val_mse=mse(val_pair),
        val_lnr2=l_nr2(val_pair),
        val_lw=l_w(val_pair),
        val_vbar_mean=v_mean_avg(val_pair),
        converged=best.converged,
    )


def run_calibration(
    series: HydroSeries,
    warmup_days: int,
    cal_span,
    val_span,
    losses=CALIBRATION_LOSSES,
    config: MinimizerConfig | None = None,
) -> CalibrationReport:
    """Calibrate once per requested loss and return the combined report.

    After the first pass, every fit is cross-checked against the other
    rows' parameters: if another row scores better on a row's own loss,
    that row is re-fitted from the better parameters.  This keeps each
    row's own-loss cell minimal among the rows, as the local minimizer
    alone cannot guarantee.
    """
    losses = tuple(losses)
    if not losses:
        raise InvalidInputError("at least one calibration loss is required")
    for name in losses:
        if name not in _LOSS_FUNCTIONS:
            raise InvalidInputError(f"unknown calibration loss {name!r}")
    rows = {
        name: calibrate(series, warmup_days, cal_span, val_span, name, config)
        for name in losses
    }
    if len(losses) > 1:
        for name in losses:
            own = rows[name].cal_value(name)
            challengers = sorted(
                (rows[other].cal_value(name), other)
                for other in losses
                if other != name
            )
            best_value, best_other = challengers[0]
            if best_value < own:
                refit = calibrate(
                    series,
                    warmup_days,
                    cal_span,
                    val_span,
                    name,
                    config,
                    starts=(rows[best_other].params, rows[name].params),
                )
                if refit.cal_value(name) < own:
                    rows[name] = refit
    cal = series.span_slice(cal_span)
    val = series.span_slice(val_span)
    metadata = {
        "warmup_days": warmup_days,
        "calibration_span": [str(series.dates[cal.start]), str(series.dates[cal.stop - 1])],
        "validation_span": [str(series.dates[val.start]), str(series.dates[val.stop - 1])],
        "n_days": series.n,
        "losses": list(losses),
    }
    return CalibrationReport(metadata=metadata, rows=tuple(rows[name] for name in losses))


def load_csv(path) -> HydroSeries:
    """Read a catchment record from CSV.

    Required header (exact): ``date,precip_mm,pet_mm,flow_mm``; dates in
    ISO-8601 ``YYYY-MM-DD``, values with a decimal point and no thousands
    separators, UTF-8 encoded.  Parse and validation errors name the
    offending row (the header is row 1).
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError("row 1: file is empty, expected a header") from None
        if [h.strip() for h in header] != list(CSV_HEADER):
            raise CsvFormatError(
                f"row 1: expected header {','.join(CSV_HEADER)!r}, got {','.join(header)!r}"
            )
        dates: list[np.datetime64] = []
        columns: dict[str, list[float]] = {"precip_mm": [], "pet_mm": [], "flow_mm": []}
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(CSV_HEADER):
                raise CsvFormatError(
                    f"row {line_no}: expected {len(CSV_HEADER)} columns, got {len(row)}"
                )
            raw_date = row[0].strip()
            try:
                day = _dt.date.fromisoformat(raw_date)
            except ValueError:
                raise CsvFormatError(
                    f"row {line_no}: invalid ISO date {raw_date!r}"
                ) from None
            stamp = np.datetime64(day.isoformat(), "D")
            if dates:
                gap = int((stamp - dates[-1]) / np.timedelta64(1, "D"))
                if gap != 1:
                    raise CsvFormatError(
                        f"row {line_no}: date {raw_date} does not follow "
                        f"{dates[-1]} by one day"
                    )
            dates.append(stamp)
            for name, cell in zip(CSV_HEADER[1:], row[1:]):
                cell = cell.strip()
                if not cell:
                    raise CsvFormatError(f"row {line_no}: missing value in column {name}")
                try:
                    value = float(cell)
                except ValueError:
                    raise CsvFormatError(
                        f"row {line_no}: invalid number {cell!r} in column {name}"
                    ) from None
                if not math.isfinite(value):
                    raise CsvFormatError(
                        f"row {line_no}: non-finite value in column {name}"
                    )
                if value < 0.0:
                    raise CsvFormatError(
                        f"row {line_no}: negative value {value} in column {name}"
                    )
                columns[name].append(value)
    if not dates:
        raise CsvFormatError("row 2: no data rows found")
    return HydroSeries(
        dates=np.array(dates, dtype="datetime64[D]"),
        precip=np.array(columns["precip_mm"]),
        pet=np.array(columns["pet_mm"]),
        flow=np.array(columns["flow_mm"]),
    )


def write_csv(series: HydroSeries, path) -> None:
    """Write a series in the :func:`load_csv` schema."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_HEADER)
        for i in range(series.n):
            writer.writerow(
                [
                    str(series.dates[i]),
                    repr(float(series.precip[i])),
                    repr(float(series.pet[i])),
                    repr(float(series.flow[i])),
                ]
            )
