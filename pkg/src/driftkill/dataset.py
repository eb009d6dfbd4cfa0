"""10 Hz drive-log ingestion and 1 s window aggregation.

CSV columns are resolved through a configurable ``ColumnMap`` (presets:
``synth`` for files this package writes, ``io-vnbd`` for the public vehicle
benchmark layout); units are converted to SI at ingest.  Windows pair the
inertial features with GPS-derived ground truth; ten consecutive windows
plus a seed window form one simulated outage sequence.
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence, TextIO, Union

import numpy as np

from . import geodesy, kinematics

G_MPS2 = 9.81
SEGMENT_GAP_S = 0.15  # 1.5x the nominal 0.1 s spacing


class SchemaMismatch(ValueError):
    """A required column is missing from the CSV header."""


class ParseError(ValueError):
    """A CSV cell failed to parse; message carries the line number."""


class NonMonotonicTime(ValueError):
    """Timestamps must be strictly increasing."""


class EmptyInput(ValueError):
    """Operation needs a non-empty input."""


class DegenerateFeature(UserWarning):
    """A feature was constant in the training split; it scales to 0."""


@dataclass(frozen=True)
class ImuRecord:
    """One 10 Hz sample in SI units (heading and GPS fix in degrees)."""

    t: float
    accel_long: float
    yaw_rate: float
    heading: float
    lat: float
    lon: float


@dataclass(frozen=True)
class ColumnMap:
    """Maps semantic fields to CSV column names, with source units."""

    time: str
    accel: str
    yaw_rate: str
    heading: str
    lat: str
    lon: str
    accel_unit: str = "mps2"  # "mps2" | "g"
    yaw_rate_unit: str = "rad_s"  # "rad_s" | "deg_s"


COLUMN_PRESETS: dict[str, ColumnMap] = {
    "synth": ColumnMap(
        time="t",
        accel="accel_mps2",
        yaw_rate="yaw_rate_rad_s",
        heading="heading_deg",
        lat="lat_deg",
        lon="lon_deg",
    ),
    # Best-effort names for the public IO-VNBD benchmark CSVs; remap via a
    # custom ColumnMap if a file disagrees.  Accelerations there are in g
    # and yaw rates in deg/s.
    "io-vnbd": ColumnMap(
        time="Time",
        accel="Ax",
        yaw_rate="Yaw_Rate",
        heading="Heading",
        lat="Latitude",
        lon="Longitude",
        accel_unit="g",
        yaw_rate_unit="deg_s",
    ),
}


def _resolve_schema(schema: Union[str, ColumnMap]) -> ColumnMap:
    if isinstance(schema, ColumnMap):
        return schema
    try:
        return COLUMN_PRESETS[schema]
    except KeyError:
        raise SchemaMismatch(f"unknown column-map preset {schema!r}") from None


@dataclass(frozen=True)
class LoadResult:
    records: tuple[ImuRecord, ...]
    segment_breaks: tuple[int, ...]  # indices of records that open a new segment

    def segments(self) -> list[tuple[ImuRecord, ...]]:
        bounds = [0, *self.segment_breaks, len(self.records)]
        return [self.records[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def load_records(
    source: Union[str, Path, TextIO, io.IOBase],
    schema: Union[str, ColumnMap] = "synth",
) -> LoadResult:
    """Parse a headered CSV stream into ImuRecords, converting units to SI.

    Timestamps are validated strictly increasing; gaps above 0.15 s are
    recorded as segment breaks rather than errors.
    """
    cmap = _resolve_schema(schema)
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return load_records(fh, cmap)
    if isinstance(source, io.IOBase) and not isinstance(source, io.TextIOBase):
        source = io.TextIOWrapper(source, encoding="utf-8")

    reader = csv.DictReader(source)
    header = reader.fieldnames or []
    needed = {
        "time": cmap.time, "accel": cmap.accel, "yaw_rate": cmap.yaw_rate,
        "heading": cmap.heading, "lat": cmap.lat, "lon": cmap.lon,
    }
    missing = [col for col in needed.values() if col not in header]
    if missing:
        raise SchemaMismatch(f"missing column(s): {', '.join(missing)}")

    accel_scale = G_MPS2 if cmap.accel_unit == "g" else 1.0
    yaw_scale = math.pi / 180.0 if cmap.yaw_rate_unit == "deg_s" else 1.0

    records: list[ImuRecord] = []
    breaks: list[int] = []
    for i, row in enumerate(reader):
        line_no = i + 2  # header is line 1
        try:
            rec = ImuRecord(
                t=float(row[cmap.time]),
                accel_long=float(row[cmap.accel]) * accel_scale,
                yaw_rate=float(row[cmap.yaw_rate]) * yaw_scale,
                heading=float(row[cmap.heading]),
                lat=float(row[cmap.lat]),
                lon=float(row[cmap.lon]),
            )
        except (TypeError, ValueError) as exc:
            raise ParseError(f"line {line_no}: {exc}") from None
        if records:
            gap = rec.t - records[-1].t
            if gap <= 0.0:
                raise NonMonotonicTime(
                    f"line {line_no}: t={rec.t} does not increase past {records[-1].t}"
                )
            if gap > SEGMENT_GAP_S:
                breaks.append(len(records))
        records.append(rec)
    return LoadResult(records=tuple(records), segment_breaks=tuple(breaks))


def write_records(
    records: Iterable[ImuRecord],
    dest: Union[str, Path, TextIO],
    schema: Union[str, ColumnMap] = "synth",
) -> None:
    """Write records as CSV in the given schema, full decimal precision."""
    cmap = _resolve_schema(schema)
    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            write_records(records, fh, cmap)
        return
    accel_scale = G_MPS2 if cmap.accel_unit == "g" else 1.0
    yaw_scale = math.pi / 180.0 if cmap.yaw_rate_unit == "deg_s" else 1.0
    writer = csv.writer(dest)
    writer.writerow([cmap.time, cmap.accel, cmap.yaw_rate, cmap.heading, cmap.lat, cmap.lon])
    for r in records:
        writer.writerow([
            repr(r.t),
            repr(r.accel_long / accel_scale),
            repr(r.yaw_rate / yaw_scale),
            repr(r.heading),
            repr(r.lat),
            repr(r.lon),
        ])


def estimate_accel_bias(stationary: Sequence[ImuRecord]) -> float:
    """Mean longitudinal acceleration of a stationary log."""
    if not stationary:
        raise EmptyInput("no stationary records")
    return float(np.mean([r.accel_long for r in stationary]))


@dataclass(frozen=True)
class SecondWindow:
    """One 1 s aggregation: inertial features plus GPS ground truth.

    ``ins_displacement_from_rest`` is the window's double-integrated
    displacement with zero start velocity; with the affine identity
    x(v0) = v0 * span + x(0) it lets an outage baseline re-seed the
    velocity chain at the outage start.
    """

    t_start: float
    span_s: float
    ins_displacement: float
    ins_accel_feature: float
    ins_yaw_rate: float
    gt_displacement: float
    gt_yaw_rate: float
    v_start: float
    heading_start: float
    heading_end: float
    ins_displacement_from_rest: float
    segment: int


@dataclass(frozen=True)
class BuildResult:
    windows: tuple[SecondWindow, ...]
    dropped_windows: int  # geodesic non-convergence
    discarded_records: int


WINDOW_LEN = 10  # records per 1 s window at 10 Hz


def build_windows(
    records_or_result: Union[LoadResult, Sequence[ImuRecord]],
    bias: float,
    segment_breaks: Sequence[int] = (),
    segment_offset: int = 0,
) -> BuildResult:
    """Aggregate non-overlapping 10-record windows with GPS ground truth.

    The velocity chain seeds from GPS (the first window's own per-second
    displacement; only 1 Hz fixes are assumed available) and continues on
    the INS end velocity thereafter.  Windows whose geodesic distance does
    not converge are dropped and counted, not fatal.
    """
    if isinstance(records_or_result, LoadResult):
        segments = records_or_result.segments()
    else:
        records = tuple(records_or_result)
        bounds = [0, *segment_breaks, len(records)]
        segments = [records[a:b] for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    windows: list[SecondWindow] = []
    dropped = 0
    discarded = 0
    for seg_idx, seg in enumerate(segments):
        n_windows = max((len(seg) - 1) // WINDOW_LEN, 0)
        discarded += len(seg) - WINDOW_LEN * n_windows
        v_chain: float | None = None
        for k in range(n_windows):
            rows = seg[k * WINDOW_LEN:(k + 1) * WINDOW_LEN]
            boundary = seg[(k + 1) * WINDOW_LEN]
            span = boundary.t - rows[0].t
            dt = span / WINDOW_LEN
            try:
                gt_disp = geodesy.vincenty_inverse(
                    geodesy.GeoPoint(rows[0].lat, rows[0].lon),
                    geodesy.GeoPoint(boundary.lat, boundary.lon),
                )
            except geodesy.NonConvergence:
                dropped += 1
                discarded += WINDOW_LEN
                continue
            if v_chain is None:
                v_chain = gt_disp / span
            corrected = [r.accel_long - bias for r in rows]
            wk = kinematics.integrate_window(corrected, v_chain, dt)
            rest = kinematics.integrate_window(corrected, 0.0, dt)
            windows.append(SecondWindow(
                t_start=rows[0].t,
                span_s=span,
                ins_displacement=wk.displacement_x,
                ins_accel_feature=float(np.mean(corrected)),
                ins_yaw_rate=float(np.mean([r.yaw_rate for r in rows])),
                gt_displacement=gt_disp,
                gt_yaw_rate=geodesy.gps_yaw_rate(rows[0].heading, boundary.heading, span),
                v_start=wk.v_start,
                heading_start=rows[0].heading,
                heading_end=boundary.heading,
                ins_displacement_from_rest=rest.displacement_x,
                segment=segment_offset + seg_idx,
            ))
            v_chain = wk.v_end
    return BuildResult(windows=tuple(windows), dropped_windows=dropped,
                       discarded_records=discarded)


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature min/max captured from the training split only."""

    features: tuple[str, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    degenerate: tuple[bool, ...]

    def _idx(self, feature: str) -> int:
        try:
            return self.features.index(feature)
        except ValueError:
            raise KeyError(f"scaler has no feature {feature!r}") from None

    def transform(self, feature: str, values):
        i = self._idx(feature)
        if self.degenerate[i]:
            return np.zeros_like(np.asarray(values, dtype=float)) + 0.0
        return (np.asarray(values, dtype=float) - self.mins[i]) / (self.maxs[i] - self.mins[i])

    def inverse(self, feature: str, values):
        i = self._idx(feature)
        if self.degenerate[i]:
            return np.zeros_like(np.asarray(values, dtype=float)) + self.mins[i]
        return np.asarray(values, dtype=float) * (self.maxs[i] - self.mins[i]) + self.mins[i]


def fit_scaler(train_windows: Sequence[SecondWindow], features: Sequence[str]) -> ScalerParams:
    """Capture per-feature min/max over the training windows."""
    if len(train_windows) < 2:
        raise EmptyInput("need at least 2 windows to fit a scaler")
    mins, maxs, degen = [], [], []
    for f in features:
        vals = np.array([getattr(w, f) for w in train_windows], dtype=float)
        lo, hi = float(vals.min()), float(vals.max())
        mins.append(lo)
        maxs.append(hi)
        is_degen = hi == lo
        degen.append(is_degen)
        if is_degen:
            warnings.warn(f"feature {f!r} is constant ({lo}); it will scale to 0",
                          DegenerateFeature, stacklevel=2)
    return ScalerParams(tuple(features), tuple(mins), tuple(maxs), tuple(degen))


def apply_scaler(params: ScalerParams, value, feature: str | None = None):
    """Scale a value to the unit interval of its training range (no clamping)."""
    f = feature if feature is not None else params.features[0]
    out = params.transform(f, value)
    return float(out) if np.ndim(value) == 0 else out


def invert_scaler(params: ScalerParams, value, feature: str | None = None):
    """Read a scaled value back into physical units."""
    f = feature if feature is not None else params.features[0]
    out = params.inverse(f, value)
    return float(out) if np.ndim(value) == 0 else out


OUTAGE_LEN = 10  # windows per simulated outage


@dataclass(frozen=True)
class OutageSequence:
    """Ten contiguous windows of GNSS loss plus the pre-outage history."""

    windows: tuple[SecondWindow, ...]
    scenario_tag: str
    initial_psi: float  # rad, from GPS heading at the outage start
    initial_v: float  # m/s, GPS per-second displacement of the seed window
    seed_displacement: float  # m, GPS displacement of the window before the outage
    history: tuple[SecondWindow, ...]  # pre-outage windows, seed last


def _contiguous(prev: SecondWindow, nxt: SecondWindow) -> bool:
    return prev.segment == nxt.segment and abs(
        nxt.t_start - (prev.t_start + prev.span_s)
    ) < 1e-6


def extract_outage_sequences(
    windows: Sequence[SecondWindow],
    stride: int = OUTAGE_LEN,
    history: int = 1,
    scenario_tag: str = "",
) -> list[OutageSequence]:
    """Cut seed+outage sequences out of contiguous window runs.

    ``history`` pre-outage windows are attached (the last one is the seed);
    outage starts step by ``stride`` windows.  Runs shorter than
    history + 10 yield nothing.
    """
    if stride < 1 or history < 1:
        raise ValueError("stride and history must be >= 1")
    runs: list[list[SecondWindow]] = []
    for w in windows:
        if runs and _contiguous(runs[-1][-1], w):
            runs[-1].append(w)
        else:
            runs.append([w])

    sequences: list[OutageSequence] = []
    for run in runs:
        start = history
        while start + OUTAGE_LEN <= len(run):
            hist = tuple(run[start - history:start])
            outage = tuple(run[start:start + OUTAGE_LEN])
            seed = hist[-1]
            sequences.append(OutageSequence(
                windows=outage,
                scenario_tag=scenario_tag,
                initial_psi=math.radians(outage[0].heading_start),
                initial_v=seed.gt_displacement / seed.span_s,
                seed_displacement=seed.gt_displacement,
                history=hist,
            ))
            start += stride
    return sequences


# Line-delimited caching: one JSON object per line, fixed field order.
# Python's float repr round-trips bit-exactly.

_WINDOW_FIELDS = [f.name for f in fields(SecondWindow)]


def _window_to_dict(w: SecondWindow) -> dict:
    return {name: getattr(w, name) for name in _WINDOW_FIELDS}


def _window_from_dict(d: dict) -> SecondWindow:
    return SecondWindow(**{name: d[name] for name in _WINDOW_FIELDS})


def save_windows(windows: Iterable[SecondWindow], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for w in windows:
            fh.write(json.dumps(_window_to_dict(w)) + "\n")


def load_windows(path: Union[str, Path]) -> tuple[SecondWindow, ...]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(_window_from_dict(json.loads(line)))
    return tuple(out)


def save_sequences(sequences: Iterable[OutageSequence], path: Union[str, Path]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in sequences:
            fh.write(json.dumps({
                "scenario_tag": s.scenario_tag,
                "initial_psi": s.initial_psi,
                "initial_v": s.initial_v,
                "seed_displacement": s.seed_displacement,
                "windows": [_window_to_dict(w) for w in s.windows],
                "history": [_window_to_dict(w) for w in s.history],
            }) + "\n")


def load_sequences(path: Union[str, Path]) -> list[OutageSequence]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            out.append(OutageSequence(
                windows=tuple(_window_from_dict(w) for w in d["windows"]),
                scenario_tag=d["scenario_tag"],
                initial_psi=d["initial_psi"],
                initial_v=d["initial_v"],
                seed_displacement=d["seed_displacement"],
                history=tuple(_window_from_dict(w) for w in d["history"]),
            ))
    return out
