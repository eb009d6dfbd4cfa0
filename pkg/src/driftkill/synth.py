"""Deterministic synthetic driving scenarios with sensor corruption.

Ground-truth trajectories come from closed forms (the slalom's position
integral is evaluated on a 100x-oversampled grid, so its truth error is
well under a millimeter); GPS fixes are synthesized by the local-tangent
inverse projection from the origin, accurate to millimeters over the
few-hundred-meter traces used here.  Corruption adds constant biases and
white Gaussian noise to the inertial channels only — GPS stays clean.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dataset import ImuRecord
from .geodesy import GeoPoint, WGS84

HARD_BRAKE_MPS2 = -0.45 * 9.81  # threshold: at or below counts as a hard brake

SCENARIO_KINDS = ("straight", "hard_brake", "roundabout", "jerk", "slalom")


class InvalidSpec(ValueError):
    """Scenario parameters violate the scenario's constraints."""


@dataclass(frozen=True)
class ScenarioSpec:
    """Parameters of one synthetic drive; unused fields are ignored per kind."""

    kind: str
    duration_s: float
    origin: GeoPoint = field(default_factory=lambda: GeoPoint(52.0, -1.5))
    heading_deg: float = 0.0
    v0_mps: float = 0.0  # straight / hard_brake / jerk / slalom
    accel_mps2: float = 0.0  # straight
    decel_mps2: float = -5.0  # hard_brake, must be <= -0.45 g
    brake_at_s: float = 2.0  # hard_brake onset
    radius_m: float = 50.0  # roundabout
    speed_mps: float = 10.0  # roundabout
    segments: tuple[tuple[float, float], ...] = ()  # jerk: (duration_s, accel_mps2)
    amplitude_rad_s: float = 0.3  # slalom yaw-rate amplitude
    period_s: float = 8.0  # slalom period


@dataclass(frozen=True)
class CorruptionParams:
    accel_bias: float = 0.0  # m/s^2
    gyro_bias: float = 0.0  # rad/s
    sigma_a: float = 0.0  # m/s^2
    sigma_w: float = 0.0  # rad/s


# Drift over 10 s is visible (meters) but learnable.
CONSUMER_IMU = CorruptionParams(accel_bias=0.05, gyro_bias=0.01,
                                sigma_a=0.03, sigma_w=0.005)

CORRUPTION_PRESETS: dict[str, CorruptionParams] = {
    "none": CorruptionParams(),
    "consumer-imu": CONSUMER_IMU,
}


@dataclass(frozen=True)
class SyntheticTrace:
    """True state sampled at the sensor rate, endpoint included.

    Arrays span t = 0 .. duration inclusive (n+1 samples); the emitted
    record stream covers the first n instants.
    """

    spec: ScenarioSpec
    dt: float
    t: np.ndarray
    north: np.ndarray
    east: np.ndarray
    v: np.ndarray
    yaw: np.ndarray  # rad, unwrapped
    yaw_rate: np.ndarray
    accel: np.ndarray
    corruption: CorruptionParams | None = None


def _validate(spec: ScenarioSpec) -> None:
    if spec.kind not in SCENARIO_KINDS:
        raise InvalidSpec(f"unknown scenario kind {spec.kind!r}")
    if spec.duration_s <= 0:
        raise InvalidSpec("duration must be positive")
    if spec.kind == "hard_brake":
        if spec.decel_mps2 > HARD_BRAKE_MPS2:
            raise InvalidSpec(
                f"hard-brake deceleration must be <= {HARD_BRAKE_MPS2:.4f} m/s^2, "
                f"got {spec.decel_mps2}"
            )
        if spec.v0_mps <= 0:
            raise InvalidSpec("hard brake needs a positive initial speed")
        if spec.brake_at_s < 0:
            raise InvalidSpec("brake onset cannot be negative")
    if spec.kind == "roundabout":
        if spec.radius_m <= 0:
            raise InvalidSpec("roundabout radius must be positive")
        if spec.speed_mps <= 0:
            raise InvalidSpec("roundabout speed must be positive")
    if spec.kind == "slalom" and spec.period_s <= 0:
        raise InvalidSpec("slalom period must be positive")


def _piecewise_motion(t: np.ndarray, v0: float,
                      phases: Sequence[tuple[float, float]]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Accel/velocity/path for piecewise-constant acceleration phases.

    ``phases`` are (start_time, accel); the final phase runs to the end.
    Accel at a phase boundary takes the incoming phase's value.
    """
    accel = np.zeros_like(t)
    v = np.full_like(t, v0)
    s = np.zeros_like(t)
    v_p, s_p = v0, 0.0
    starts = [p[0] for p in phases] + [math.inf]
    for i, (t0, a) in enumerate(phases):
        t1 = starts[i + 1]
        mask = (t >= t0) & (t < t1)
        tau = t[mask] - t0
        accel[mask] = a
        v[mask] = v_p + a * tau
        s[mask] = s_p + v_p * tau + 0.5 * a * tau * tau
        span = (t1 if math.isfinite(t1) else t[-1]) - t0
        s_p = s_p + v_p * span + 0.5 * a * span * span
        v_p = v_p + a * span
    # Endpoint sample when it coincides with the last phase boundary.
    if math.isfinite(starts[-1]):
        pass
    last_t0, last_a = phases[-1]
    mask = t >= last_t0
    tau = t[mask] - last_t0
    return accel, v, s


def gen_scenario(spec: ScenarioSpec, dt: float = 0.1) -> SyntheticTrace:
    """Generate the true 10 Hz state sequence for a scenario."""
    _validate(spec)
    n = round(spec.duration_s / dt)
    t = np.arange(n + 1) * dt
    yaw0 = math.radians(spec.heading_deg)

    if spec.kind == "straight":
        accel = np.full_like(t, spec.accel_mps2)
        v = spec.v0_mps + spec.accel_mps2 * t
        s = spec.v0_mps * t + 0.5 * spec.accel_mps2 * t * t
        yaw = np.full_like(t, yaw0)
        yaw_rate = np.zeros_like(t)
        north = s * math.cos(yaw0)
        east = s * math.sin(yaw0)
    elif spec.kind == "hard_brake":
        t_stop = spec.brake_at_s + spec.v0_mps / abs(spec.decel_mps2)
        phases = [(0.0, 0.0), (spec.brake_at_s, spec.decel_mps2), (t_stop, 0.0)]
        if spec.brake_at_s == 0.0:
            phases = phases[1:]
        accel, v, s = _piecewise_phases(t, spec.v0_mps, phases)
        yaw = np.full_like(t, yaw0)
        yaw_rate = np.zeros_like(t)
        north = s * math.cos(yaw0)
        east = s * math.sin(yaw0)
    elif spec.kind == "roundabout":
        omega = spec.speed_mps / spec.radius_m
        yaw = yaw0 + omega * t
        yaw_rate = np.full_like(t, omega)
        accel = np.zeros_like(t)
        v = np.full_like(t, spec.speed_mps)
        r = spec.radius_m
        north = r * (np.sin(yaw) - math.sin(yaw0))
        east = r * (math.cos(yaw0) - np.cos(yaw))
    elif spec.kind == "jerk":
        phases = []
        t0 = 0.0
        for dur, a in spec.segments:
            phases.append((t0, a))
            t0 += dur
        if t0 < spec.duration_s or not phases:
            phases.append((t0, 0.0))
        accel, v, s = _piecewise_phases(t, spec.v0_mps, phases)
        yaw = np.full_like(t, yaw0)
        yaw_rate = np.zeros_like(t)
        north = s * math.cos(yaw0)
        east = s * math.sin(yaw0)
    else:  # slalom
        w = 2.0 * math.pi / spec.period_s
        yaw_rate = spec.amplitude_rad_s * np.sin(w * t)
        yaw = yaw0 + spec.amplitude_rad_s / w * (1.0 - np.cos(w * t))
        accel = np.zeros_like(t)
        v = np.full_like(t, spec.v0_mps)
        north, east = _integrate_positions_fine(t, spec.v0_mps, yaw0,
                                                spec.amplitude_rad_s, w)

    return SyntheticTrace(spec=spec, dt=dt, t=t, north=north, east=east, v=v,
                          yaw=yaw, yaw_rate=yaw_rate, accel=accel)


def _piecewise_phases(t: np.ndarray, v0: float,
                      phases: Sequence[tuple[float, float]]):
    accel = np.zeros_like(t)
    v = np.zeros_like(t)
    s = np.zeros_like(t)
    v_p, s_p = v0, 0.0
    for i, (t0, a) in enumerate(phases):
        t1 = phases[i + 1][0] if i + 1 < len(phases) else math.inf
        mask = (t >= t0) & (t < t1) if math.isfinite(t1) else (t >= t0)
        tau = t[mask] - t0
        accel[mask] = a
        v[mask] = v_p + a * tau
        s[mask] = s_p + v_p * tau + 0.5 * a * tau * tau
        if math.isfinite(t1):
            span = t1 - t0
            s_p += v_p * span + 0.5 * a * span * span
            v_p += a * span
    return accel, v, s


def _integrate_positions_fine(t: np.ndarray, speed: float, yaw0: float,
                              amplitude: float, w: float, oversample: int = 100):
    """Cumulative-trapezoid position integral on an oversampled grid."""
    n = len(t) - 1
    h = (t[-1] - t[0]) / (n * oversample) if n else 0.0
    tf = np.arange(n * oversample + 1) * h
    yawf = yaw0 + amplitude / w * (1.0 - np.cos(w * tf))
    fn = speed * np.cos(yawf)
    fe = speed * np.sin(yawf)
    north_f = np.concatenate([[0.0], np.cumsum((fn[1:] + fn[:-1]) * 0.5 * h)])
    east_f = np.concatenate([[0.0], np.cumsum((fe[1:] + fe[:-1]) * 0.5 * h)])
    return north_f[::oversample].copy(), east_f[::oversample].copy()


def _tangent_radii(origin: GeoPoint) -> tuple[float, float]:
    a = WGS84.semi_major_a
    e2 = WGS84.flattening_f * (2.0 - WGS84.flattening_f)
    s = math.sin(math.radians(origin.lat))
    w = math.sqrt(1.0 - e2 * s * s)
    m = a * (1.0 - e2) / w**3  # meridian radius
    n = a / w  # prime-vertical radius
    return m, n


def to_records(trace: SyntheticTrace) -> list[ImuRecord]:
    """Emit the clean sensor stream: one record per sample instant."""
    m_rad, n_rad = _tangent_radii(trace.spec.origin)
    lat0 = trace.spec.origin.lat
    lon0 = trace.spec.origin.lon
    cos_lat0 = math.cos(math.radians(lat0))
    n = len(trace.t) - 1
    records = []
    for i in range(n):
        lat = lat0 + math.degrees(trace.north[i] / m_rad)
        lon = lon0 + math.degrees(trace.east[i] / (n_rad * cos_lat0))
        records.append(ImuRecord(
            t=float(trace.t[i]),
            accel_long=float(trace.accel[i]),
            yaw_rate=float(trace.yaw_rate[i]),
            heading=float(math.degrees(trace.yaw[i]) % 360.0),
            lat=lat,
            lon=lon,
        ))
    return records


def corrupt_imu(
    trace: SyntheticTrace,
    bias: float = 0.0,
    gyro_bias: float = 0.0,
    sigma_a: float = 0.0,
    sigma_w: float = 0.0,
    seed: int = 0,
) -> list[ImuRecord]:
    """Corrupt the inertial channels; GPS columns stay clean ground truth."""
    if sigma_a < 0 or sigma_w < 0:
        raise ValueError("noise sigmas must be non-negative")
    clean = to_records(trace)
    if bias == 0.0 and gyro_bias == 0.0 and sigma_a == 0.0 and sigma_w == 0.0:
        return clean
    rng = np.random.default_rng(seed)
    noise_a = rng.normal(0.0, sigma_a, len(clean)) if sigma_a > 0 else np.zeros(len(clean))
    noise_w = rng.normal(0.0, sigma_w, len(clean)) if sigma_w > 0 else np.zeros(len(clean))
    return [
        replace(r, accel_long=r.accel_long + bias + float(noise_a[i]),
                yaw_rate=r.yaw_rate + gyro_bias + float(noise_w[i]))
        for i, r in enumerate(clean)
    ]


def corrupt_with(trace: SyntheticTrace, params: CorruptionParams, seed: int = 0) -> list[ImuRecord]:
    """corrupt_imu with a named parameter bundle."""
    return corrupt_imu(trace, bias=params.accel_bias, gyro_bias=params.gyro_bias,
                       sigma_a=params.sigma_a, sigma_w=params.sigma_w, seed=seed)
