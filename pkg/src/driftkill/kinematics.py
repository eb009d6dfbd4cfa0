"""Body-frame motion model and NED dead reckoning.

The vehicle is tracked along its longitudinal axis only (roll and pitch
fixed at zero), which is two-dimensional tracking in the navigation frame.
Discrete integration is left-endpoint rectangular at the sensor rate by
default; a trapezoidal variant sits behind the ``rule`` switch.

A window's body displacement is a path length, so the yaw used to project
it north/east matters on curved paths.  The default is the mean of the
window's start and end yaw: projecting with the end yaw alone overshoots
the turn by circa v*omega*T^2/2 per window, which on a 50 m radius
roundabout at 10 m/s accumulates to meters over ten seconds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class EmptyWindow(ValueError):
    """A window must contain at least one sample."""


@dataclass(frozen=True)
class Attitude:
    """Roll, pitch, yaw in radians."""

    roll_phi: float
    pitch_theta: float
    yaw_psi: float

    @classmethod
    def yaw_only(cls, yaw_psi: float) -> "Attitude":
        """Attitude used by the 1-D tracking pipeline: roll = pitch = 0."""
        return cls(0.0, 0.0, yaw_psi)


@dataclass(frozen=True)
class WindowKinematics:
    """Velocity endpoints and body displacement over one integration window."""

    v_start: float
    v_end: float
    displacement_x: float


@dataclass(frozen=True)
class NavDisplacement:
    """North/east displacement in meters (down axis not tracked)."""

    north: float
    east: float


@dataclass(frozen=True)
class DeadReckonStep:
    """One window of dead reckoning: end yaw, window step, running position."""

    psi: float
    displacement: NavDisplacement
    north: float
    east: float


def rotation_body_to_nav(att: Attitude) -> np.ndarray:
    """3x3 body-to-NED rotation matrix for the given attitude.

    Rows are North, East, Down.  Orthonormal with determinant +1.
    """
    sphi, cphi = math.sin(att.roll_phi), math.cos(att.roll_phi)
    sth, cth = math.sin(att.pitch_theta), math.cos(att.pitch_theta)
    spsi, cpsi = math.sin(att.yaw_psi), math.cos(att.yaw_psi)
    return np.array(
        [
            [cth * cpsi, -cphi * spsi + sphi * sth * cpsi, sphi * spsi + cphi * sth * cpsi],
            [cth * spsi, cphi * cpsi + sphi * sth * spsi, -sphi * cpsi + cphi * sth * spsi],
            [-sth, sphi * cth, cphi * cth],
        ]
    )


def integrate_yaw(
    psi0: float, yaw_rates: Iterable[float], dt: float, rule: str = "left"
) -> float:
    """Integrate yaw rate samples onto an initial yaw.  Output is not wrapped."""
    rates = np.asarray(list(yaw_rates), dtype=float)
    if rates.size == 0:
        return psi0
    if rule == "left":
        return psi0 + dt * float(rates.sum())
    if rule == "trapezoid":
        # Piecewise linear between samples; the final interval holds the
        # last sample (no sample beyond the window is available).
        return psi0 + dt * float(rates.sum() - rates[0] / 2.0 + rates[-1] / 2.0)
    raise ValueError(f"unknown integration rule {rule!r}")


def correct_accel(f_measured: float, bias: float) -> float:
    """Remove the constant accelerometer bias from a specific-force reading."""
    return f_measured - bias


def integrate_window(
    accels: Sequence[float], v0: float, dt: float, rule: str = "left"
) -> WindowKinematics:
    """Single- and double-integrate accelerations over one window.

    Velocity is propagated sample by sample; displacement accumulates the
    velocity at the start of each sub-step (left rule) or the sub-step mean
    (trapezoid).  Displacement may be negative when reversing.
    """
    a = np.asarray(accels, dtype=float)
    if a.size == 0:
        raise EmptyWindow("integrate_window needs at least one sample")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if rule not in ("left", "trapezoid"):
        raise ValueError(f"unknown integration rule {rule!r}")
    v = v0
    disp = 0.0
    for ai in a:
        v_next = v + ai * dt
        disp += (v if rule == "left" else 0.5 * (v + v_next)) * dt
        v = v_next
    return WindowKinematics(v_start=v0, v_end=v, displacement_x=disp)


def body_to_nav(x_body: float, psi: float) -> NavDisplacement:
    """Project a body-frame displacement onto north/east using the yaw."""
    return NavDisplacement(north=x_body * math.cos(psi), east=x_body * math.sin(psi))


def dead_reckon(
    psi0: float,
    v0: float,
    bias: float,
    windows: Sequence[tuple[Sequence[float], Sequence[float]]],
    dt: float = 0.1,
    rule: str = "left",
    yaw_ref: str = "mid",
) -> list[DeadReckonStep]:
    """Dead-reckon through windows of (accel, yaw-rate) sample arrays.

    Yaw and velocity chain across windows; each window's body displacement
    is projected with the window's mean yaw (``yaw_ref`` also accepts
    "end" and "start") and summed into the running north/east position.
    """
    if yaw_ref not in ("mid", "end", "start"):
        raise ValueError(f"unknown yaw_ref {yaw_ref!r}")
    psi = psi0
    v = v0
    north = 0.0
    east = 0.0
    steps: list[DeadReckonStep] = []
    for accels, yaw_rates in windows:
        a = np.asarray(accels, dtype=float)
        w = np.asarray(yaw_rates, dtype=float)
        if a.shape != w.shape:
            raise ValueError("accel and yaw-rate arrays differ in length")
        corrected = a - bias
        psi_start = psi
        psi_end = integrate_yaw(psi_start, w, dt, rule)
        wk = integrate_window(corrected, v, dt, rule)
        if yaw_ref == "mid":
            psi_proj = 0.5 * (psi_start + psi_end)
        elif yaw_ref == "end":
            psi_proj = psi_end
        else:
            psi_proj = psi_start
        nd = body_to_nav(wk.displacement_x, psi_proj)
        north += nd.north
        east += nd.east
        steps.append(DeadReckonStep(psi=psi_end, displacement=nd, north=north, east=east))
        psi = psi_end
        v = wk.v_end
    return steps
