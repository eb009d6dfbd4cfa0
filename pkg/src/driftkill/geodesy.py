"""Geodesic ground truth on the WGS-84 ellipsoid.

Distance between GPS fixes comes from the Vincenty inverse solution;
yaw-rate ground truth comes from differencing compass headings with
wraparound handled on the shortest arc.  Headings are clockwise-from-north
compass degrees, matching the NED yaw sign used by the kinematics module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


class NonConvergence(ArithmeticError):
    """Vincenty iteration failed to converge (nearly antipodal points)."""


class ZeroDt(ValueError):
    """Time step must be strictly positive."""


def _normalize_lon(lon: float) -> float:
    # Maps any value into (-180, 180]; -180 normalizes to +180.
    return 180.0 - ((180.0 - lon) % 360.0)


@dataclass(frozen=True)
class GeoPoint:
    """Latitude/longitude in degrees; lon normalized into (-180, 180]."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"latitude {self.lat} outside [-90, 90]")
        object.__setattr__(self, "lon", _normalize_lon(self.lon))


@dataclass(frozen=True)
class Ellipsoid:
    """Reference ellipsoid: semi-major axis (m) and flattening."""

    semi_major_a: float = 6378137.0
    flattening_f: float = 1.0 / 298.257223563

    def __post_init__(self) -> None:
        if self.semi_major_a <= 0:
            raise ValueError("semi-major axis must be positive")
        if not 0.0 < self.flattening_f < 1.0:
            raise ValueError("flattening must be in (0, 1)")

    @property
    def semi_minor_b(self) -> float:
        return self.semi_major_a * (1.0 - self.flattening_f)


WGS84 = Ellipsoid()

_VINCENTY_TOL = 1e-12
_VINCENTY_MAX_ITER = 200


def vincenty_inverse(p1: GeoPoint, p2: GeoPoint, e: Ellipsoid = WGS84) -> float:
    """Geodesic distance in meters between two points on the ellipsoid.

    Iterates on the longitude difference of the auxiliary sphere to
    tolerance 1e-12 (max 200 iterations); raises NonConvergence for the
    nearly antipodal pairs the classic iteration cannot handle.
    """
    # Canonical argument order makes the result exactly symmetric: both
    # call orders execute the same float operations.
    if (p2.lat, p2.lon) < (p1.lat, p1.lon):
        p1, p2 = p2, p1
    a = e.semi_major_a
    b = e.semi_minor_b
    f = e.flattening_f

    L = math.radians(p2.lon - p1.lon)
    u1 = math.atan((1.0 - f) * math.tan(math.radians(p1.lat)))
    u2 = math.atan((1.0 - f) * math.tan(math.radians(p2.lat)))
    sin_u1, cos_u1 = math.sin(u1), math.cos(u1)
    sin_u2, cos_u2 = math.sin(u2), math.cos(u2)

    lam = L
    for _ in range(_VINCENTY_MAX_ITER):
        sin_lam, cos_lam = math.sin(lam), math.cos(lam)
        sin_sigma = math.sqrt(
            (cos_u2 * sin_lam) ** 2
            + (cos_u1 * sin_u2 - sin_u1 * cos_u2 * cos_lam) ** 2
        )
        if sin_sigma == 0.0:
            return 0.0  # coincident points
        cos_sigma = sin_u1 * sin_u2 + cos_u1 * cos_u2 * cos_lam
        sigma = math.atan2(sin_sigma, cos_sigma)
        sin_alpha = cos_u1 * cos_u2 * sin_lam / sin_sigma
        cos_sq_alpha = 1.0 - sin_alpha * sin_alpha
        if cos_sq_alpha == 0.0:
            cos_2sigma_m = 0.0  # both points on the equator
        else:
            cos_2sigma_m = cos_sigma - 2.0 * sin_u1 * sin_u2 / cos_sq_alpha
        c = f / 16.0 * cos_sq_alpha * (4.0 + f * (4.0 - 3.0 * cos_sq_alpha))
        lam_prev = lam
        lam = L + (1.0 - c) * f * sin_alpha * (
            sigma
            + c * sin_sigma * (
                cos_2sigma_m
                + c * cos_sigma * (-1.0 + 2.0 * cos_2sigma_m * cos_2sigma_m)
            )
        )
        if abs(lam - lam_prev) < _VINCENTY_TOL:
            break
    else:
        raise NonConvergence(
            f"Vincenty failed to converge after {_VINCENTY_MAX_ITER} iterations "
            f"for ({p1.lat}, {p1.lon}) -> ({p2.lat}, {p2.lon})"
        )

    u_sq = cos_sq_alpha * (a * a - b * b) / (b * b)
    big_a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)))
    big_b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)))
    delta_sigma = big_b * sin_sigma * (
        cos_2sigma_m
        + big_b / 4.0 * (
            cos_sigma * (-1.0 + 2.0 * cos_2sigma_m * cos_2sigma_m)
            - big_b / 6.0 * cos_2sigma_m
            * (-3.0 + 4.0 * sin_sigma * sin_sigma)
            * (-3.0 + 4.0 * cos_2sigma_m * cos_2sigma_m)
        )
    )
    return b * big_a * (sigma - delta_sigma)


def heading_delta(h_prev: float, h_curr: float) -> float:
    """Signed shortest angular difference between compass headings, in (-180, 180]."""
    d = (h_curr - h_prev) % 360.0
    return d if d <= 180.0 else d - 360.0


def gps_yaw_rate(h_prev: float, h_curr: float, dt: float) -> float:
    """Yaw rate in rad/s from two compass headings dt seconds apart."""
    if dt <= 0.0:
        raise ZeroDt(f"dt must be positive, got {dt}")
    return math.radians(heading_delta(h_prev, h_curr)) / dt
