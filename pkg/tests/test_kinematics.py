import math

import numpy as np
import pytest

from driftkill.kinematics import (
    Attitude,
    DeadReckonStep,
    EmptyWindow,
    body_to_nav,
    correct_accel,
    dead_reckon,
    integrate_window,
    integrate_yaw,
    rotation_body_to_nav,
)


def test_rotation_yaw_zero_is_identity():
    r = rotation_body_to_nav(Attitude.yaw_only(0.0))
    np.testing.assert_allclose(r, np.eye(3), atol=1e-15)


def test_rotation_quarter_turn():
    r = rotation_body_to_nav(Attitude.yaw_only(math.pi / 2))
    expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(r, expected, atol=1e-15)


def test_rotation_general_angles_element_by_element():
    phi, th, psi = 0.1, 0.2, 0.3
    sphi, cphi = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(th), math.cos(th)
    spsi, cpsi = math.sin(psi), math.cos(psi)
    expected = np.array(
        [
            [cth * cpsi, -cphi * spsi + sphi * sth * cpsi, sphi * spsi + cphi * sth * cpsi],
            [cth * spsi, cphi * cpsi + sphi * sth * spsi, -sphi * cpsi + cphi * sth * spsi],
            [-sth, sphi * cth, cphi * cth],
        ]
    )
    r = rotation_body_to_nav(Attitude(phi, th, psi))
    np.testing.assert_allclose(r, expected, atol=1e-12)


def test_rotation_orthonormal_random_attitudes():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        att = Attitude(*rng.uniform(-math.pi, math.pi, 3))
        r = rotation_body_to_nav(att)
        np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
        assert abs(np.linalg.det(r) - 1.0) < 1e-12


def test_integrate_yaw_constant_rate():
    assert integrate_yaw(0.0, [0.1] * 10, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_integrate_yaw_empty_sequence():
    assert integrate_yaw(0.5, [], 0.1) == 0.5


def test_integrate_yaw_linear_ramp():
    rates = np.arange(0.1, 1.05, 0.1)  # omega(t) = t sampled at 0.1..1.0
    assert integrate_yaw(0.0, rates, 0.1) == pytest.approx(0.55, abs=1e-12)


@pytest.mark.parametrize(
    "f,bias,expected",
    [(1.0, 0.0, 1.0), (0.05, 0.05, 0.0), (-4.4145, 0.02, -4.4345)],
)
def test_correct_accel(f, bias, expected):
    assert correct_accel(f, bias) == pytest.approx(expected, abs=1e-12)


def test_integrate_window_constant_accel():
    wk = integrate_window([1.0] * 10, v0=0.0, dt=0.1)
    assert wk.v_end == pytest.approx(1.0, abs=1e-12)
    assert wk.displacement_x == pytest.approx(0.45, abs=1e-12)


def test_integrate_window_constant_velocity():
    # v * t over the 1 s window (10 samples at 0.1 s).
    wk = integrate_window([0.0] * 10, v0=20.0, dt=0.1)
    assert wk.v_end == 20.0
    assert wk.displacement_x == pytest.approx(20.0, abs=1e-12)


def test_integrate_window_at_rest():
    wk = integrate_window([0.0] * 10, v0=0.0, dt=0.1)
    assert wk.displacement_x == 0.0


def test_integrate_window_empty():
    with pytest.raises(EmptyWindow):
        integrate_window([], v0=0.0, dt=0.1)


def test_integrate_window_linearity():
    # Linear in the acceleration sequence, affine in v0.
    rng = np.random.default_rng(5)
    a1 = rng.normal(size=10)
    a2 = rng.normal(size=10)
    d_a1 = integrate_window(a1, 0.0, 0.1).displacement_x
    d_a2 = integrate_window(a2, 0.0, 0.1).displacement_x
    d_sum = integrate_window(a1 + a2, 0.0, 0.1).displacement_x
    assert d_sum == pytest.approx(d_a1 + d_a2, abs=1e-12)
    for v0 in (0.0, 3.0, -7.5):
        d = integrate_window(a1, v0, 0.1).displacement_x
        assert d == pytest.approx(d_a1 + v0 * 1.0, abs=1e-12)


@pytest.mark.parametrize(
    "x,psi,north,east,tol",
    [
        (10.0, 0.0, 10.0, 0.0, 1e-12),
        (10.0, math.pi / 2, 0.0, 10.0, 1e-9),
        (5.0, math.pi / 4, 3.5355, 3.5355, 1e-4),
    ],
)
def test_body_to_nav_cases(x, psi, north, east, tol):
    nd = body_to_nav(x, psi)
    assert nd.north == pytest.approx(north, abs=tol)
    assert nd.east == pytest.approx(east, abs=tol)


def test_body_to_nav_preserves_length():
    rng = np.random.default_rng(9)
    for _ in range(200):
        x = rng.uniform(-50.0, 50.0)
        psi = rng.uniform(-10.0, 10.0)
        nd = body_to_nav(x, psi)
        assert math.hypot(nd.north, nd.east) == pytest.approx(abs(x), abs=1e-9)


def _constant_windows(n_windows, samples, accel, rate):
    return [(np.full(samples, accel), np.full(samples, rate))] * n_windows


def test_dead_reckon_straight_line():
    steps = dead_reckon(0.0, 20.0, 0.0, _constant_windows(10, 10, 0.0, 0.0))
    assert steps[-1].north == pytest.approx(200.0, abs=1e-9)
    assert steps[-1].east == pytest.approx(0.0, abs=1e-9)


def test_dead_reckon_circular_arc():
    steps = dead_reckon(0.0, 10.0, 0.0, _constant_windows(10, 10, 0.0, 0.2))
    r = 50.0
    theta = 2.0
    err = math.hypot(steps[-1].north - r * math.sin(theta),
                     steps[-1].east - r * (1.0 - math.cos(theta)))
    assert err < 1.5


def test_dead_reckon_bias_drift_matches_replay():
    # Uncorrected +0.1 bias, no true motion: drift equals a brute-force
    # replay of the same discrete rule.
    bias = 0.1
    windows = _constant_windows(10, 10, bias, 0.0)
    steps = dead_reckon(0.0, 0.0, 0.0, windows)
    v = 0.0
    north = 0.0
    for _ in range(10):
        for _ in range(10):
            north += v * 0.1
            v += bias * 0.1
    assert steps[-1].north == pytest.approx(north, abs=1e-12)
    assert steps[-1].east == 0.0


def test_dead_reckon_bias_error_growth_superlinear():
    steps = dead_reckon(0.0, 0.0, 0.0, _constant_windows(12, 10, 0.05, 0.0))
    cumulative = np.array([s.north for s in steps])
    assert np.all(np.diff(cumulative, 2) > 0.0)


def test_dead_reckon_halving_dt_first_order():
    # Accelerating straight line: closed form 0.5*a*t^2 = 50 m over 10 s.
    def run(dt):
        n = round(1.0 / dt)
        steps = dead_reckon(0.0, 0.0, 0.0, _constant_windows(10, n, 1.0, 0.0), dt=dt)
        return abs(steps[-1].north - 50.0)

    assert run(0.05) * 1.8 <= run(0.1)


def test_dead_reckon_trapezoid_rule_closer_on_smooth_input():
    windows = _constant_windows(10, 10, 1.0, 0.0)
    left = dead_reckon(0.0, 0.0, 0.0, windows, rule="left")
    trap = dead_reckon(0.0, 0.0, 0.0, windows, rule="trapezoid")
    assert abs(trap[-1].north - 50.0) < abs(left[-1].north - 50.0)


def test_dead_reckon_propagates_empty_window():
    with pytest.raises(EmptyWindow):
        dead_reckon(0.0, 0.0, 0.0, [(np.array([]), np.array([]))])


def test_dead_reckon_step_shape():
    steps = dead_reckon(0.5, 1.0, 0.0, _constant_windows(3, 10, 0.0, 0.0))
    assert all(isinstance(s, DeadReckonStep) for s in steps)
    assert steps[0].psi == pytest.approx(0.5)
    # Cumulative position is the running sum of the per-window steps.
    assert steps[2].north == pytest.approx(
        sum(s.displacement.north for s in steps), abs=1e-12
    )
