import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gauge_lab.analytic import (GaugeChi, SolenoidSpec, finite_solenoid, kernel_silence_time,
                                polar_chi_line_integral, retarded_point_kernel, smoothed_delta,
                                thin_solenoid_A)
from gauge_lab.interferometry import LoopPath, OpenPath


def test_thin_solenoid_examples():
    s = SolenoidSpec(flux=2 * np.pi)
    np.testing.assert_allclose(thin_solenoid_A(1.0, 0.0, s), (0.0, 1.0), atol=1e-15)
    np.testing.assert_allclose(thin_solenoid_A(0.0, 2.0, SolenoidSpec(flux=4 * np.pi)),
                               (-1.0, 0.0), atol=1e-15)
    np.testing.assert_allclose(thin_solenoid_A(0.3, -0.2, SolenoidSpec(flux=0.0)), (0, 0))


def test_thin_solenoid_singular_at_center():
    with pytest.raises(ValueError):
        thin_solenoid_A(0.0, 0.0, SolenoidSpec(flux=1.0))


def test_finite_solenoid_examples():
    s = SolenoidSpec(radius=1.0, flux=2 * np.pi)
    ax, ay, bz = finite_solenoid(2.0, 0.0, s)
    assert math.hypot(ax, ay) == pytest.approx(0.5)
    assert bz == 0
    ax, ay, bz = finite_solenoid(0.0, 0.0, s)
    assert (ax, ay) == (0, 0)
    assert bz == pytest.approx(2 * np.pi / np.pi)
    inner = math.hypot(*finite_solenoid(1 - 1e-12, 0.0, s)[:2])
    outer = math.hypot(*finite_solenoid(1 + 1e-12, 0.0, s)[:2])
    assert inner == pytest.approx(1.0, rel=1e-10)
    assert outer == pytest.approx(1.0, rel=1e-10)


def test_polar_chi_line_integral_examples():
    chi = GaugeChi.polar(2 * np.pi)
    assert polar_chi_line_integral(chi, LoopPath.circle((0, 0), 1.0).vertices) == \
        pytest.approx(-2 * np.pi)
    arc = OpenPath.arc((0, 0), 1.0, 0.0, np.pi / 2)
    assert polar_chi_line_integral(chi, arc.vertices) == pytest.approx(-np.pi / 2)
    away = LoopPath.circle((5, 5), 1.0)
    assert polar_chi_line_integral(chi, away.vertices) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(ValueError):
        polar_chi_line_integral(chi, [(-1, 0), (1, 0)])


def test_polar_gradient_cancels_thin_solenoid():
    flux = 1.7
    s = SolenoidSpec(flux=flux)
    chi = GaugeChi.polar(flux)
    rng = np.random.default_rng(1)
    r = rng.uniform(0.1, 5, 500)
    th = rng.uniform(-np.pi, np.pi, 500)
    x, y = r * np.cos(th), r * np.sin(th)
    gx, gy = chi.grad(x, y)
    ax, ay = thin_solenoid_A(x, y, s)
    assert max(np.max(np.abs(gx + ax)), np.max(np.abs(gy + ay))) < 1e-10


def test_polar_value_jumps_across_cut():
    chi = GaugeChi.polar(3.0)
    above = chi.value(-1.0, 1e-9)
    below = chi.value(-1.0, -1e-9)
    assert above - below == pytest.approx(-3.0, rel=1e-6)


CHIS = [
    GaugeChi.polynomial({(2, 1, 0): 0.3, (0, 1, 2): -1.0, (1, 0, 1): 2.0}),
    GaugeChi.plane_wave((0.7, -0.4), amplitude=1.3, phase=0.2),
    GaugeChi.polynomial({(1, 1, 0): 1.0}) + GaugeChi.plane_wave((0.0, 1.2), c=2.0),
]


@pytest.mark.parametrize("chi", CHIS)
def test_gauge_chi_derivatives_match_finite_differences(chi):
    x, y, t = 0.4, -0.9, 1.1
    h = 1e-5
    gx, gy = chi.grad(x, y, t)
    assert gx == pytest.approx((chi.value(x + h, y, t) - chi.value(x - h, y, t)) / (2 * h),
                               rel=1e-7, abs=1e-8)
    assert gy == pytest.approx((chi.value(x, y + h, t) - chi.value(x, y - h, t)) / (2 * h),
                               rel=1e-7, abs=1e-8)
    assert chi.time_derivative(x, y, t) == pytest.approx(
        (chi.value(x, y, t + h) - chi.value(x, y, t - h)) / (2 * h), rel=1e-7, abs=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 3), st.floats(-3, 3), st.floats(0, 4))
def test_plane_wave_solves_wave_equation(kx, ky, c, x, t):
    if math.hypot(kx, ky) < 0.05:
        return
    chi = GaugeChi.plane_wave((kx, ky), c=c)
    h = 1e-3
    y = 0.5
    f = chi.value
    lap = (f(x + h, y, t) + f(x - h, y, t) + f(x, y + h, t) + f(x, y - h, t) - 4 * f(x, y, t)) / h**2
    ftt = (f(x, y, t + h) - 2 * f(x, y, t) + f(x, y, t - h)) / h**2
    k2 = kx * kx + ky * ky
    assert abs(lap - ftt / c**2) < 1e-4 * (1 + k2) ** 2 + 1e-5


def test_plane_wave_rejects_zero_k():
    with pytest.raises(ValueError):
        GaugeChi.plane_wave((0.0, 0.0))


def test_smoothed_delta_normalised_with_given_fwhm():
    w = 0.3
    s = np.linspace(-3, 3, 60001)
    g = smoothed_delta(s, w)
    assert np.sum(g) * (s[1] - s[0]) == pytest.approx(1.0, rel=1e-10)
    half = s[g >= g.max() / 2]
    assert half[-1] - half[0] == pytest.approx(w, abs=2e-4)


def test_retarded_kernel_examples():
    w = 0.05
    assert abs(retarded_point_kernel(1.0, 0.0, w)) < 1e-12 * abs(retarded_point_kernel(1.0, 1.0, w))
    p1 = abs(retarded_point_kernel(1.0, 1.0, w))
    p2 = abs(retarded_point_kernel(2.0, 2.0, w))
    assert p2 == pytest.approx(p1 / 2, rel=1e-12)
    assert retarded_point_kernel(1.0, 1.0, w) < 0
    with pytest.raises(ValueError):
        retarded_point_kernel(0.0, 1.0, w)
    with pytest.raises(ValueError):
        retarded_point_kernel(1.0, 1.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 50), st.floats(0.01, 1), st.floats(0.2, 3))
def test_kernel_silent_before_arrival(r, w, c):
    quiet = kernel_silence_time(r, w, c)
    t = np.linspace(min(0.0, quiet), quiet, 200)
    peak = abs(retarded_point_kernel(r, r / c, w, c))
    assert np.all(np.abs(retarded_point_kernel(r, t, w, c)) < 1e-12 * peak)
