import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pendulum_eigen.errors import NoFixedPointsError, ParameterError
from pendulum_eigen.forcefields import BoundaryClass, catalog, constant, linear_harmonic, sech_well
from pendulum_eigen.pendulum import (Terminal, classify_terminal, fixed_points, integrate,
                                     shoot, sincos, symmetry_reduce)

SQRT2 = math.sqrt(2.0)


def test_fixed_point_examples():
    fp = fixed_points(0.0)
    assert (fp.f_s, fp.f_u) == (0.0, math.pi)
    fp = fixed_points(1 / SQRT2)
    assert abs(fp.f_s - math.pi / 4) < 1e-15 and abs(fp.f_u - 3 * math.pi / 4) < 1e-15
    fp = fixed_points(1.0)
    assert fp.f_s == fp.f_u == math.pi / 2


def test_fixed_point_errors():
    with pytest.raises(NoFixedPointsError):
        fixed_points(1.0001)
    with pytest.raises(ParameterError):
        fixed_points(-0.1)


@given(st.floats(0, 1), st.integers(-5, 5))
def test_fixed_point_residual(lam, N):
    fp = fixed_points(lam, N)
    assert abs(lam - math.sin(fp.f_s)) < 1e-14
    assert abs(lam - math.sin(fp.f_u)) < 1e-14 * max(1, abs(N))


def test_symmetry_reduce():
    assert symmetry_reduce(0.5) == (0.5, False)
    assert symmetry_reduce(-0.5) == (0.5, True)
    assert symmetry_reduce(0.0) == (0.0, False)


def test_sincos_exact_at_multiples_of_pi():
    for k in range(-6, 7):
        s, c = sincos(k * math.pi)
        assert s == 0.0 and c == (-1.0) ** k


def test_constant_force_pinned_at_stable_point():
    L = 10.0
    xs = np.linspace(-L, L, 201)
    tr = integrate(constant(), 1 / SQRT2, math.pi / 4, L=L, grid=xs)
    assert np.max(np.abs(tr.alpha - math.pi / 4)) < 1e-14
    assert np.max(np.abs(tr.log_rho - SQRT2 * (xs + L))) < 1e-9
    assert tr.terminal.kind is Terminal.AT_STABLE and tr.terminal.index == 0


def test_harmonic_zero_energy_critical_solution():
    xs = np.linspace(-8, 8, 161)
    tr = integrate(linear_harmonic(), 0.0, math.pi, grid=xs)
    assert np.all(tr.alpha == math.pi)
    # rho ~ exp(-x^2) once anchored at x = 0
    assert np.max(np.abs(tr.log_rho - tr.log_rho[80] + xs ** 2)) < 1e-8
    assert tr.terminal.kind is Terminal.AT_ODD_PI and tr.terminal.index == 0


def test_sech_well_critical_trajectory_ends_on_unstable_point():
    lam = 1 / SQRT2
    tr = integrate(sech_well(lam), lam, math.pi / 4, L=10.0)
    assert tr.terminal.kind is Terminal.AT_UNSTABLE and tr.terminal.index == 0
    assert abs(tr.alpha[-1] - 3 * math.pi / 4) < 1e-3


@given(st.floats(0.01, 0.99), st.floats(-1.0, 1.0))
def test_symmetry_property(lam, a0):
    f = catalog("eq10_example")
    xs = np.linspace(-10, 10, 101)
    t1 = integrate(f, lam, a0, L=10, grid=xs)
    t2 = integrate(f, -lam, -a0, L=10, grid=xs)
    raw = shoot(f, -lam, -a0, (-10, 10), grid=xs).dense[:, 0]
    assert np.max(np.abs(t1.alpha + t2.alpha)) < 1e-8
    assert np.max(np.abs(t1.alpha + raw)) < 1e-8


@pytest.mark.parametrize("lam", [0.37, 0.62, 0.9])
@pytest.mark.parametrize("eps", [1e-6, -1e-6])
def test_stable_point_attracts(lam, eps):
    f = sech_well(0.8)
    fs = fixed_points(lam).f_s
    ref = integrate(f, lam, fs)
    tr = integrate(f, lam, fs + eps)
    assert tr.terminal.kind is Terminal.AT_STABLE
    assert tr.terminal.index == ref.terminal.index


@pytest.mark.parametrize("eps", [1e-6, -1e-6])
def test_unstable_point_repels(eps):
    lam = 0.4
    fu = fixed_points(lam).f_u
    xs = np.linspace(-20, -14, 61)
    tr = integrate(constant(), lam, fu + eps, x_span=(-20, -14), grid=xs)
    dev = np.abs(tr.alpha - fu)
    assert np.all(np.diff(dev) > 0)
    assert dev[-1] > 100 * abs(eps)


@pytest.mark.parametrize("name,params,lam", [("sech_well", {"lam": 0.8}, 0.55),
                                             ("eq14_generated", {}, 0.3),
                                             ("linear_harmonic", {}, 1.7)])
def test_trajectory_finite_difference_residual(name, params, lam):
    f = catalog(name, **params)
    L = f.default_L
    xs = np.linspace(-L, L, 8001)
    tr = integrate(f, lam, 0.5, grid=xs, tol=1e-11)
    h = xs[1] - xs[0]
    xm = xs[1:-1]
    am = tr.alpha[1:-1]
    d_alpha = (tr.alpha[2:] - tr.alpha[:-2]) / (2 * h)
    d_rho = (tr.log_rho[2:] - tr.log_rho[:-2]) / (2 * h)
    scale = 1 + np.max(np.abs(f(xm)))
    assert np.max(np.abs(d_alpha - (2 * lam - 2 * f(xm) * np.sin(am)))) < 1e-3 * scale
    assert np.max(np.abs(d_rho - 2 * f(xm) * np.cos(am))) < 1e-3 * scale


def test_recorded_steps_are_continuous_and_finite():
    tr = integrate(linear_harmonic(), 2.3, math.pi)
    assert np.all(np.abs(np.diff(tr.alpha)) < math.pi)
    assert np.all(np.isfinite(tr.log_rho))


def test_classifier_labels():
    lam = 0.5
    fp = fixed_points(lam, 2)
    t = classify_terminal(fp.f_s + 1e-5, lam, BoundaryClass.WELL_SHAPED)
    assert (t.kind, t.index) == (Terminal.AT_STABLE, 2)
    t = classify_terminal(fp.f_u - 1e-5, lam, BoundaryClass.WELL_SHAPED)
    assert (t.kind, t.index) == (Terminal.AT_UNSTABLE, 2)
    t = classify_terminal(fp.f_s + 0.3, lam, BoundaryClass.WELL_SHAPED)
    assert t.kind is Terminal.UNRESOLVED
    t = classify_terminal(4 * math.pi, 0.0, BoundaryClass.DIVERGENT, a_end=8.0, da_end=1.0)
    assert (t.kind, t.index) == (Terminal.AT_EVEN_PI, 1)


def test_csv_export(tmp_path):
    tr = integrate(constant(), 0.5, math.pi / 6, L=2)
    p = tmp_path / "t.csv"
    tr.to_csv(p)
    lines = open(p).read().splitlines()
    assert lines[0] == "x,alpha,log_rho"
    assert len(lines) == len(tr.xs) + 1


def test_bad_tolerance():
    with pytest.raises(ParameterError):
        integrate(constant(), 0.5, 0.0, tol=0)


@pytest.mark.parametrize("lam", [0.3, 1.2, 2.5])
def test_slow_manifold_first_order_matches_adiabatic_targets(lam):
    from pendulum_eigen.pendulum import _branch_targets, slow_manifold_offset
    f = linear_harmonic()
    s, u = _branch_targets(lam, 8.0, 1.0)
    assert abs(slow_manifold_offset(f, lam, 8.0, True, order=1) - s) < 1e-6
    assert abs(slow_manifold_offset(f, lam, 8.0, False, order=1) - u) < 1e-6
    assert slow_manifold_offset(f, lam, -8.0) is None
