import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SQRT2, eq11_potential, eq14_potential, sech_potential
from pendulum_eigen.errors import GridTooCoarseError, ParameterError, UnknownForceError
from pendulum_eigen.forcefields import (BoundaryClass, Kind, Partner, catalog, check_well_shaped,
                                        eq10_example, eq14_generated, linear_harmonic, load_csv,
                                        riccati_potential, sampled, sech_well)

CLOSED = [("constant", {}), ("sech_well", {"lam": 0.3}), ("sech_well", {"lam": 0.8}),
          ("eq10_example", {}), ("eq14_generated", {}), ("linear_harmonic", {})]
X = np.linspace(-6, 6, 241)


def test_constant_potential_is_one():
    f = catalog("constant")
    assert f.boundary_class is BoundaryClass.WELL_SHAPED
    assert np.all(f.potential()(X) == 1.0)


def test_linear_harmonic_potential():
    f = catalog("linear_harmonic")
    assert f.boundary_class is BoundaryClass.DIVERGENT
    assert np.allclose(f.potential()(X), X ** 2 - 1, atol=1e-14)


def test_eq10_value_at_origin():
    f = eq10_example()
    assert abs(f(0.0) - (SQRT2 - 1) / 2) < 1e-15
    assert abs(f.potential()(0.0) - eq11_potential(0.0)) < 1e-14


def test_eq10_closed_form_and_potential():
    f = eq10_example()
    a_ref = (SQRT2 * np.cosh(2 * X) - 1) / (2 * np.cosh(X) * np.sqrt(np.cosh(2 * X)))
    assert np.max(np.abs(f(X) - a_ref)) < 1e-14
    assert np.max(np.abs(f.potential()(X) - eq11_potential(X))) < 1e-13


@pytest.mark.parametrize("lam", [0.3, 0.5, 0.8, 1 / SQRT2])
def test_sech_well_potential(lam):
    f = sech_well(lam)
    assert np.max(np.abs(f.potential()(X) - sech_potential(X, lam))) < 1e-14


def test_sech_well_at_08_matches_stated_form():
    V = catalog("sech_well", lam=0.8).potential()
    assert np.max(np.abs(V(X) - (1 - 2 * 0.36 / np.cosh(0.6 * X) ** 2))) < 1e-14


def test_eq14_potential():
    f = eq14_generated()
    assert np.max(np.abs(f.potential()(X) - eq14_potential(X))) < 1e-14
    assert abs(eq14_potential(0.0) - 2 / (6 + 4 * SQRT2)) < 1e-15


@pytest.mark.parametrize("name,params", CLOSED)
def test_partner_sum_identity(name, params):
    f = catalog(name, **params)
    pair = f.potentials()
    assert np.max(np.abs(pair.V(X) + pair.V_tilde(X) - 2 * f(X) ** 2)) < 1e-12


@pytest.mark.parametrize("name,params", [c for c in CLOSED
                                         if c[0] not in ("constant", "linear_harmonic")])
def test_riccati_finite_difference_convergence(name, params):
    """Centered-difference A' converges at second order: halving h quarters the error."""
    f = catalog(name, **params)
    x = np.linspace(-3, 3, 61)
    V = f.potential()(x)

    def err(h):
        dA = (f(x + h) - f(x - h)) / (2 * h)
        return np.max(np.abs(f(x) ** 2 - dA - V))

    ratio = err(2e-2) / err(1e-2)
    assert 3.5 <= ratio <= 4.5


@pytest.mark.parametrize("name,params", [c for c in CLOSED if c[0] != "linear_harmonic"])
def test_catalog_entries_are_well_shaped(name, params):
    f = catalog(name, **params)
    assert f.boundary_class is BoundaryClass.WELL_SHAPED
    assert check_well_shaped(f, 20.0)
    assert abs(f(20.0) - 1) < 1e-9 and abs(f(-20.0) - 1) < 1e-9


@given(st.floats(-40, 40))
def test_analytic_derivatives(x):
    for name, params in CLOSED:
        f = catalog(name, **params)
        h = 1e-5
        fd = (f(x + h) - f(x - h)) / (2 * h)
        assert abs(f.derivative(x) - fd) < 1e-8


def test_partner_potential_sign():
    f = eq14_generated()
    assert np.allclose(riccati_potential(f, Partner.PLUS)(X), f(X) ** 2 + f.derivative(X))


def test_bad_parameters():
    with pytest.raises(ParameterError):
        sech_well(1.0)
    with pytest.raises(ParameterError):
        catalog("sech_well")
    with pytest.raises(UnknownForceError):
        catalog("nonexistent")


def test_sampled_matches_closed_form():
    f = eq14_generated()
    x = np.linspace(-20, 20, 4001)
    s = sampled(x, f(x))
    assert s.kind is Kind.SAMPLED
    assert s.boundary_class is BoundaryClass.WELL_SHAPED
    xm = np.linspace(-5, 5, 333)
    assert np.max(np.abs(s(xm) - f(xm))) < 1e-7
    assert np.max(np.abs(s.derivative(xm) - f.derivative(xm))) < 1e-4


def test_sampled_grid_checks():
    with pytest.raises(GridTooCoarseError):
        sampled([0, 1], [1, 1])
    with pytest.raises(ParameterError):
        sampled([0, 2, 1], [1, 1, 1])


@pytest.mark.parametrize("header", [True, False])
def test_load_csv(tmp_path, header):
    x = np.linspace(-10, 10, 401)
    a = eq10_example()(x)
    p = tmp_path / "a.csv"
    with open(p, "w") as fh:
        if header:
            fh.write("x,A\n")
        for xi, ai in zip(x, a):
            fh.write(f"{float(xi)!r},{float(ai)!r}\n")
    f = load_csv(p)
    assert len(x) == f.params["n"]
    assert np.max(np.abs(f(x) - a)) < 1e-15
    g = catalog("custom_sampled", path=str(p))
    assert g(1.234) == f(1.234)


def test_harmonic_is_not_well_shaped():
    assert not check_well_shaped(linear_harmonic(), 8.0)
    assert not math.isnan(linear_harmonic().potential()(3.0))
