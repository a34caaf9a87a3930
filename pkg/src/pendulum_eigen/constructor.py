"""Exactly solvable force functions from critical curves d(alpha)/dx = f(alpha).

A curve joining two boundary fixed points at a chosen lambda is a critical
solution of the pendulum equation for the force function

    A = (2 lam - f(alpha)) / (2 sin alpha),

so that lambda^2 is an eigenvalue of A^2 - A' by construction.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Chebyshev
from scipy.interpolate import CubicHermiteSpline

from ._rk import dopri54
from .errors import ParameterError, SingularConstructionError
from .forcefields import (BoundaryClass, ForceFunction, Kind, check_well_shaped,
                          constant)

SQRT2 = math.sqrt(2.0)
ENDPOINT_TOL = 1e-12
REMOVABLE_TOL = 1e-9
PATCH_HALF_WIDTH = 0.05
FIT_HALF_WIDTH = 0.2


@dataclass
class CriticalCurve:
    f: Callable
    lam: float
    start: float
    end: float
    df: Callable | None = None
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def slope(self, alpha):
        if self.df is not None:
            return self.df(alpha)
        d = 1e-6 * np.maximum(1.0, np.abs(alpha))
        return (self.f(alpha + d) - self.f(alpha - d)) / (2 * d)

    @property
    def degenerate(self):
        return self.start == self.end

    @property
    def double_zero(self):
        """Endpoints where f vanishes to second order (algebraic approach)."""
        if self.degenerate:
            return (False, False)
        return (abs(float(self.slope(self.start))) < 1e-8,
                abs(float(self.slope(self.end))) < 1e-8)

    def validate(self):
        if not self.lam > 0:
            raise ParameterError("critical curves need lambda > 0")
        if self.degenerate:
            return self
        if self.end < self.start:
            raise ParameterError("curves are parametrized with start < end")
        for a in (self.start, self.end):
            if abs(float(self.f(a))) > ENDPOINT_TOL:
                raise ParameterError(f"f({a!r}) = {float(self.f(a))!r} is not zero")
        inner = np.linspace(self.start, self.end, 4003)[1:-1]
        vals = self.f(inner)
        if np.any(vals <= 0):
            bad = inner[np.argmax(vals <= 0)]
            raise ParameterError(
                f"f has an interior zero or points backwards near alpha = {bad!r}")
        return self


def solve_curve(curve, x0_anchor=0.0, step=0.01, decay=40.0):
    """alpha(x) for d(alpha)/dx = f(alpha) with alpha(x0_anchor) = midpoint.

    The separable equation is integrated outward from the anchor and stored
    as a Hermite spline using the exact slopes f(alpha); outside the table
    alpha is clamped to the endpoints, which it reaches to within
    exp(-decay).
    """
    curve.validate()
    if curve.degenerate:
        a = float(curve.start)
        return AlphaProfile(None, a, a, x0_anchor, x0_anchor)
    mid = 0.5 * (curve.start + curve.end)
    rates = [float(curve.slope(curve.start)), -float(curve.slope(curve.end))]
    rate = min(r for r in rates) if min(rates) > 1e-8 else 0.0
    X = 200.0 if rate == 0.0 else min(200.0, decay / rate)
    n = int(math.ceil(X / step))
    right = x0_anchor + step * np.arange(n + 1)
    left = x0_anchor - step * np.arange(n + 1)

    def rhs(x, y):
        return np.array([curve.f(y[0])])

    kw = dict(rtol=1e-13, atol=1e-14, h_max=0.1)
    up = dopri54(rhs, x0_anchor, right[-1], [mid], dense_x=right, **kw).dense[:, 0]
    dn = dopri54(rhs, x0_anchor, left[-1], [mid], dense_x=left, **kw).dense[:, 0]
    xs = np.concatenate([left[::-1], right[1:]])
    al = np.concatenate([dn[::-1], up[1:]])
    spline = CubicHermiteSpline(xs, al, curve.f(al))
    return AlphaProfile(spline, float(al[0]), float(al[-1]), float(xs[0]), float(xs[-1]))


@dataclass
class AlphaProfile:
    spline: object
    alpha_lo: float
    alpha_hi: float
    x_lo: float
    x_hi: float

    def __call__(self, x):
        if self.spline is None:
            return np.full_like(np.asarray(x, dtype=float), self.alpha_lo)[()]
        x = np.asarray(x, dtype=float)
        out = self.spline(np.clip(x, self.x_lo, self.x_hi))
        out = np.where(x < self.x_lo, self.alpha_lo, out)
        out = np.where(x > self.x_hi, self.alpha_hi, out)
        return out[()]


def _singular_angles(curve):
    k0 = math.floor(curve.start / math.pi) + 1
    k1 = math.ceil(curve.end / math.pi) - 1
    return [k * math.pi for k in range(k0, k1 + 1)]


def _force_in_alpha(curve):
    """g(alpha) = (2 lam - f) / (2 sin alpha) and g'(alpha), with removable
    zeros of sin alpha bridged by local Chebyshev interpolants."""
    lam = curve.lam

    def g_raw(a):
        return (2 * lam - curve.f(a)) / (2 * np.sin(a))

    def dg_raw(a):
        s, c = np.sin(a), np.cos(a)
        return (-curve.slope(a) * s - (2 * lam - curve.f(a)) * c) / (2 * s * s)

    patches = []
    for a in _singular_angles(curve):
        num = 2 * lam - float(curve.f(a))
        if abs(num) > REMOVABLE_TOL:
            raise SingularConstructionError(
                f"force function has a pole at alpha = {a!r} "
                f"(2 lam - f = {num!r})", alpha=a)
        dom = [a - FIT_HALF_WIDTH, a + FIT_HALF_WIDTH]
        nodes = a + FIT_HALF_WIDTH * np.cos(np.pi * (np.arange(8) + 0.5) / 8)
        patches.append((a, Chebyshev.fit(nodes, g_raw(nodes), 7, domain=dom),
                        Chebyshev.fit(nodes, dg_raw(nodes), 7, domain=dom)))

    def _eval(a, raw, which):
        a = np.asarray(a, dtype=float)
        out = np.empty_like(a)
        mask = np.zeros(a.shape, dtype=bool)
        for centre, pg, pdg in patches:
            m = np.abs(a - centre) < PATCH_HALF_WIDTH
            if np.any(m):
                out[m] = (pg if which == 0 else pdg)(a[m])
                mask |= m
        rest = ~mask
        if np.any(rest):
            with np.errstate(divide="ignore", invalid="ignore"):
                out[rest] = raw(a[rest])
        return out[()]

    return (lambda a: _eval(a, g_raw, 0)), (lambda a: _eval(a, dg_raw, 1))


def force_from_curve(curve, profile=None, name=None):
    """Force function whose pendulum equation has ``curve`` as a critical solution."""
    curve.validate()
    if curve.degenerate:
        if abs(float(curve.f(curve.start))) > ENDPOINT_TOL:
            raise ParameterError("degenerate curve needs f = 0")
        g = curve.lam / math.sin(curve.start)
        if abs(g - 1.0) < 1e-12:
            base = constant()
            return ForceFunction(name or f"curve:{curve.name}", Kind.CONSTRUCTED,
                                 base.boundary_class, base.value, base.deriv,
                                 dict(curve.params))
        raise SingularConstructionError("degenerate curve off the boundary fixed point")
    profile = profile or solve_curve(curve)
    g, dg = _force_in_alpha(curve)

    def value(x):
        return g(profile(x))

    def deriv(x):
        a = profile(x)
        return dg(a) * curve.f(a)

    provisional = ForceFunction(name or f"curve:{curve.name}", Kind.CONSTRUCTED,
                                None, value, deriv, dict(curve.params))
    bc = (BoundaryClass.WELL_SHAPED if check_well_shaped(provisional, 20.0, tol=1e-9)
          else BoundaryClass.OTHER)
    return ForceFunction(provisional.name, Kind.CONSTRUCTED, bc, value, deriv,
                         dict(curve.params))


# -- curve catalog -----------------------------------------------------------

def eq10_curve():
    """d(alpha)/dx = sin(2 alpha - pi/2) at lam = 1/sqrt2, pi/4 -> 3 pi/4."""
    return CriticalCurve(lambda a: np.sin(2 * a - math.pi / 2), 1 / SQRT2,
                         math.pi / 4, 3 * math.pi / 4,
                         df=lambda a: 2 * np.cos(2 * a - math.pi / 2), name="eq10")


def sech_curve(lam):
    """d(alpha)/dx = -2 lam + 2 sin(alpha) between f_s(lam) and f_u(lam)."""
    lam = float(lam)
    if not 0 < lam < 1:
        raise ParameterError(f"sech curve needs 0 < lam < 1, got {lam}")
    a = math.asin(lam)
    return CriticalCurve(lambda x: -2 * lam + 2 * np.sin(x), lam, a, math.pi - a,
                         df=lambda x: 2 * np.cos(x), name="sech", params={"lam": lam})


def eq14_curve():
    """lam = 1 curve 2 sqrt2 sin(alpha/2 - pi/4) from pi/2 to 5 pi/2."""
    return CriticalCurve(lambda a: 2 * SQRT2 * np.sin(a / 2 - math.pi / 4), 1.0,
                         math.pi / 2, 5 * math.pi / 2,
                         df=lambda a: SQRT2 * np.cos(a / 2 - math.pi / 4), name="eq14")


def staircase_curve(n1, n2, eps=1.0, sharpness=2.0):
    """lam = 1 curve from 2 n1 pi + pi/2 to 2 n2 pi + pi/2.

    f = 2 - (2 - eps q(alpha)) sin(alpha) with the bump
    q = tanh(k (alpha - start)) tanh(k (end - alpha)), so that
    A = 1 - (eps/2) q <= 1 and f has simple zeros with slope ~eps k at both
    ends.  Any 0 < eps < 2 keeps f > 0 inside.
    """
    n1, n2 = int(n1), int(n2)
    if n2 < n1:
        raise ParameterError("need n2 >= n1")
    if not 0 < eps < 2 or sharpness <= 0:
        raise ParameterError("need 0 < eps < 2 and sharpness > 0")
    start = 2 * n1 * math.pi + math.pi / 2
    end = 2 * n2 * math.pi + math.pi / 2
    params = {"n1": n1, "n2": n2, "eps": eps, "sharpness": sharpness}
    if n1 == n2:
        return CriticalCurve(lambda a: np.zeros_like(np.asarray(a, dtype=float))[()],
                             1.0, start, end, df=lambda a: 0.0 * np.asarray(a),
                             name="staircase", params=params)
    k = float(sharpness)

    def bump(a):
        return np.tanh(k * (a - start)) * np.tanh(k * (end - a))

    def dbump(a):
        t1, t2 = np.tanh(k * (a - start)), np.tanh(k * (end - a))
        return k * ((1 - t1 * t1) * t2 - t1 * (1 - t2 * t2))

    def f(a):
        return 2.0 - (2.0 - eps * bump(a)) * np.sin(a)

    def df(a):
        return eps * dbump(a) * np.sin(a) - (2.0 - eps * bump(a)) * np.cos(a)

    return CriticalCurve(f, 1.0, start, end, df=df, name="staircase", params=params)


def cos_squared_curve(lam=1.0, c=1.0):
    """f = c cos^2(alpha) on (pi/2, 3 pi/2); sin(alpha) vanishes at pi, where
    2 lam - f = 2 lam - c, so the construction is singular unless c = 2 lam."""
    lam, c = float(lam), float(c)
    if c <= 0:
        raise ParameterError("need c > 0")
    return CriticalCurve(lambda a: c * np.cos(a) ** 2, lam, math.pi / 2, 3 * math.pi / 2,
                         df=lambda a: -2 * c * np.cos(a) * np.sin(a), name="cos_squared",
                         params={"lam": lam, "c": c})


CURVES = {
    "eq10": eq10_curve,
    "sech": sech_curve,
    "eq14": eq14_curve,
    "staircase": staircase_curve,
    "cos_squared": cos_squared_curve,
}


def curve(name, **params):
    try:
        factory = CURVES[name]
    except KeyError:
        raise ParameterError(f"unknown curve {name!r}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for curve {name}: {exc}") from None


def predetermined_spectrum(n1, n2, eps=1.0, sharpness=2.0):
    """Force function with exactly n2 - n1 bound states (lam = 1 construction)."""
    c = staircase_curve(n1, n2, eps, sharpness)
    ff = force_from_curve(c, name=f"staircase:{n2 - n1}")
    return ForceFunction(ff.name, ff.kind, ff.boundary_class, ff.value, ff.deriv,
                         {**ff.params, "bound_states": n2 - n1}, ff.default_L)
