"""Force functions A(x) and the partner potentials A^2 -/+ A'.

All closed forms are written in terms of bounded hyperbolic quantities
(sech, tanh) so they can be evaluated far outside the default domain
without overflow.
"""

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import GridTooCoarseError, ParameterError, UnknownForceError

SQRT2 = math.sqrt(2.0)
BOUNDARY_TOL = 1e-6
WELL_L = 20.0
HARMONIC_L = 8.0


class Kind(enum.Enum):
    CLOSED_FORM = "closed_form"
    SAMPLED = "sampled"
    CONSTRUCTED = "constructed"


class BoundaryClass(enum.Enum):
    WELL_SHAPED = "well_shaped"
    DIVERGENT = "divergent"
    OTHER = "other"


class Partner(enum.Enum):
    MINUS = "minus"     # V  = A^2 - A'
    PLUS = "plus"       # V~ = A^2 + A'


@dataclass(frozen=True)
class ForceFunction:
    """A force function together with its derivative.

    ``value`` and ``deriv`` accept scalars or arrays.  Instances are
    immutable and may be shared between threads.
    """

    name: str
    kind: Kind
    boundary_class: BoundaryClass
    value: Callable
    deriv: Callable
    params: dict = field(default_factory=dict)
    default_L: float = WELL_L

    def __call__(self, x):
        return self.value(x)

    def derivative(self, x):
        return self.deriv(x)

    def potential(self, partner=Partner.MINUS):
        return riccati_potential(self, partner)

    def potentials(self):
        return PotentialPair(self.potential(Partner.MINUS),
                             self.potential(Partner.PLUS), self)

    def is_well_shaped(self, L=None, tol=1e-12, boundary_tol=BOUNDARY_TOL):
        return check_well_shaped(self, L or self.default_L, tol, boundary_tol)


@dataclass(frozen=True)
class PotentialPair:
    V: Callable
    V_tilde: Callable
    source: ForceFunction


def riccati_potential(force, partner=Partner.MINUS):
    """Return ``x -> A(x)^2 - A'(x)`` (MINUS) or ``A^2 + A'`` (PLUS)."""
    partner = Partner(partner)
    sign = -1.0 if partner is Partner.MINUS else 1.0

    def V(x):
        a = force.value(x)
        return a * a + sign * force.deriv(x)

    return V


def check_well_shaped(force, L, tol=1e-12, boundary_tol=BOUNDARY_TOL, n=4001):
    """A <= 1 + tol on a grid over [-L, L] and A(+-L) within boundary_tol of 1."""
    xs = np.linspace(-L, L, n)
    a = np.asarray(force.value(xs), dtype=float)
    if not np.all(np.isfinite(a)) or np.max(a) > 1.0 + tol:
        return False
    return abs(a[0] - 1.0) < boundary_tol and abs(a[-1] - 1.0) < boundary_tol


def _sech(x):
    ax = np.abs(x)
    e = np.exp(-ax)
    return 2.0 * e / (1.0 + e * e)


# -- catalog ---------------------------------------------------------------

def constant():
    return ForceFunction(
        "constant", Kind.CLOSED_FORM, BoundaryClass.WELL_SHAPED,
        lambda x: np.ones_like(x, dtype=float) if np.ndim(x) else 1.0,
        lambda x: np.zeros_like(x, dtype=float) if np.ndim(x) else 0.0,
    )


def sech_well(lam):
    """Force function whose potential is 1 - 2 k^2 sech^2(k x), k^2 = 1 - lam^2.

    It is -phi'/phi for the zero-energy solution
    phi = exp(-x) (1 + k tanh(k x)), which is the solution decaying at +inf.
    The only bound state sits at E = lam^2.
    """
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise ParameterError(f"sech_well needs 0 < lam < 1, got {lam}")
    k = math.sqrt(1.0 - lam * lam)

    def value(x):
        t = np.tanh(k * x)
        s2 = _sech(k * x) ** 2
        return 1.0 - k * k * s2 / (1.0 + k * t)

    def deriv(x):
        t = np.tanh(k * x)
        s2 = _sech(k * x) ** 2
        d = 1.0 + k * t
        return k ** 3 * s2 * (2.0 * t * d + k * s2) / (d * d)

    return ForceFunction("sech_well", Kind.CLOSED_FORM, BoundaryClass.WELL_SHAPED,
                         value, deriv, {"lam": lam})


def eq10_example():
    """A = (sqrt2 cosh 2x - 1) / (2 cosh x sqrt(cosh 2x)), single level at E = 1/2.

    Rewritten with s = sech 2x as (sqrt2 - s) / sqrt(2 (1 + s)).
    """

    def value(x):
        s = _sech(2.0 * x)
        return (SQRT2 - s) / np.sqrt(2.0 * (1.0 + s))

    def deriv(x):
        s = _sech(2.0 * x)
        return 2.0 * s * np.tanh(2.0 * x) * (2.0 + SQRT2 + s) / (2.0 * (1.0 + s)) ** 1.5

    return ForceFunction("eq10_example", Kind.CLOSED_FORM, BoundaryClass.WELL_SHAPED,
                         value, deriv)


def eq14_generated():
    """A = 1 / (1 + sqrt2 sech(sqrt2 x)), generated by the lambda = 1 curve
    d(alpha)/dx = 2 sqrt2 sin(alpha/2 - pi/4) between pi/2 and 5 pi/2."""

    def value(x):
        return 1.0 / (1.0 + SQRT2 * _sech(SQRT2 * x))

    def deriv(x):
        s = _sech(SQRT2 * x)
        return 2.0 * np.tanh(SQRT2 * x) * s / (1.0 + SQRT2 * s) ** 2

    return ForceFunction("eq14_generated", Kind.CLOSED_FORM, BoundaryClass.WELL_SHAPED,
                         value, deriv)


def linear_harmonic():
    """A(x) = x, giving the shifted oscillator V = x^2 - 1."""
    return ForceFunction(
        "linear_harmonic", Kind.CLOSED_FORM, BoundaryClass.DIVERGENT,
        lambda x: np.asarray(x, dtype=float) if np.ndim(x) else float(x),
        lambda x: np.ones_like(x, dtype=float) if np.ndim(x) else 1.0,
        default_L=HARMONIC_L,
    )


def sampled(x, a, name="custom_sampled", boundary_class=None):
    """Force function from a table; cubic interpolation, centered-difference A'."""
    x = np.asarray(x, dtype=float)
    a = np.asarray(a, dtype=float)
    if x.ndim != 1 or x.shape != a.shape:
        raise ParameterError("sampled force function needs matching 1-D arrays")
    if len(x) < 3:
        raise GridTooCoarseError(f"need at least 3 grid points, got {len(x)}")
    if np.any(np.diff(x) <= 0):
        raise ParameterError("sample grid must be strictly increasing")
    spline = CubicSpline(x, a)
    dspline = CubicSpline(x, np.gradient(a, x, edge_order=2))
    lo, hi = x[0], x[-1]

    def value(xx):
        return spline(np.clip(xx, lo, hi))[()]

    def deriv(xx):
        return dspline(np.clip(xx, lo, hi))[()]

    L = float(min(-lo, hi)) if lo < 0 < hi else float(max(abs(lo), abs(hi)))
    ff = ForceFunction(name, Kind.SAMPLED, BoundaryClass.OTHER, value, deriv,
                       {"n": len(x)}, default_L=L)
    if boundary_class is None:
        boundary_class = (BoundaryClass.WELL_SHAPED if check_well_shaped(ff, L)
                          else BoundaryClass.OTHER)
    return ForceFunction(name, Kind.SAMPLED, BoundaryClass(boundary_class), value,
                         deriv, {"n": len(x)}, default_L=L)


def load_csv(path, **kwargs):
    """Two-column (x, A) CSV, optional header."""
    xs, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                xv, av = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if xs:
                    raise ParameterError(f"malformed row in {path}: {row}")
                continue  # header
            xs.append(xv)
            vals.append(av)
    return sampled(xs, vals, **kwargs)


CATALOG = {
    "constant": constant,
    "sech_well": sech_well,
    "eq10_example": eq10_example,
    "eq14_generated": eq14_generated,
    "linear_harmonic": linear_harmonic,
}


def catalog(name, **params):
    """Look up a force function by id; ``custom_sampled`` takes ``path`` or ``x``/``a``."""
    if name == "custom_sampled":
        if "path" in params:
            return load_csv(params["path"])
        return sampled(params["x"], params["a"])
    try:
        factory = CATALOG[name]
    except KeyError:
        raise UnknownForceError(f"unknown force function {name!r}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {name}: {exc}") from None
