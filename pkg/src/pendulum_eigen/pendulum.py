"""Angle/log-magnitude integration of the pendulum form of the Schrodinger equation.

    d(alpha)/dx    = 2 lam - 2 A(x) sin(alpha)
    d(log rho)/dx  = 2 A(x) cos(alpha)

alpha is never reduced modulo 2 pi.  The magnitude is carried as log(rho)
because non-critical shots make rho grow exponentially.
"""

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from ._rk import dopri54
from .errors import NoFixedPointsError, ParameterError
from .forcefields import BoundaryClass

TWO_PI = 2.0 * math.pi
CLASS_TOL = 1e-3
H_MAX = 0.25


@dataclass(frozen=True)
class FixedPoints:
    f_s: float
    f_u: float
    N: int


def fixed_points(lam, N=0):
    """Stable and unstable equilibria of d(alpha)/dx = 2 lam - 2 sin(alpha)."""
    if lam < 0:
        raise ParameterError("fixed points are tabulated for lam >= 0; "
                             "reduce negative lam with symmetry_reduce")
    if lam > 1:
        raise NoFixedPointsError(f"no fixed points for lam = {lam} > 1")
    a = math.asin(lam)
    return FixedPoints(TWO_PI * N + a, (2 * N + 1) * math.pi - a, N)


def symmetry_reduce(lam):
    """Map lam to |lam|; flip=True means the caller must negate alpha."""
    if lam < 0:
        return -lam, True
    return lam, False


def sincos(alpha):
    """sin and cos with exact reduction by the nearest multiple of pi.

    Keeps alpha = k*pi (as a float) an exact equilibrium when lam = 0.
    """
    k = np.rint(alpha / math.pi)
    r = alpha - k * math.pi
    sgn = 1.0 - 2.0 * np.mod(k, 2.0)
    return sgn * np.sin(r), sgn * np.cos(r)


class Terminal(enum.Enum):
    AT_STABLE = "at_stable"
    AT_UNSTABLE = "at_unstable"
    AT_EVEN_PI = "at_even_pi"       # 2 (n + 1) pi, attractor for A -> +inf
    AT_ODD_PI = "at_odd_pi"         # (2 n + 1) pi, repulser for A -> +inf
    UNRESOLVED = "unresolved"


@dataclass(frozen=True)
class TerminalClass:
    kind: Terminal
    index: int | None
    angle: float
    distance: float


def _branch_targets(lam, a_end, da_end):
    """Quasi-equilibria of the frozen boundary equation near x = L.

    Returns (stable offset, unstable offset) so that targets are
    2 m pi + s and (2 m + 1) pi - u.  A first-order adiabatic correction
    accounts for A still varying at the boundary (divergent A).
    """
    if a_end <= 0:
        return None
    mu0 = lam / a_end
    if mu0 > 1:
        return None
    c0 = math.sqrt(1.0 - mu0 * mu0)
    if c0 == 0.0 or da_end == 0.0:
        return math.asin(mu0), math.asin(mu0)
    slope = -lam * da_end / (a_end * a_end * c0)
    mu_s = (lam - 0.5 * slope) / a_end
    mu_u = (lam + 0.5 * slope) / a_end
    if abs(mu_s) > 1 or abs(mu_u) > 1:
        return math.asin(mu0), math.asin(mu0)
    return math.asin(mu_s), math.asin(mu_u)


def slow_manifold_offset(force, lam, x, stable=True, order=3, h=1e-2):
    """Offset of the stable (2 m pi + s) or unstable ((2 m + 1) pi - u)
    slow manifold at x, from iterating sin(b) = (lam -/+ b'/2) / A.

    Order 1 reproduces the adiabatic targets; each further order removes
    one more power of A'/A^2.  Returns None where A is too small.
    """
    sign = -0.5 if stable else 0.5

    def b(k, xx):
        a = float(force.value(xx))
        if a <= 0:
            raise ValueError
        d = 0.0 if k == 0 else (b(k - 1, xx + h) - b(k - 1, xx - h)) / (2 * h)
        mu = (lam + sign * d) / a
        if abs(mu) > 1:
            raise ValueError
        return math.asin(mu)

    try:
        return b(order, float(x))
    except ValueError:
        return None


def classify_terminal(alpha_end, lam, boundary_class, class_tol=CLASS_TOL,
                      a_end=1.0, da_end=0.0):
    """Label the terminal angle by its nearest target.

    ``a_end``/``da_end`` are A and A' at the terminal point; for well-shaped
    force functions the defaults reproduce the boundary fixed points.
    """
    targets = _branch_targets(lam, a_end, da_end)
    if targets is None:
        return TerminalClass(Terminal.UNRESOLVED, None, alpha_end, math.inf)
    s_off, u_off = targets
    Ns = round((alpha_end - s_off) / TWO_PI)
    Nu = round((alpha_end - math.pi + u_off) / TWO_PI)
    ds = abs(alpha_end - (TWO_PI * Ns + s_off))
    du = abs(alpha_end - ((2 * Nu + 1) * math.pi - u_off))
    stable = ds <= du
    d = ds if stable else du
    if d >= class_tol:
        return TerminalClass(Terminal.UNRESOLVED, None, alpha_end, d)
    if boundary_class is BoundaryClass.DIVERGENT:
        if stable:
            return TerminalClass(Terminal.AT_EVEN_PI, int(Ns) - 1, alpha_end, d)
        return TerminalClass(Terminal.AT_ODD_PI, int(Nu), alpha_end, d)
    if stable:
        return TerminalClass(Terminal.AT_STABLE, int(Ns), alpha_end, d)
    return TerminalClass(Terminal.AT_UNSTABLE, int(Nu), alpha_end, d)


@dataclass
class PendulumTrajectory:
    lam: float
    xs: np.ndarray
    alpha: np.ndarray
    log_rho: np.ndarray
    terminal: TerminalClass

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "alpha", "log_rho"])
            for row in zip(self.xs, self.alpha, self.log_rho):
                w.writerow([f"{v:.17g}" for v in row])


def _rhs(force, lam):
    def f(x, y):
        a = force.value(x)
        s, c = sincos(y[0])
        return np.array([2.0 * lam - 2.0 * a * s, 2.0 * a * c])
    return f


def shoot(force, lam, alpha0, x_span, tol=1e-10, grid=None, record=False,
          log_rho0=0.0):
    """Raw integration; lam and alpha0 may be arrays of equal shape (a batch).

    Negative lam is integrated as given.  Returns the integrator solution with
    state rows (alpha, log_rho).
    """
    lam = np.asarray(lam, dtype=float)
    alpha0 = np.broadcast_to(np.asarray(alpha0, dtype=float), lam.shape)
    y0 = np.array([alpha0, np.broadcast_to(log_rho0, lam.shape)], dtype=float)
    return dopri54(_rhs(force, lam), x_span[0], x_span[1], y0,
                   rtol=tol, atol=tol, h_max=H_MAX, dense_x=grid, record=record)


def integrate(force, lam, alpha0, L=None, tol=1e-10, grid=None, x_span=None,
              class_tol=CLASS_TOL, log_rho0=0.0):
    """Integrate one trajectory from x_span[0] (default -L) to x_span[1] (default L).

    If ``grid`` is given the trajectory is sampled there (dense output),
    otherwise at the accepted steps.  Negative lam is handled through the
    alpha -> -alpha symmetry.
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    lam_r, flip = symmetry_reduce(float(lam))
    a0 = -alpha0 if flip else alpha0
    if x_span is None:
        L = force.default_L if L is None else L
        x_span = (-L, L)
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
    sol = shoot(force, lam_r, a0, x_span, tol, grid=grid, record=grid is None,
                log_rho0=log_rho0)
    if grid is None:
        xs, states = sol.x, sol.y
    else:
        xs, states = grid, sol.dense
    alpha, log_rho = states[:, 0], states[:, 1]
    if flip:
        alpha = -alpha
    x_end = float(x_span[1])
    term = classify_terminal(float(sol.y_end[0]), lam_r, force.boundary_class,
                             class_tol, float(force.value(x_end)),
                             float(force.deriv(x_end)))
    if flip:
        term = TerminalClass(term.kind, term.index, -term.angle, term.distance)
    return PendulumTrajectory(float(lam), xs, alpha, log_rho, term)
