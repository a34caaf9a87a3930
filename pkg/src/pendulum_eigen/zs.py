"""Zakharov-Shabat system with a potential phi = A exp(iS), S constant.

    i U1' + phi U2   =  lam U1
    i U2' - phi* U1  = -lam U2

On the discrete-eigenvalue branch |U1| = |U2| = sqrt(rho); the phase
difference theta = arg U1 - arg U2 then obeys the pendulum equation with
alpha = pi/2 - (theta - S), and (U1 e^{-iS/2} -/+ i U2 e^{iS/2}) / sqrt(2 lam)
solve the Schrodinger equation with A^2 -/+ A'.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._rk import dopri54
from .errors import NotOnBoundStateBranchError, ParameterError
from .forcefields import Partner
from .pendulum import H_MAX
from .spectrum import (SolverConfig, default_grid, find_eigenvalues, level_endpoints,
                       matching_index, reconstruct_eigenfunction, schrodinger_residual)

BRANCH_TOL = 1e-8


@dataclass(frozen=True)
class ZSState:
    x: float
    U1: complex
    U2: complex


@dataclass
class ZSTrajectory:
    x: np.ndarray
    U1: np.ndarray
    U2: np.ndarray
    lam: float
    S: float
    force: object

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("x,re_U1,im_U1,re_U2,im_U2\n")
            for x, a, b in zip(self.x, self.U1, self.U2):
                fh.write(f"{x:.17g},{a.real:.17g},{a.imag:.17g},"
                         f"{b.real:.17g},{b.imag:.17g}\n")


def _rhs(force, lam, S):
    eis = complex(math.cos(S), math.sin(S))

    def f(x, y):
        u1 = y[0] + 1j * y[1]
        u2 = y[2] + 1j * y[3]
        phi = force.value(x) * eis
        d1 = -1j * lam * u1 + 1j * phi * u2
        d2 = 1j * lam * u2 - 1j * np.conj(phi) * u1
        return np.array([d1.real, d1.imag, d2.real, d2.imag])

    return f


def integrate_zs(force, lam, init, x_end, S=0.0, grid=None, tol=1e-12):
    """Integrate from init.x to x_end; sampled on ``grid`` (ordered along the
    direction of integration) or at the accepted steps."""
    y0 = np.array([init.U1.real, init.U1.imag, init.U2.real, init.U2.imag])
    sol = dopri54(_rhs(force, float(lam), float(S)), init.x, x_end, y0,
                  rtol=tol, atol=1e-300, h_max=H_MAX, dense_x=grid,
                  record=grid is None, vector_norm=True)
    if grid is None:
        xs, Y = sol.x, sol.y
    else:
        xs, Y = np.asarray(grid, dtype=float), sol.dense
    return ZSTrajectory(xs, Y[:, 0] + 1j * Y[:, 1], Y[:, 2] + 1j * Y[:, 3],
                        float(lam), float(S), force)


def seed_from_angle(x, alpha, S=0.0, log_rho=0.0):
    """ZS state on the bound-state ray with the given pendulum angle."""
    r = math.exp(0.5 * log_rho)
    theta = math.pi / 2 - alpha + S
    return ZSState(x, r * complex(math.cos(theta), math.sin(theta)), complex(r, 0.0))


def branch_mismatch(traj):
    """max | |U1| - |U2| | / max(|U1|, |U2|) along the trajectory."""
    m1, m2 = np.abs(traj.U1), np.abs(traj.U2)
    return float(np.max(np.abs(m1 - m2) / np.maximum(np.maximum(m1, m2), 1e-300)))


def zs_to_pendulum(traj, tol=BRANCH_TOL, alpha_ref=None):
    """(alpha, log_rho) with alpha = pi/2 - (theta - S), rho = |U1|^2.

    The phase only fixes alpha modulo 2 pi; ``alpha_ref`` (the angle at the
    first sample, e.g. the seed) selects the branch.
    """
    mis = branch_mismatch(traj)
    if mis > tol:
        raise NotOnBoundStateBranchError(
            f"|U1| and |U2| differ by {mis:.3g} (relative), tolerance {tol:.3g}")
    theta = np.unwrap(np.angle(traj.U1) - np.angle(traj.U2))
    alpha = math.pi / 2 - (theta - traj.S)
    if alpha_ref is not None:
        alpha = alpha + 2 * math.pi * round((alpha_ref - alpha[0]) / (2 * math.pi))
    return alpha, 2.0 * np.log(np.abs(traj.U1))


def zs_to_schrodinger(traj):
    """(psi_plus, psi_minus); psi_minus goes with A^2 - A', psi_plus with A^2 + A'."""
    if traj.lam == 0:
        raise ParameterError("the ZS-to-Schrodinger map divides by sqrt(2 lam); lam = 0")
    a = traj.U1 * np.exp(-0.5j * traj.S)
    b = 1j * traj.U2 * np.exp(0.5j * traj.S)
    norm = math.sqrt(2.0 * traj.lam)
    return (a + b) / norm, (a - b) / norm


def bound_state_zs(force, lam, n, grid=None, S=0.0, config=None, tol=None):
    """ZS solution at an eigenvalue, glued from a forward shot seeded on the
    stable ray at -L and a backward shot seeded on the level's repulsive ray
    at +L, matched by one complex factor at the well bottom.

    Returns the trajectory and the pendulum angle at its first sample.
    """
    config = config or SolverConfig()
    tol = config.eigen_tol if tol is None else tol
    if grid is None:
        grid = default_grid(force, config)
    grid = np.asarray(grid, dtype=float)
    a_start, a_end = level_endpoints(force, lam, n, float(grid[-1]))
    im = matching_index(force, grid)
    fw = integrate_zs(force, lam, seed_from_angle(grid[0], a_start, S), grid[im],
                      S, grid=grid[:im + 1], tol=tol)
    bw = integrate_zs(force, lam, seed_from_angle(grid[-1], a_end, S), grid[im],
                      S, grid=grid[im:][::-1], tol=tol)
    b1, b2 = bw.U1[::-1], bw.U2[::-1]
    c = ((fw.U1[-1] * np.conj(b1[0]) + fw.U2[-1] * np.conj(b2[0]))
         / (abs(b1[0]) ** 2 + abs(b2[0]) ** 2))
    U1 = np.concatenate([fw.U1, c * b1[1:]])
    U2 = np.concatenate([fw.U2, c * b2[1:]])
    return ZSTrajectory(grid, U1, U2, float(lam), float(S), force), a_start


def _real_profile(psi):
    """Strip the constant global phase of a ZS-derived wavefunction."""
    i = int(np.argmax(np.abs(psi)))
    ph = psi[i] / abs(psi[i])
    return (psi / ph).real, float(np.max(np.abs((psi / ph).imag)))


def zs_check(force, config=None, lambda_range=None, S=0.0):
    """Cross-check every detected level against the pendulum pipeline."""
    config = config or SolverConfig()
    spec = find_eigenvalues(force, lambda_range, config)
    grid = default_grid(force, config)
    V_minus = force.potential(Partner.MINUS)
    V_plus = force.potential(Partner.PLUS)
    levels = []
    for lv in spec:
        if lv.lam == 0.0:
            continue
        traj, a0 = bound_state_zs(force, lv.lam, lv.n, grid, S, config)
        alpha_zs, _ = zs_to_pendulum(traj, alpha_ref=a0)
        ep = reconstruct_eigenfunction(force, lv.lam, lv.n, grid, config)
        psi_p, psi_m = zs_to_schrodinger(traj)
        out = {"n": lv.n, "lambda": lv.lam,
               "alpha_deviation": float(np.max(np.abs(alpha_zs - ep.alpha))),
               "branch_mismatch": branch_mismatch(traj)}
        for label, psi, V, pendulum_partner in (("minus", psi_m, V_minus, Partner.MINUS),
                                                ("plus", psi_p, V_plus, Partner.PLUS)):
            scale = float(np.max(np.abs(psi)))
            res = schrodinger_residual(grid, psi, V, lv.E)
            real, imag = _real_profile(psi)
            real = real / math.sqrt(np.trapezoid(real * real, grid))
            ref = reconstruct_eigenfunction(force, lv.lam, lv.n, grid, config,
                                            partner=pendulum_partner,
                                            check_nodes=False).psi
            if np.dot(real, ref) < 0:
                real = -real
            out[f"residual_{label}"] = res / scale
            out[f"imag_part_{label}"] = imag / scale
            out[f"psi_deviation_{label}"] = float(np.max(np.abs(real - ref)))
        levels.append(out)
    return {"force": force.name, "levels": levels}
