"""Finite-difference reference eigensolver.

-psi'' + V psi = E psi on [-L, L] with Dirichlet walls, second-order central
differences on M interior points.  Eigenvalues come from Sturm-sequence
bisection, eigenvectors from inverse iteration.  This path shares no code
with the pendulum solver and is used to pin reference values.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ParameterError

DECAY_TARGET = 1e-8
MAX_L = 200.0


@dataclass
class Discretization:
    L: float
    M: int
    h: float
    x: np.ndarray
    diag: np.ndarray
    off: float
    gershgorin: tuple

    @property
    def matrix(self):
        """Dense matrix, for small-M cross-checks only."""
        T = np.diag(self.diag)
        i = np.arange(self.M - 1)
        T[i, i + 1] = T[i + 1, i] = self.off
        return T


def discretize(V, L, M):
    if L <= 0 or M < 2:
        raise ParameterError("need L > 0 and M >= 2")
    h = 2.0 * L / (M + 1)
    x = -L + h * np.arange(1, M + 1)
    diag = 2.0 / h ** 2 + np.asarray(V(x), dtype=float)
    off = -1.0 / h ** 2
    radius = np.full(M, 2.0 / h ** 2)
    radius[0] = radius[-1] = 1.0 / h ** 2
    gersh = (float(np.min(diag - radius)), float(np.max(diag + radius)))
    return Discretization(L, M, h, x, diag, off, gersh)


def sturm_count(disc, E):
    """Number of eigenvalues strictly below E."""
    e2 = disc.off * disc.off
    tiny = np.finfo(float).eps * abs(disc.off)
    count = 0
    q = 1.0
    first = True
    for d in disc.diag.tolist():
        if first:
            q = d - E
            first = False
        else:
            q = d - E - e2 / q
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            count += 1
    return count


def _bisect(disc, j, lo, hi, rtol):
    """Eigenvalue j (0-based) given count(lo) <= j < count(hi)."""
    while hi - lo > rtol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if sturm_count(disc, mid) > j:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def sturm_eigenvalues(disc, k, rtol=1e-14):
    """The k smallest eigenvalues by bisection."""
    k = min(k, disc.M)
    lo0, hi0 = disc.gershgorin
    out = []
    lo = lo0
    for j in range(k):
        # cheap upper bracket: grow from the previous level until it holds j+1
        step = 1.0
        hi = lo + step
        while hi < hi0 and sturm_count(disc, hi) <= j:
            lo = hi
            step *= 2.0
            hi = min(lo + step, hi0)
        if hi >= hi0:
            hi = hi0 + 1.0
        e = _bisect(disc, j, lo, hi, rtol)
        out.append(e)
        lo = e
    return np.array(out)


def inverse_iteration(disc, E, iters=3):
    """Eigenvector for eigenvalue E, normalized to sum(v^2) h = 1."""
    M = disc.M
    ab = np.empty((3, M))
    ab[0, :] = disc.off
    ab[2, :] = disc.off
    shift = E + 1e-13 * max(1.0, abs(E))
    ab[1, :] = disc.diag - shift
    v = np.ones(M) / math.sqrt(M)
    for _ in range(iters):
        v = solve_banded((1, 1), ab, v)
        v /= np.linalg.norm(v)
    i = np.argmax(np.abs(v) > 1e-3 * np.max(np.abs(v)))
    if v[i] < 0:
        v = -v
    return v / math.sqrt(disc.h)


def count_nodes(psi, rel_floor=0.0):
    """Strict sign changes, ignoring samples below rel_floor * max|psi|."""
    psi = np.asarray(psi)
    keep = np.abs(psi) > rel_floor * np.max(np.abs(psi))
    s = np.sign(psi[keep])
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


@dataclass
class OracleSpectrum:
    energies: np.ndarray            # at resolution M
    errors: np.ndarray              # |E(M) - extrapolated|
    extrapolated: np.ndarray        # Richardson value from M and 2M
    uncertainty: np.ndarray         # |E(2M) - extrapolated|
    x: np.ndarray
    vectors: list
    L: float
    M: int
    truncated: bool = False
    edge: float = math.inf
    notes: list = field(default_factory=list)

    def to_report(self):
        return {
            "L": self.L,
            "M": self.M,
            "edge": None if math.isinf(self.edge) else self.edge,
            "truncated": self.truncated,
            "levels": [
                {"n": i, "E": float(e), "E_extrapolated": float(r),
                 "error_estimate": float(err), "uncertainty": float(u),
                 "nodes": count_nodes(v, 1e-8)}
                for i, (e, r, err, u, v) in enumerate(zip(
                    self.energies, self.extrapolated, self.errors,
                    self.uncertainty, self.vectors))
            ],
            "notes": list(self.notes),
        }


def richardson(e1, e2, M):
    """Extrapolate second-order values computed with M and 2M interior points."""
    r2 = ((2 * M + 1) / (M + 1)) ** 2
    return (r2 * e2 - e1) / (r2 - 1.0)


def lowest_eigenvalues(V, L, M, k, edge=None, richardson_check=True,
                       auto_extend=True, vectors=True):
    """k lowest levels of -d2/dx2 + V on [-L, L].

    With a finite ``edge`` (continuum threshold) only levels below it are
    kept and the list is flagged truncated if fewer than k remain.  L is
    enlarged (at fixed h) until the deepest kept level has decayed to
    DECAY_TARGET at the walls.
    """
    if k < 1 or k > M:
        raise ParameterError("need 1 <= k <= M")
    edge = math.inf if edge is None else float(edge)
    notes = []
    while True:
        disc = discretize(V, L, M)
        E = sturm_eigenvalues(disc, k)
        keep = E < edge
        E = E[keep]
        if not auto_extend or math.isinf(edge) or len(E) == 0:
            break
        kappa = math.sqrt(edge - E[-1])
        if math.exp(-kappa * L) < DECAY_TARGET or L >= MAX_L:
            if L >= MAX_L:
                notes.append(f"L capped at {MAX_L}")
            break
        h = disc.h
        L_new = min(MAX_L, 1.05 * math.log(1.0 / DECAY_TARGET) / kappa)
        M = int(round(2.0 * L_new / h)) - 1
        notes.append(f"L raised to {L_new:.6g}")
        L = L_new
    truncated = len(E) < k
    if richardson_check and len(E):
        E2 = sturm_eigenvalues(discretize(V, L, 2 * M), len(E))
        R = richardson(E, E2, M)
        err = np.abs(E - R)
        unc = np.abs(E2 - R)
    else:
        R = E.copy()
        err = unc = np.full(len(E), np.nan)
    vecs = [inverse_iteration(disc, e) for e in E] if vectors else []
    return OracleSpectrum(E, err, R, unc, disc.x, vecs, L, M, truncated, edge, notes)
