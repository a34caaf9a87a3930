"""Winding numbers, bound-state counting, eigenvalue bracketing and eigenfunctions.

The eigenvalue search relies on the winding count being a nondecreasing
integer step function of lambda with unit jumps at the eigenvalues.  The
count used for bracketing is the number of repulsive targets the terminal
angle has passed, i.e. the number of levels strictly below lambda.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .errors import ClassificationError, ConsistencyError, ParameterError
from .forcefields import BoundaryClass, Partner
from .pendulum import (CLASS_TOL, TWO_PI, Terminal, TerminalClass,
                       _branch_targets, classify_terminal, integrate, shoot,
                       slow_manifold_offset)


@dataclass
class SolverConfig:
    L: float | None = None
    tol: float = 1e-10
    psi_tol: float | None = None    # eigenfunctions feed second differences; tol/100 if unset
    class_tol: float = CLASS_TOL
    tol_lambda: float = 1e-10
    scan_points: int = 1000
    sections: int = 8
    grid_step: float = 0.01
    threads: int = 1

    def __post_init__(self):
        if self.L is not None and self.L <= 0:
            raise ParameterError("L must be positive")
        for name in ("tol", "psi_tol", "class_tol", "tol_lambda", "grid_step"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ParameterError(f"{name} must be positive")
        if self.scan_points < 2 or self.sections < 1 or self.threads < 1:
            raise ParameterError("scan_points >= 2, sections >= 1, threads >= 1")

    @property
    def eigen_tol(self):
        return self.tol * 1e-2 if self.psi_tol is None else min(self.tol, self.psi_tol)

    def domain(self, force):
        return force.default_L if self.L is None else self.L


@dataclass(frozen=True)
class WindingResult:
    lam: float
    W: float
    count: int
    terminal: TerminalClass


@dataclass(frozen=True)
class Level:
    n: int
    lam: float
    lo: float
    hi: float
    winding_below: int
    winding_above: int

    @property
    def E(self):
        return self.lam ** 2

    @property
    def bracket_width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class Suspect:
    lo: float
    hi: float
    reason: str


@dataclass
class Spectrum:
    levels: list
    suspects: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.levels)

    def __len__(self):
        return len(self.levels)

    def __getitem__(self, i):
        return self.levels[i]

    @property
    def lambdas(self):
        return np.array([lv.lam for lv in self.levels])

    @property
    def energies(self):
        return self.lambdas ** 2


@dataclass
class Eigenpair:
    n: int
    lam: float
    x: np.ndarray
    psi: np.ndarray
    alpha: np.ndarray
    log_rho: np.ndarray
    nodes: int
    winding_below: int
    winding_above: int
    match_error: float
    partner: Partner = Partner.MINUS

    @property
    def E(self):
        return self.lam ** 2


# -- shots ---------------------------------------------------------------

def _require_supported(force):
    if force.boundary_class not in (BoundaryClass.WELL_SHAPED, BoundaryClass.DIVERGENT):
        raise ClassificationError(
            f"{force.name}: boundary class {force.boundary_class.value} is not supported")


def start_angle(force, lam):
    """alpha(-L): the stable boundary point (well-shaped) or pi (divergent)."""
    if force.boundary_class is BoundaryClass.DIVERGENT:
        return np.full_like(np.asarray(lam, dtype=float), math.pi)
    return np.arcsin(lam)


def _check_lams(force, lams):
    lams = np.asarray(lams, dtype=float)
    if np.any(lams < 0):
        raise ParameterError("lambda must be >= 0")
    if force.boundary_class is BoundaryClass.WELL_SHAPED and np.any(lams > 1):
        raise ParameterError("well-shaped force functions need lambda <= 1")
    return lams


def _terminal_batch(force, lams, L, tol):
    a0 = start_angle(force, lams)
    return shoot(force, lams, a0, (-L, L), tol).y_end[0]


def terminal_angles(force, lams, config=None):
    """alpha(L) for every lambda, fanned over config.threads chunks."""
    config = config or SolverConfig()
    lams = _check_lams(force, np.atleast_1d(lams))
    L = config.domain(force)
    if config.threads == 1 or len(lams) < 2 * config.threads:
        return _terminal_batch(force, lams, L, config.tol)
    chunks = np.array_split(lams, config.threads)
    with ThreadPoolExecutor(config.threads) as pool:
        parts = list(pool.map(lambda c: _terminal_batch(force, c, L, config.tol), chunks))
    return np.concatenate(parts)


def _counts(force, lams, alpha_end):
    """Number of repulsive targets passed, i.e. levels strictly below lambda."""
    if force.boundary_class is BoundaryClass.DIVERGENT:
        c = np.ceil((alpha_end - math.pi) / TWO_PI)
    else:
        c = np.ceil((alpha_end - (math.pi - np.arcsin(lams))) / TWO_PI)
    return np.maximum(c, 0).astype(int)


def _real_winding(force, lams, alpha_end, L=None):
    W = (alpha_end - start_angle(force, lams)) / TWO_PI
    if force.boundary_class is BoundaryClass.DIVERGENT:
        # measured from the attractor below the starting repulser; the
        # finite-L attractor 2 m pi + asin(lam / A(L)) + ... is pulled back to 2 m pi
        W = W + 0.5
        if L is not None:
            off = [slow_manifold_offset(force, float(lam), L) or 0.0
                   for lam in np.atleast_1d(lams)]
            W = W - np.reshape(off, np.shape(W)) / TWO_PI
    return W


def winding_counts(force, lams, config=None):
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    alpha_end = terminal_angles(force, lams, config)
    return _counts(force, lams, alpha_end)


def winding_scan(force, lams, config=None):
    """(W, count) arrays over a lambda grid, i.e. the staircase as data."""
    _require_supported(force)
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    config = config or SolverConfig()
    alpha_end = terminal_angles(force, lams, config)
    return (_real_winding(force, lams, alpha_end, config.domain(force)),
            _counts(force, lams, alpha_end))


def winding_number(force, lam, config=None):
    config = config or SolverConfig()
    _require_supported(force)
    _check_lams(force, [lam])
    L = config.domain(force)
    a0 = float(start_angle(force, lam))
    alpha_end = float(shoot(force, float(lam), a0, (-L, L), config.tol).y_end[0])
    term = classify_terminal(alpha_end, float(lam), force.boundary_class,
                             config.class_tol, float(force.value(L)),
                             float(force.deriv(L)))
    W = float(_real_winding(force, np.array(lam), np.array(alpha_end), L))
    count = int(_counts(force, np.array([lam]), np.array([alpha_end]))[0])
    return WindingResult(float(lam), W, count, term)


def count_bound_states(force, L=None, tol=1e-10):
    """One shot at lambda = 1 from pi/2; the winding is the number of levels."""
    if force.boundary_class is not BoundaryClass.WELL_SHAPED:
        raise ClassificationError(f"{force.name} is not well-shaped")
    L = force.default_L if L is None else L
    alpha_end = float(shoot(force, 1.0, math.pi / 2, (-L, L), tol).y_end[0])
    return int(round((alpha_end - math.pi / 2) / TWO_PI))


def is_critical_at_zero(force, config=None):
    """Divergent case: does the lambda = 0 shot from pi stay on pi?"""
    config = config or SolverConfig()
    L = config.domain(force)
    tr = integrate(force, 0.0, math.pi, L=L, tol=config.tol,
                   class_tol=config.class_tol)
    flat = np.max(np.abs(tr.alpha - math.pi)) < config.class_tol
    return tr.terminal.kind is Terminal.AT_ODD_PI and bool(flat)


# -- eigenvalues ---------------------------------------------------------

def find_eigenvalues(force, lambda_range=None, config=None):
    """Bracket every unit jump of the winding count and refine it.

    Refinement is a batched multisection on the predicate count(lam) >= k;
    with ``sections = 1`` it is plain bisection.
    """
    config = config or SolverConfig()
    _require_supported(force)
    if lambda_range is None:
        if force.boundary_class is BoundaryClass.DIVERGENT:
            raise ParameterError("divergent force functions need an explicit lambda range")
        lambda_range = (0.0, 1.0)
    lo, hi = map(float, lambda_range)
    if not 0 <= lo < hi:
        raise ParameterError(f"bad lambda range {lambda_range}")
    _check_lams(force, [lo, hi])

    levels = []
    suspects = []
    grid = np.linspace(lo, hi, config.scan_points)
    counts = winding_counts(force, grid, config)
    if force.boundary_class is BoundaryClass.DIVERGENT and lo == 0.0:
        if is_critical_at_zero(force, config):
            levels.append(Level(0, 0.0, 0.0, 0.0, 0, 1))
            counts[0] = max(counts[0], 1)   # count just above zero

    drops = np.nonzero(np.diff(counts) < 0)[0]
    for i in drops:
        suspects.append(Suspect(grid[i], grid[i + 1], "winding count decreased"))

    # target: [k, lo, hi, count(lo), count(hi)] with count(lo) < k <= count(hi)
    targets = []
    for k in range(counts[0] + 1, counts[-1] + 1):
        i = int(np.argmax(counts >= k))
        targets.append([k, grid[i - 1], grid[i], counts[i - 1], counts[i]])

    _refine(force, targets, config)

    for k, a, b, ca, cb in targets:
        if cb - ca != 1:
            suspects.append(Suspect(a, b, f"jump of {cb - ca} at target {k}"))
            continue
        levels.append(Level(k - 1, 0.5 * (a + b), a, b, int(ca), int(cb)))
    levels.sort(key=lambda lv: lv.lam)
    return Spectrum(levels, suspects)


def _refine(force, targets, config):
    m = config.sections
    while True:
        active = [t for t in targets if t[2] - t[1] > config.tol_lambda]
        if not active:
            return
        probes = []
        for t in active:
            a, b = t[1], t[2]
            probes.append(a + (b - a) * np.arange(1, m + 1) / (m + 1))
        c = winding_counts(force, np.concatenate(probes), config).reshape(len(active), m)
        for t, p, cc in zip(active, probes, c):
            k = t[0]
            above = np.nonzero(cc >= k)[0]
            if len(above):
                j = above[0]
                t[2], t[4] = p[j], cc[j]
                if j > 0:
                    t[1], t[3] = p[j - 1], cc[j - 1]
            else:
                t[1], t[3] = p[-1], cc[-1]


def unit_jumps(force, spectrum, config=None, factor=10.0):
    """W(lam_n + d) - W(lam_n - d) for d = factor * tol_lambda, per level."""
    config = config or SolverConfig()
    d = factor * config.tol_lambda
    out = []
    for lv in spectrum:
        if lv.lam - d < 0:
            out.append(None)
            continue
        ca, cb = winding_counts(force, [lv.lam - d, lv.lam + d], config)
        out.append(int(cb - ca))
    return out


# -- eigenfunctions -------------------------------------------------------

def default_grid(force, config=None):
    config = config or SolverConfig()
    L = config.domain(force)
    n = int(round(2 * L / config.grid_step)) + 1
    return np.linspace(-L, L, n)


def level_endpoints(force, lam, n, x_end):
    """alpha at -L (stable start) and at +L (repulsive target of level n)."""
    a_end, da_end = float(force.value(x_end)), float(force.deriv(x_end))
    targets = _branch_targets(lam, a_end, da_end)
    u_off = targets[1] if targets is not None else math.asin(min(lam, 1.0))
    return float(start_angle(force, lam)), (2 * n + 1) * math.pi - u_off


def matching_index(force, grid):
    """Grid index at the bottom of the well, kept away from the walls."""
    V = force.potential(Partner.MINUS)(grid)
    n = len(grid)
    inner = slice(n // 4, n - n // 4)
    return n // 4 + int(np.argmin(V[inner]))


def reconstruct_eigenfunction(force, lam, n=None, grid=None, config=None,
                              partner=Partner.MINUS, check_nodes=True):
    """Eigenfunction of V (MINUS, sqrt(rho) sin(alpha/2)) or of the partner
    V~ (PLUS, sqrt(rho) cos(alpha/2)) at the eigenvalue lam.

    A single forward shot cannot end on the repulsive point, so the solution
    is assembled from a forward shot started on the stable point at -L and
    a backward shot started on the level's repulsive point at +L (attractive
    in reverse), matched in log(rho) at the well bottom.
    """
    config = config or SolverConfig()
    _require_supported(force)
    partner = Partner(partner)
    lam = float(lam)
    if grid is None:
        grid = default_grid(force, config)
    grid = np.asarray(grid, dtype=float)
    L_lo, L_hi = float(grid[0]), float(grid[-1])
    if n is None:
        d = 10 * config.tol_lambda
        n = int(winding_counts(force, [max(lam - d, 0.0)], config)[0])
        if lam == 0.0:
            n = 0

    alpha_start, alpha_end = level_endpoints(force, lam, n, L_hi)
    im = matching_index(force, grid)
    left, right = grid[:im + 1], grid[im:][::-1]
    tol = config.eigen_tol
    fw = shoot(force, lam, alpha_start, (L_lo, grid[im]), tol, grid=left)
    bw = shoot(force, lam, alpha_end, (L_hi, grid[im]), tol, grid=right)
    fa, fr = fw.dense[:, 0], fw.dense[:, 1]
    ba, br = bw.dense[::-1, 0], bw.dense[::-1, 1]
    match_error = float(abs(fa[-1] - ba[0]))
    br = br + (fr[-1] - br[0])
    alpha = np.concatenate([fa, ba[1:]])
    log_rho = np.concatenate([fr, br[1:]])

    shape = np.sin(0.5 * alpha) if partner is Partner.MINUS else np.cos(0.5 * alpha)
    psi = np.exp(0.5 * (log_rho - np.max(log_rho))) * shape
    norm = math.sqrt(np.trapezoid(psi * psi, grid))
    if norm == 0.0 or not np.isfinite(norm):
        raise ConsistencyError(f"eigenfunction at lam={lam} has zero norm")
    psi = psi / norm
    nodes = oracle.count_nodes(psi)
    if check_nodes and match_error > config.class_tol:
        raise ConsistencyError(
            f"halves of level {n} at lam={lam!r} miss by {match_error:.3g} rad; "
            "lam is not that level's eigenvalue")
    if check_nodes and nodes != n:
        raise ConsistencyError(
            f"level {n} at lam={lam!r} has {nodes} nodes; tol_lambda too loose?")
    return Eigenpair(n, lam, grid, psi, alpha, log_rho, nodes, n, n + 1,
                     match_error, partner)


def schrodinger_residual(x, psi, V, E, skip=2):
    """max |-psi'' + V psi - E psi| on interior points (five-point psi'')."""
    x = np.asarray(x)
    h = x[1] - x[0]
    p = np.asarray(psi)
    d2 = (-p[4:] + 16 * p[3:-1] - 30 * p[2:-2] + 16 * p[1:-3] - p[:-4]) / (12 * h * h)
    xi = x[2:-2]
    r = -d2 + (V(xi) - E) * p[2:-2]
    if skip > 2:
        r = r[skip - 2:len(r) - (skip - 2)]
    return float(np.max(np.abs(r)))


def solve(force, lambda_range=None, config=None, grid=None):
    """find_eigenvalues followed by eigenfunction reconstruction."""
    config = config or SolverConfig()
    spec = find_eigenvalues(force, lambda_range, config)
    pairs = [reconstruct_eigenfunction(force, lv.lam, lv.n, grid, config)
             for lv in spec]
    return spec, pairs


# -- partner potentials --------------------------------------------------

@dataclass
class IsospectralReport:
    E_minus: np.ndarray
    E_plus: np.ndarray
    unc_minus: np.ndarray
    unc_plus: np.ndarray

    @property
    def differences(self):
        k = min(len(self.E_minus), len(self.E_plus))
        return np.abs(self.E_minus[:k] - self.E_plus[:k])

    @property
    def same_count(self):
        return len(self.E_minus) == len(self.E_plus)

    def to_report(self):
        return {
            "E_minus": self.E_minus.tolist(),
            "E_plus": self.E_plus.tolist(),
            "uncertainty_minus": self.unc_minus.tolist(),
            "uncertainty_plus": self.unc_plus.tolist(),
            "differences": self.differences.tolist(),
            "same_count": self.same_count,
        }


def isospectral_check(force, L=None, M=8000, k=10):
    """Oracle spectra of A^2 - A' and A^2 + A' (Richardson values)."""
    L = force.default_L if L is None else L
    res = []
    for p in (Partner.MINUS, Partner.PLUS):
        V = force.potential(p)
        edge = None
        if force.boundary_class is BoundaryClass.WELL_SHAPED:
            edge = float(min(V(-L), V(L)))
        s = oracle.lowest_eigenvalues(V, L, M, k, edge=edge, vectors=False)
        res.append(s)
    return IsospectralReport(res[0].extrapolated, res[1].extrapolated,
                             res[0].uncertainty, res[1].uncertainty)
