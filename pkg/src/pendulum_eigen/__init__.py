"""Bound states of the 1D Schrodinger equation through the pendulum equation
d(alpha)/dx = 2 lam - 2 A(x) sin(alpha), with V = A^2 - A' and E = lam^2."""

from .constructor import (CriticalCurve, curve, force_from_curve, predetermined_spectrum,
                          solve_curve)
from .errors import (ClassificationError, ConsistencyError, GridTooCoarseError,
                     IntegrationError, NoFixedPointsError, NotOnBoundStateBranchError,
                     ParameterError, PendulumEigenError, SingularConstructionError,
                     UnknownForceError)
from .forcefields import (BoundaryClass, ForceFunction, Kind, Partner, catalog,
                          check_well_shaped, load_csv, riccati_potential, sampled)
from .oracle import lowest_eigenvalues, sturm_count
from .pendulum import (Terminal, TerminalClass, classify_terminal, fixed_points,
                       integrate)
from .spectrum import (Eigenpair, Level, SolverConfig, Spectrum, count_bound_states,
                       find_eigenvalues, isospectral_check, reconstruct_eigenfunction,
                       solve, winding_number, winding_scan)
from .zs import (ZSState, bound_state_zs, integrate_zs, zs_check, zs_to_pendulum,
                 zs_to_schrodinger)

__version__ = "0.1.0"
