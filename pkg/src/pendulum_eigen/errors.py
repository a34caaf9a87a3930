"""Exception hierarchy shared across the package."""


class PendulumEigenError(Exception):
    """Base class for all library errors."""


class ParameterError(PendulumEigenError, ValueError):
    """A parameter lies outside its admissible range."""


class UnknownForceError(ParameterError):
    """Requested catalog id does not exist."""


class GridTooCoarseError(ParameterError):
    """A sampled force function has fewer than three points."""


class NoFixedPointsError(ParameterError):
    """The boundary pendulum has no fixed points (lambda > 1)."""


class IntegrationError(PendulumEigenError):
    """The adaptive integrator could not advance."""

    def __init__(self, message, last_x):
        super().__init__(f"{message} (last good x = {last_x:.17g})")
        self.last_x = last_x


class ClassificationError(PendulumEigenError):
    """A force function does not belong to the class an operation requires."""


class ConsistencyError(PendulumEigenError):
    """Reconstructed eigenfunction disagrees with its expected node count."""


class SingularConstructionError(PendulumEigenError):
    """A critical curve yields a force function with a non-removable pole."""

    def __init__(self, message, alpha=None):
        super().__init__(message)
        self.alpha = alpha


class NotOnBoundStateBranchError(PendulumEigenError):
    """ZS amplitudes differ in modulus, so no pendulum reduction exists."""
