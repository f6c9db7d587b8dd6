"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
convergence/stiffness failures with 3, and regime-violation warnings with 4
when escalated under ``--strict``.
"""


class CombforgeError(Exception):
    """Base class for all package errors."""


class ConfigError(CombforgeError, ValueError):
    """Invalid configuration file or field value; names the offending field."""


class DomainError(CombforgeError, ValueError):
    """Argument outside the supported domain of a numerical kernel."""


class ResolutionError(CombforgeError, ValueError):
    """Too few samples to resolve the requested harmonic content."""


class StiffnessError(CombforgeError, RuntimeError):
    """Adaptive step size underflowed; the problem looks stiff."""

    def __init__(self, message, t=None, step=None):
        super().__init__(message)
        self.t = t
        self.step = step


class ConvergenceError(CombforgeError, RuntimeError):
    """Iteration failed to reach the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularityError(CombforgeError, ValueError):
    """Linear operator evaluated at (numerically) singular frequency."""


class EnergyMismatchError(CombforgeError, ValueError):
    """Scattering amplitude arguments violate energy conservation."""


class DegeneratePairEnergyError(CombforgeError, ValueError):
    """Pair energy coincides with an eigenvalue of the two-excitation operator."""


class DegenerateStateError(CombforgeError, ValueError):
    """Constructed photon state is identically zero."""


class UndefinedCorrelationError(CombforgeError, ValueError):
    """Correlation normalization vanishes; the ratio is undefined."""


class RankError(CombforgeError, ValueError):
    """Target state rank exceeds what the requested qubit count can emit."""

    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class BranchCutError(CombforgeError, ValueError):
    """Logarithm argument vanished somewhere on the sampling grid."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class RegimeWarning(UserWarning):
    """Requested parameters leave the validity regime of an approximation."""
