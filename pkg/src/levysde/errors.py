"""Exception types shared across the library."""


class LevysdeError(Exception):
    """Base class for all library-specific failures."""


class ModelError(ValueError, LevysdeError):
    """A noise model violates a structural requirement (unit atoms, span, ...)."""


class NumericalError(LevysdeError):
    """A numerical routine failed to converge or produced non-finite values.

    Attributes
    ----------
    residual : float or None
        The offending residual / error estimate, when one is available.
    """

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class GridResolutionError(NumericalError):
    """Grid too coarse for the requested operation (Nyquist decay violated)."""


class GateError(ValueError, LevysdeError):
    """An integrability-exponent gate (p, q) inequality failed."""


class UnsupportedDriftError(LevysdeError):
    """Drift structure outside what mollification supports."""


class UnsupportedNormError(ValueError, LevysdeError):
    """Requested norm combination is not implemented (beta > 0 with p = inf)."""


class CoverageError(ValueError, LevysdeError):
    """Particles carry too much mass outside the requested grid."""
