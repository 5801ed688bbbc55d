"""Exception types shared by all modules."""


class LevySPDEError(Exception):
    """Base class for every error raised by the package."""


class DomainError(LevySPDEError, ValueError):
    """Evaluation at a point where a kernel or symbol is singular."""


class Overflow(LevySPDEError, ArithmeticError):
    """A moment or integral that should be finite came out infinite."""


class DivergentIntegral(LevySPDEError, ArithmeticError):
    """A spectral integral fails the cutoff-stability test."""


class GridTooCoarse(LevySPDEError):
    """A grid-based computation is not stable under a resolution doubling."""


class Unsupported(LevySPDEError, NotImplementedError):
    """The requested combination of operator, kernel and dimension is not covered."""


class SupportError(LevySPDEError, ValueError):
    """A test function carries mass outside the simulation box."""


class QuadratureFail(LevySPDEError, ArithmeticError):
    """An adaptive quadrature could not reach its error target."""


class TruncationError(LevySPDEError):
    """The spatial box is too small for the weight function tails."""


class ConfigError(LevySPDEError, ValueError):
    """The run configuration violates the schema."""
