"""Exception types shared across the package."""


class SpecCalcError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SpecCalcError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PoleError(DomainError):
    """Evaluation requested at (or too close to) a non-removable pole."""


class NotSectorialError(SpecCalcError, ValueError):
    """The matrix has spectrum or kernel structure the calculus cannot handle."""


class ContourError(SpecCalcError, RuntimeError):
    """An integration contour is invalid or passes too close to the spectrum."""


class ConvergenceError(SpecCalcError, RuntimeError):
    """An iterative or adaptive procedure failed to reach its target accuracy."""


class CoverageError(SpecCalcError, ValueError):
    """A sampled function's grid does not cover the region where it is needed."""


class ConfigError(SpecCalcError, ValueError):
    """A run configuration is malformed or contains unknown keys."""
