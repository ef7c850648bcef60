"""Exception hierarchy shared by every module of the package."""


class UltrashiftError(Exception):
    """Base class; the CLI maps any subclass to exit status 2."""


class DomainError(UltrashiftError, ValueError):
    """An argument lies outside the domain of the operation."""


class StateError(UltrashiftError, RuntimeError):
    """A state cannot advance, e.g. an explicit digit tail ran out."""


class EstimationError(UltrashiftError, ArithmeticError):
    """An estimator was given too little (or degenerate) data."""
