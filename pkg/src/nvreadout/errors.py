"""Exception types shared across the package."""


class NVReadoutError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(NVReadoutError, ValueError):
    """A physical parameter or argument is outside its allowed domain."""


class NumericError(NVReadoutError, ArithmeticError):
    """Non-finite values entered or left a numerical routine."""


class ConfigurationError(NVReadoutError, ValueError):
    """Inconsistent sequence, binning, window, or run configuration."""


class DegenerateModelError(NVReadoutError):
    """The rate model has no unique stationary state (e.g. laser off)."""


class UndefinedMetricError(NVReadoutError):
    """A figure of merit is undefined for the given photon counts."""


class FitError(NVReadoutError):
    """Curve fitting failed on degenerate input."""


class ObjectiveError(NVReadoutError):
    """The optimization objective returned a non-finite value."""
