"""Exception hierarchy shared by every module."""


class ApollonianError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ApollonianError, ValueError):
    pass


class ArithmeticOverflowError(ApollonianError, OverflowError):
    """An exact integer left the supported signed 128-bit range."""


class ReductionError(ApollonianError):
    pass


class InternalInvariantError(ApollonianError):
    """A runtime-checked mathematical invariant failed; results are unusable."""


class ResourceError(ApollonianError):
    pass


class UnsupportedError(ApollonianError):
    pass


class NumericError(ApollonianError, ArithmeticError):
    pass


class InvalidConfigurationError(ApollonianError, ValueError):
    pass
