"""Exception hierarchy shared by the simulation and analysis modules."""


class SBSError(Exception):
    """Base class for all errors raised by sbsfreq."""


class InvalidInputError(SBSError, ValueError):
    pass


class NoPeakError(SBSError, ValueError):
    pass


class WindowTooSmallError(SBSError, ValueError):
    pass


class InfeasibleError(SBSError, ValueError):
    pass


class OutOfRangeError(SBSError, ValueError):
    pass


class NoPulseError(SBSError, ValueError):
    pass


class NoReferenceError(SBSError, ValueError):
    pass


class ReferenceMismatchError(SBSError, ValueError):
    pass


class DegenerateFitError(SBSError, ValueError):
    pass


class ResolutionFailureError(SBSError, RuntimeError):
    pass


class ConfigError(SBSError, ValueError):
    """Bad scenario configuration; message names the offending key or line."""


class ParseError(SBSError, ValueError):
    """Malformed trace CSV or calibration JSON; message names the line or field."""
