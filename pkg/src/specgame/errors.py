"""Exception types shared across the package."""


class SpecgameError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SpecgameError):
    """Malformed or out-of-range configuration input."""


class PreconditionError(SpecgameError):
    """A solver was called on an instance outside its domain."""


class SolverFailure(SpecgameError):
    """A numerical routine could not produce a certified result."""
