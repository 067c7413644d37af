class ParameterError(ValueError):
    """An argument violates the documented parameter range."""


class ConfigError(ValueError):
    """A scenario description is malformed or inconsistent."""


class InsufficientDataError(ValueError):
    """Too little data to compute a requested statistic."""


class LogicError(RuntimeError):
    """Internal state became inconsistent. Indicates a bug, not bad input."""
