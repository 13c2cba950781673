"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A size, shape or setting is outside what the library supports."""


class UsageError(RuntimeError):
    """An object was used in a state that does not allow the call."""


class NumericError(ArithmeticError):
    """A computation produced non-finite values."""
