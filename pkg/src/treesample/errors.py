"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad weight spec, depth, norm, or flag combination."""


class DatasetError(ValueError):
    """Malformed graph data: parse failures, shape mismatches, invariant violations."""


class ScaleLimitError(ValueError):
    """An oracle-scale routine was called on an input beyond its documented limits."""


class CacheMismatchError(RuntimeError):
    """A distance cache exists but was built under different parameters or data."""


class NumericalOverflowError(ArithmeticError):
    """A computation overflowed to infinity instead of returning a finite value."""
