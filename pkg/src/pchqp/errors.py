"""Exception types shared across the package."""


class DataError(ValueError):
    """Invalid user-supplied data: bad dimensions, parse failures, parameters out of range."""


class NumericalError(RuntimeError):
    """A numerical routine failed: non-convergence, divergence, or an enumeration cap hit."""
