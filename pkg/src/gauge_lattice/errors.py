"""Exception types shared across the package."""


class LatticeError(ValueError):
    """Malformed graph, link, or path (missing links, bad matrices, ...)."""


class ConfigError(ValueError):
    """Invalid scenario/model configuration (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """Numerical failure: gap closing, divergence, step-size underflow (CLI exit code 3)."""


class GapClosingError(NumericalError):
    """A band gap (or loop-origin distance) fell below the guard tolerance."""
