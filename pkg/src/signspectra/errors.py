"""Exception types shared across the library."""


class ConfigurationError(ValueError):
    """A requested configuration is invalid (e.g. standardizing an
    infinite-variance population). Maps to CLI exit code 2."""


class NumericError(RuntimeError):
    """A numerical routine failed to meet its tolerance contract
    (quadrature non-convergence, fixed-point budget exhausted, grid too
    coarse). Maps to CLI exit code 3."""
