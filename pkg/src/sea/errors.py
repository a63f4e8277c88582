"""Exception hierarchy shared across the package.

CLI exit codes: ConfigError -> 2, DataError -> 3, anything else -> 4.
"""


class SeaError(Exception):
    """Base class for all package errors."""


class ConfigError(SeaError):
    """Invalid configuration or arguments."""


class DataError(SeaError):
    """Malformed or insufficient input data."""


class GraphSizeError(ConfigError):
    """Operation guarded by a maximum node count."""


class OrientationConflictError(SeaError):
    """Propagation attempted to orient an edge against an existing mark."""

    def __init__(self, i, j):
        super().__init__(f"conflicting orientation on pair ({i}, {j})")
        self.pair = (i, j)


class SingularCovarianceError(DataError):
    """Covariance matrix is singular and shrinkage was disabled."""
