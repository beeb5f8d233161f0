"""Exception hierarchy shared by all coupling_lab modules."""

import numpy as np


class CouplingLabError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CouplingLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateGeometryError(DomainError):
    """An array element coincides with the single-antenna endpoint."""


class ConfigError(CouplingLabError, ValueError):
    """A scenario configuration is malformed (unknown key, bad value)."""


class ConditioningError(CouplingLabError, np.linalg.LinAlgError):
    """A matrix that must be inverted is numerically singular.

    ``block`` names the offending matrix and ``condition`` carries a
    1-norm condition-number estimate of it (``inf`` when exactly singular).
    """

    def __init__(self, block, condition, message=None):
        self.block = block
        self.condition = condition
        if message is None:
            message = f"{block} is numerically singular (cond_1 ~ {condition:.3e})"
        super().__init__(message)


class NearSingularUpdateError(ConditioningError):
    """The Sherman-Morrison denominator of a rank-one update vanishes."""


class SweepError(CouplingLabError):
    """A sweep row failed; ``n`` identifies the offending array size."""

    def __init__(self, n, cause):
        self.n = n
        self.cause = cause
        super().__init__(f"sweep aborted at N={n}: {cause}")


class CrossCheckWarning(UserWarning):
    """Two independent evaluation paths disagree beyond tolerance."""
