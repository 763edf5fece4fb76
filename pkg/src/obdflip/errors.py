"""Exception types shared across the package.

Every error raised by the library derives from :class:`ObdflipError`, so
callers (and the command-line layer, which maps them to exit code 2) can
catch one base class.
"""

from __future__ import annotations


class ObdflipError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatchError(ObdflipError):
    """Vector or matrix shapes that must agree do not."""


class DegenerateMeansError(ObdflipError):
    """Group mean vectors coincide in some coordinate, so the per-coordinate
    rescaling (mu - mu_K) / (mu_H - mu_K) is undefined there."""

    def __init__(self, indices):
        self.indices = tuple(int(i) for i in indices)
        super().__init__(
            "group means are equal in coordinate(s) "
            f"{list(self.indices)} (0-based); cannot rescale"
        )


class RankDeficientError(ObdflipError):
    """Design matrix is rank deficient or numerically ill conditioned."""


class TooFewRowsError(ObdflipError):
    """Not enough observations to fit the requested regression."""


class NonPositiveParameterError(ObdflipError):
    """A parameter that must be strictly positive is not."""


class QuadratureNotConvergedError(ObdflipError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class InvalidDrawCountError(ObdflipError):
    """Monte Carlo draw count below the supported minimum."""


class PointFitFailedError(ObdflipError):
    """The point (full-sample) fit failed, so no bootstrap can be attached."""


class TooManyFailedReplicatesError(ObdflipError):
    """More than the tolerated share of bootstrap replicates failed to fit."""


class ZeroStandardError(ObdflipError):
    """A Wald statistic was requested with a nonpositive standard error."""


class UnknownColumnError(ObdflipError):
    """A configuration references a column the table does not have."""


class EmptyDatasetError(ObdflipError):
    """The input table has no data rows."""


class MissingColumnError(ObdflipError):
    """A required column is absent from the input file."""


class FewerThanTwoGroupsError(ObdflipError):
    """After mapping, one or both group labels match no rows."""


class AllRowsDroppedError(ObdflipError):
    """Listwise deletion removed every row."""
