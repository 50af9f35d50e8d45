"""Exception types shared across the package."""


class RenydivError(Exception):
    """Base class for all package-specific errors."""


class DomainError(RenydivError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class ShapeError(RenydivError, ValueError):
    """Inputs have incompatible sizes or supports."""


class ValidationError(RenydivError, ValueError):
    """A data structure violates its invariants (e.g. malformed input file)."""


class UsageError(RenydivError, ValueError):
    """The operation was called in an unsupported mode or configuration."""


class DegenerateStatisticError(RenydivError):
    """The requested CLT is degenerate for this input.

    Raised with a pointer to the appropriate degenerate-regime test
    (uniformity_test for entropy, equality_test for divergence).
    """


class UndefinedStatisticError(RenydivError):
    """The normalized statistic is undefined at this (m, n) combination."""


class NoSignalError(RenydivError):
    """Noise filtering removed everything; no shared signal support remains."""
