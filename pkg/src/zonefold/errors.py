"""Shared exception types.

Every module raises from this taxonomy so callers (and the CLI exit-code
mapping) can distinguish bad input, negative verdicts and numerical failure.
"""


class ZonefoldError(Exception):
    """Base class for all package-specific errors."""


class RankDeficient(ZonefoldError):
    """Rows of an integer matrix are linearly dependent over the rationals."""


class NotPrimitive(ZonefoldError):
    """A chiral matrix whose rows do not extend to a lattice basis."""


class NotHermitian(ZonefoldError):
    """Matrix handed to the Hermitian eigensolver fails the symmetry check."""


class GridTooLarge(ZonefoldError):
    """Requested sampling grid exceeds the configured cell budget."""


class BandTouching(ZonefoldError):
    """Adjacent band closer than the isolation tolerance at the base point."""


class NotPositiveDefinite(ZonefoldError):
    """Symmetric matrix expected to be positive definite is not."""


class EmptyLevelSet(ZonefoldError):
    """A band edge has no level-set points, so no verdict is possible."""


class WrongShape(ZonefoldError):
    """Matrix dimensions incompatible with the requested operation."""


class ParseError(ZonefoldError):
    """Malformed input file; carries location context in the message."""


class ValidationError(ZonefoldError):
    """Structurally valid input that violates a semantic requirement."""


class ConvergenceError(ZonefoldError):
    """Iterative eigensolver failed to reach its threshold."""


class DisconnectedGraph(Warning):
    """Quotient construction produced a disconnected fundamental graph."""
