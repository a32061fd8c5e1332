"""Exception hierarchy shared by every bmolab module.

Precondition failures derive from :class:`PreconditionError` so the CLI can
map them onto a single exit code.  :class:`BudgetExceeded` is kept separate
because a search that is too large is not a malformed request.
"""

from __future__ import annotations


class BmoLabError(Exception):
    """Base class for all library errors."""


class PreconditionError(BmoLabError, ValueError):
    """An operation was called with inputs outside its contract."""


class EmptyRegion(PreconditionError):
    """The region or set has zero measure."""


class DimMismatch(PreconditionError):
    """Objects living in different dimensions were combined."""


class NegativeValues(PreconditionError):
    """A routine that needs a non-negative function received negative values."""


class LipschitzViolation(PreconditionError):
    """A supplied map has slope larger than one somewhere."""


class GridIncompatible(PreconditionError):
    """A transformed region or function cannot be represented on a dyadic grid."""


class DegenerateSet(PreconditionError):
    """A set fills none or all of the region it is supposed to split."""


class HypothesisViolated(PreconditionError):
    """A theorem's hypothesis does not hold for the supplied data."""


class UnsupportedKind(PreconditionError):
    """The region collection is recognised but not implemented."""


class PairUnsupported(PreconditionError):
    """The (tau, s) pair is neither certified nor empirically supported."""


class InvalidConstants(PreconditionError):
    """Inequality constants violate basic admissibility (for example B < 1)."""


class BudgetExceeded(BmoLabError):
    """An exhaustive search would examine more configurations than allowed."""
