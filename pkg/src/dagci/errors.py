"""Exception types shared across the toolkit."""


class DagciError(Exception):
    """Base class for all toolkit errors."""


class ParseError(DagciError):
    """A text input does not follow its file format."""


class DuplicateLabelError(ParseError):
    """A node label is declared more than once."""


class UnknownLabelError(ParseError):
    """A label is referenced but never declared."""


class CycleError(DagciError):
    """An edge set contains a directed cycle (self-loops included)."""


class InvalidStatementError(DagciError):
    """A CI statement or variable-set argument violates its preconditions.

    Covers overlapping sets, empty sides, out-of-range indices, and
    too-small sets for mutual-independence checks.
    """


class NodeCountMismatchError(DagciError):
    """Two objects that must share a variable space do not."""


class TooManyNodesError(DagciError):
    """An enumeration-based operation was asked to exceed its node cap."""


class GuardExceededError(DagciError):
    """A joint state space would exceed the 2**24 state guard."""


class NotNormalizedError(DagciError):
    """A probability vector or table does not sum to one."""


class InvalidInstanceError(DagciError):
    """An implication instance violates its invariants."""


class AlreadyDuplicatedError(InvalidInstanceError):
    """The instance already carries a duplicated target variable."""


class MissingDuplicateError(InvalidInstanceError):
    """The instance lacks the duplicated target variable the compiler needs."""


class AntecedentViolatedError(DagciError):
    """A supplied distribution does not satisfy an instance's antecedents."""


class RangeTooLargeError(DagciError):
    """A function handed to the extension builder has too large a range."""
