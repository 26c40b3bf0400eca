"""Exception hierarchy shared by all archmend modules."""

from __future__ import annotations


class ArchmendError(Exception):
    """Base class for all errors raised by this package."""


class DocumentParseError(ArchmendError):
    """Input text is not a well-formed document (bad JSON, wrong shape)."""


class ModelValidationError(ArchmendError):
    """A model invariant is broken; the message names the offending element."""


class PairingError(ArchmendError):
    """Architecture and implementation cannot be paired."""


class UnknownViolationError(ArchmendError):
    """A violation id does not exist in the current state's violation set."""


class PreconditionError(ArchmendError):
    """A repair action's precondition does not hold on the given state."""


class LockViolationError(PreconditionError):
    """A repair tried to add or remove a rule whose pattern is locked."""


class ResourceLimitError(ArchmendError):
    """A bounded computation exceeded its configured limit."""

    def __init__(self, message: str, count: int):
        super().__init__(message)
        self.count = count


class SessionStateError(ArchmendError):
    """A session operation is not valid in the session's current state."""


class KnowledgeStoreError(ArchmendError):
    """The knowledge store could not be read or written."""


class GenerationError(ArchmendError):
    """A generator config is infeasible for case construction."""
