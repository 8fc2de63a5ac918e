"""Exception types raised across the package."""


class PosoptError(Exception):
    """Base class for all package errors."""


class DomainError(PosoptError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidGame(PosoptError, ValueError):
    pass


class InvalidSpec(PosoptError, ValueError):
    """An instance specification violates one of its parameter invariants."""


class ConditionViolated(PosoptError):
    """A positive-mass target has more than one proximity minimizer."""

    def __init__(self, target, minimizers=()):
        self.target = target
        self.minimizers = tuple(minimizers)
        super().__init__(
            f"target {target!r} has {len(self.minimizers)} tied minimizers: {list(self.minimizers)!r}"
        )


class CapExceeded(PosoptError):
    pass


class NTooSmall(PosoptError, ValueError):
    pass


class BudgetExceeded(PosoptError):
    pass


class SupportMismatch(PosoptError, ValueError):
    pass


class OutOfRange(PosoptError, ValueError):
    pass
