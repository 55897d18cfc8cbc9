"""
Custom exceptions for submodular optimization errors.
"""


class SubmodError(Exception):
    """Base exception for solver errors."""
    pass


class DomainMismatchError(SubmodError):
    """Raised when a subset or tuple lives on a different ground set."""
    pass


class ArityMismatchError(SubmodError):
    """Raised when a tuple, matrix or oracle list has the wrong arity."""
    pass


class PreconditionError(SubmodError):
    """Raised when an operation's precondition does not hold."""
    pass


class UnsupportedOperationError(SubmodError):
    """Raised when an operation is not defined for the given structure."""
    pass


class CapExceededError(SubmodError):
    """Raised when a brute-force enumeration would exceed its cap."""

    def __init__(self, what: str, requested, cap):
        super().__init__(f"{what}: {requested} exceeds the brute-force cap {cap}")
        self.what = what
        self.requested = requested
        self.cap = cap


class InfeasibleError(SubmodError):
    """Raised when no feasible solution exists."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class InvalidRingError(SubmodError):
    """Raised when a ring family representation is not closed."""
    pass


class ConvergenceError(SubmodError):
    """Raised when an iterative solver hits its iteration cap."""

    def __init__(self, message: str, best_bound=None):
        super().__init__(message)
        self.best_bound = best_bound


class StageError(SubmodError):
    """Raised when a rounding stage produces an infeasible intermediate."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class BoundViolationError(SubmodError):
    """Raised when a certified approximation bound fails re-verification."""

    def __init__(self, message: str, record=None):
        super().__init__(message)
        self.record = record


class InstanceParseError(SubmodError):
    """Raised when an instance file cannot be parsed."""

    def __init__(self, message: str, line=None, field=None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field
