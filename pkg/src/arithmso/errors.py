"""Shared exception types for the arithmso package."""


class ArithmsoError(Exception):
    """Base class for all package-specific errors."""


class AlphabetMismatch(ArithmsoError):
    pass


class FinitePredicate(ArithmsoError):
    pass


class ComparatorUnknown(ArithmsoError):
    pass


class BudgetExceeded(ArithmsoError):
    pass


class ResourceExceeded(ArithmsoError):
    """State blowup beyond the configured cap during compilation."""


class NotFirstOrder(ArithmsoError):
    pass


class ScopeError(ArithmsoError):
    pass


class FormulaSyntaxError(ArithmsoError):
    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at {position})")
        self.position = position


class MissingWitness(ArithmsoError):
    pass


class OracleUnknown(ArithmsoError):
    """A tri-state oracle returned 'unknown'; surfaced, never swallowed."""


class PrecisionExhausted(ArithmsoError):
    """Interval refinement hit the configured precision cap."""


class IncompleteBasis(ArithmsoError):
    pass


class ValidationFailed(ArithmsoError):
    pass


class PreconditionFailed(ArithmsoError):
    pass


class ConditionFailed(ArithmsoError):
    """A required condition (A)/(B)/(C) does not hold for the input."""


class DegenerateInput(ArithmsoError):
    pass


class ModeInapplicable(ArithmsoError):
    pass


class SimultaneousHit(ArithmsoError):
    pass


class OutputFinite(ArithmsoError):
    """A transducer produced no further output within the progress budget."""
