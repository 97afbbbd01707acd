"""Exception types shared across the package."""


class StpError(Exception):
    """Base class for all library errors."""


class NotSubinterval(StpError):
    pass


class OutOfDomain(StpError):
    pass


class InvalidCover(StpError):
    pass


class NotACover(StpError):
    pass


class IncompatibleSections(StpError):
    """Raised when sections disagree on an overlap.

    Carries the first conflict as (time, fluent, value_a, value_b).
    """

    def __init__(self, time: int, fluent: str, value_a: bool, value_b: bool):
        super().__init__(
            f"sections conflict at t={time} on {fluent!r}: {value_a} vs {value_b}"
        )
        self.conflict = (time, fluent, value_a, value_b)


class VocabularyMismatch(StpError):
    pass


class UnknownFluent(StpError):
    pass


class UnknownAction(StpError):
    pass


class UnknownAgent(StpError):
    pass


class PreconditionFailed(StpError):
    def __init__(self, fluent: str, expected: bool, found: bool, step: int | None = None):
        where = "" if step is None else f" at step {step}"
        super().__init__(
            f"precondition{where}: expected {fluent!r}={expected}, found {found}"
        )
        self.fluent = fluent
        self.expected = expected
        self.found = found
        self.step = step


class TimeOutsideDomain(StpError):
    pass


class TemporalOverlap(StpError):
    pass


class NoExplanationWithinBound(StpError):
    """The observed state is unreachable within the length bound.

    Signals that the hypothesis space is too small, not an internal fault.
    """

    def __init__(self, bound: int):
        super().__init__(f"no action sequence of length <= {bound} explains the discrepancy")
        self.bound = bound


class NotObstructed(StpError):
    pass


class ShapeMismatch(StpError):
    pass


class DimensionTooLarge(StpError):
    pass


class UnstableStepSize(StpError):
    pass


class ScenarioInvalid(StpError):
    """Scenario failed validation; carries one 'field.path: message' per problem."""

    def __init__(self, diagnostics: list[str]):
        super().__init__("; ".join(diagnostics))
        self.diagnostics = list(diagnostics)
