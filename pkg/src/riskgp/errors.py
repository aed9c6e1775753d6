"""Exception types shared across the package."""


class ContractError(ValueError):
    """An argument violates a documented precondition (bad lengths, ranges, ...)."""


class DomainError(ValueError):
    """A point lies outside the sample space [0, 1]."""


class DegenerateCaseError(ValueError):
    """A closed-form expression is singular for the given inputs."""


class VetoViolation(ValueError):
    """A goal deviation exceeds the veto threshold; the strategy is infeasible."""

    def __init__(self, criterion_index, deviation, threshold):
        self.criterion_index = criterion_index
        self.deviation = deviation
        self.threshold = threshold
        super().__init__(
            f"criterion {criterion_index}: deviation {deviation:.6g} exceeds "
            f"veto threshold {threshold:.6g}"
        )


class QuadratureError(ArithmeticError):
    """Adaptive integration ran out of budget before reaching the tolerance.

    Carries the best estimate achieved so far and its error bound.
    """

    def __init__(self, estimate, error, intervals):
        self.estimate = estimate
        self.error = error
        self.intervals = intervals
        super().__init__(
            f"integration budget exhausted after {intervals} subintervals: "
            f"estimate {estimate!r} with error bound {error:.3g}"
        )


class ConfigError(ValueError):
    """A run configuration file is malformed; the message names the offending key."""
