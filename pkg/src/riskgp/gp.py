"""Goal programming: satisfaction functions, deviation splits, objectives.

A goal program pairs each criterion with an aspiration level.  At a
strategy the achievement either meets its goal or misses on exactly one
side; the miss is split into the complementary pair (over, under) with
product zero.  Objectives aggregate the misses directly (plain, weighted)
or through a satisfaction function mapping miss size into [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, VetoViolation
from .payoff import Strategy
from .risk import RiskModel

SATISFACTION_KINDS = ("linear-ramp", "paper-inverse-quadratic")
OBJECTIVE_KINDS = ("plain-gp", "weighted-gp", "satisfaction-gp")


@dataclass(frozen=True)
class SatisfactionSpec:
    """Nonincreasing map from deviation size to satisfaction in [0, 1].

    Flat at 1 up to the indifference threshold, 0 from the dissatisfaction
    threshold on, undefined past the veto threshold.  The inverse-quadratic
    kind keeps the published 1/(0.01 d^2) tail but caps the value into
    [0, 1] and floors d at eps so d = 0 maps to 1 (the published形 form
    diverges there).
    """

    kind: str
    xi_i: float
    xi_d: float
    xi_v: float
    eps: float = 1e-6

    def __post_init__(self):
        if self.kind not in SATISFACTION_KINDS:
            raise ContractError(f"unknown satisfaction kind {self.kind!r}")
        if not 0.0 <= self.xi_i <= self.xi_d <= self.xi_v:
            raise ContractError(
                "thresholds must satisfy 0 <= indifference <= dissatisfaction <= veto"
            )
        if not self.eps > 0.0:
            raise ContractError("eps must be positive")

    @classmethod
    def ramp(cls, xi_i, xi_d, xi_v=None):
        xi_v = xi_d if xi_v is None else xi_v
        return cls("linear-ramp", float(xi_i), float(xi_d), float(xi_v))

    @classmethod
    def inverse_quadratic(cls, xi_v=60.0, eps=1e-6):
        # The cap engages at d = 10, which plays the indifference role.
        return cls("paper-inverse-quadratic", 10.0, float(xi_v), float(xi_v), float(eps))

    def __call__(self, delta: float) -> float:
        return satisfaction(self, delta)

    def many(self, deltas: np.ndarray) -> np.ndarray:
        deltas = np.asarray(deltas, dtype=np.float64)
        if self.kind == "linear-ramp":
            if self.xi_d == self.xi_i:
                return np.where(deltas <= self.xi_i, 1.0, 0.0)
            out = (self.xi_d - deltas) / (self.xi_d - self.xi_i)
            return np.clip(out, 0.0, 1.0)
        return np.minimum(1.0, 1.0 / (0.01 * np.maximum(deltas, self.eps) ** 2))

    def to_config(self):
        return {
            "kind": "paper" if self.kind == "paper-inverse-quadratic" else "linear-ramp",
            "xi_i": self.xi_i, "xi_d": self.xi_d, "xi_v": self.xi_v, "eps": self.eps,
        }

    @classmethod
    def from_config(cls, spec):
        kind = spec.get("kind", "linear-ramp")
        if kind in ("paper", "inverse-quadratic", "paper-inverse-quadratic"):
            out = cls.inverse_quadratic(spec.get("xi_v", 60.0), spec.get("eps", 1e-6))
            if "xi_i" in spec or "xi_d" in spec:
                out = cls("paper-inverse-quadratic",
                          float(spec.get("xi_i", out.xi_i)),
                          float(spec.get("xi_d", out.xi_d)),
                          float(spec.get("xi_v", out.xi_v)),
                          float(spec.get("eps", out.eps)))
            return out
        if kind in ("linear-ramp", "ramp", "linear"):
            try:
                return cls.ramp(spec["xi_i"], spec["xi_d"], spec.get("xi_v"))
            except KeyError as missing:
                raise ContractError(f"linear-ramp satisfaction needs {missing}") from None
        raise ContractError(f"unknown satisfaction kind {kind!r}")


def satisfaction(spec: SatisfactionSpec, delta) -> float:
    """Satisfaction of one deviation; only defined on [0, veto threshold]."""
    delta = float(delta)
    if delta < 0.0 or delta > spec.xi_v:
        raise ContractError(f"deviation {delta!r} outside [0, {spec.xi_v}]")
    if spec.kind == "linear-ramp":
        if delta <= spec.xi_i:
            return 1.0
        if delta >= spec.xi_d:
            return 0.0
        return (spec.xi_d - delta) / (spec.xi_d - spec.xi_i)
    return min(1.0, 1.0 / (0.01 * max(delta, spec.eps) ** 2))


@dataclass(frozen=True)
class DeviationPair:
    """Complementary goal miss: over- and under-achievement, product zero."""

    plus: float
    minus: float

    def __post_init__(self):
        if self.plus < 0.0 or self.minus < 0.0:
            raise ContractError("deviations must be nonnegative")
        if self.plus != 0.0 and self.minus != 0.0:
            raise ContractError("deviations must be complementary (one side zero)")


def split_deviation(achievement, goal, xi_v) -> DeviationPair:
    """The unique complementary pair with achievement + plus - minus = goal.

    Raises VetoViolation if the miss exceeds the veto threshold; the
    caller marks the strategy infeasible rather than clamping.
    """
    gap = float(goal) - float(achievement)
    if abs(gap) > xi_v:
        raise VetoViolation(None, abs(gap), xi_v)
    if gap >= 0.0:
        return DeviationPair(gap, 0.0)
    return DeviationPair(0.0, -gap)


@dataclass(frozen=True)
class GoalProgram:
    """Goals, weights and a satisfaction spec over a risk model's criteria."""

    model: RiskModel
    goals: tuple[float, ...]
    weights_plus: tuple[float, ...]
    weights_minus: tuple[float, ...]
    satisfaction: SatisfactionSpec
    objective_kind: str = "satisfaction-gp"
    sense: str = ""

    def __post_init__(self):
        n = self.model.n
        if len(self.goals) != n:
            raise ContractError(f"need {n} goals, got {len(self.goals)}")
        if len(self.weights_plus) != n or len(self.weights_minus) != n:
            raise ContractError(f"need {n} weights on each side")
        ws = self.weights_plus + self.weights_minus
        if any(w < 0.0 for w in ws):
            raise ContractError("weights must be nonnegative")
        if not any(w > 0.0 for w in ws):
            raise ContractError("at least one weight must be positive")
        if self.objective_kind not in OBJECTIVE_KINDS:
            raise ContractError(f"unknown objective kind {self.objective_kind!r}")
        if not self.sense:
            object.__setattr__(
                self, "sense",
                "max" if self.objective_kind == "satisfaction-gp" else "min",
            )
        if self.sense not in ("min", "max"):
            raise ContractError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if self.objective_kind != "satisfaction-gp" and self.sense != "min":
            raise ContractError("deviation-sum objectives are minimized")

    @property
    def maximize(self) -> bool:
        return self.sense == "max"

    # -- evaluation -----------------------------------------------------------

    def deviations_of(self, achievements) -> tuple[DeviationPair, ...]:
        return tuple(
            split_deviation(f, g, self.satisfaction.xi_v)
            for f, g in zip(achievements, self.goals)
        )

    def objective_of(self, deviations) -> float:
        plus = np.array([d.plus for d in deviations])
        minus = np.array([d.minus for d in deviations])
        if self.objective_kind == "plain-gp":
            return float(np.sum(plus + minus))
        wp = np.asarray(self.weights_plus)
        wm = np.asarray(self.weights_minus)
        if self.objective_kind == "weighted-gp":
            return float(plus @ wp + minus @ wm)
        F = self.satisfaction.many
        return float(F(plus) @ wp + F(minus) @ wm)

    def objective_grid(self, achievements: np.ndarray):
        """Vectorized objective over precomputed achievements (G, n).

        Returns (values, feasible); infeasible rows carry the worst value
        for the program's sense so reductions can ignore them.
        """
        goals = np.asarray(self.goals)
        gap = goals[None, :] - np.asarray(achievements)
        feasible = np.all(np.abs(gap) <= self.satisfaction.xi_v, axis=1)
        plus = np.maximum(gap, 0.0)
        minus = np.maximum(-gap, 0.0)
        if self.objective_kind == "plain-gp":
            vals = np.sum(plus + minus, axis=1)
        elif self.objective_kind == "weighted-gp":
            vals = plus @ np.asarray(self.weights_plus) + minus @ np.asarray(self.weights_minus)
        else:
            F = self.satisfaction.many
            vals = F(plus) @ np.asarray(self.weights_plus) \
                + F(minus) @ np.asarray(self.weights_minus)
        sentinel = -np.inf if self.maximize else np.inf
        vals = np.where(feasible, vals, sentinel)
        return vals, feasible

    def to_config(self):
        return {
            "goals": list(self.goals),
            "weights_plus": list(self.weights_plus),
            "weights_minus": list(self.weights_minus),
            "satisfaction": self.satisfaction.to_config(),
            "objective": self.objective_kind,
            "sense": self.sense,
        }


@dataclass(frozen=True)
class GoalEvaluation:
    achievements: tuple[float, ...]
    deviations: tuple[DeviationPair, ...]
    objective: float | None
    feasible: bool


def evaluate(gp: GoalProgram, alpha: Strategy) -> GoalEvaluation:
    """Achievements, deviation splits and objective at one strategy."""
    achievements = tuple(float(v) for v in gp.model.achievement(alpha))
    try:
        deviations = gp.deviations_of(achievements)
    except VetoViolation:
        return GoalEvaluation(achievements, (), None, False)
    return GoalEvaluation(achievements, deviations, gp.objective_of(deviations), True)


def objective(gp: GoalProgram, alpha: Strategy) -> float:
    """Objective value; veto-infeasible strategies get the worst sentinel."""
    ev = evaluate(gp, alpha)
    if not ev.feasible:
        return -math.inf if gp.maximize else math.inf
    return ev.objective
