"""Scalar risk measures and the multi-criterion risk model.

Every criterion kind has a derived evaluator (quadrature or bisection
against the defining formula; the default) and, where the worked examples
ship a closed-form expression, a literal evaluator that reproduces that
expression exactly as printed -- including its known internal
inconsistencies, which the audit quantifies.  Criterion mode ``"oracle"``
selects the derived evaluator, ``"paper"`` the literal one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backends import kernels
from .errors import ContractError, DegenerateCaseError
from .payoff import PiecewisePolynomial, Strategy, aligned_coeffs, combine, ess_inf, pointwise_leq
from .scenario import Scenario, expect_poly, expect_quadrature

CRITERION_KINDS = ("expected-loss", "entropic", "var-sum", "var-of-sum", "worst-case-sum")
MODES = ("oracle", "paper")

#: Quantile bisection tolerance (absolute, in payoff units).
VAR_TOL = 1e-10
VAR_MAX_ITER = 200


# ---------------------------------------------------------------------------
# scalar measures: derived evaluators
# ---------------------------------------------------------------------------

def expected_loss(s: Scenario, p: PiecewisePolynomial) -> float:
    """Negative expectation under the scenario."""
    return -expect_poly(s, p)


def sup_expected_loss(alpha: Strategy, payoffs, scenarios) -> float:
    """Worst expected loss of the combined payoff over a scenario family."""
    scenarios = tuple(scenarios)
    if not scenarios:
        raise ContractError("need at least one scenario")
    combined = combine(alpha, payoffs)
    return max(expected_loss(s, combined) for s in scenarios)


def entropic_risk(s: Scenario, aversion: float, p: PiecewisePolynomial) -> float:
    """Exponential-utility certainty equivalent: ln E[e^{-lam X}] / lam.

    The integrand is shifted by its maximum before exponentiation so the
    quadrature never overflows; the shift is added back inside the log.
    """
    if not (math.isfinite(aversion) and aversion > 0.0):
        raise ContractError(f"risk aversion must be > 0, got {aversion!r}")
    shift = -aversion * ess_inf(p)  # max over [0,1] of -lam*p

    def integrand(ws):
        return np.exp(-aversion * p.evaluate_many(ws) - shift)

    val = expect_quadrature(s, integrand, breakpoints=p.breaks[1:-1])
    return (shift + math.log(val)) / aversion


def var_numeric(level: float, p: PiecewisePolynomial) -> float:
    """Value-at-risk: minus the sup of thresholds with sublevel mass <= level.

    Monotone bisection against the exact sublevel measure; robust to flat
    quantile regions because the feasible endpoint is tracked.
    """
    if not (0.0 < level < 1.0):
        raise ContractError(f"quantile level must be in (0, 1), got {level!r}")
    q = kernels.quantile_sup(p._breaks_arr, p._coeffs_arr, level, VAR_TOL, VAR_MAX_ITER)
    return -float(q)


def var_sum(alpha: Strategy, payoffs, level: float) -> float:
    """Weighted sum of the per-asset value-at-risk numbers."""
    payoffs = tuple(payoffs)
    if len(alpha) != len(payoffs):
        raise ContractError("strategy / payoff length mismatch")
    return math.fsum(a * var_numeric(level, p) for a, p in zip(alpha, payoffs))


def var_of_sum(alpha: Strategy, payoffs, level: float) -> float:
    """Value-at-risk of the combined payoff."""
    return var_numeric(level, combine(alpha, payoffs))


def worst_case_sum(alpha: Strategy, payoffs) -> float:
    """Weighted sum of the per-asset worst-case risks (-ess inf)."""
    payoffs = tuple(payoffs)
    if len(alpha) != len(payoffs):
        raise ContractError("strategy / payoff length mismatch")
    return math.fsum(a * -ess_inf(p) for a, p in zip(alpha, payoffs))


# ---------------------------------------------------------------------------
# literal evaluators: the printed closed forms, verbatim
# ---------------------------------------------------------------------------

def expected_loss_literal(index: float, alpha) -> float:
    """Printed three-asset closed form for the tilted expected loss.

    The quadratic-asset coefficient of this expression disagrees with the
    defining integral (it evaluates negative where the integral is ~0.83
    at index 2); the audit records the gap.  Kept verbatim on purpose.
    """
    a1, a2, a3 = _three(alpha)
    li = math.log(index)
    c2 = 2.0 * (1.0 / li - 1.0 / (index - 1.0))
    c3 = 3.0 * (1.0 / li - 1.0 / (index - 1.0) - 2.0 / ((index - 1.0) * li))
    return -(a1 + a2 * c2 + a3 * c3)


def entropic_literal(index: float, aversion: float, alpha) -> float:
    """Printed three-asset closed form for the entropic risk.

    Verbatim, including the aversion-scaled cash term and the plain
    exponential denominator; see entropic_literal_terms for the
    decomposition the audit reports.
    """
    t = entropic_literal_terms(index, aversion, alpha)
    return t["normalizer_term"] + t["cash_term"] + t["log_bracket"]


def entropic_literal_terms(index: float, aversion: float, alpha) -> dict:
    """The printed entropic expression, split into its three summands."""
    a1, a2, a3 = _three(alpha)
    i = float(index)
    lam = float(aversion)
    li = math.log(i)
    b1 = 2.0 * a2 * lam + li
    b2 = 2.0 * a2 * lam + 4.0 * a3 * lam + li
    bracket = (1.0 - math.exp(-b1 / 4.0)) / b1 \
        + (math.exp(-b2 / 4.0) - math.exp(-b2)) / (math.exp(a3) * b2)
    return {
        "normalizer_term": math.log(i * li) / lam - math.log(i - 1.0) / lam,
        "cash_term": -lam * a1,
        "log_bracket": math.log(bracket),
    }


def entropic_corrected_terms(index: float, aversion: float, alpha) -> dict:
    """The same decomposition with each printed slip repaired.

    Cash term -lam*a1 becomes -a1; the denominator e^{a3} becomes the
    factor e^{lam*a3}; the bracket's log is scaled by 1/lam.  Summing the
    corrected terms reproduces the derived entropic risk of the worked
    basket exactly.
    """
    a1, a2, a3 = _three(alpha)
    i = float(index)
    lam = float(aversion)
    li = math.log(i)
    b1 = 2.0 * a2 * lam + li
    b2 = 2.0 * a2 * lam + 4.0 * a3 * lam + li
    bracket = (1.0 - math.exp(-b1 / 4.0)) / b1 \
        + math.exp(lam * a3) * (math.exp(-b2 / 4.0) - math.exp(-b2)) / b2
    return {
        "normalizer_term": math.log(i * li) / lam - math.log(i - 1.0) / lam,
        "cash_term": -a1,
        "log_bracket": math.log(bracket) / lam,
    }


#: The quantile level the printed case table is specialized to.
CASE_TABLE_LEVEL = 0.05


def var_case_table(alpha) -> float:
    """Printed four-case expression for the combined quantile, verbatim.

    Only valid with a positive weight on the curved asset; the printed
    expressions divide by it.  Note the table reports the quantile itself
    (the negative of the value-at-risk under the definition); the audit
    quantifies the sign convention.
    """
    a1, a2, a3 = _three(alpha)
    if a3 <= 0.0:
        raise DegenerateCaseError(
            "the printed case expressions divide by the third weight; "
            "fall back to var_numeric when it is zero"
        )
    if a2 <= 1.9 * a3:
        return 0.9 * a2 - 1.61 * a3
    if a2 <= 2.0 * a3:
        return -4.0 * a3 * (a2 / (4.0 * a3) - 0.475) ** 2 \
            + a2 * a2 / (2.0 * a3) + 2.0 * a3 - 1.95 * a2
    if a2 < 2.1 * a3:
        return -0.9 * a2 + 2.99 * a3
    return -4.0 * a3 * (a2 / (4.0 * a3) + 0.475) ** 2 \
        + a2 * a2 / (2.0 * a3) + 2.0 * a3 - 0.05 * a2


def _three(alpha):
    ws = alpha.weights if isinstance(alpha, Strategy) else tuple(alpha)
    if len(ws) != 3:
        raise ContractError("the literal closed forms are three-asset expressions")
    return float(ws[0]), float(ws[1]), float(ws[2])


# ---------------------------------------------------------------------------
# criteria and the model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Criterion:
    """One scalar risk criterion: a kind plus its parameters and mode."""

    kind: str
    index: float | None = None      # scenario index (expected-loss, entropic)
    aversion: float | None = None   # entropic risk aversion
    level: float | None = None      # quantile level (var kinds)
    mode: str = "oracle"

    def __post_init__(self):
        if self.kind not in CRITERION_KINDS:
            raise ContractError(f"unknown criterion kind {self.kind!r}")
        if self.mode not in MODES:
            raise ContractError(f"unknown criterion mode {self.mode!r}")
        if self.kind in ("expected-loss", "entropic"):
            if self.index is None or not self.index > 1.0:
                raise ContractError(f"{self.kind} needs a scenario index > 1")
        if self.kind == "entropic":
            if self.aversion is None or not self.aversion > 0.0:
                raise ContractError("entropic criteria need a risk aversion > 0")
        if self.kind in ("var-sum", "var-of-sum"):
            if self.level is None or not 0.0 < self.level < 1.0:
                raise ContractError("var criteria need a quantile level in (0, 1)")

    def label(self) -> str:
        bits = [self.kind]
        if self.index is not None:
            bits.append(f"i={self.index:g}")
        if self.aversion is not None:
            bits.append(f"aversion={self.aversion:g}")
        if self.level is not None:
            bits.append(f"level={self.level:g}")
        return "[" + ", ".join(bits) + "]"

    def to_config(self) -> dict:
        out = {"kind": self.kind, "mode": self.mode}
        if self.index is not None:
            out["i"] = self.index
        if self.aversion is not None:
            out["lambda"] = self.aversion
        if self.level is not None:
            out["level"] = self.level
        return out

    @classmethod
    def from_config(cls, spec, default_mode="oracle"):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ContractError("criterion spec needs a 'kind'")
        kind = spec["kind"]
        kw = {"kind": kind, "mode": spec.get("mode", default_mode)}
        if "i" in spec:
            kw["index"] = float(spec["i"])
        if kind == "entropic" and "lambda" in spec:
            kw["aversion"] = float(spec["lambda"])
        if kind in ("var-sum", "var-of-sum"):
            if "level" in spec:
                kw["level"] = float(spec["level"])
            elif "lambda" in spec:
                kw["level"] = float(spec["lambda"])
        return cls(**kw)


class RiskModel:
    """A fixed basket of payoffs plus an ordered list of criteria.

    Precomputes the shared knot grid and the per-criterion constants so
    that dense simplex sweeps stay cheap; evaluation is pure and
    reentrant.
    """

    def __init__(self, criteria, assets, name=""):
        self.criteria = tuple(criteria)
        self.assets = tuple(assets)
        self.name = name
        if not self.criteria:
            raise ContractError("a risk model needs at least one criterion")
        if not self.assets:
            raise ContractError("a risk model needs at least one asset")
        for c in self.criteria:
            if not isinstance(c, Criterion):
                raise ContractError("criteria must be Criterion values")
            if c.mode == "paper" and len(self.assets) != 3:
                raise ContractError("literal mode requires a three-asset basket")
        self.d = len(self.assets)
        self.n = len(self.criteria)
        self._breaks, self._stack = aligned_coeffs(self.assets)
        self._linear = {}
        for k, c in enumerate(self.criteria):
            vec = self._linear_coefficients(c)
            if vec is not None:
                self._linear[k] = vec

    # -- construction helpers ------------------------------------------------

    def _linear_coefficients(self, c: Criterion):
        """Coefficient vector v with criterion(alpha) = v . alpha, if linear."""
        if c.kind == "expected-loss":
            if c.mode == "paper":
                i = c.index
                li = math.log(i)
                c2 = 2.0 * (1.0 / li - 1.0 / (i - 1.0))
                c3 = 3.0 * (1.0 / li - 1.0 / (i - 1.0) - 2.0 / ((i - 1.0) * li))
                return -np.array([1.0, c2, c3])
            s = Scenario(c.index)
            return -np.array([expect_poly(s, p) for p in self.assets])
        if c.kind == "var-sum":
            if c.mode == "paper":
                return np.array([0.0, 0.9, 1.61])
            return np.array([var_numeric(c.level, p) for p in self.assets])
        if c.kind == "worst-case-sum":
            if c.mode == "paper":
                return np.array([0.0, 1.0, 2.0])
            return np.array([-ess_inf(p) for p in self.assets])
        return None

    @property
    def region_style(self) -> str:
        kinds = {c.kind for c in self.criteria}
        if kinds == {"var-sum", "var-of-sum"}:
            return "triangle"
        return "upper-box"

    @property
    def quantile_level(self):
        for c in self.criteria:
            if c.level is not None:
                return c.level
        return None

    # -- evaluation ------------------------------------------------------------

    def criterion_value(self, k: int, alpha: Strategy) -> float:
        """Criterion k at one strategy, through the configured mode."""
        c = self.criteria[k]
        if k in self._linear:
            return float(self._linear[k] @ np.asarray(alpha.weights))
        if c.kind == "entropic":
            if c.mode == "paper":
                return entropic_literal(c.index, c.aversion, alpha)
            return entropic_risk(Scenario(c.index), c.aversion, combine(alpha, self.assets))
        if c.kind == "var-of-sum":
            if c.mode == "paper":
                try:
                    return var_case_table(alpha)
                except DegenerateCaseError:
                    pass  # the printed forms are singular there; use the oracle
            return var_of_sum(alpha, self.assets, c.level)
        raise ContractError(f"unhandled criterion {c.label()}")  # pragma: no cover

    def achievement(self, alpha: Strategy) -> np.ndarray:
        """All criterion values at one strategy."""
        if len(alpha) != self.d:
            raise ContractError("strategy length does not match the basket")
        return np.array([self.criterion_value(k, alpha) for k in range(self.n)])

    def achievements_grid(self, alphas: np.ndarray) -> np.ndarray:
        """Criterion values for many strategies at once, shape (G, n).

        Linear criteria are one matrix product; the literal entropic form
        is vectorized; numeric quantiles of combinations run through the
        batch kernel.  Rows agree with `achievement` to float rounding.
        """
        alphas = np.asarray(alphas, dtype=np.float64)
        out = np.empty((len(alphas), self.n), dtype=np.float64)
        for k, c in enumerate(self.criteria):
            if k in self._linear:
                out[:, k] = alphas @ self._linear[k]
            elif c.kind == "entropic" and c.mode == "paper":
                out[:, k] = _entropic_literal_grid(c.index, c.aversion, alphas)
            elif c.kind == "entropic":
                s = Scenario(c.index)
                out[:, k] = [
                    entropic_risk(s, c.aversion, combine(Strategy(tuple(row)), self.assets))
                    for row in alphas
                ]
            elif c.kind == "var-of-sum":
                q = kernels.quantile_sup_batch(
                    self._breaks, self._stack, alphas, c.level, VAR_TOL, VAR_MAX_ITER
                )
                col = -np.asarray(q)
                if c.mode == "paper":
                    col = _case_table_grid(alphas, col)
                out[:, k] = col
            else:  # pragma: no cover
                raise ContractError(f"unhandled criterion {c.label()}")
        return out

    # -- payoff-space evaluation (used by the set-valued audits) -------------

    def criterion_on_payoffs(self, k: int, payoffs) -> float:
        """Criterion k applied to explicit component payoffs.

        Always uses the derived evaluators: the literal forms are
        functions of the weights alone and cannot see general positions.
        """
        payoffs = tuple(payoffs)
        if len(payoffs) != self.d:
            raise ContractError("position length does not match the basket")
        c = self.criteria[k]
        total = payoffs[0]
        for p in payoffs[1:]:
            total = total + p
        if c.kind == "expected-loss":
            return expected_loss(Scenario(c.index), total)
        if c.kind == "entropic":
            return entropic_risk(Scenario(c.index), c.aversion, total)
        if c.kind == "var-sum":
            return math.fsum(var_numeric(c.level, p) for p in payoffs)
        if c.kind == "var-of-sum":
            return var_numeric(c.level, total)
        if c.kind == "worst-case-sum":
            return math.fsum(-ess_inf(p) for p in payoffs)
        raise ContractError(f"unhandled criterion {c.label()}")  # pragma: no cover

    def to_config(self) -> dict:
        return {
            "assets": [p.to_config() for p in self.assets],
            "criteria": [c.to_config() for c in self.criteria],
        }


def _entropic_literal_grid(index, aversion, alphas):
    i = float(index)
    lam = float(aversion)
    li = math.log(i)
    a1 = alphas[:, 0]
    a2 = alphas[:, 1]
    a3 = alphas[:, 2]
    b1 = 2.0 * a2 * lam + li
    b2 = 2.0 * a2 * lam + 4.0 * a3 * lam + li
    bracket = (1.0 - np.exp(-b1 / 4.0)) / b1 \
        + (np.exp(-b2 / 4.0) - np.exp(-b2)) / (np.exp(a3) * b2)
    return math.log(i * li) / lam - math.log(i - 1.0) / lam - lam * a1 + np.log(bracket)


def _case_table_grid(alphas, oracle_col):
    """Vectorized printed case table; degenerate rows fall back to the oracle."""
    a2 = alphas[:, 1]
    a3 = alphas[:, 2]
    out = np.array(oracle_col, copy=True)
    ok = a3 > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(ok, a2 / (4.0 * np.where(ok, a3, 1.0)), 0.0)
        case1 = 0.9 * a2 - 1.61 * a3
        case2 = -4.0 * a3 * (ratio - 0.475) ** 2 + a2 * a2 / (2.0 * np.where(ok, a3, 1.0)) \
            + 2.0 * a3 - 1.95 * a2
        case3 = -0.9 * a2 + 2.99 * a3
        case4 = -4.0 * a3 * (ratio + 0.475) ** 2 + a2 * a2 / (2.0 * np.where(ok, a3, 1.0)) \
            + 2.0 * a3 - 0.05 * a2
    val = np.where(a2 <= 1.9 * a3, case1,
                   np.where(a2 <= 2.0 * a3, case2,
                            np.where(a2 < 2.1 * a3, case3, case4)))
    out[ok] = val[ok]
    return out


# ---------------------------------------------------------------------------
# axiom audit harness
# ---------------------------------------------------------------------------

AXIOM_TOL = 1e-8


@dataclass
class AxiomFinding:
    axiom: str
    passed: bool
    worst_violation: float
    witness: str | None = None
    checks: int = 0

    def to_json(self):
        return {
            "axiom": self.axiom,
            "passed": self.passed,
            "worst_violation": self.worst_violation,
            "witness": self.witness,
            "checks": self.checks,
        }


@dataclass
class AuditReport:
    subject: str
    findings: list[AxiomFinding] = field(default_factory=list)

    def finding(self, axiom: str) -> AxiomFinding:
        for f in self.findings:
            if f.axiom == axiom:
                return f
        raise KeyError(axiom)

    def passed(self, axiom: str) -> bool:
        return self.finding(axiom).passed

    def to_json(self):
        return {"subject": self.subject, "findings": [f.to_json() for f in self.findings]}


def _tally(name, instances, tol):
    """Fold (violation, witness) pairs into a finding; positive = violated."""
    worst = 0.0
    witness = None
    count = 0
    for viol, wit in instances:
        count += 1
        if viol > worst:
            worst = viol
            witness = wit
    return AxiomFinding(name, worst <= tol, worst, witness if worst > tol else None, count)


def axiom_audit(measure, sample_payoffs, sample_constants=(0.5, -0.25, 1.0),
                tol=AXIOM_TOL, subject="scalar measure") -> AuditReport:
    """Check the scalar axioms on sampled payoffs and constants.

    Monotonicity is checked on pointwise-ordered pairs only (found among
    the samples, plus pairs built by adding a nonnegative lift of one
    sample to another).  Findings carry the worst violation and a witness
    description; a violation is a *finding*, not an error.
    """
    ps = tuple(sample_payoffs)
    if len(ps) < 2:
        raise ContractError("need at least two sample payoffs")
    vals = [measure(p) for p in ps]

    def mono():
        pairs = []
        for a in range(len(ps)):
            for b in range(len(ps)):
                if a != b and pointwise_leq(ps[a], ps[b]):
                    pairs.append((f"#{a} <= #{b}", vals[a], vals[b]))
        for a in range(len(ps)):
            lift = ps[(a + 1) % len(ps)]
            bigger = ps[a] + (lift + (-ess_inf(lift)))
            pairs.append((f"#{a} <= #{a}+lift", vals[a], measure(bigger)))
        for tag, va, vb in pairs:
            # smaller payoff must carry the larger measure
            yield vb - va, f"{tag} pointwise but measure rose {va:.6g} -> {vb:.6g}"

    def convexity():
        for a in range(len(ps)):
            for b in range(a + 1, len(ps)):
                for t in (0.25, 0.5, 0.75):
                    mix = measure(t * ps[a] + (1.0 - t) * ps[b])
                    bound = t * vals[a] + (1.0 - t) * vals[b]
                    yield mix - bound, (
                        f"t={t}: measure(mix of #{a},#{b}) = {mix:.6g} "
                        f"> combination {bound:.6g}"
                    )

    def cash():
        for a in range(len(ps)):
            for c in sample_constants:
                got = measure(ps[a] + float(c))
                want = vals[a] - float(c)
                yield abs(got - want), (
                    f"payoff#{a}, c={c}: measure(X+c) = {got:.6g} vs "
                    f"measure(X)-c = {want:.6g}"
                )

    def homogeneity():
        for a in range(len(ps)):
            for scale in (0.5, 2.0, 3.0):
                got = measure(ps[a] * scale)
                want = scale * vals[a]
                yield abs(got - want), (
                    f"payoff#{a}, a={scale}: measure(aX) = {got:.6g} vs "
                    f"a*measure(X) = {want:.6g}"
                )

    def sublinearity():
        for a in range(len(ps)):
            for b in range(a + 1, len(ps)):
                got = measure(ps[a] + ps[b])
                bound = vals[a] + vals[b]
                yield got - bound, (
                    f"measure(#{a}+#{b}) = {got:.6g} > sum {bound:.6g}"
                )

    report = AuditReport(subject)
    report.findings.append(_tally("monotonicity", mono(), tol))
    report.findings.append(_tally("convexity", convexity(), tol))
    report.findings.append(_tally("cash-additivity", cash(), tol))
    report.findings.append(_tally("positive-homogeneity", homogeneity(), tol))
    report.findings.append(_tally("sublinearity", sublinearity(), tol))
    return report


def default_sample_payoffs(seed=0, count=6, degree=2):
    """Deterministic random single-piece payoffs for audit sampling."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        coeffs = rng.uniform(-1.0, 1.0, size=degree + 1)
        out.append(PiecewisePolynomial.single(tuple(coeffs)))
    return out


def quantile_convexity_pair(level=0.05):
    """Two payoffs whose mixture breaks quantile convexity at the level.

    Each loses 1 on its own slice of mass 0.8 * level, so each has zero
    value-at-risk, but the even mixture loses 1/2 on the union, whose mass
    exceeds the level.
    """
    width = 0.8 * level
    a = PiecewisePolynomial.from_pieces([(width, (-1.0,)), (1.0, (0.0,))])
    b = PiecewisePolynomial.from_pieces(
        [(width, (0.0,)), (2.0 * width, (-1.0,)), (1.0, (0.0,))]
    )
    return a, b
