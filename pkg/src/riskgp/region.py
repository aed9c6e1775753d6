"""Set-valued risk regions ordered by the componentwise cone.

Three region shapes arise from the models in this package: products of
rays [r_i, +inf) (open-ended criterion stacks), compact boxes (confidence
rectangles), and the quantile-pair triangle spanned by (sum-of-quantiles,
quantile-of-sum) below the worst-case diagonal.  Each contains its own
componentwise-minimal "ideal" point, so the cone extension A + R^n_+ of
any region A is the upper box at A's ideal corner; the order test
``A <= B  iff  B subset A + R^n_+`` is exact corner arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .payoff import Strategy, ess_inf
from .risk import (AuditReport, AxiomFinding, RiskModel, var_numeric,
                   worst_case_sum, var_sum, var_of_sum)

#: Construction slack for triangle invariants (quantile bisection noise).
REGION_TOL = 1e-9

#: Below this span a triangle degenerates to a vertical segment.
DEGENERATE_SPAN = 1e-12


@dataclass(frozen=True)
class UpperBox:
    """The product of rays [lowers_i, +inf); recession cone is R^n_+."""

    lowers: tuple[float, ...]

    def __post_init__(self):
        if not self.lowers:
            raise ContractError("an upper box needs at least one coordinate")

    @property
    def dim(self):
        return len(self.lowers)

    @property
    def ideal(self):
        return self.lowers

    @property
    def bounded(self):
        return False

    def halfplanes(self):
        n = self.dim
        for i, lo in enumerate(self.lowers):
            a = [0.0] * n
            a[i] = -1.0
            yield tuple(a), -lo

    def vertices(self):
        return (self.lowers,)

    def to_json(self):
        return {"variant": "upper_box", "lowers": list(self.lowers)}


@dataclass(frozen=True)
class Box:
    """A compact axis-aligned box prod [lowers_i, uppers_i]."""

    lowers: tuple[float, ...]
    uppers: tuple[float, ...]

    def __post_init__(self):
        if not self.lowers or len(self.lowers) != len(self.uppers):
            raise ContractError("box bounds must be nonempty and equal length")
        for lo, hi in zip(self.lowers, self.uppers):
            if not lo <= hi:
                raise ContractError(f"box bound {lo!r} > {hi!r}")

    @property
    def dim(self):
        return len(self.lowers)

    @property
    def ideal(self):
        return self.lowers

    @property
    def bounded(self):
        return True

    def halfplanes(self):
        n = self.dim
        for i in range(n):
            a = [0.0] * n
            a[i] = -1.0
            yield tuple(a), -self.lowers[i]
            b = [0.0] * n
            b[i] = 1.0
            yield tuple(b), self.uppers[i]

    def vertices(self):
        return tuple(itertools.product(*zip(self.lowers, self.uppers)))

    def to_json(self):
        return {"variant": "box", "lowers": list(self.lowers), "uppers": list(self.uppers)}


@dataclass(frozen=True)
class Triangle:
    """The planar region between the quantile pair and the worst case.

    Points (x, y) with v_sum <= x <= w and v_joint <= y <= the chord from
    (v_sum, v_joint) to (w, w).  Ideal point (v_sum, v_joint); top corner
    (w, w).  When w == v_sum the region is the vertical segment
    {v_sum} x [v_joint, w].
    """

    v_sum: float
    v_joint: float
    w: float

    def __post_init__(self):
        if self.v_sum > self.w + REGION_TOL or self.v_joint > self.w + REGION_TOL:
            raise ContractError(
                f"triangle needs v_sum, v_joint <= w, got "
                f"({self.v_sum!r}, {self.v_joint!r}, {self.w!r})"
            )

    @property
    def dim(self):
        return 2

    @property
    def ideal(self):
        return (self.v_sum, self.v_joint)

    @property
    def bounded(self):
        return True

    @property
    def degenerate(self):
        return self.w - self.v_sum <= DEGENERATE_SPAN

    def halfplanes(self):
        yield (-1.0, 0.0), -self.v_sum
        yield (1.0, 0.0), max(self.w, self.v_sum)
        yield (0.0, -1.0), -self.v_joint
        if self.degenerate:
            yield (0.0, 1.0), max(self.w, self.v_joint)
        else:
            slope = (self.w - self.v_joint) / (self.w - self.v_sum)
            yield (-slope, 1.0), self.v_joint - slope * self.v_sum

    def vertices(self):
        if self.degenerate:
            return ((self.v_sum, self.v_joint), (self.v_sum, self.w))
        return (
            (self.v_sum, self.v_joint),
            (self.w, self.v_joint),
            (self.w, self.w),
        )

    def to_json(self):
        return {
            "variant": "triangle",
            "v_sum": self.v_sum,
            "v_joint": self.v_joint,
            "w": self.w,
        }


RiskRegion = UpperBox | Box | Triangle


def region_from_json(obj) -> RiskRegion:
    variant = obj.get("variant")
    if variant == "upper_box":
        return UpperBox(tuple(obj["lowers"]))
    if variant == "box":
        return Box(tuple(obj["lowers"]), tuple(obj["uppers"]))
    if variant == "triangle":
        return Triangle(obj["v_sum"], obj["v_joint"], obj["w"])
    raise ContractError(f"unknown region variant {variant!r}")


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def contains(region: RiskRegion, point, tol=0.0) -> bool:
    """Membership test via the region's halfplane description."""
    x = tuple(float(v) for v in point)
    if len(x) != region.dim:
        raise ContractError("point dimension does not match the region")
    for a, b in region.halfplanes():
        if sum(ai * xi for ai, xi in zip(a, x)) > b + tol:
            return False
    return True


def region_leq(A: RiskRegion, B: RiskRegion) -> bool:
    """Cone order: A <= B iff B lies inside A extended by R^n_+.

    A + R^n_+ is the upper box at A's ideal corner (every representable
    region contains its ideal point), so it suffices that every vertex of
    B dominates that corner componentwise.
    """
    if A.dim != B.dim:
        raise ContractError("regions must share a dimension")
    corner = A.ideal
    for v in B.vertices():
        for ci, vi in zip(corner, v):
            if vi < ci:
                return False
    return True


def line_infimum(A: RiskRegion, direction):
    """Componentwise infimum of the region's slice along a ray from 0.

    The ray is {t * u : t >= 0} for a nonzero direction u >= 0.  Along it
    every coordinate grows with t, so the infimum of a nonempty slice is
    attained at the smallest feasible t.  Returns None for an empty slice.
    """
    u = tuple(float(v) for v in direction)
    if len(u) != A.dim:
        raise ContractError("direction dimension does not match the region")
    if any(v < 0.0 for v in u):
        raise ContractError("direction must lie in the closed positive orthant")
    if all(v == 0.0 for v in u):
        raise ContractError("direction must be nonzero")
    t_lo = 0.0
    t_hi = math.inf
    for a, b in A.halfplanes():
        coef = sum(ai * ui for ai, ui in zip(a, u))
        if coef > 0.0:
            t_hi = min(t_hi, b / coef)
        elif coef < 0.0:
            t_lo = max(t_lo, b / coef)
        elif b < 0.0:
            return None
    if t_lo > t_hi:
        return None
    return tuple(t_lo * ui for ui in u)


def pareto_extremes(A: RiskRegion):
    """(ideal minimal point, maximal point or None when unbounded)."""
    if isinstance(A, UpperBox):
        return A.lowers, None
    if isinstance(A, Box):
        return A.lowers, A.uppers
    return A.ideal, (A.w, A.w)


def region_of(model: RiskModel, alpha: Strategy) -> RiskRegion:
    """The model's set-valued risk at a strategy.

    Criterion stacks give the upper box of achievement values (in the
    model's configured mode).  The quantile-pair model gives the triangle
    built from the derived quantities, which are what the geometry of the
    region means regardless of evaluation mode.
    """
    if model.region_style == "triangle":
        level = model.quantile_level
        return Triangle(
            var_sum(alpha, model.assets, level),
            var_of_sum(alpha, model.assets, level),
            worst_case_sum(alpha, model.assets),
        )
    return UpperBox(tuple(model.achievement(alpha)))


def region_of_payoffs(model: RiskModel, payoffs) -> RiskRegion:
    """The region at an explicit position (component payoff list).

    Used by the axiom audit, which perturbs positions in ways no weight
    vector can express; evaluation is always through the derived
    measures.
    """
    payoffs = tuple(payoffs)
    if model.region_style == "triangle":
        level = model.quantile_level
        total = payoffs[0]
        for p in payoffs[1:]:
            total = total + p
        return Triangle(
            math.fsum(var_numeric(level, p) for p in payoffs),
            var_numeric(level, total),
            math.fsum(-ess_inf(p) for p in payoffs),
        )
    return UpperBox(tuple(
        model.criterion_on_payoffs(k, payoffs) for k in range(model.n)
    ))


# ---------------------------------------------------------------------------
# set-valued axiom audit
# ---------------------------------------------------------------------------

def _params(region: RiskRegion):
    """The scalars that pin the region down (for shift/scale comparisons)."""
    if isinstance(region, Triangle):
        return (region.v_sum, region.v_joint, region.w)
    if isinstance(region, Box):
        return region.lowers + region.uppers
    return region.lowers


def set_axiom_audit(model: RiskModel, sample_positions, tol=1e-8) -> AuditReport:
    """Check the set-valued axioms on sampled positions.

    Positions are d-tuples of payoffs (typically weight-scaled baskets).
    Monotone pairs are synthesized by adding a sure positive amount to one
    component; convexity and sublinearity compare ideal-corner arithmetic,
    which is exact for every representable variant.
    """
    positions = [tuple(pos) for pos in sample_positions]
    if len(positions) < 2:
        raise ContractError("need at least two sample positions")
    regions = [region_of_payoffs(model, pos) for pos in positions]

    def corner(r):
        return np.asarray(r.ideal, dtype=float)

    def zero_and_closed():
        zero_pos = tuple(p * 0.0 for p in positions[0])
        r0 = region_of_payoffs(model, zero_pos)
        viol = max(
            sum(ai * 0.0 for ai in a) - b for a, b in r0.halfplanes()
        )
        yield viol, f"origin misses the zero-position region by {viol:.3g}"

    def monotonicity():
        for idx, pos in enumerate(positions):
            for j in (0, len(pos) - 1):
                for bump in (0.25, 1.0):
                    bigger = tuple(
                        p + bump if jj == j else p for jj, p in enumerate(pos)
                    )
                    rb = region_of_payoffs(model, bigger)
                    # bigger payoff -> lower risk -> its region sits inside
                    # the cone extension of the smaller one... reversed:
                    # position <= bigger demands region_leq(R(bigger), R(pos)).
                    viol = float(np.max(corner(rb) - corner(regions[idx])))
                    yield viol, (
                        f"position#{idx} + {bump} on component {j}: corner "
                        f"rose by {viol:.3g}"
                    )

    def convexity():
        for a in range(len(positions)):
            for b in range(a + 1, len(positions)):
                for t in (0.25, 0.5, 0.75):
                    mix = tuple(
                        t * pa + (1.0 - t) * pb
                        for pa, pb in zip(positions[a], positions[b])
                    )
                    rm = region_of_payoffs(model, mix)
                    combo = t * corner(regions[a]) + (1.0 - t) * corner(regions[b])
                    viol = float(np.max(corner(rm) - combo))
                    yield viol, (
                        f"positions #{a},#{b} at t={t}: mixed corner exceeds "
                        f"the corner combination by {viol:.3g}"
                    )

    def cash_additivity():
        for idx, pos in enumerate(positions):
            for j in (0, len(pos) - 1):
                for x in (0.5, -0.75):
                    shifted = tuple(
                        p + x if jj == j else p for jj, p in enumerate(pos)
                    )
                    rs = region_of_payoffs(model, shifted)
                    want = np.asarray(_params(regions[idx])) - x
                    got = np.asarray(_params(rs))
                    viol = float(np.max(np.abs(got - want)))
                    yield viol, (
                        f"position#{idx}, cash {x} on component {j}: region "
                        f"parameters off by {viol:.3g}"
                    )

    def sublinearity():
        for a in range(len(positions)):
            for b in range(a + 1, len(positions)):
                summed = tuple(
                    pa + pb for pa, pb in zip(positions[a], positions[b])
                )
                rs = region_of_payoffs(model, summed)
                combo = corner(regions[a]) + corner(regions[b])
                viol = float(np.max(corner(rs) - combo))
                yield viol, (
                    f"positions #{a}+#{b}: summed corner exceeds the corner "
                    f"sum by {viol:.3g}"
                )

    def homogeneity():
        for idx, pos in enumerate(positions):
            for t in (0.5, 2.0):
                rt = region_of_payoffs(model, tuple(p * t for p in pos))
                want = t * np.asarray(_params(regions[idx]))
                got = np.asarray(_params(rt))
                viol = float(np.max(np.abs(got - want)))
                yield viol, (
                    f"position#{idx} scaled by {t}: region parameters off "
                    f"by {viol:.3g}"
                )

    def tally(name, gen):
        worst = 0.0
        witness = None
        count = 0
        for viol, wit in gen:
            count += 1
            if viol > worst:
                worst = viol
                witness = wit
        return AxiomFinding(name, worst <= tol, worst,
                            witness if worst > tol else None, count)

    report = AuditReport(f"set-valued model {model.name or model.region_style}")
    report.findings.append(tally("closedness-zero", zero_and_closed()))
    report.findings.append(tally("monotonicity", monotonicity()))
    report.findings.append(tally("convexity", convexity()))
    report.findings.append(tally("cash-additivity", cash_additivity()))
    report.findings.append(tally("sublinearity", sublinearity()))
    report.findings.append(tally("positive-homogeneity", homogeneity()))
    return report


def default_sample_positions(model: RiskModel, seed=0, count=50):
    """Weight-scaled basket positions at deterministic random strategies."""
    rng = np.random.default_rng(seed)
    raw = rng.dirichlet(np.ones(model.d), size=count)
    out = []
    for row in raw:
        out.append(tuple(p * float(a) for a, p in zip(row, model.assets)))
    return out
