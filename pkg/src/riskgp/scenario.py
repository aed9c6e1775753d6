"""Exponentially tilted probability scenarios on [0, 1].

Scenario i (any real index i > 1) has density

    f_i(w) = i^{-w} / N(i),      N(i) = (1 - 1/i) / ln i,

against the Lebesgue base measure.  Larger indices pile mass toward
w = 0: f_i(0) grows without bound while f_i(w) -> 0 for every w > 0.
Expectations of piecewise polynomials have closed forms (used by the fast
path); adaptive quadrature provides the independent cross-check for
arbitrary integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import quadrature
from ._backends import kernels
from .errors import ContractError, DomainError
from .payoff import PiecewisePolynomial


@dataclass(frozen=True)
class Scenario:
    """One tilted scenario; ``index`` must exceed 1 so the tilt is positive."""

    index: float

    def __post_init__(self):
        if not (math.isfinite(self.index) and self.index > 1.0):
            raise ContractError(f"scenario index must be > 1, got {self.index!r}")

    @property
    def tilt(self) -> float:
        """The exponential rate a = ln(index)."""
        return math.log(self.index)

    @cached_property
    def normalizer(self) -> float:
        """N(i) = (1 - 1/i)/ln i, the integral of i^{-w} over [0, 1]."""
        return (1.0 - 1.0 / self.index) / self.tilt

    def density(self, w) -> float:
        w = float(w)
        if not 0.0 <= w <= 1.0:
            raise DomainError(f"point {w!r} outside [0, 1]")
        return math.exp(-self.tilt * w) / self.normalizer

    def density_many(self, ws) -> np.ndarray:
        ws = np.asarray(ws, dtype=np.float64)
        return np.exp(-self.tilt * ws) / self.normalizer


def normalizer(s: Scenario) -> float:
    return s.normalizer


def density(s: Scenario, w) -> float:
    return s.density(w)


def expect_poly(s: Scenario, p: PiecewisePolynomial) -> float:
    """Exact expectation of a piecewise polynomial under the scenario.

    Integrates w^k e^{-a w} piecewise by the usual reduction in k, then
    divides by the normalizer.
    """
    raw = kernels.exp_weighted_integral(p._breaks_arr, p._coeffs_arr, s.tilt)
    return float(raw) / s.normalizer


def expect_quadrature(s: Scenario, g, *, breakpoints=(), tol=quadrature.DEFAULT_TOL,
                      max_intervals=quadrature.DEFAULT_MAX_INTERVALS) -> float:
    """Expectation of a bounded integrand by adaptive quadrature.

    ``g`` may be scalar or vectorized.  Known kinks of g should be passed
    as breakpoints so each panel sees a smooth integrand.
    """
    g = quadrature.vectorized(g)

    def integrand(ws):
        return np.asarray(g(ws), dtype=np.float64) * s.density_many(ws)

    return quadrature.integrate(
        integrand, 0.0, 1.0, tol=tol, breakpoints=breakpoints,
        max_intervals=max_intervals,
    )


def expect_payoff_quadrature(s: Scenario, p: PiecewisePolynomial, **kw) -> float:
    """Quadrature expectation of a payoff, subdividing at its knots."""
    return expect_quadrature(s, p.evaluate_many, breakpoints=p.breaks[1:-1], **kw)
