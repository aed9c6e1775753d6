"""Portfolio payoffs as piecewise polynomials on the unit interval.

A payoff maps an outcome w in [0, 1] to a money amount.  Pieces are
polynomials of degree at most four on consecutive subintervals; kinked or
switched payoffs (indicator-style instruments) are encoded by splitting
the interval at the kink.  All operations are pure functions of immutable
values and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._backends import kernels
from .errors import ContractError, DomainError

#: Breakpoints closer than this are merged when grids are combined.
BREAK_MERGE_TOL = 1e-14

#: Strategies must sum to one within this absolute tolerance.
WEIGHT_SUM_TOL = 1e-12

MAX_DEGREE = 4


@dataclass(frozen=True)
class PiecewisePolynomial:
    """A payoff given by polynomial pieces on [0, 1].

    ``breaks`` are the m+1 knots (first exactly 0, last exactly 1, strictly
    increasing); ``pieces[j]`` holds ascending-degree coefficients valid on
    ``[breaks[j], breaks[j+1])``, the last piece also covering w = 1.
    """

    breaks: tuple[float, ...]
    pieces: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.breaks) < 2 or len(self.pieces) != len(self.breaks) - 1:
            raise ContractError("need m+1 breakpoints for m pieces, m >= 1")
        if self.breaks[0] != 0.0 or self.breaks[-1] != 1.0:
            raise ContractError("breakpoints must start at 0 and end at 1")
        for a, b in zip(self.breaks, self.breaks[1:]):
            if not (a < b):
                raise ContractError("breakpoints must be strictly increasing")
        for cs in self.pieces:
            if len(cs) == 0 or len(cs) > MAX_DEGREE + 1:
                raise ContractError(f"piece degree must be <= {MAX_DEGREE}")
            if not all(math.isfinite(c) for c in cs):
                raise ContractError("piece coefficients must be finite")

    @classmethod
    def from_pieces(cls, pieces):
        """Build from [(end_0, coeffs_0), ...]; starts are implied."""
        breaks = [0.0]
        coeff_rows = []
        for end, coeffs in pieces:
            breaks.append(float(end))
            coeff_rows.append(tuple(float(c) for c in coeffs))
        return cls(tuple(breaks), tuple(coeff_rows))

    @classmethod
    def single(cls, coeffs):
        """One polynomial piece covering all of [0, 1]."""
        return cls((0.0, 1.0), (tuple(float(c) for c in coeffs),))

    @classmethod
    def constant(cls, value):
        return cls.single((float(value),))

    @classmethod
    def from_config(cls, spec):
        """Parse the config form: a list of {"end": t, "coeffs": [...]}."""
        if not isinstance(spec, list) or not spec:
            raise ContractError("payoff spec must be a non-empty list of pieces")
        rows = []
        for k, piece in enumerate(spec):
            if not isinstance(piece, dict) or "end" not in piece or "coeffs" not in piece:
                raise ContractError(f"payoff piece {k} needs 'end' and 'coeffs'")
            rows.append((piece["end"], piece["coeffs"]))
        return cls.from_pieces(rows)

    def to_config(self):
        return [
            {"end": end, "coeffs": list(cs)}
            for end, cs in zip(self.breaks[1:], self.pieces)
        ]

    # -- kernel-facing array form -------------------------------------------

    @cached_property
    def _breaks_arr(self) -> np.ndarray:
        return np.asarray(self.breaks, dtype=np.float64)

    @cached_property
    def _coeffs_arr(self) -> np.ndarray:
        out = np.zeros((len(self.pieces), MAX_DEGREE + 1), dtype=np.float64)
        for j, cs in enumerate(self.pieces):
            out[j, : len(cs)] = cs
        return out

    # -- queries --------------------------------------------------------------

    def __call__(self, w):
        return evaluate(self, w)

    def evaluate_many(self, ws) -> np.ndarray:
        ws = np.asarray(ws, dtype=np.float64)
        if ws.size and (ws.min() < 0.0 or ws.max() > 1.0):
            raise DomainError("sample points must lie in [0, 1]")
        return kernels.eval_many(self._breaks_arr, self._coeffs_arr, ws)

    @property
    def degree(self) -> int:
        return max(len(cs) - 1 for cs in self.pieces)

    # -- algebra ----------------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, PiecewisePolynomial):
            return _linear_combination((1.0, 1.0), (self, other))
        return self.shift(other)

    __radd__ = __add__

    def __mul__(self, a):
        return self.scale(a)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scale(-1.0)

    def shift(self, c):
        """Payoff plus a sure amount c."""
        c = float(c)
        rows = tuple((cs[0] + c,) + cs[1:] for cs in self.pieces)
        return PiecewisePolynomial(self.breaks, rows)

    def scale(self, a):
        a = float(a)
        rows = tuple(tuple(a * c for c in cs) for cs in self.pieces)
        return PiecewisePolynomial(self.breaks, rows)


@dataclass(frozen=True)
class Strategy:
    """A point of the unit simplex: nonnegative proportions summing to one."""

    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) == 0:
            raise ContractError("a strategy needs at least one weight")
        for a in self.weights:
            if not (math.isfinite(a) and a >= 0.0):
                raise ContractError("strategy weights must be finite and >= 0")
        total = math.fsum(self.weights)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ContractError(f"strategy weights sum to {total!r}, not 1")

    def __len__(self):
        return len(self.weights)

    def __iter__(self):
        return iter(self.weights)

    @classmethod
    def of(cls, *weights):
        return cls(tuple(float(a) for a in weights))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def evaluate(p: PiecewisePolynomial, w) -> float:
    """Payoff value at w; interior knots resolve to the right piece."""
    w = float(w)
    if not 0.0 <= w <= 1.0:
        raise DomainError(f"point {w!r} outside [0, 1]")
    return float(kernels.eval_one(p._breaks_arr, p._coeffs_arr, w))


def merged_breaks(payoffs) -> tuple[float, ...]:
    """Union of all breakpoint grids, deduplicated within BREAK_MERGE_TOL."""
    knots = sorted({t for p in payoffs for t in p.breaks})
    merged = [0.0]
    for t in knots[1:]:
        if t - merged[-1] > BREAK_MERGE_TOL:
            merged.append(t)
    merged[-1] = 1.0
    return tuple(merged)


def aligned_coeffs(payoffs, breaks=None):
    """Per-asset coefficient tables realigned to one shared grid.

    Returns (breaks_array, stack) where stack has shape (d, m, 5).  The
    active piece of each payoff on a merged subinterval is the one holding
    its midpoint.
    """
    if breaks is None:
        breaks = merged_breaks(payoffs)
    breaks_arr = np.asarray(breaks, dtype=np.float64)
    m = len(breaks) - 1
    stack = np.zeros((len(payoffs), m, MAX_DEGREE + 1), dtype=np.float64)
    for i, p in enumerate(payoffs):
        for j in range(m):
            mid = 0.5 * (breaks[j] + breaks[j + 1])
            src = np.searchsorted(p._breaks_arr, mid, side="right") - 1
            src = min(max(src, 0), len(p.pieces) - 1)
            stack[i, j] = p._coeffs_arr[src]
    return breaks_arr, stack


def _linear_combination(weights, payoffs) -> PiecewisePolynomial:
    breaks_arr, stack = aligned_coeffs(payoffs)
    combined = np.einsum("i,imk->mk", np.asarray(weights, dtype=np.float64), stack)
    rows = tuple(tuple(float(c) for c in row) for row in combined)
    return PiecewisePolynomial(tuple(breaks_arr.tolist()), rows)


def combine(alpha: Strategy, payoffs) -> PiecewisePolynomial:
    """The portfolio payoff sum_i alpha_i * payoff_i on the merged grid."""
    payoffs = tuple(payoffs)
    if len(alpha) != len(payoffs):
        raise ContractError(
            f"strategy has {len(alpha)} weights but {len(payoffs)} payoffs given"
        )
    return _linear_combination(alpha.weights, payoffs)


def ess_inf(p: PiecewisePolynomial) -> float:
    """Essential infimum: the global minimum over [0, 1].

    Computed from piece endpoints and the real critical points of each
    piece (closed-form roots of the derivative).
    """
    gmin, _ = kernels.piece_extrema(p._breaks_arr, p._coeffs_arr)
    return float(gmin)


def ess_sup(p: PiecewisePolynomial) -> float:
    """Essential supremum: the global maximum over [0, 1]."""
    _, gmax = kernels.piece_extrema(p._breaks_arr, p._coeffs_arr)
    return float(gmax)


def sublevel_measure(p: PiecewisePolynomial, m) -> float:
    """Lebesgue measure of {w : p(w) <= m}, exact from per-piece roots.

    Nondecreasing and right-continuous in m; 0 below the essential
    infimum, 1 at and above the essential supremum.
    """
    return float(kernels.sublevel_measure(p._breaks_arr, p._coeffs_arr, float(m)))


def pointwise_leq(p: PiecewisePolynomial, q: PiecewisePolynomial) -> bool:
    """True when p <= q everywhere (checked exactly via the difference's minimum)."""
    diff = _linear_combination((1.0, -1.0), (q, p))
    lo = ess_inf(diff)
    return lo >= -1e-12 * max(1.0, abs(lo), abs(ess_sup(diff)))
