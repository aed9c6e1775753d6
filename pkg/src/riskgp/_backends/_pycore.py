"""Pure-Python numerical kernels.

This is the reference backend.  The compiled backend
(``riskgp._backends._core``, built from ``_core.pyx``) mirrors every public
function here with the same algorithm and the same operation order, so the
two backends agree to the last few ulps.  Keep them in sync.

Piecewise polynomials are passed around in a flat array form:

* ``breaks`` -- float64 array of m+1 strictly increasing knots,
  ``breaks[0] == 0.0`` and ``breaks[-1] == 1.0``;
* ``coeffs`` -- float64 array of shape (m, 5): ascending-degree coefficients
  of each piece, zero-padded to degree 4.

On piece j the payoff is ``sum(coeffs[j, k] * w**k)`` for
``w in [breaks[j], breaks[j+1])``; the last piece also owns ``w == 1``.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

# Effective-degree cutoff, relative to the largest coefficient magnitude.
_DEGREE_EPS = 1e-14
# Dedupe distance for nearly coincident roots.
_ROOT_MERGE = 1e-13


# ---------------------------------------------------------------------------
# polynomial evaluation
# ---------------------------------------------------------------------------

def _horner(c, deg, x):
    v = c[deg]
    for k in range(deg - 1, -1, -1):
        v = v * x + c[k]
    return v


def _piece_index(breaks, w):
    # Right-closed convention: interior knots belong to the right piece,
    # w == 1 belongs to the last piece.
    m = len(breaks) - 1
    lo, hi = 0, m  # invariant: breaks[lo] <= w, searching first break > w
    while lo < hi:
        mid = (lo + hi) // 2
        if breaks[mid + 1] <= w:
            lo = mid + 1
        else:
            hi = mid
    return min(lo, m - 1)


def eval_one(breaks, coeffs, w):
    j = _piece_index(breaks, w)
    return _horner(coeffs[j], 4, w)


def eval_many(breaks, coeffs, ws):
    ws = np.asarray(ws, dtype=np.float64)
    idx = np.searchsorted(breaks, ws, side="right") - 1
    np.clip(idx, 0, len(breaks) - 2, out=idx)
    c = coeffs[idx]
    out = c[:, 4].copy()
    for k in (3, 2, 1, 0):
        out *= ws
        out += c[:, k]
    return out


# ---------------------------------------------------------------------------
# closed-form real roots of degree <= 4 polynomials
#
# Spurious extra candidates are harmless to every caller (they only add
# subdivision nodes whose midpoints are sign-tested), so borderline
# discriminants are resolved toward *returning* a root.  Missing a genuine
# root is the only fatal failure mode.
# ---------------------------------------------------------------------------

def _cbrt(x):
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _quadratic_roots(c0, c1, c2, out):
    disc = c1 * c1 - 4.0 * c2 * c0
    scale = max(c1 * c1, abs(4.0 * c2 * c0))
    if disc < 0.0:
        if disc > -64.0 * _DEGREE_EPS * scale:
            out.append(-c1 / (2.0 * c2))  # grazing double root
        return
    s = math.sqrt(disc)
    if c1 >= 0.0:
        q = -0.5 * (c1 + s)
    else:
        q = -0.5 * (c1 - s)
    if q != 0.0:
        out.append(q / c2)
        out.append(c0 / q)
    else:
        out.append(0.0)
        out.append(-c1 / c2)


def _cubic_roots(c0, c1, c2, c3, out):
    # Depress: x = t - b/3 for monic x^3 + b x^2 + c x + d.
    b = c2 / c3
    c = c1 / c3
    d = c0 / c3
    shift = b / 3.0
    p = c - b * b / 3.0
    q = d + b * (2.0 * b * b - 9.0 * c) / 27.0
    if p == 0.0 and q == 0.0:
        out.append(-shift)
        return
    half_q = 0.5 * q
    disc = half_q * half_q + (p / 3.0) ** 3
    if disc > 0.0:
        # One real root (Cardano).
        s = math.sqrt(disc)
        u = _cbrt(-half_q + s)
        v = _cbrt(-half_q - s)
        out.append(u + v - shift)
    else:
        # Three real roots (trigonometric form); p < 0 here.
        mp = max(-p, 1e-300)
        m = 2.0 * math.sqrt(mp / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg) / 3.0
        for k in range(3):
            out.append(m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift)


def _quartic_roots(c0, c1, c2, c3, c4, out):
    # Depress: x = y - b/4 for monic x^4 + b x^3 + c x^2 + d x + e.
    b = c3 / c4
    c = c2 / c4
    d = c1 / c4
    e = c0 / c4
    shift = b / 4.0
    b2 = b * b
    p = c - 3.0 * b2 / 8.0
    q = d - 0.5 * b * c + b * b2 / 8.0
    r = e - 0.25 * b * d + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0
    scale = max(abs(p), abs(q), abs(r), 1.0)
    ys = []
    if abs(q) <= _DEGREE_EPS * scale:
        # Biquadratic in y^2.
        zs = []
        _quadratic_roots(r, p, 1.0, zs)
        for z in zs:
            if z >= 0.0:
                s = math.sqrt(z)
                ys.append(s)
                ys.append(-s)
            elif z > -64.0 * _DEGREE_EPS * scale:
                ys.append(0.0)
    else:
        # Ferrari: a positive resolvent root always exists since the
        # resolvent is -q^2 < 0 at zero and +inf at +inf.
        res = []
        _cubic_roots(-q * q, p * p - 4.0 * r, 2.0 * p, 1.0, res)
        m = 0.0
        for z in res:
            if z > m:
                m = z
        if m <= 0.0:
            return
        s = math.sqrt(m)
        half = 0.5 * (p + m)
        t = 0.5 * q / s
        _quadratic_roots(half - t, s, 1.0, ys)
        _quadratic_roots(half + t, -s, 1.0, ys)
    for y in ys:
        out.append(y - shift)


def _real_roots(c, lo, hi):
    """Real roots of ``sum c[k] x^k`` within [lo, hi], polished and deduped.

    Returns a sorted list.  ``c`` must have 5 entries.  An identically zero
    polynomial yields no roots (callers detect that case themselves).
    """
    scale = 0.0
    for k in range(5):
        a = abs(c[k])
        if a > scale:
            scale = a
    if scale == 0.0:
        return []
    cut = _DEGREE_EPS * scale
    deg = 4
    while deg > 0 and abs(c[deg]) <= cut:
        deg -= 1
    if deg == 0:
        return []

    raw = []
    if deg == 1:
        raw.append(-c[0] / c[1])
    elif deg == 2:
        _quadratic_roots(c[0], c[1], c[2], raw)
    elif deg == 3:
        _cubic_roots(c[0], c[1], c[2], c[3], raw)
    else:
        _quartic_roots(c[0], c[1], c[2], c[3], c[4], raw)

    span = hi - lo
    pad = 1e-9 * (span + 1.0)
    roots = []
    for x in raw:
        if not math.isfinite(x):
            continue
        # One Newton step against the full polynomial sharpens the
        # closed-form value without risking divergence.
        fp = ((4.0 * c[4] * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1]
        if fp != 0.0:
            step = _horner(c, deg, x) / fp
            if abs(step) <= 0.1 * (span + 1.0):
                x -= step
        if lo - pad <= x <= hi + pad:
            roots.append(min(hi, max(lo, x)))
    roots.sort()
    merged = []
    for x in roots:
        if not merged or x - merged[-1] > _ROOT_MERGE * (1.0 + abs(x)):
            merged.append(x)
    return merged


def roots_in_interval(coeffs5, lo, hi):
    """Public root-finder wrapper used by tests; returns an ndarray."""
    c = [float(coeffs5[k]) for k in range(5)]
    return np.array(_real_roots(c, lo, hi), dtype=np.float64)


# ---------------------------------------------------------------------------
# extrema and sublevel measure
# ---------------------------------------------------------------------------

def piece_extrema(breaks, coeffs):
    """Global (min, max) of the payoff over [0, 1].

    Single points do not carry Lebesgue mass, so evaluating each piece on
    the closure of its interval yields the essential extrema.
    """
    m = len(breaks) - 1
    gmin = math.inf
    gmax = -math.inf
    dc = [0.0] * 5
    for j in range(m):
        t0 = breaks[j]
        t1 = breaks[j + 1]
        cj = coeffs[j]
        for k in range(1, 5):
            dc[k - 1] = k * cj[k]
        dc[4] = 0.0
        cands = _real_roots(dc, t0, t1)
        cands.append(t0)
        cands.append(t1)
        for x in cands:
            v = _horner(cj, 4, x)
            if v < gmin:
                gmin = v
            if v > gmax:
                gmax = v
    return gmin, gmax


def sublevel_measure(breaks, coeffs, level):
    """Lebesgue measure of {w in [0,1] : payoff(w) <= level}, exactly.

    Per piece the set is delimited by the real roots of piece - level;
    between consecutive nodes the sign is constant and is tested at the
    midpoint.
    """
    m = len(breaks) - 1
    total = 0.0
    sh = [0.0] * 5
    for j in range(m):
        t0 = breaks[j]
        t1 = breaks[j + 1]
        cj = coeffs[j]
        sh[0] = cj[0] - level
        sh[1] = cj[1]
        sh[2] = cj[2]
        sh[3] = cj[3]
        sh[4] = cj[4]
        allzero = True
        for k in range(5):
            if sh[k] != 0.0:
                allzero = False
                break
        if allzero:
            total += t1 - t0  # piece identically equal to the level
            continue
        nodes = _real_roots(sh, t0, t1)
        prev = t0
        for x in nodes:
            if x > prev:
                if _horner(sh, 4, 0.5 * (prev + x)) <= 0.0:
                    total += x - prev
                prev = x
            elif x > prev - 1e-30:
                prev = max(prev, x)
        if t1 > prev:
            if _horner(sh, 4, 0.5 * (prev + t1)) <= 0.0:
                total += t1 - prev
    if total < 0.0:
        return 0.0
    if total > 1.0:
        return 1.0
    return total


# ---------------------------------------------------------------------------
# quantiles
# ---------------------------------------------------------------------------

def quantile_sup(breaks, coeffs, prob, tol=1e-10, max_iter=200):
    """sup{m : Leb(payoff <= m) <= prob}, by monotone bisection.

    The sublevel function is exact, nondecreasing and right-continuous, so
    keeping the invariant measure(lo) <= prob < measure(hi) converges
    linearly; the feasible endpoint is returned.
    """
    gmin, gmax = piece_extrema(breaks, coeffs)
    lo = gmin - 1.0
    hi = gmax + 1.0
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if sublevel_measure(breaks, coeffs, mid) <= prob:
            lo = mid
        else:
            hi = mid
    return lo


def quantile_sup_batch(breaks, coeff_stack, alphas, prob, tol=1e-10, max_iter=200):
    """Quantiles of the combinations ``sum_i alphas[g, i] * payoff_i``.

    ``coeff_stack`` holds the d per-asset coefficient tables on one shared
    knot grid, shape (d, m, 5); ``alphas`` is (G, d).  Returns shape (G,).
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    if alphas.ndim == 1:
        alphas = alphas[None, :]
    out = np.empty(len(alphas), dtype=np.float64)
    for g in range(len(alphas)):
        combined = np.einsum("i,imk->mk", alphas[g], coeff_stack)
        out[g] = quantile_sup(breaks, combined, prob, tol, max_iter)
    return out


# ---------------------------------------------------------------------------
# exponentially weighted polynomial moments
# ---------------------------------------------------------------------------

def _exp_moments(a, t0, t1):
    """I_k = integral over [t0, t1] of w^k e^{-a w} dw for k = 0..4.

    Upward recursion  I_k = (t0^k e^{-a t0} - t1^k e^{-a t1})/a + k/a I_{k-1}
    is exact and stable for the tilts used here (a = ln i, i >= 2).  For
    very small tilts the recursion cancels catastrophically, so a truncated
    exponential series (error < a^9/9! per term) takes over.
    """
    I = [0.0] * 5
    if a < 0.05:
        for k in range(5):
            acc = 0.0
            comp = 0.0
            sign_a = 1.0
            fact = 1.0
            for j in range(9):
                term = sign_a / fact * (t1 ** (k + j + 1) - t0 ** (k + j + 1)) / (k + j + 1)
                y = term - comp
                t = acc + y
                comp = (t - acc) - y
                acc = t
                sign_a *= -a
                fact *= j + 1.0
            I[k] = acc
        return I
    e0 = math.exp(-a * t0)
    e1 = math.exp(-a * t1)
    # I_0 via expm1 keeps full precision when the interval is short.
    I[0] = -e0 * math.expm1(-a * (t1 - t0)) / a
    p0 = 1.0
    p1 = 1.0
    for k in range(1, 5):
        p0 *= t0
        p1 *= t1
        I[k] = (p0 * e0 - p1 * e1) / a + k / a * I[k - 1]
    return I


def exp_weighted_integral(breaks, coeffs, a):
    """Integral over [0,1] of payoff(w) * e^{-a w} dw, compensated summation."""
    m = len(breaks) - 1
    acc = 0.0
    comp = 0.0
    for j in range(m):
        I = _exp_moments(a, breaks[j], breaks[j + 1])
        cj = coeffs[j]
        for k in range(5):
            ck = cj[k]
            if ck == 0.0:
                continue
            term = ck * I[k]
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
    return acc
