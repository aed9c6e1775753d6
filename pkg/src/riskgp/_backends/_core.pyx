# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numerical kernels.

Mirror of ``riskgp._backends._pycore`` (same algorithms, same operation
order); see that module for the documentation.  Compiled with
-ffp-contract=off so both backends round identically.
"""

from libc.math cimport (INFINITY, acos, cos, copysign, exp, expm1, fabs,
                        isfinite, pow, sqrt)

import numpy as np

BACKEND = "compiled"

cdef double _DEGREE_EPS = 1e-14
cdef double _ROOT_MERGE = 1e-13
cdef double _PI = 3.141592653589793


cdef inline double _horner(const double* c, int deg, double x) noexcept nogil:
    cdef double v = c[deg]
    cdef int k
    for k in range(deg - 1, -1, -1):
        v = v * x + c[k]
    return v


cdef inline int _piece_index(const double* breaks, int m, double w) noexcept nogil:
    cdef int lo = 0, hi = m, mid
    while lo < hi:
        mid = (lo + hi) // 2
        if breaks[mid + 1] <= w:
            lo = mid + 1
        else:
            hi = mid
    if lo > m - 1:
        lo = m - 1
    return lo


def eval_one(const double[::1] breaks, const double[:, ::1] coeffs, double w):
    cdef int m = breaks.shape[0] - 1
    cdef int j = _piece_index(&breaks[0], m, w)
    return _horner(&coeffs[j, 0], 4, w)


def eval_many(const double[::1] breaks, const double[:, ::1] coeffs, ws):
    ws_arr = np.ascontiguousarray(ws, dtype=np.float64)
    out_arr = np.empty(ws_arr.shape[0], dtype=np.float64)
    cdef double[::1] wv = ws_arr
    cdef double[::1] out = out_arr
    cdef int m = breaks.shape[0] - 1
    cdef Py_ssize_t i
    cdef int j
    for i in range(wv.shape[0]):
        j = _piece_index(&breaks[0], m, wv[i])
        out[i] = _horner(&coeffs[j, 0], 4, wv[i])
    return out_arr


# ---------------------------------------------------------------------------
# closed-form real roots
# ---------------------------------------------------------------------------

cdef inline double _cbrt(double x) noexcept nogil:
    return copysign(pow(fabs(x), 1.0 / 3.0), x)


cdef int _quadratic_roots(double c0, double c1, double c2, double* out, int n) noexcept nogil:
    cdef double disc = c1 * c1 - 4.0 * c2 * c0
    cdef double scale = max(c1 * c1, fabs(4.0 * c2 * c0))
    cdef double s, q
    if disc < 0.0:
        if disc > -64.0 * _DEGREE_EPS * scale:
            out[n] = -c1 / (2.0 * c2)
            n += 1
        return n
    s = sqrt(disc)
    if c1 >= 0.0:
        q = -0.5 * (c1 + s)
    else:
        q = -0.5 * (c1 - s)
    if q != 0.0:
        out[n] = q / c2
        out[n + 1] = c0 / q
    else:
        out[n] = 0.0
        out[n + 1] = -c1 / c2
    return n + 2


cdef int _cubic_roots(double c0, double c1, double c2, double c3, double* out, int n) noexcept nogil:
    cdef double b = c2 / c3
    cdef double c = c1 / c3
    cdef double d = c0 / c3
    cdef double shift = b / 3.0
    cdef double p = c - b * b / 3.0
    cdef double q = d + b * (2.0 * b * b - 9.0 * c) / 27.0
    cdef double half_q, disc, s, u, v, mp, m, arg, theta
    cdef int k
    if p == 0.0 and q == 0.0:
        out[n] = -shift
        return n + 1
    half_q = 0.5 * q
    disc = half_q * half_q + (p / 3.0) * (p / 3.0) * (p / 3.0)
    if disc > 0.0:
        s = sqrt(disc)
        u = _cbrt(-half_q + s)
        v = _cbrt(-half_q - s)
        out[n] = u + v - shift
        return n + 1
    mp = -p
    if mp < 1e-300:
        mp = 1e-300
    m = 2.0 * sqrt(mp / 3.0)
    arg = 3.0 * q / (p * m)
    if arg > 1.0:
        arg = 1.0
    elif arg < -1.0:
        arg = -1.0
    theta = acos(arg) / 3.0
    for k in range(3):
        out[n] = m * cos(theta - 2.0 * _PI * k / 3.0) - shift
        n += 1
    return n


cdef int _quartic_roots(double c0, double c1, double c2, double c3, double c4,
                        double* out, int n) noexcept nogil:
    cdef double b = c3 / c4
    cdef double c = c2 / c4
    cdef double d = c1 / c4
    cdef double e = c0 / c4
    cdef double shift = b / 4.0
    cdef double b2 = b * b
    cdef double p = c - 3.0 * b2 / 8.0
    cdef double q = d - 0.5 * b * c + b * b2 / 8.0
    cdef double r = e - 0.25 * b * d + b2 * c / 16.0 - 3.0 * b2 * b2 / 256.0
    cdef double scale = max(max(fabs(p), fabs(q)), max(fabs(r), 1.0))
    cdef double ybuf[8]
    cdef double zbuf[4]
    cdef int ny = 0, nz, k
    cdef double z, s, m, half, t
    if fabs(q) <= _DEGREE_EPS * scale:
        nz = _quadratic_roots(r, p, 1.0, zbuf, 0)
        for k in range(nz):
            z = zbuf[k]
            if z >= 0.0:
                s = sqrt(z)
                ybuf[ny] = s
                ybuf[ny + 1] = -s
                ny += 2
            elif z > -64.0 * _DEGREE_EPS * scale:
                ybuf[ny] = 0.0
                ny += 1
    else:
        nz = _cubic_roots(-q * q, p * p - 4.0 * r, 2.0 * p, 1.0, zbuf, 0)
        m = 0.0
        for k in range(nz):
            if zbuf[k] > m:
                m = zbuf[k]
        if m <= 0.0:
            return n
        s = sqrt(m)
        half = 0.5 * (p + m)
        t = 0.5 * q / s
        ny = _quadratic_roots(half - t, s, 1.0, ybuf, 0)
        ny = _quadratic_roots(half + t, -s, 1.0, ybuf, ny)
    for k in range(ny):
        out[n] = ybuf[k] - shift
        n += 1
    return n


cdef int _real_roots(const double* c, double lo, double hi, double* roots) noexcept nogil:
    cdef double scale = 0.0, a, cut, span, pad, x, fp, step, tmp
    cdef double raw[8]
    cdef int k, deg, nraw = 0, nf = 0, i, j, nm
    for k in range(5):
        a = fabs(c[k])
        if a > scale:
            scale = a
    if scale == 0.0:
        return 0
    cut = _DEGREE_EPS * scale
    deg = 4
    while deg > 0 and fabs(c[deg]) <= cut:
        deg -= 1
    if deg == 0:
        return 0

    if deg == 1:
        raw[0] = -c[0] / c[1]
        nraw = 1
    elif deg == 2:
        nraw = _quadratic_roots(c[0], c[1], c[2], raw, 0)
    elif deg == 3:
        nraw = _cubic_roots(c[0], c[1], c[2], c[3], raw, 0)
    else:
        nraw = _quartic_roots(c[0], c[1], c[2], c[3], c[4], raw, 0)

    span = hi - lo
    pad = 1e-9 * (span + 1.0)
    for k in range(nraw):
        x = raw[k]
        if not isfinite(x):
            continue
        fp = ((4.0 * c[4] * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1]
        if fp != 0.0:
            step = _horner(c, deg, x) / fp
            if fabs(step) <= 0.1 * (span + 1.0):
                x -= step
        if lo - pad <= x <= hi + pad:
            if x > hi:
                x = hi
            elif x < lo:
                x = lo
            roots[nf] = x
            nf += 1
    # insertion sort + dedupe (nf <= 8)
    for i in range(1, nf):
        x = roots[i]
        j = i - 1
        while j >= 0 and roots[j] > x:
            roots[j + 1] = roots[j]
            j -= 1
        roots[j + 1] = x
    nm = 0
    for i in range(nf):
        x = roots[i]
        if nm == 0 or x - roots[nm - 1] > _ROOT_MERGE * (1.0 + fabs(x)):
            roots[nm] = x
            nm += 1
    return nm


def roots_in_interval(const double[::1] coeffs5, double lo, double hi):
    cdef double c[5]
    cdef double roots[8]
    cdef int k, n
    for k in range(5):
        c[k] = coeffs5[k]
    n = _real_roots(c, lo, hi, roots)
    out = np.empty(n, dtype=np.float64)
    for k in range(n):
        out[k] = roots[k]
    return out


# ---------------------------------------------------------------------------
# extrema, sublevel measure, quantiles
# ---------------------------------------------------------------------------

cdef void _extrema_core(const double* breaks, const double* coeffs, int m,
                        double* gmin, double* gmax) noexcept nogil:
    cdef double dc[5]
    cdef double cand[10]
    cdef double t0, t1, v, x
    cdef int j, k, nc, i
    gmin[0] = INFINITY
    gmax[0] = -INFINITY
    for j in range(m):
        t0 = breaks[j]
        t1 = breaks[j + 1]
        for k in range(1, 5):
            dc[k - 1] = k * coeffs[5 * j + k]
        dc[4] = 0.0
        nc = _real_roots(dc, t0, t1, cand)
        cand[nc] = t0
        cand[nc + 1] = t1
        nc += 2
        for i in range(nc):
            x = cand[i]
            v = _horner(coeffs + 5 * j, 4, x)
            if v < gmin[0]:
                gmin[0] = v
            if v > gmax[0]:
                gmax[0] = v


def piece_extrema(const double[::1] breaks, const double[:, ::1] coeffs):
    cdef double gmin, gmax
    _extrema_core(&breaks[0], &coeffs[0, 0], breaks.shape[0] - 1, &gmin, &gmax)
    return gmin, gmax


cdef double _sublevel_core(const double* breaks, const double* coeffs, int m,
                           double level) noexcept nogil:
    cdef double sh[5]
    cdef double nodes[8]
    cdef double total = 0.0
    cdef double t0, t1, prev, x
    cdef int j, k, nn, i
    cdef bint allzero
    for j in range(m):
        t0 = breaks[j]
        t1 = breaks[j + 1]
        sh[0] = coeffs[5 * j] - level
        sh[1] = coeffs[5 * j + 1]
        sh[2] = coeffs[5 * j + 2]
        sh[3] = coeffs[5 * j + 3]
        sh[4] = coeffs[5 * j + 4]
        allzero = True
        for k in range(5):
            if sh[k] != 0.0:
                allzero = False
                break
        if allzero:
            total += t1 - t0
            continue
        nn = _real_roots(sh, t0, t1, nodes)
        prev = t0
        for i in range(nn):
            x = nodes[i]
            if x > prev:
                if _horner(sh, 4, 0.5 * (prev + x)) <= 0.0:
                    total += x - prev
                prev = x
            elif x > prev - 1e-30:
                if x > prev:
                    prev = x
        if t1 > prev:
            if _horner(sh, 4, 0.5 * (prev + t1)) <= 0.0:
                total += t1 - prev
    if total < 0.0:
        return 0.0
    if total > 1.0:
        return 1.0
    return total


def sublevel_measure(const double[::1] breaks, const double[:, ::1] coeffs, double level):
    return _sublevel_core(&breaks[0], &coeffs[0, 0], breaks.shape[0] - 1, level)


cdef double _quantile_core(const double* breaks, const double* coeffs, int m,
                           double prob, double tol, int max_iter) noexcept nogil:
    cdef double gmin, gmax, lo, hi, mid
    cdef int it
    _extrema_core(breaks, coeffs, m, &gmin, &gmax)
    lo = gmin - 1.0
    hi = gmax + 1.0
    for it in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _sublevel_core(breaks, coeffs, m, mid) <= prob:
            lo = mid
        else:
            hi = mid
    return lo


def quantile_sup(const double[::1] breaks, const double[:, ::1] coeffs, double prob,
                 double tol=1e-10, int max_iter=200):
    return _quantile_core(&breaks[0], &coeffs[0, 0], breaks.shape[0] - 1,
                          prob, tol, max_iter)


def quantile_sup_batch(const double[::1] breaks, const double[:, :, ::1] coeff_stack,
                       alphas, double prob, double tol=1e-10, int max_iter=200):
    alphas_arr = np.ascontiguousarray(alphas, dtype=np.float64)
    if alphas_arr.ndim == 1:
        alphas_arr = alphas_arr[None, :]
    cdef double[:, ::1] av = alphas_arr
    cdef int d = coeff_stack.shape[0]
    cdef int m = coeff_stack.shape[1]
    out_arr = np.empty(av.shape[0], dtype=np.float64)
    cdef double[::1] out = out_arr
    combined_arr = np.empty((m, 5), dtype=np.float64)
    cdef double[:, ::1] combined = combined_arr
    cdef Py_ssize_t g
    cdef int i, j, k
    cdef double acc
    for g in range(av.shape[0]):
        for j in range(m):
            for k in range(5):
                acc = 0.0
                for i in range(d):
                    acc += av[g, i] * coeff_stack[i, j, k]
                combined[j, k] = acc
        out[g] = _quantile_core(&breaks[0], &combined[0, 0], m, prob, tol, max_iter)
    return out_arr


# ---------------------------------------------------------------------------
# exponentially weighted polynomial moments
# ---------------------------------------------------------------------------

cdef void _exp_moments(double a, double t0, double t1, double* I) noexcept nogil:
    cdef double acc, comp, sign_a, fact, term, y, t, e0, e1, p0, p1
    cdef int k, j
    if a < 0.05:
        for k in range(5):
            acc = 0.0
            comp = 0.0
            sign_a = 1.0
            fact = 1.0
            for j in range(9):
                term = sign_a / fact * (pow(t1, k + j + 1) - pow(t0, k + j + 1)) / (k + j + 1)
                y = term - comp
                t = acc + y
                comp = (t - acc) - y
                acc = t
                sign_a *= -a
                fact *= j + 1.0
            I[k] = acc
        return
    e0 = exp(-a * t0)
    e1 = exp(-a * t1)
    I[0] = -e0 * expm1(-a * (t1 - t0)) / a
    p0 = 1.0
    p1 = 1.0
    for k in range(1, 5):
        p0 *= t0
        p1 *= t1
        I[k] = (p0 * e0 - p1 * e1) / a + k / a * I[k - 1]


def exp_weighted_integral(const double[::1] breaks, const double[:, ::1] coeffs, double a):
    cdef int m = breaks.shape[0] - 1
    cdef double acc = 0.0, comp = 0.0, term, y, t, ck
    cdef double I[5]
    cdef int j, k
    for j in range(m):
        _exp_moments(a, breaks[j], breaks[j + 1], I)
        for k in range(5):
            ck = coeffs[j, k]
            if ck == 0.0:
                continue
            term = ck * I[k]
            y = term - comp
            t = acc + y
            comp = (t - acc) - y
            acc = t
    return acc
