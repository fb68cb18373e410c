# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled lane of the hot kernels (see _reference.py for the contract).

Plain C loops with Kahan-compensated accumulation; no NumPy C API beyond
buffer views, so the module builds with any recent Cython + C compiler.
"""

from libc.math cimport INFINITY, fabs, floor, pow, sqrt
from libc.stdlib cimport free, malloc, qsort

import numpy as np


cdef int _cmp_desc(const void* pa, const void* pb) noexcept nogil:
    cdef double a = (<const double*> pa)[0]
    cdef double b = (<const double*> pb)[0]
    if a < b:
        return 1
    if a > b:
        return -1
    return 0


cdef struct _Trip:
    double r
    double ub
    double bb


cdef int _cmp_trip_desc(const void* pa, const void* pb) noexcept nogil:
    cdef double a = (<const _Trip*> pa).r
    cdef double b = (<const _Trip*> pb).r
    if a < b:
        return 1
    if a > b:
        return -1
    return 0


cdef double _norm_core(const double* x, const double* w, Py_ssize_t n, double p) noexcept nogil:
    cdef Py_ssize_t i
    cdef double s = 0.0, comp = 0.0, term, y, tnew, scale = 0.0
    if p == INFINITY:
        for i in range(n):
            term = w[i] * fabs(x[i])
            if term > s:
                s = term
        return s
    if p == 1.0:
        for i in range(n):
            term = w[i] * fabs(x[i])
            y = term - comp
            tnew = s + y
            comp = (tnew - s) - y
            s = tnew
        return s
    for i in range(n):
        term = w[i] * fabs(x[i])
        if term > scale:
            scale = term
    if scale == 0.0:
        return 0.0
    if p == 2.0:
        for i in range(n):
            term = w[i] * fabs(x[i]) / scale
            term = term * term
            y = term - comp
            tnew = s + y
            comp = (tnew - s) - y
            s = tnew
        return scale * sqrt(s)
    for i in range(n):
        term = pow(w[i] * fabs(x[i]) / scale, p)
        y = term - comp
        tnew = s + y
        comp = (tnew - s) - y
        s = tnew
    return scale * pow(s, 1.0 / p)


def weighted_norm(const double[::1] x, const double[::1] w, double p):
    """Weighted lp norm; see _reference.weighted_norm."""
    return _norm_core(&x[0] if x.shape[0] else NULL, &w[0] if w.shape[0] else NULL,
                      x.shape[0], p)


def weighted_norm_batch(const double[:, ::1] X, const double[::1] w, double p):
    """Row-wise weighted lp norms; see _reference.weighted_norm_batch."""
    cdef Py_ssize_t P = X.shape[0], n = X.shape[1], i
    out_arr = np.empty(P, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for i in range(P):
            out[i] = _norm_core(&X[i, 0] if n else NULL, &w[0] if n else NULL, n, p)
    return out_arr


cdef double _rearr_row(double* scratch, double* pref, const double* x,
                       Py_ssize_t n, const double* ts, const double* coefs,
                       Py_ssize_t G, double p_agg) noexcept nogil:
    cdef Py_ssize_t i, g, k
    cdef double s = 0.0, comp = 0.0, y, tnew, t, kt, term
    cdef double best = 0.0, scale = 0.0, acc = 0.0
    for i in range(n):
        scratch[i] = fabs(x[i])
    qsort(scratch, n, sizeof(double), _cmp_desc)
    pref[0] = 0.0
    for i in range(n):
        y = scratch[i] - comp
        tnew = s + y
        comp = (tnew - s) - y
        s = tnew
        pref[i + 1] = s
    # grid terms
    for g in range(G):
        t = ts[g]
        if t >= n:
            kt = pref[n]
        else:
            k = <Py_ssize_t> floor(t)
            kt = pref[k] + (t - k) * scratch[k]
        term = coefs[g] * kt
        if term > scale:
            scale = term
    if p_agg == INFINITY or scale == 0.0:
        return scale
    comp = 0.0
    for g in range(G):
        t = ts[g]
        if t >= n:
            kt = pref[n]
        else:
            k = <Py_ssize_t> floor(t)
            kt = pref[k] + (t - k) * scratch[k]
        term = coefs[g] * kt / scale
        if p_agg == 2.0:
            term = term * term
        else:
            term = pow(term, p_agg)
        y = term - comp
        tnew = acc + y
        comp = (tnew - acc) - y
        acc = tnew
    if p_agg == 2.0:
        return scale * sqrt(acc)
    return scale * pow(acc, 1.0 / p_agg)


def rearr_k_batch(X, const double[::1] ts, const double[::1] coefs, double p_agg):
    """Grid functionals of rearrangement K-profiles; see _reference."""
    X2 = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
    cdef const double[:, ::1] Xv = X2
    cdef Py_ssize_t P = Xv.shape[0], n = Xv.shape[1], i
    cdef Py_ssize_t G = ts.shape[0]
    out_arr = np.empty(P, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double* scratch = <double*> malloc((n if n else 1) * sizeof(double))
    cdef double* pref = <double*> malloc((n + 1) * sizeof(double))
    if scratch == NULL or pref == NULL:
        free(scratch)
        free(pref)
        raise MemoryError()
    try:
        with nogil:
            for i in range(P):
                out[i] = _rearr_row(scratch, pref, &Xv[i, 0] if n else NULL,
                                    n, &ts[0] if G else NULL,
                                    &coefs[0] if G else NULL, G, p_agg)
    finally:
        free(scratch)
        free(pref)
    return out_arr


def prox_weighted_l1(const double[::1] z, const double[::1] w, double sigma):
    """Coordinatewise soft threshold; see _reference.prox_weighted_l1."""
    cdef Py_ssize_t n = z.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double m
    for i in range(n):
        m = fabs(z[i]) - sigma * w[i]
        if m <= 0.0:
            out[i] = 0.0
        else:
            out[i] = m if z[i] > 0.0 else -m
    return out_arr


def prox_weighted_l2(const double[::1] z, const double[::1] w, double sigma):
    """Prox of sigma * ||w . x||_2; see _reference.prox_weighted_l2."""
    cdef Py_ssize_t n = z.shape[0], i
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double g0 = 0.0, comp = 0.0, y, tnew, c, term
    cdef double lo, hi, R, Rn, g, gp, d
    cdef int it
    for i in range(n):
        c = w[i] * w[i]
        term = c * z[i] * z[i] / ((sigma * c) * (sigma * c))
        y = term - comp
        tnew = g0 + y
        comp = (tnew - g0) - y
        g0 = tnew
    if g0 <= 1.0:
        for i in range(n):
            out[i] = 0.0
        return out_arr
    lo = 0.0
    hi = _norm_core(&z[0], &w[0], n, 2.0)
    R = 0.5 * hi
    for it in range(200):
        g = -1.0
        gp = 0.0
        for i in range(n):
            c = w[i] * w[i]
            d = R + sigma * c
            term = c * z[i] * z[i] / (d * d)
            g += term
            gp -= 2.0 * term / d
        if g > 0.0:
            lo = R
        else:
            hi = R
        Rn = R - g / gp
        if not (lo < Rn < hi):
            Rn = 0.5 * (lo + hi)
        if fabs(Rn - R) <= 1e-16 * (R if R > 1e-300 else 1e-300):
            R = Rn
            break
        R = Rn
    for i in range(n):
        c = w[i] * w[i]
        out[i] = z[i] * (R / (R + sigma * c))
    return out_arr


def prox_weighted_linf(const double[::1] z, const double[::1] w, double sigma):
    """Prox of sigma * max_i w_i |x_i|; see _reference.prox_weighted_linf."""
    cdef Py_ssize_t n = z.shape[0], i, k
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double total = 0.0, comp = 0.0, y, tnew, b, u, lam, cand, nxt
    cdef double cum_ub = 0.0, cub_c = 0.0, cum_bb = 0.0, cbb_c = 0.0, yi
    cdef _Trip* trips = <_Trip*> malloc((n if n else 1) * sizeof(_Trip))
    if trips == NULL:
        raise MemoryError()
    try:
        for i in range(n):
            b = 1.0 / w[i]
            u = fabs(z[i])
            trips[i].r = u / b
            trips[i].ub = u * b
            trips[i].bb = b * b
            y = u * b - comp
            tnew = total + y
            comp = (tnew - total) - y
            total = tnew
        if total <= sigma:
            for i in range(n):
                out[i] = 0.0
            return out_arr
        qsort(trips, n, sizeof(_Trip), _cmp_trip_desc)
        lam = 0.0
        for k in range(n):
            y = trips[k].ub - cub_c
            tnew = cum_ub + y
            cub_c = (tnew - cum_ub) - y
            cum_ub = tnew
            y = trips[k].bb - cbb_c
            tnew = cum_bb + y
            cbb_c = (tnew - cum_bb) - y
            cum_bb = tnew
            cand = (cum_ub - sigma) / cum_bb
            nxt = trips[k + 1].r if k + 1 < n else -INFINITY
            if cand >= nxt:
                lam = cand if cand > 0.0 else 0.0
                break
        for i in range(n):
            b = 1.0 / w[i]
            u = fabs(z[i]) - lam * b
            if u <= 0.0:
                yi = 0.0
            else:
                yi = u if z[i] > 0.0 else -u
            out[i] = z[i] - yi
    finally:
        free(trips)
    return out_arr
