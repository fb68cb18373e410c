"""NumPy reference implementations of the hot kernels.

This lane is selected at import time when the compiled extension is not
available (or when ``INTERP_LAB_FORCE_FALLBACK`` is set).  Both lanes expose
the same functions with the same semantics; numerical results agree to
roundoff but are not guaranteed bit-identical across lanes.

Summation is compensated everywhere (``math.fsum`` for single vectors,
NumPy pairwise reduction for batches), and p-th powers are max-scaled so
large exponents neither overflow nor lose the leading digits.
"""

import math

import numpy as np

INF = math.inf


def weighted_norm(x, w, p):
    """Weighted lp norm ``(sum_i (w_i |x_i|)^p)^(1/p)``, max-norm for p=inf."""
    terms = w * np.abs(x)
    if p == INF:
        return float(terms.max()) if terms.size else 0.0
    if p == 1.0:
        return math.fsum(terms.tolist())
    scale = float(terms.max()) if terms.size else 0.0
    if scale == 0.0:
        return 0.0
    scaled = terms / scale
    if p == 2.0:
        acc = math.fsum((scaled * scaled).tolist())
    else:
        acc = math.fsum(np.power(scaled, p).tolist())
    return scale * acc ** (1.0 / p)


def weighted_norm_batch(X, w, p):
    """Row-wise weighted lp norms of a (P, n) array."""
    T = np.abs(X) * w
    if p == INF:
        return T.max(axis=1) if T.shape[1] else np.zeros(T.shape[0])
    if p == 1.0:
        return T.sum(axis=1)
    scale = T.max(axis=1)
    out = np.zeros(T.shape[0])
    nz = scale > 0.0
    if np.any(nz):
        S = T[nz] / scale[nz, None]
        if p == 2.0:
            acc = (S * S).sum(axis=1)
        else:
            acc = np.power(S, p).sum(axis=1)
        out[nz] = scale[nz] * acc ** (1.0 / p)
    return out


def rearr_k_batch(X, ts, coefs, p_agg):
    """Grid functionals of rearrangement K-profiles, one value per row of X.

    For each row x the couple is the unit-weight (l1, linf) pair, where
    K(t, x) equals the sum of the floor(t) largest |x_i| plus the fractional
    remainder of the next one.  The returned value aggregates
    ``coefs[g] * K(ts[g], x)`` over the grid in the p_agg norm (max for inf).
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    P, n = X.shape
    A = np.sort(np.abs(X), axis=1)[:, ::-1]
    pref = np.zeros((P, n + 1))
    np.cumsum(A, axis=1, out=pref[:, 1:])
    G = len(ts)
    terms = np.empty((P, G))
    for g in range(G):
        t = ts[g]
        if t >= n:
            kt = pref[:, n]
        else:
            k = int(math.floor(t))
            kt = pref[:, k] + (t - k) * A[:, k]
        terms[:, g] = coefs[g] * kt
    if p_agg == INF:
        return terms.max(axis=1)
    scale = terms.max(axis=1)
    out = np.zeros(P)
    nz = scale > 0.0
    if np.any(nz):
        S = terms[nz] / scale[nz, None]
        if p_agg == 2.0:
            acc = (S * S).sum(axis=1)
        else:
            acc = np.power(S, p_agg).sum(axis=1)
        out[nz] = scale[nz] * acc ** (1.0 / p_agg)
    return out


def prox_weighted_l1(z, w, sigma):
    """Prox of ``sigma * sum_i w_i |x_i|`` (coordinatewise soft threshold)."""
    return np.sign(z) * np.maximum(np.abs(z) - sigma * w, 0.0)


def prox_weighted_l2(z, w, sigma):
    """Prox of ``sigma * ||w . x||_2`` via the scalar residual-norm equation.

    The minimizer satisfies x_i = z_i R / (R + sigma w_i^2) with
    R = ||w . x||_2; R solves sum_i c_i z_i^2 / (R + sigma c_i)^2 = 1 for
    c = w^2, found by safeguarded Newton.
    """
    c = w * w
    cz2 = c * z * z
    # x = 0 iff the dual norm of z/sigma is within the unit ball
    g0 = float(np.sum(cz2 / (sigma * c) ** 2))
    if g0 <= 1.0:
        return np.zeros_like(z)
    lo = 0.0
    hi = weighted_norm(z, w, 2.0)
    R = 0.5 * hi
    for _ in range(200):
        d = R + sigma * c
        g = float(np.sum(cz2 / (d * d))) - 1.0
        if g > 0.0:
            lo = R
        else:
            hi = R
        gp = -2.0 * float(np.sum(cz2 / (d * d * d)))
        step = g / gp
        R_new = R - step
        if not (lo < R_new < hi):
            R_new = 0.5 * (lo + hi)
        if abs(R_new - R) <= 1e-16 * max(R, 1e-300):
            R = R_new
            break
        R = R_new
    return z * (R / (R + sigma * c))


def prox_weighted_linf(z, w, sigma):
    """Prox of ``sigma * max_i w_i |x_i|``.

    Moreau: z minus the projection of z onto the polar ball
    ``{y : sum_i |y_i| / w_i <= sigma}`` (weighted l1 ball, exact
    waterfilling on sorted breakpoints).
    """
    b = 1.0 / w
    u = np.abs(z)
    if float(np.sum(u * b)) <= sigma:
        return np.zeros_like(z)
    r = u / b
    order = np.argsort(-r, kind="stable")
    rs = r[order]
    cum_ub = np.cumsum((u * b)[order])
    cum_bb = np.cumsum((b * b)[order])
    n = len(z)
    lam = 0.0
    for k in range(n):
        cand = (cum_ub[k] - sigma) / cum_bb[k]
        nxt = rs[k + 1] if k + 1 < n else -INF
        if cand >= nxt:
            lam = max(cand, 0.0)
            break
    y = np.sign(z) * np.maximum(u - lam * b, 0.0)
    return z - y
