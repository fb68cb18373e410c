"""K(t, a) on weighted lp couples: certified decompositions, curves, oracle.

``compute_k`` returns a splitting a = a0 + a1 together with a certified
relative slack: the achieved objective is within (1 + slack) of the true
infimum, witnessed by an explicit dual lower bound.  Closed forms cover the
degenerate couple, the n = 1 case, and (l1, linf) couples (decreasing
rearrangement for unit weights, an exact threshold/knapsack pair for general
weights); everything else goes through the splitting solver.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._solver import solve_k_general
from .couples import DimensionMismatchError, as_element

INF = math.inf
_FLOAT_SLOP = 1e-12


class UncertifiedDecompositionError(RuntimeError):
    """The solver could not certify the requested slack; carries its best try."""

    def __init__(self, message, best):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class KDecomposition:
    """A splitting a = a0 + a1 at parameter t with certified slack.

    ``objective = ||a0||_X0 + t ||a1||_X1`` and
    ``objective <= (1 + slack) * K(t, a)``, witnessed by ``lower_bound``.
    """

    t: float
    a0: np.ndarray
    a1: np.ndarray
    objective: float
    slack: float
    lower_bound: float
    method: str

    @property
    def a(self):
        return self.a0 + self.a1


@dataclass(frozen=True)
class KCurve:
    """K on the dyadic grid t = 2^m, m in [-M, M], with per-point slack."""

    ms: np.ndarray
    ts: np.ndarray
    values: np.ndarray
    slacks: np.ndarray


@dataclass(frozen=True)
class OracleK:
    """Exhaustive grid upper value for K with its one-sided error bound.

    ``value - error_bound <= K(t, a) <= value``.
    """

    value: float
    error_bound: float


def _finish(t, a, a0, objective, lower_bound, method, couple):
    a1 = a - a0
    recomputed = couple.norm0(a0) + t * couple.norm1(a1)
    if not math.isclose(recomputed, objective, rel_tol=1e-12, abs_tol=1e-300):
        raise AssertionError(
            f"decomposition objective drifted: {objective} vs recomputed {recomputed}"
        )
    if lower_bound > 0.0:
        slack = max(0.0, objective / lower_bound - 1.0)
    else:
        slack = 0.0 if objective == 0.0 else INF
    return KDecomposition(
        t=t,
        a0=a0,
        a1=a1,
        objective=recomputed,
        slack=slack,
        lower_bound=lower_bound,
        method=method,
    )


def _k_degenerate(t, a, couple):
    nrm = couple.norm0(a)
    if t >= 1.0:
        a0 = a.copy()
    else:
        a0 = np.zeros_like(a)
    value = min(1.0, t) * nrm
    objective = couple.norm0(a0) + t * couple.norm1(a - a0)
    return _finish(t, a, a0, objective, value, "degenerate", couple)


def _k_dim1(t, a, couple):
    w0 = couple.space0.weights[0]
    w1 = couple.space1.weights[0]
    if w0 <= t * w1:
        a0 = a.copy()
    else:
        a0 = np.zeros_like(a)
    objective = couple.norm0(a0) + t * couple.norm1(a - a0)
    value = min(w0, t * w1) * abs(float(a[0]))
    return _finish(t, a, a0, objective, value, "dim1", couple)


def _k_rearrangement(t, a, couple):
    """Unit-weight (l1, linf): K(t, a) is the integral of the decreasing
    rearrangement up to t; the optimal a1 clips a at the rearrangement level."""
    n = len(a)
    srt = np.sort(np.abs(a))[::-1]
    k = min(int(math.floor(t)), n)
    if k >= n:
        lam = 0.0
        value = math.fsum(srt.tolist())
    else:
        lam = float(srt[k])
        value = math.fsum(srt[:k].tolist()) + (t - k) * lam
    a1 = np.clip(a, -lam, lam)
    a0 = a - a1
    objective = couple.norm0(a0) + t * couple.norm1(a1)
    return _finish(t, a, a0, objective, value, "rearrangement", couple)


def _k_threshold_weighted(t, a, couple):
    """(l1_w0, linf_w1): exact minimization over the clip level, with the
    matching fractional-knapsack dual as the lower-bound witness."""
    w0 = couple.space0.weights
    w1 = couple.space1.weights
    alpha = np.abs(a)
    levels = w1 * alpha
    order = np.argsort(-levels, kind="stable")
    ratio = (w0 / w1)[order]
    cum = np.cumsum(ratio)
    n = len(a)
    k = int(np.searchsorted(cum, t, side="right"))  # first index with cum > t
    if k >= n:
        lam = 0.0
    else:
        lam = float(levels[order][k])
    x = np.maximum(alpha - lam / w1, 0.0)
    a0 = np.sign(a) * x
    objective = couple.norm0(a0) + t * couple.norm1(a - a0)
    # greedy dual: value density is the clip level, budget t
    la = (w0 * alpha)[order]
    used = float(cum[k - 1]) if k > 0 else 0.0
    lower = math.fsum(la[:k].tolist())
    if k < n:
        lower += (t - used) * float(levels[order][k])
    return _finish(t, a, a0, objective, lower, "threshold", couple)


def compute_k(t, a, couple, tol=1e-9, method="auto", max_iter=60000):
    """K-functional at t with a certified near-optimal decomposition.

    method: "auto" routes to a closed form when one applies, otherwise to
    the general solver; "general" forces the solver; "closed_form" requires
    a closed form and raises otherwise.
    """
    t = float(t)
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    a = as_element(a, couple.dim)
    if not np.any(a):
        z = np.zeros_like(a)
        return KDecomposition(t, z, z.copy(), 0.0, 0.0, 0.0, "zero")
    p0, p1 = couple.space0.p, couple.space1.p
    unit0 = bool(np.all(couple.space0.weights == 1.0))
    unit1 = bool(np.all(couple.space1.weights == 1.0))

    if method not in ("auto", "general", "closed_form"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "closed_form"):
        if couple.degenerate:
            return _k_degenerate(t, a, couple)
        if couple.dim == 1:
            return _k_dim1(t, a, couple)
        if p0 == 1.0 and p1 == INF:
            if unit0 and unit1:
                return _k_rearrangement(t, a, couple)
            return _k_threshold_weighted(t, a, couple)
        if method == "closed_form":
            raise ValueError("no closed form for this couple")

    sol = solve_k_general(t, a, couple, tol=tol, max_iter=max_iter)
    dec = _finish(t, a, sol.x0, sol.objective, sol.lower_bound, "general", couple)
    if dec.slack > tol:
        raise UncertifiedDecompositionError(
            f"gap {dec.slack:.3e} not certified below tol {tol:.3e} "
            f"after {sol.iterations} iterations",
            best=dec,
        )
    return dec


def dyadic_grid(M):
    ms = np.arange(-M, M + 1)
    return ms, np.exp2(ms.astype(float))


def compute_k_curve(a, couple, M, tol=1e-9, method="auto"):
    """K on the dyadic grid with curve invariants validated before return."""
    if M < 1:
        raise ValueError("M must be >= 1")
    ms, ts = dyadic_grid(M)
    values = np.empty(len(ts))
    slacks = np.empty(len(ts))
    for i, t in enumerate(ts):
        try:
            dec = compute_k(float(t), a, couple, tol=tol, method=method)
        except UncertifiedDecompositionError as exc:
            raise UncertifiedDecompositionError(
                f"curve point m={ms[i]}: {exc}", best=exc.best
            ) from exc
        values[i] = dec.objective
        slacks[i] = dec.slack
    curve = KCurve(ms=ms, ts=ts, values=values, slacks=slacks)
    _validate_curve(curve)
    return curve


def _validate_curve(curve):
    v, s, ts = curve.values, curve.slacks, curve.ts
    widths = v * s
    for i in range(len(v) - 1):
        if v[i + 1] < v[i] / (1.0 + s[i]) - _FLOAT_SLOP * max(1.0, v[i]):
            raise ValueError(f"K curve not nondecreasing at m={curve.ms[i]}")
    # concavity via chord slopes, allowing for per-point certified widths
    slopes = np.diff(v) / np.diff(ts)
    errs = (widths[:-1] + widths[1:]) / np.diff(ts)
    for i in range(len(slopes) - 1):
        allow = errs[i] + errs[i + 1] + _FLOAT_SLOP * (abs(slopes[i]) + 1.0)
        if slopes[i + 1] > slopes[i] + allow:
            raise ValueError(f"K curve not concave near m={curve.ms[i + 1]}")


def oracle_k(t, a, couple, grid_resolution=80, chunk=200_000):
    """Exhaustive minimum of the splitting objective over the clamp grid.

    Scans s in [0, 1]^n at the given resolution with a0 = s * a (valid by
    the clamp property of optimal splittings) and reports a one-sided
    Lipschitz error bound.  Cost grows as resolution^n, so n <= 4.
    """
    t = float(t)
    if not t > 0.0:
        raise ValueError("t must be positive")
    a = as_element(a, couple.dim)
    n = couple.dim
    if n > 4:
        raise ValueError(f"oracle is exhaustive; n={n} > 4 rejected")
    if not np.any(a):
        return OracleK(0.0, 0.0)
    r = int(grid_resolution)
    if r < 1:
        raise ValueError("grid_resolution must be >= 1")
    axis = np.linspace(0.0, 1.0, r + 1)
    total = (r + 1) ** n
    shape = (r + 1,) * n
    best = INF
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        coords = np.unravel_index(idx, shape)
        block = np.stack([axis[c] for c in coords], axis=-1)
        X0 = block * a
        f = couple.space0.norm_batch(X0) + t * couple.space1.norm_batch(a - X0)
        m = float(f.min())
        if m < best:
            best = m
    lip = couple.norm0(a) + t * couple.norm1(a)
    return OracleK(value=best, error_bound=lip * 0.5 / r)
