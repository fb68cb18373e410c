"""Discrete dyadic (theta, p) interpolation norms and the two bound checks.

The norm is the lp aggregate of ``t_m^(-theta) * K(t_m, a)`` over the dyadic
grid ``t_m = shift * 2^m``, m in [-M, M].  The shift lets the domain-side
functional be evaluated at ``2^m * C1 / C0`` so the pointwise K inequality
transfers to the norms term by term, with no grid-equivalence constants.

Comparisons are certificate-aware: an objective is an upper bound on K and
the dual witness a lower bound, so confirmations use the upper bound of the
left side against the scaled right side, while a claimed violation must
hold between the left lower bound and the right upper bound.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import rearr_k_batch
from .couples import as_element
from .kfunc import compute_k

INF = math.inf
_FLOAT_SLOP = 1e-12


@dataclass(frozen=True)
class InterpParams:
    """theta in (0, 1), p in [1, inf], dyadic truncation half-width grid_M."""

    theta: float
    p: float
    grid_M: int = 12

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.p != INF and not self.p >= 1.0:
            raise ValueError(f"p must be >= 1 or inf, got {self.p}")
        if self.grid_M < 1:
            raise ValueError("grid_M must be >= 1")


def grid_points(ip, shift=1.0):
    """(ms, ts, coefs) with ts = shift * 2^m and coefs = ts^(-theta)."""
    ms = np.arange(-ip.grid_M, ip.grid_M + 1)
    ts = shift * np.exp2(ms.astype(float))
    return ms, ts, ts ** (-ip.theta)


def aggregate_terms(terms, p):
    """lp aggregate with max-scaling (max for p = inf)."""
    terms = np.asarray(terms, dtype=float)
    if terms.size == 0:
        return 0.0
    if p == INF:
        return float(terms.max())
    scale = float(terms.max())
    if scale == 0.0:
        return 0.0
    return scale * math.fsum(((terms / scale) ** p).tolist()) ** (1.0 / p)


@dataclass(frozen=True)
class InterpNormResult:
    """Grid functional value with per-grid-point contributions and slack.

    ``value <= (1 + slack) *`` (the functional built from the true K values).
    """

    value: float
    params: InterpParams
    shift: float
    per_term: list = field(repr=False)
    slack: float

    def recompute(self):
        return aggregate_terms([term for _, term in self.per_term], self.params.p)


def interp_norm(a, couple, ip, tol=1e-9, shift=1.0, method="auto"):
    """The (theta, p) grid functional of a on the couple."""
    a = as_element(a, couple.dim)
    ms, ts, coefs = grid_points(ip, shift)
    terms = []
    slack = 0.0
    for m, t, c in zip(ms, ts, coefs):
        dec = compute_k(float(t), a, couple, tol=tol, method=method)
        terms.append((int(m), c * dec.objective))
        slack = max(slack, dec.slack)
    value = aggregate_terms([term for _, term in terms], ip.p)
    if value == 0.0:
        slack = 0.0
    return InterpNormResult(value=value, params=ip, shift=shift, per_term=terms, slack=slack)


def _is_unit_l1_linf(couple):
    return (
        couple.space0.p == 1.0
        and couple.space1.p == INF
        and bool(np.all(couple.space0.weights == 1.0))
        and bool(np.all(couple.space1.weights == 1.0))
    )


def interp_norm_batch(X, couple, ip, tol=1e-9, shift=1.0):
    """Row-wise grid-functional values (upper bounds; exact on closed forms).

    Used for net distances, where only values are needed.  Unit (l1, linf)
    couples go through the batched rearrangement kernel; degenerate couples
    reduce to a couple norm times a grid constant; anything else falls back
    to per-row evaluation.
    """
    X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
    _, ts, coefs = grid_points(ip, shift)
    if _is_unit_l1_linf(couple):
        return rearr_k_batch(X, np.ascontiguousarray(ts), np.ascontiguousarray(coefs), ip.p)
    if couple.degenerate:
        const = aggregate_terms(coefs * np.minimum(1.0, ts), ip.p)
        return couple.space0.norm_batch(X) * const
    return np.array([interp_norm(x, couple, ip, tol=tol, shift=shift).value for x in X])


@dataclass(frozen=True)
class KInequalityReport:
    """K(t, Ta; B) <= C0 * K(t C1/C0, a; A), checked with certified bounds."""

    t: float
    shifted_t: float
    lhs_objective: float
    lhs_lower: float
    lhs_slack: float
    rhs_objective: float
    rhs_lower: float
    rhs_slack: float
    constant: float
    holds: bool
    violation_certified: bool
    margin: float

    def to_json(self):
        return {
            "t": self.t,
            "shifted_t": self.shifted_t,
            "lhs": {"objective": self.lhs_objective, "lower": self.lhs_lower, "slack": self.lhs_slack},
            "rhs": {"objective": self.rhs_objective, "lower": self.rhs_lower, "slack": self.rhs_slack},
            "constant": self.constant,
            "holds": self.holds,
            "violation_certified": self.violation_certified,
            "margin": self.margin,
        }


def verify_k_inequality(op, a, couple_a, couple_b, t, tol=1e-9):
    """Pointwise K bound for a Lipschitz operator, certificate-aware."""
    if op.c0 is None or op.c1 is None:
        raise ValueError("operator carries no (C0, C1) certificates")
    a = as_element(a, couple_a.dim)
    ta = op.apply(a)
    shifted = t * op.c1 / op.c0
    lhs = compute_k(t, ta, couple_b, tol=tol)
    rhs = compute_k(shifted, a, couple_a, tol=tol)
    bound = op.c0 * rhs.objective
    allow = (1.0 + lhs.slack) * (1.0 + _FLOAT_SLOP)
    holds = lhs.objective <= allow * bound
    violation = lhs.lower_bound > bound * (1.0 + _FLOAT_SLOP)
    margin = op.c0 * rhs.lower_bound - lhs.objective
    return KInequalityReport(
        t=t,
        shifted_t=shifted,
        lhs_objective=lhs.objective,
        lhs_lower=lhs.lower_bound,
        lhs_slack=lhs.slack,
        rhs_objective=rhs.objective,
        rhs_lower=rhs.lower_bound,
        rhs_slack=rhs.slack,
        constant=op.c0,
        holds=holds,
        violation_certified=violation,
        margin=margin,
    )


@dataclass(frozen=True)
class NormInequalityReport:
    """||Ta||_(theta,p);B <= C0^(1-theta) C1^theta ||a||_(theta,p);A on the
    shifted grid, with the term-by-term transfers recorded."""

    lhs: float
    rhs: float
    constant: float
    lhs_slack: float
    rhs_slack: float
    holds: bool
    margin: float
    per_term_holds: bool
    grid: list

    def to_json(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "slacks": {"lhs": self.lhs_slack, "rhs": self.rhs_slack},
            "holds": self.holds,
            "margin": self.margin,
            "per_term_holds": self.per_term_holds,
            "grid": self.grid,
        }


def verify_interp_inequality(op, couple_a, couple_b, ip, a, tol=1e-9):
    """Interpolation-norm bound via the shifted-grid functional."""
    if op.c0 is None or op.c1 is None:
        raise ValueError("operator carries no (C0, C1) certificates")
    a = as_element(a, couple_a.dim)
    ta = op.apply(a)
    shift = op.c1 / op.c0
    lhs = interp_norm(ta, couple_b, ip, tol=tol)
    rhs = interp_norm(a, couple_a, ip, tol=tol, shift=shift)
    constant = op.c0 ** (1.0 - ip.theta) * op.c1**ip.theta
    allow = (1.0 + lhs.slack) * (1.0 + _FLOAT_SLOP)
    holds = lhs.value <= allow * constant * rhs.value
    grid = []
    per_term_holds = True
    for (m, lt), (_, rt) in zip(lhs.per_term, rhs.per_term):
        term_ok = lt <= allow * constant * rt
        per_term_holds = per_term_holds and term_ok
        grid.append({"m": m, "lhs_term": lt, "rhs_term": constant * rt, "holds": term_ok})
    margin = constant * rhs.value - lhs.value
    return NormInequalityReport(
        lhs=lhs.value,
        rhs=rhs.value,
        constant=constant,
        lhs_slack=lhs.slack,
        rhs_slack=rhs.slack,
        holds=holds,
        margin=margin,
        per_term_holds=per_term_holds,
        grid=grid,
    )
