"""Coordinate truncations approximating the identity on compact envelope sets.

The compact sets are boxes ``K = {b : |b_i| <= kappa_i}`` for a nonincreasing
nonnegative kappa.  The approximating family is the chain of coordinate
truncations P_N (keep the first N coordinates, zero the rest): each P_N is
linear, idempotent, and contracts every implemented weighted lp norm, so the
uniform bound constant is exactly 1.  The worst-case approximation error of
P_N over K in the 0-norm is attained at the extreme point b = kappa and is
computed from the tail envelope, never sampled, which makes the selection
rule eps -> P_N deterministic and certifiable.
"""

import math
from dataclasses import dataclass

import numpy as np

from .couples import as_element

INF = math.inf


@dataclass(frozen=True, eq=False)
class CompactEnvelope:
    """The box {b : |b_i| <= kappa_i} with its uniform bound constant."""

    kappa: np.ndarray
    bound_constant: float = 1.0

    def __post_init__(self):
        k = np.ascontiguousarray(self.kappa, dtype=np.float64)
        if k.ndim != 1 or not np.all(np.isfinite(k)) or np.any(k < 0.0):
            raise ValueError("kappa must be a finite nonnegative vector")
        if np.any(np.diff(k) > 0.0):
            raise ValueError("kappa must be nonincreasing")
        k.setflags(write=False)
        object.__setattr__(self, "kappa", k)
        if self.bound_constant != 1.0:
            raise ValueError("truncation families have bound constant exactly 1")

    @property
    def dim(self):
        return self.kappa.shape[0]

    def extreme_points(self, signs):
        """Extreme points of the box for given sign rows (+-1)."""
        return np.atleast_2d(signs) * self.kappa

    def to_json(self):
        return {"kappa": self.kappa.tolist(), "cK": self.bound_constant}

    @classmethod
    def from_json(cls, obj):
        return cls(kappa=np.asarray(obj["kappa"], dtype=np.float64),
                   bound_constant=float(obj.get("cK", 1.0)))


def dyadic_envelope(dim):
    """kappa_i = 2^-i (1-based), the standard rapidly decaying box."""
    return CompactEnvelope(kappa=np.exp2(-np.arange(1, dim + 1, dtype=float)))


def truncate(x, N):
    """Keep the first N coordinates, zero the rest."""
    x = np.asarray(x, dtype=float)
    out = x.copy()
    out[..., N:] = 0.0
    return out


@dataclass(frozen=True, eq=False)
class TruncationFamily:
    """The chain {P_N : N = 0..dim} on a given range couple."""

    couple: object  # CoupleSpec

    @property
    def dim(self):
        return self.couple.dim

    def members(self):
        return range(self.dim + 1)


@dataclass(frozen=True, eq=False)
class TruncationProjection:
    N: int
    family: TruncationFamily

    def apply(self, b):
        b = as_element(b, self.family.dim)
        return truncate(b, self.N)

    def apply_batch(self, X):
        return truncate(np.atleast_2d(np.asarray(X, dtype=float)), self.N)

    @property
    def is_identity(self):
        return self.N == self.family.dim


def tail_error(env, couple, N):
    """sup over b in K of ||P_N b - b||_B0, exactly the 0-norm of the tail envelope."""
    tail = env.kappa.copy()
    tail[:N] = 0.0
    return couple.space0.norm(tail)


def select_projection(env, fam, eps):
    """Smallest-N truncation whose worst-case error over K is strictly below eps."""
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps}")
    if env.dim != fam.dim:
        raise ValueError("envelope and family dimensions differ")
    for N in fam.members():
        if tail_error(env, fam.couple, N) < eps:
            return TruncationProjection(N=N, family=fam)
    raise AssertionError("unreachable: the full truncation has zero error")


@dataclass(frozen=True)
class FamilyBoundReport:
    """max over N of ||P_N b||_Bj / ||b||_Bj for j = 0, 1, checked against 1."""

    max_ratio0: float
    max_ratio1: float
    bound_constant: float
    holds: bool


def family_bound_report(fam, b, bound_constant=1.0, slop=1e-12):
    b = as_element(b, fam.dim)
    c = fam.couple
    n0, n1 = c.norm0(b), c.norm1(b)
    r0 = r1 = 0.0
    for N in fam.members():
        pb = truncate(b, N)
        if n0 > 0.0:
            r0 = max(r0, c.norm0(pb) / n0)
        if n1 > 0.0:
            r1 = max(r1, c.norm1(pb) / n1)
    holds = r0 <= bound_constant * (1.0 + slop) and r1 <= bound_constant * (1.0 + slop)
    return FamilyBoundReport(r0, r1, bound_constant, holds)


@dataclass(frozen=True)
class DefectBoundReport:
    """||(P T - T) a||_B0 against eps * ||a||_A0, plus the normalized form."""

    defect_norm0: float
    a_norm0: float
    eps: float
    holds_homogeneous: bool
    normalized_defect: float | None

    def to_json(self):
        return {
            "defect_norm0": self.defect_norm0,
            "a_norm0": self.a_norm0,
            "eps": self.eps,
            "holds_homogeneous": self.holds_homogeneous,
            "normalized_defect": self.normalized_defect,
        }


def defect_bound_report(op, proj, a, couple_a, eps, slop=1e-12):
    """The B0 defect bound driven by the selection rule (zero map fixed at a = 0)."""
    a = as_element(a, couple_a.dim)
    ta = op.apply(a)
    defect = proj.apply(ta) - ta
    lhs = proj.family.couple.norm0(defect)
    a0 = couple_a.norm0(a)
    holds = lhs <= eps * a0 * (1.0 + slop) + 1e-300
    normalized = (lhs / a0) if a0 > 0.0 else None
    return DefectBoundReport(
        defect_norm0=lhs,
        a_norm0=a0,
        eps=eps,
        holds_homogeneous=holds,
        normalized_defect=normalized,
    )
