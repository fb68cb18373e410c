"""Finite-dimensional weighted lp spaces and compatible couples.

A couple is a pair of weighted lp norms on one shared index set, so both
norms act on the same vectors.  Exponent infinity is represented by
``math.inf``, never by a large float.  All norm evaluation is routed
through the kernel backend (compiled or NumPy).
"""

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import weighted_norm, weighted_norm_batch

INF = math.inf


class DimensionMismatchError(ValueError):
    """Vector length does not match the space it is used with."""


def as_element(values, dim=None):
    """Validate and return a couple element as a contiguous float64 vector.

    Rejects NaN and infinite entries; checks the dimension when given.
    """
    x = np.ascontiguousarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"element must be a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("element entries must be finite")
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatchError(f"element has dim {x.shape[0]}, expected {dim}")
    return x


def _check_exponent(p):
    p = float(p)
    if p != INF and not p >= 1.0:
        raise ValueError(f"exponent must be >= 1 or inf, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class SpaceSpec:
    """One weighted lp norm: exponent ``p`` in [1, inf], strictly positive weights."""

    p: float
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", _check_exponent(self.p))
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-D vector")
        if not np.all(np.isfinite(w)) or not np.all(w > 0.0):
            raise ValueError("weights must be finite and strictly positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self):
        return self.weights.shape[0]

    def norm(self, x):
        """Weighted lp norm of a single vector."""
        x = as_element(x, self.dim)
        return weighted_norm(x, self.weights, self.p)

    def norm_batch(self, X):
        """Row-wise norms of a (P, dim) array."""
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        if X.shape[1] != self.dim:
            raise DimensionMismatchError(f"rows have dim {X.shape[1]}, expected {self.dim}")
        return weighted_norm_batch(X, self.weights, self.p)

    def same_as(self, other):
        return self.p == other.p and np.array_equal(self.weights, other.weights)

    def to_json(self):
        return {
            "p": "inf" if self.p == INF else self.p,
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        p = INF if obj["p"] == "inf" else float(obj["p"])
        return cls(p=p, weights=np.asarray(obj["weights"], dtype=np.float64))


def unit_space(p, dim):
    """lp space with unit weights."""
    return SpaceSpec(p=p, weights=np.ones(dim))


@dataclass(frozen=True, eq=False)
class CoupleSpec:
    """Two weighted lp norms on a common index set.

    ``norm1_le_norm0`` certifies the continuous inclusion with constant 1:
    it holds when every basis vector satisfies ||e_i||_1 <= ||e_i||_0
    (i.e. weights1 <= weights0) and p1 >= p0, because lp norms on a counting
    measure decrease as the exponent grows.
    """

    space0: SpaceSpec
    space1: SpaceSpec

    def __post_init__(self):
        if self.space0.dim != self.space1.dim:
            raise DimensionMismatchError(
                f"couple spaces disagree on dimension: {self.space0.dim} vs {self.space1.dim}"
            )

    @property
    def dim(self):
        return self.space0.dim

    @property
    def degenerate(self):
        """Both spaces carry the identical norm."""
        return self.space0.same_as(self.space1)

    @property
    def norm1_le_norm0(self):
        return self.space1.p >= self.space0.p and bool(
            np.all(self.space1.weights <= self.space0.weights)
        )

    def norm0(self, x):
        return self.space0.norm(x)

    def norm1(self, x):
        return self.space1.norm(x)

    def to_json(self):
        return {
            "dim": self.dim,
            "space0": self.space0.to_json(),
            "space1": self.space1.to_json(),
        }

    @classmethod
    def from_json(cls, obj):
        c = cls(
            space0=SpaceSpec.from_json(obj["space0"]),
            space1=SpaceSpec.from_json(obj["space1"]),
        )
        if "dim" in obj and int(obj["dim"]) != c.dim:
            raise ValueError(f"declared dim {obj['dim']} != weights length {c.dim}")
        return c


def source_couple(space0, space1):
    """Couple constructor for the domain side, which must embed with constant 1."""
    c = CoupleSpec(space0=space0, space1=space1)
    if not c.norm1_le_norm0:
        raise ValueError(
            "source couple requires ||.||_1 <= ||.||_0 (weights1 <= weights0 and p1 >= p0)"
        )
    return c


def l1_linf_couple(dim, w0=None, w1=None):
    """The (l1, linf) couple, unit weights unless given."""
    w0 = np.ones(dim) if w0 is None else np.asarray(w0, dtype=np.float64)
    w1 = np.ones(dim) if w1 is None else np.asarray(w1, dtype=np.float64)
    return CoupleSpec(space0=SpaceSpec(1.0, w0), space1=SpaceSpec(INF, w1))


def degenerate_couple(p, weights):
    """Both spaces equal: K(t, x) collapses to min(1, t) times the norm."""
    s = SpaceSpec(p=p, weights=np.asarray(weights, dtype=np.float64))
    return CoupleSpec(space0=s, space1=s)


def intersection_norm(x, couple):
    """max of the two norms (the norm of the intersection space)."""
    x = as_element(x, couple.dim)
    return max(couple.norm0(x), couple.norm1(x))


def sum_norm(x, couple, tol=1e-9):
    """inf of ||x0||_0 + ||x1||_1 over splits x = x0 + x1, i.e. K(1, x)."""
    from .kfunc import compute_k

    return compute_k(1.0, x, couple, tol=tol).objective
