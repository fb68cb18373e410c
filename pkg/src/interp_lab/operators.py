"""Nonlinear Lipschitz operators on sequence couples with certified constants.

The workhorse family is a diagonal compact multiplier applied after a
coordinatewise 1-Lipschitz nonlinearity fixing 0:
``(Ta)_i = sign * kappa_i * sigma(a_i)``.  With a domain space dominating
the sup norm (all weights >= 1) this satisfies the bounded-image inequality
with C0 = ||kappa||_B0, the Lipschitz inequality with
C1 = max_i kappa_i * w1B_i / w1A_i (same exponent on both "1" spaces), and
by construction its image lies in ``||a||_A0`` times the compact box
``{b : |b_i| <= kappa_i}``.

``identity_control`` is the negative control: the identity map carrying a
fake envelope claim, used to show the membership check and net-size
plateau actually discriminate.

Constants are certificates, not minima: constructors derive them from the
structure above and a seeded randomized audit verifies the observed ratios
stay below them.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .couples import as_element

INF = math.inf

KINDS = ("envelope_compact", "scalar_multiple", "zero", "identity_control", "custom_composition")
NONLINEARITIES = ("identity", "abs", "shrink", "soft_clamp")


def apply_nonlinearity(name, param, x):
    """Coordinatewise 1-Lipschitz map with sigma(0) = 0 and |sigma(x)| <= |x|."""
    if name == "identity":
        return np.asarray(x, dtype=float).copy()
    if name == "abs":
        return np.abs(x)
    if name == "shrink":
        return np.sign(x) * np.maximum(np.abs(x) - param, 0.0)
    if name == "soft_clamp":
        return param * np.tanh(np.asarray(x, dtype=float) / param)
    raise ValueError(f"unknown nonlinearity {name!r}")


@dataclass(frozen=True, eq=False)
class LipschitzOperator:
    kind: str
    dim: int
    c0: float
    c1: float
    envelope: np.ndarray | None
    nonlinearity: str
    nl_param: float
    sign: float
    observed_c0: float
    observed_c1: float

    def apply(self, a):
        a = as_element(a, self.dim)
        return self.apply_batch(a[None, :])[0]

    def apply_batch(self, X):
        X = np.ascontiguousarray(np.atleast_2d(X), dtype=np.float64)
        if self.kind == "zero":
            return np.zeros_like(X)
        if self.kind in ("scalar_multiple", "identity_control"):
            return self.sign * X if self.kind == "scalar_multiple" else X.copy()
        return self.sign * self.envelope * apply_nonlinearity(self.nonlinearity, self.nl_param, X)

    def to_json(self):
        return {
            "kind": self.kind,
            "envelope": None if self.envelope is None else self.envelope.tolist(),
            "nonlinearity": self.nonlinearity,
            "nl_param": self.nl_param,
            "sign": self.sign,
            "C0": self.c0,
            "C1": self.c1,
        }


def _validate_envelope(envelope, dim):
    kappa = np.ascontiguousarray(envelope, dtype=np.float64)
    if kappa.shape != (dim,):
        raise ValueError(f"envelope must have shape ({dim},)")
    if not np.all(np.isfinite(kappa)) or np.any(kappa < 0.0):
        raise ValueError("envelope entries must be finite and nonnegative")
    if np.any(np.diff(kappa) > 0.0):
        raise ValueError("envelope must be nonincreasing")
    kappa.setflags(write=False)
    return kappa


def make_operator(
    kind,
    couple_a,
    couple_b,
    envelope=None,
    nonlinearity="abs",
    nl_param=1.0,
    scale=1.0,
    audit_samples=1000,
    audit_seed=0,
):
    """Construct an operator with derived, audit-checked (C0, C1) certificates."""
    if kind not in KINDS:
        raise ValueError(f"unknown operator kind {kind!r}")
    if couple_a.dim != couple_b.dim:
        raise ValueError("domain and range couples must share the dimension")
    dim = couple_a.dim
    if nonlinearity not in NONLINEARITIES:
        raise ValueError(f"unknown nonlinearity {nonlinearity!r}")
    if nonlinearity in ("shrink", "soft_clamp") and not nl_param > 0.0:
        raise ValueError("nonlinearity parameter must be positive")

    if kind == "zero":
        op = LipschitzOperator(kind, dim, 1.0, 1.0, None, "identity", 1.0, 0.0, 0.0, 0.0)
    elif kind in ("scalar_multiple", "identity_control"):
        same = couple_a.space0.same_as(couple_b.space0) and couple_a.space1.same_as(
            couple_b.space1
        )
        if not same:
            raise ValueError(f"{kind} requires identical domain and range couples")
        if kind == "scalar_multiple":
            if scale == 0.0:
                raise ValueError("use kind='zero' for the zero map")
            c = abs(float(scale))
            op = LipschitzOperator(kind, dim, c, c, None, "identity", 1.0, float(scale), 0.0, 0.0)
        else:
            if envelope is None:
                raise ValueError("identity_control carries a (fake) envelope claim")
            kappa = _validate_envelope(envelope, dim)
            op = LipschitzOperator(kind, dim, 1.0, 1.0, kappa, "identity", 1.0, 1.0, 0.0, 0.0)
    else:
        if envelope is None:
            raise ValueError(f"{kind} requires an envelope")
        kappa = _validate_envelope(np.abs(scale) * np.asarray(envelope, dtype=float), dim)
        if float(couple_a.space0.weights.min()) < 1.0:
            raise ValueError(
                "envelope operators need the domain 0-norm to dominate the sup norm "
                "(all space0 weights >= 1)"
            )
        if couple_a.space1.p != couple_b.space1.p:
            raise ValueError(
                "envelope operators need matching exponents on the two '1' spaces"
            )
        c0 = couple_b.space0.norm(kappa)
        c1 = float(np.max(kappa * couple_b.space1.weights / couple_a.space1.weights))
        if c0 == 0.0:
            c0 = c1 = 1.0  # zero envelope: any positive certificate is valid
        sign = 1.0 if scale >= 0.0 else -1.0
        op = LipschitzOperator(
            kind, dim, c0, max(c1, 1e-300), kappa, nonlinearity, nl_param, sign, 0.0, 0.0
        )

    if np.any(op.apply(np.zeros(dim)) != 0.0):
        raise AssertionError("operator does not fix 0")
    c0_obs, c1_obs = audit_constants(op, couple_a, couple_b, audit_samples, audit_seed)
    if c0_obs > op.c0 * (1.0 + 1e-9) or c1_obs > op.c1 * (1.0 + 1e-9):
        raise AssertionError(
            f"audit exceeded certificates: observed ({c0_obs}, {c1_obs}) "
            f"vs stored ({op.c0}, {op.c1})"
        )
    return replace(op, observed_c0=c0_obs, observed_c1=c1_obs)


def audit_constants(op, couple_a, couple_b, samples=1000, seed=0):
    """Empirical maxima of the two defining ratios over seeded Gaussian samples."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng([seed, 0xA0D17])
    A = rng.standard_normal((samples, op.dim))
    A2 = rng.standard_normal((samples, op.dim))
    TA = op.apply_batch(A)
    num0 = couple_b.space0.norm_batch(TA)
    den0 = couple_a.space0.norm_batch(A)
    mask = den0 > 0.0
    c0_obs = float(np.max(num0[mask] / den0[mask])) if np.any(mask) else 0.0
    num1 = couple_b.space1.norm_batch(TA - op.apply_batch(A2))
    den1 = couple_a.space1.norm_batch(A - A2)
    mask = den1 > 0.0
    c1_obs = float(np.max(num1[mask] / den1[mask])) if np.any(mask) else 0.0
    return c0_obs, c1_obs


def check_envelope_membership(op, a, couple_a, slop=1e-12):
    """Does Ta lie in ||a||_A0 times the operator's envelope box?

    Returns (ok, witness_index): the witness is a coordinate violating the
    membership, or None.
    """
    if op.envelope is None:
        raise ValueError("operator carries no envelope")
    a = as_element(a, op.dim)
    ta = np.abs(op.apply(a))
    bound = couple_a.space0.norm(a) * op.envelope
    bad = np.flatnonzero(ta > bound * (1.0 + slop) + 1e-300)
    if bad.size:
        return False, int(bad[0])
    return True, None
