"""interp-lab: K-functionals, interpolation norms, and eps-net certificates
on finite weighted sequence couples."""

from ._kernels import BACKEND
from .approx import CompactEnvelope, TruncationFamily, dyadic_envelope, select_projection
from .compactness import (
    EpsNet,
    SampleSet,
    TaggedNorm,
    build_interp_net,
    greedy_net,
    sample_norm_sphere,
    sum_net_pipeline,
)
from .couples import (
    CoupleSpec,
    SpaceSpec,
    as_element,
    degenerate_couple,
    intersection_norm,
    l1_linf_couple,
    source_couple,
    sum_norm,
    unit_space,
)
from .interpolation import (
    InterpParams,
    interp_norm,
    interp_norm_batch,
    verify_interp_inequality,
    verify_k_inequality,
)
from .kfunc import (
    KCurve,
    KDecomposition,
    UncertifiedDecompositionError,
    compute_k,
    compute_k_curve,
    oracle_k,
)
from .operators import LipschitzOperator, audit_constants, check_envelope_membership, make_operator

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CompactEnvelope",
    "CoupleSpec",
    "EpsNet",
    "InterpParams",
    "KCurve",
    "KDecomposition",
    "LipschitzOperator",
    "SampleSet",
    "SpaceSpec",
    "TaggedNorm",
    "TruncationFamily",
    "UncertifiedDecompositionError",
    "as_element",
    "audit_constants",
    "build_interp_net",
    "check_envelope_membership",
    "compute_k",
    "compute_k_curve",
    "degenerate_couple",
    "dyadic_envelope",
    "greedy_net",
    "interp_norm",
    "interp_norm_batch",
    "intersection_norm",
    "l1_linf_couple",
    "make_operator",
    "oracle_k",
    "sample_norm_sphere",
    "select_projection",
    "source_couple",
    "sum_norm",
    "sum_net_pipeline",
    "unit_space",
    "verify_interp_inequality",
    "verify_k_inequality",
    "__version__",
]
