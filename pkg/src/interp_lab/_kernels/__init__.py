"""Kernel backend selection: compiled Cython core with a NumPy fallback.

Set ``INTERP_LAB_FORCE_FALLBACK=1`` to force the NumPy lane (used by the
benchmark and by tests that compare the lanes).
"""

import os

from . import _reference

if os.environ.get("INTERP_LAB_FORCE_FALLBACK"):
    _impl = _reference
    BACKEND = "fallback"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _reference
        BACKEND = "fallback"

weighted_norm = _impl.weighted_norm
weighted_norm_batch = _impl.weighted_norm_batch
rearr_k_batch = _impl.rearr_k_batch
prox_weighted_l1 = _impl.prox_weighted_l1
prox_weighted_l2 = _impl.prox_weighted_l2
prox_weighted_linf = _impl.prox_weighted_linf

__all__ = [
    "BACKEND",
    "weighted_norm",
    "weighted_norm_batch",
    "rearr_k_batch",
    "prox_weighted_l1",
    "prox_weighted_l2",
    "prox_weighted_linf",
]
