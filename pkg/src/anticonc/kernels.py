"""Backend selection for the hot loops.

The compiled Cython module is used when it imports cleanly; otherwise the
numpy fallback is used. Setting ``ANTICONC_PURE_PYTHON=1`` forces the
fallback. Both backends share one contract:

``wht_inplace(a)``
    Unnormalised Walsh-Hadamard butterflies along axis 0 of a C-contiguous
    float64 array of shape ``(2**n, B)``.
``apply_pair_inplace(a, bit_i, bit_j, gamma)``
    Haar-averaged two-site update on configuration bits ``bit_i``, ``bit_j``.
``tree_sum(v)``
    Pairwise sum of adjacent elements, level by level.
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("ANTICONC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # noqa: F811
    except ImportError:
        _impl = _fallback
    else:
        BACKEND = "cython"

wht_inplace = _impl.wht_inplace
apply_pair_inplace = _impl.apply_pair_inplace
tree_sum = _impl.tree_sum


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python").

    ``None`` returns the active backend.
    """
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
