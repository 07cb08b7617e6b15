"""Domain types, bitstring helpers and the fast Walsh-Hadamard transform.

Bitstrings over the n qudits are encoded as unsigned integers with qudit ``i``
stored in bit ``i`` (least-significant bit is qudit 0). The same encoding
indexes permutation-basis configurations ``x`` and projector labels ``a``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvalidInputError

#: Default absolute tolerance for invariant checks on coefficient vectors.
DEFAULT_TOL = 1e-10

#: Largest n for which 2**n configurations are indexed.
MAX_N = 62


@dataclass(frozen=True)
class ModelParams:
    """System size ``n`` (number of qudits) and local dimension ``q``."""

    n: int
    q: int

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise InvalidInputError(f"n must be an integer, got {self.n!r}")
        if isinstance(self.q, bool) or not isinstance(self.q, (int, np.integer)):
            raise InvalidInputError(f"q must be an integer, got {self.q!r}")
        if not 1 <= self.n <= MAX_N:
            raise InvalidInputError(f"n must satisfy 1 <= n <= {MAX_N}, got {self.n}")
        if self.q < 2:
            raise InvalidInputError(f"q must be >= 2, got {self.q}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", int(self.q))

    @property
    def size(self) -> int:
        """Number of configurations, ``2**n``."""
        return 1 << self.n

    @property
    def all_ones(self) -> int:
        return (1 << self.n) - 1


@dataclass(frozen=True, eq=False)
class MomentVector:
    """Permutation-basis coefficients ``m_x`` of a two-copy moment operator.

    ``coeffs[x]`` multiplies ``F_x``, the tensor product of identities and
    copy-swaps with a swap on every qudit whose bit is set in ``x``.
    """

    params: ModelParams
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.float64)
        if c.shape != (self.params.size,):
            raise InvalidInputError(
                f"expected {self.params.size} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def check_nonnegative(self, tol=DEFAULT_TOL) -> bool:
        return bool(self.coeffs.min() >= -tol)


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """Averaged two-copy channel in the permutation basis.

    ``entries[y, x]`` is the coefficient of ``F_y`` in the image of ``F_x``.
    """

    params: ModelParams
    entries: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.entries, dtype=np.float64)
        size = self.params.size
        if w.shape != (size, size):
            raise InvalidInputError(
                f"expected a {size}x{size} matrix, got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "entries", w)


def hamming_weight(x: int) -> int:
    """Population count of the bitstring ``x``."""
    if x < 0:
        raise InvalidInputError(f"bitstring index must be non-negative, got {x}")
    return int(x).bit_count()


def hamming_weights(n: int) -> np.ndarray:
    """Hamming weights of all ``2**n`` bitstrings, as an int array."""
    w = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        w = np.concatenate([w, w + 1])
    return w


def _log2_exact(length: int) -> int:
    if length < 1 or length & (length - 1):
        raise InvalidInputError(f"length must be a power of two, got {length}")
    return length.bit_length() - 1


def walsh_hadamard(v) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform ``u_a = sum_x (-1)**(a.x) v_x``.

    Operates along axis 0, so a 2-D input transforms every column. The input
    is left untouched; a new float64 array is returned. Runs in
    ``O(2**n * n)`` per column via in-place butterflies on a copy.
    """
    arr = np.array(v, dtype=np.float64, copy=True)
    if arr.ndim not in (1, 2):
        raise InvalidInputError("walsh_hadamard expects a 1-D or 2-D array")
    _log2_exact(arr.shape[0])
    work = arr.reshape(arr.shape[0], -1) if arr.ndim == 1 else np.ascontiguousarray(arr)
    kernels.wht_inplace(work)
    return work.reshape(arr.shape)


def pairwise_sum(v) -> float:
    """Tree summation of a 1-D array (adjacent pairs, level by level).

    For power-of-two lengths this is exactly the association order of the
    ``a = 0`` output of :func:`walsh_hadamard`.
    """
    arr = np.ascontiguousarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError("pairwise_sum expects a 1-D array")
    return float(kernels.tree_sum(arr))
