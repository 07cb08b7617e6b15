"""Vectorised numpy versions of the compiled kernels.

Operation order mirrors ``_kernels.pyx`` exactly, so results are identical
to the last bit whichever backend is active.
"""
import numpy as np


def wht_inplace(a):
    n, nb = a.shape
    h = 1
    while h < n:
        v = a.reshape(n // (2 * h), 2, h, nb)
        x = v[:, 0].copy()
        y = v[:, 1]
        v[:, 0] = x + y
        v[:, 1] = x - y
        h *= 2


def apply_pair_inplace(a, bit_i, bit_j, gamma):
    lo, hi = sorted((bit_i, bit_j))
    n, nb = a.shape
    v = a.reshape(n >> (hi + 1), 2, 1 << (hi - lo - 1), 2, 1 << lo, nb)
    # axis 1 carries the high bit, axis 3 the low bit
    s = gamma * (v[:, 0, :, 1] + v[:, 1, :, 0])
    v[:, 0, :, 0] = v[:, 0, :, 0] + s
    v[:, 1, :, 1] = v[:, 1, :, 1] + s
    v[:, 0, :, 1] = 0.0
    v[:, 1, :, 0] = 0.0


def tree_sum(v):
    buf = np.array(v, dtype=np.float64, copy=True)
    if buf.size == 0:
        return 0.0
    while buf.size > 1:
        if buf.size % 2:
            buf = np.concatenate([buf[:-1:2] + buf[1::2], buf[-1:]])
        else:
            buf = buf[0::2] + buf[1::2]
    return float(buf[0])
