"""Monte Carlo oracle: explicit Haar-random circuits simulated on statevectors.

Randomness
----------
Sample ``i`` of a run seeded with ``seed`` draws from its own stream
``Generator(PCG64(SeedSequence(seed, spawn_key=(i,))))``. Each sample takes a
single block of standard normals, consumed in circuit order: one ``q x q``
unitary per qudit (the local layer), then one ``q**2 x q**2`` unitary per gate.
A ``d x d`` unitary uses ``2 d**2`` normals (real parts, then imaginary parts).
Results therefore do not depend on how samples are batched. Samples are
processed in fixed chunks of 1024 whose statistics are merged in chunk order,
so running chunks in a worker pool (``workers > 1``) gives bit-identical
estimates.

Two-copy quantities come from subsystem purities, never from explicit
``q**(2n)``-dimensional operators: for a pure state ``psi``,
``<psi psi| F_x |psi psi> = tr(rho_x**2)`` with ``rho_x`` the reduced state
on the qudits in ``x``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .architectures import Architecture
from .core import walsh_hadamard
from .errors import InvalidInputError, ResourceLimitError

#: Caps on log2 of the amplitude count of the simulated objects.
STATE_CAP_EXPONENT = 26
SPECTRAL_CAP_EXPONENT = 20
PROJECTOR_CAP_EXPONENT = 6

_CHUNK = 1024


@dataclass(frozen=True)
class SampleEstimate:
    mean: float
    stderr: float
    samples: int

    def agrees_with(self, exact: float, n_sigma: float = 4.0, atol: float = 1e-12) -> bool:
        """``|exact - mean| <= n_sigma * stderr + atol``.

        ``atol`` only matters for quantities that vanish identically, where
        the per-sample values are pure round-off.
        """
        return bool(abs(exact - self.mean) <= n_sigma * self.stderr + atol)


class _Moments:
    """Streaming mean and variance (Chan et al. pairwise combination)."""

    def __init__(self, shape=()):
        self.count = 0
        self.mean = np.zeros(shape)
        self.m2 = np.zeros(shape)

    def add(self, values):
        values = np.asarray(values, dtype=np.float64)
        k = values.shape[0]
        if k == 0:
            return
        mean_b = values.mean(axis=0)
        m2_b = ((values - mean_b) ** 2).sum(axis=0)
        total = self.count + k
        delta = mean_b - self.mean
        self.mean = self.mean + delta * (k / total)
        self.m2 = self.m2 + m2_b + delta ** 2 * (self.count * k / total)
        self.count = total

    def estimates(self):
        n = self.count
        stderr = np.sqrt(self.m2 / (n - 1) / n)
        return self.mean, stderr


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """Generator owned by sample ``index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _haar_from_normals(g):
    # g has shape (..., 2, d, d)
    z = (g[..., 0, :, :] + 1j * g[..., 1, :, :]) / math.sqrt(2.0)
    qm, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    return qm * (diag / np.abs(diag))[..., None, :]


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``dim x dim`` unitary.

    QR of a complex Ginibre matrix, with the columns of Q rephased by the
    phases of R's diagonal; without that correction the result is not Haar.
    """
    if dim < 1:
        raise InvalidInputError(f"dim must be >= 1, got {dim}")
    return _haar_from_normals(rng.standard_normal((2, dim, dim)))


def _normals_per_sample(arch):
    q, n = arch.params.q, arch.params.n
    return 2 * n * q * q + 2 * arch.n_gates * q ** 4


def _draw_unitaries(arch, rngs):
    """Local-layer and gate unitaries for a batch of per-sample generators."""
    q, n = arch.params.q, arch.params.n
    n_local = 2 * n * q * q
    g = np.stack([rng.standard_normal(_normals_per_sample(arch)) for rng in rngs])
    local = _haar_from_normals(g[:, :n_local].reshape(len(rngs), n, 2, q, q))
    gates = _haar_from_normals(
        g[:, n_local:].reshape(len(rngs), arch.n_gates, 2, q * q, q * q))
    return local, gates


def _apply(psi, u, sites):
    # psi: (B, E, q, ..., q) with qudit k on axis 2 + k; u: (B, d, d)
    src = [2 + s for s in sites]
    dst = list(range(psi.ndim - len(sites), psi.ndim))
    moved = np.moveaxis(psi, src, dst)
    shape = moved.shape
    flat = moved.reshape(shape[0], -1, u.shape[-1])
    out = np.matmul(flat, np.swapaxes(u, -1, -2)).reshape(shape)
    return np.moveaxis(out, dst, src)


def _run_batch(arch, rngs, extra):
    """Evolve a batch; ``extra`` columns are the initial basis states."""
    q, n = arch.params.q, arch.params.n
    local, gates = _draw_unitaries(arch, rngs)
    b = len(rngs)
    if extra == 1:
        psi = np.zeros((b, 1) + (q,) * n, dtype=np.complex128)
        psi[(slice(None), 0) + (0,) * n] = 1.0
    else:
        eye = np.eye(q ** n, dtype=np.complex128)
        psi = np.broadcast_to(eye.reshape((1, q ** n) + (q,) * n), (b, q ** n) + (q,) * n).copy()
    for k in range(n):
        psi = _apply(psi, local[:, k], (k,))
    for g, pair in enumerate(arch.pairs()):
        psi = _apply(psi, gates[:, g], pair)
    return psi


def _check_cap(exponent, cap, what):
    if exponent > cap:
        raise ResourceLimitError(f"{what} needs 2**{exponent:.1f} amplitudes, cap is 2**{cap}")


def run_circuit(arch: Architecture, rng: np.random.Generator) -> np.ndarray:
    """Final state of one random circuit started from ``|0...0>``.

    A Haar single-qudit gate on every qudit comes first, then a Haar
    two-qudit gate for each pair in order. Returns a flat vector of length
    ``q**n`` (qudit 0 is the most significant digit).
    """
    n, q = arch.params.n, arch.params.q
    _check_cap(n * math.log2(q), STATE_CAP_EXPONENT, "statevector")
    psi = _run_batch(arch, [rng], 1)
    return psi.reshape(q ** n)


def _chunk_bounds(samples):
    return [(start, min(samples, start + _CHUNK)) for start in range(0, samples, _CHUNK)]


def _check_samples(samples):
    if samples < 2:
        raise InvalidInputError(f"need at least 2 samples, got {samples}")


def _accumulate(kernel, arch, samples, seed, shape, workers, *extra):
    """Run ``kernel(arch, rngs, *extra)`` over all chunks; merge in chunk order."""
    _check_samples(samples)
    if workers < 1:
        raise InvalidInputError(f"workers must be >= 1, got {workers}")
    bounds = _chunk_bounds(samples)
    acc = _Moments(shape)
    if workers == 1 or len(bounds) == 1:
        for start, stop in bounds:
            acc.add(kernel(arch, seed, start, stop, *extra))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(kernel, arch, seed, start, stop, *extra)
                       for start, stop in bounds]
            for fut in futures:
                acc.add(fut.result())
    return acc


def _rngs(seed, start, stop):
    return [sample_rng(seed, i) for i in range(start, stop)]


def _collision_chunk(arch, seed, start, stop):
    psi = _run_batch(arch, _rngs(seed, start, stop), 1)
    return np.abs(psi.reshape(stop - start, -1)[:, 0]) ** 4


def estimate_collision(arch: Architecture, samples: int, seed: int, *,
                       workers: int = 1) -> SampleEstimate:
    """Average of ``|<0...0|psi>|**4`` over sampled circuits."""
    n, q = arch.params.n, arch.params.q
    _check_cap(n * math.log2(q), STATE_CAP_EXPONENT, "statevector")
    acc = _accumulate(_collision_chunk, arch, samples, seed, (), workers)
    mean, err = acc.estimates()
    return SampleEstimate(float(mean), float(err), acc.count)


def subset_purities(states: np.ndarray, nsites: int, q: int) -> np.ndarray:
    """``tr(rho_S**2)`` for every subset ``S`` of sites, per pure state.

    ``states`` has shape ``(B, q**nsites)`` with site 0 the most significant
    digit; subset bit ``k`` selects site ``k``. Returns ``(B, 2**nsites)``.
    """
    b = states.shape[0]
    t = states.reshape((b,) + (q,) * nsites)
    out = np.empty((b, 1 << nsites))
    full = (1 << nsites) - 1
    for s in range(1 << nsites):
        k = s.bit_count()
        if k > nsites - k:
            continue
        inside = [i for i in range(nsites) if s >> i & 1]
        outside = [i for i in range(nsites) if not s >> i & 1]
        m = t.transpose([0] + [1 + i for i in inside] + [1 + i for i in outside])
        m = m.reshape(b, q ** k, q ** (nsites - k))
        rho = np.matmul(m, np.conj(np.swapaxes(m, -1, -2)))
        pur = np.einsum("bij,bij->b", rho, np.conj(rho)).real
        out[:, s] = pur
        out[:, full ^ s] = pur
    return out


def _spectral_chunk(arch, seed, start, stop):
    n, q = arch.params.n, arch.params.q
    psi = _run_batch(arch, _rngs(seed, start, stop), 1).reshape(stop - start, -1)
    pur = subset_purities(psi, n, q)
    return walsh_hadamard(np.ascontiguousarray(pur.T)).T / (1 << n)


def estimate_spectral(arch: Architecture, samples: int, seed: int, *,
                      workers: int = 1) -> list[SampleEstimate]:
    """Estimates of ``tr(P_a m) = D_a lambda_a`` for every projector label ``a``.

    Per sample, ``<psi psi|P_a|psi psi> = 2**-n sum_x (-1)**(a.x) tr(rho_x**2)``.
    """
    n, q = arch.params.n, arch.params.q
    _check_cap(2 * n * math.log2(q), SPECTRAL_CAP_EXPONENT, "two-copy state")
    acc = _accumulate(_spectral_chunk, arch, samples, seed, 1 << n, workers)
    mean, err = acc.estimates()
    return [SampleEstimate(float(mu), float(e), acc.count) for mu, e in zip(mean, err)]


def _projector_chunk(arch, seed, start, stop, idx):
    n, q = arch.params.n, arch.params.q
    dim = q ** n
    bsz = stop - start
    u = _run_batch(arch, _rngs(seed, start, stop), dim)  # (B, in, out...)
    choi = u.reshape(bsz, dim, dim).transpose(0, 2, 1).reshape(bsz, dim * dim)
    choi = choi / math.sqrt(dim)
    pur = subset_purities(choi, 2 * n, q)
    traces = walsh_hadamard(np.ascontiguousarray(pur.T)).T
    # tr(F_y U2 F_x U2^dag) = q**(2n) * purity on (y outputs, x inputs)
    return traces[:, idx] * (float(dim) ** 2 / 4.0 ** n)


def estimate_projector_moments(arch: Architecture, labels, samples: int,
                               seed: int, *, workers: int = 1) -> list[SampleEstimate]:
    """``tr(P_a U2 P_b U2^dag)`` averaged over circuits, for each ``(a, b)``.

    ``U2 = U (x) U``. Traces come from purities of the normalised Choi state
    of ``U``, whose sites are the n outputs followed by the n inputs.
    """
    n, q = arch.params.n, arch.params.q
    size = arch.params.size
    labels = [(int(a), int(b)) for a, b in labels]
    for a, b in labels:
        if not (0 <= a < size and 0 <= b < size):
            raise InvalidInputError(f"projector labels ({a}, {b}) out of range")
    _check_cap(n * math.log2(q), PROJECTOR_CAP_EXPONENT, "two-copy unitary")
    idx = np.array([a | (b << n) for a, b in labels], dtype=np.int64)
    acc = _accumulate(_projector_chunk, arch, samples, seed, len(labels), workers, idx)
    mean, err = acc.estimates()
    return [SampleEstimate(float(mu), float(e), acc.count) for mu, e in zip(mean, err)]


def estimate_projector_moment(arch: Architecture, a: int, b: int, samples: int,
                              seed: int, *, workers: int = 1) -> SampleEstimate:
    return estimate_projector_moments(arch, [(a, b)], samples, seed, workers=workers)[0]
