"""Exact second moments of Haar-local circuits in the permutation basis.

A Haar-random gate on qudits ``(i, j)`` maps ``F_x`` into the span of the
two configurations that agree with ``x`` away from ``(i, j)`` and are
``00`` or ``11`` on the pair. Configurations ``00`` and ``11`` are fixed;
``01`` and ``10`` go to ``gamma * (F_00 + F_11)`` with
``gamma = q / (q**2 + 1)``. Because every weight is non-negative, evolved
coefficients stay non-negative.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .architectures import Architecture
from .core import (
    ModelParams,
    MomentVector,
    TransferMatrix,
    hamming_weights,
    pairwise_sum,
)
from .errors import InvalidInputError, ResourceLimitError

#: Default largest n for which a dense transfer matrix is built.
TRANSFER_CAP_N = 13


@dataclass(frozen=True)
class PairTransfer:
    """Output weights on ``(F_00, F_11)`` for each 2-site input configuration."""

    q: int
    weights: dict

    @property
    def gamma(self) -> float:
        return self.weights[(0, 1)][0]


def _twirl_coefficients(n: int, q: int, weight: int):
    # Global Haar twirl of F_x on n qudits: coefficients on F_0 and F_1.
    denom = q ** (2 * n) - 1
    h0 = (q ** (2 * n - weight) - q ** weight) / denom
    h1 = (q ** (n + weight) - q ** (n - weight)) / denom
    return h0, h1


def pair_weights(q: int) -> PairTransfer:
    """Haar twirl of the 2-site permutation basis for local dimension ``q``."""
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)) or q < 2:
        raise InvalidInputError(f"q must be an integer >= 2, got {q!r}")
    weights = {}
    for xi in (0, 1):
        for xj in (0, 1):
            weights[(xi, xj)] = _twirl_coefficients(2, int(q), xi + xj)
    return PairTransfer(int(q), weights)


def gate_gamma(q: int) -> float:
    """Weight ``q / (q**2 + 1)`` sent from a single-flip pair to ``00`` and ``11``."""
    return q / (q * q + 1)


def initial_moment(params: ModelParams) -> MomentVector:
    """Moment of ``|0..0>`` after a layer of single-qudit Haar gates.

    Each qudit contributes the normalised local symmetric projector
    ``(1 + F) / (q (q + 1))``, so every coefficient equals
    ``(q (q + 1)) ** -n``.
    """
    value = float(params.q * (params.q + 1)) ** -params.n
    return MomentVector(params, np.full(params.size, value))


def haar_moment_vector(params: ModelParams) -> MomentVector:
    """Coefficients of the Haar-averaged moment ``P_sym / D_sym``."""
    d = float(params.q) ** params.n
    c = np.zeros(params.size)
    c[0] = c[params.all_ones] = 1.0 / (d * (d + 1.0))
    return MomentVector(params, c)


def indicator(params: ModelParams, x: int) -> MomentVector:
    c = np.zeros(params.size)
    c[x] = 1.0
    return MomentVector(params, c)


def _check_pair(params, pair):
    i, j = pair
    if i == j or not (0 <= i < params.n and 0 <= j < params.n):
        raise InvalidInputError(f"invalid gate pair {pair} for n={params.n}")


def _apply_pair(work, pair, gamma):
    kernels.apply_pair_inplace(work, pair[0], pair[1], gamma)


def apply_gate(m: MomentVector, pair, q=None, *, gamma=None) -> MomentVector:
    """Average over a Haar-random gate on ``pair``; returns a new vector.

    ``gamma`` overrides the transfer weight (used to inject faults in
    verification tests).
    """
    params = m.params
    if q is not None and q != params.q:
        raise InvalidInputError(f"q={q} does not match the vector's q={params.q}")
    _check_pair(params, pair)
    work = m.coeffs.copy().reshape(-1, 1)
    _apply_pair(work, pair, gate_gamma(params.q) if gamma is None else gamma)
    return MomentVector(params, work.reshape(-1))


def _check_arch(params, arch):
    if arch.params != params:
        raise InvalidInputError(
            f"architecture params {arch.params} do not match vector params {params}")


def evolve_layers(m0: MomentVector, arch: Architecture, *, gamma=None):
    """Yield the moment vector after each layer, starting with depth 0."""
    _check_arch(m0.params, arch)
    g = gate_gamma(m0.params.q) if gamma is None else gamma
    work = m0.coeffs.copy().reshape(-1, 1)
    yield MomentVector(m0.params, work.reshape(-1).copy())
    for layer in arch.layers:
        for pair in layer:
            _apply_pair(work, pair, g)
        yield MomentVector(m0.params, work.reshape(-1).copy())


def evolve(m0: MomentVector, arch: Architecture, *, gamma=None) -> MomentVector:
    """Apply every gate of ``arch`` in order to ``m0``."""
    _check_arch(m0.params, arch)
    g = gate_gamma(m0.params.q) if gamma is None else gamma
    work = m0.coeffs.copy().reshape(-1, 1)
    for pair in arch.pairs():
        _apply_pair(work, pair, g)
    return MomentVector(m0.params, work.reshape(-1))


def collision_probability(m: MomentVector) -> float:
    """``Z = sum_x m_x``: every ``F_x`` acts trivially on ``|0>|0>``."""
    return pairwise_sum(m.coeffs)


def trace_weights(params: ModelParams) -> np.ndarray:
    """``tr(F_x) = q**(2n - |x|)`` for every configuration."""
    w = hamming_weights(params.n)
    return float(params.q) ** (2 * params.n - w)


def trace_check(m: MomentVector) -> float:
    """Operator trace ``sum_x m_x tr(F_x)``; 1 for every evolved state moment."""
    return pairwise_sum(m.coeffs * trace_weights(m.params))


def _transfer_work(arch, cap_n, gamma):
    params = arch.params
    if params.n > cap_n:
        raise ResourceLimitError(
            f"transfer matrix for n={params.n} exceeds cap n <= {cap_n}")
    g = gate_gamma(params.q) if gamma is None else gamma
    return np.eye(params.size), g


def transfer_matrix(arch: Architecture, *, cap_n: int = TRANSFER_CAP_N,
                    gamma=None) -> TransferMatrix:
    """Dense ``2**n x 2**n`` matrix of the circuit's averaged two-copy channel.

    Column ``x`` is :func:`evolve` applied to the indicator of ``x``; all
    columns are evolved together.
    """
    work, g = _transfer_work(arch, cap_n, gamma)
    for pair in arch.pairs():
        _apply_pair(work, pair, g)
    return TransferMatrix(arch.params, work)


def transfer_matrix_layers(arch: Architecture, *, cap_n: int = TRANSFER_CAP_N,
                           gamma=None):
    """Yield the transfer matrix after each layer, starting with the identity."""
    work, g = _transfer_work(arch, cap_n, gamma)
    yield TransferMatrix(arch.params, work.copy())
    for layer in arch.layers:
        for pair in layer:
            _apply_pair(work, pair, g)
        yield TransferMatrix(arch.params, work.copy())
