"""Haar references, anti-concentration and relative-error design metrics."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (
    DEFAULT_TOL,
    ModelParams,
    MomentVector,
    TransferMatrix,
    hamming_weight,
    hamming_weights,
    walsh_hadamard,
)
from .errors import InconsistencyError, InvalidInputError


def _qn(params: ModelParams) -> float:
    return float(params.q) ** params.n


def haar_collision(params: ModelParams) -> float:
    """Collision probability of a Haar-random unitary, ``2 / (q^n (q^n + 1))``."""
    d = _qn(params)
    return 2.0 / (d * (d + 1.0))


def uniform_collision(params: ModelParams) -> float:
    """Minimal collision probability ``q**(-2n)`` (uniform output distribution)."""
    return float(params.q) ** (-2 * params.n)


def sym_dim(params: ModelParams) -> float:
    d = _qn(params)
    return d * (d + 1.0) / 2.0


def alt_dim(params: ModelParams) -> float:
    d = _qn(params)
    return d * (d - 1.0) / 2.0


def alpha(weight: int, params: ModelParams) -> float:
    """Haar weight of ``F_x`` with ``|x| = weight``: ``(q^w + q^(n-w)) / (q^n + 1)``."""
    n, q = params.n, params.q
    if not 0 <= weight <= n:
        raise InvalidInputError(f"weight must be in [0, {n}], got {weight}")
    return (float(q) ** weight + float(q) ** (n - weight)) / (_qn(params) + 1.0)


def anticoncentration_error(Z: float, params: ModelParams) -> float:
    """Relative excess ``Z / Z_H - 1`` of a collision probability."""
    if not Z > 0:
        raise InvalidInputError(f"collision probability must be positive, got {Z}")
    return Z / haar_collision(params) - 1.0


def theorem1_bound(eps: float, params: ModelParams, *, tol: float = DEFAULT_TOL) -> float:
    """State 2-design error implied by anti-concentration error ``eps``.

    ``2 (q^n + 1) / (q^n - q) * eps / (1 - 1/q)``. Requires ``n >= 2`` and
    ``0 <= eps < 1``; values within ``tol`` below zero are treated as zero.
    """
    if params.n < 2:
        raise InvalidInputError("the bound needs n >= 2 (q^n - q vanishes at n = 1)")
    if not -tol <= eps < 1.0:
        raise InvalidInputError(f"eps must lie in [0, 1), got {eps}")
    eps = max(eps, 0.0)
    d, q = _qn(params), float(params.q)
    return 2.0 * (d + 1.0) / (d - q) * eps / (1.0 - 1.0 / q)


def projector_ranks(params: ModelParams) -> np.ndarray:
    """Ranks ``D_a = prod_i q (q + (-1)^a_i) / 2`` of the local projectors."""
    q = float(params.q)
    w = hamming_weights(params.n)
    return (q * (q - 1.0) / 2.0) ** w * (q * (q + 1.0) / 2.0) ** (params.n - w)


def _even_mask(params):
    return hamming_weights(params.n) % 2 == 0


@dataclass(frozen=True, eq=False)
class SpectralCoeffs:
    """Eigenvalues ``lambda_a`` of the moment operator on the range of ``P_a``."""

    params: ModelParams
    lam: np.ndarray


def spectral_coeffs(m: MomentVector) -> SpectralCoeffs:
    """Walsh transform of the permutation-basis coefficients."""
    return SpectralCoeffs(m.params, walsh_hadamard(m.coeffs))


def _checked_even(lam: SpectralCoeffs, tol):
    even = _even_mask(lam.params)
    odd_vals = lam.lam[~even]
    if odd_vals.size and np.abs(odd_vals).max() > tol:
        a = int(np.flatnonzero(~even)[np.argmax(np.abs(odd_vals))])
        raise InconsistencyError(
            f"odd-parity spectral coefficient lambda[{a}] = {lam.lam[a]:.3e} exceeds {tol}")
    return lam.lam[even]


def state_design_error(lam: SpectralCoeffs, *, tol: float = DEFAULT_TOL) -> float:
    """Exact relative-error state 2-design error ``max_a |D_sym lambda_a - 1|``.

    The maximum runs over even-weight ``a``, which span the global symmetric
    subspace where the Haar moment is ``1 / D_sym``.
    """
    even_vals = _checked_even(lam, tol)
    return float(np.abs(sym_dim(lam.params) * even_vals - 1.0).max())


def holder_upper_error(lam: SpectralCoeffs, *, tol: float = DEFAULT_TOL) -> float:
    """One-sided error ``max_a (D_sym lambda_a - 1)`` over even-weight ``a``."""
    even_vals = _checked_even(lam, tol)
    return float((sym_dim(lam.params) * even_vals - 1.0).max())


@dataclass(frozen=True, eq=False)
class ProjectorMoments:
    """``mtilde[a, b] = tr(P_a M(P_b)) / D_a`` in the local projector basis."""

    params: ModelParams
    mtilde: np.ndarray


def projector_moments(W: TransferMatrix) -> ProjectorMoments:
    """Change of basis from permutation operators to local projectors.

    With ``P_a = 2**-n sum_x (-1)**(a.x) F_x`` and ``F_y P_a = (-1)**(a.y) P_a``
    this is ``2**-n sum_{x,y} (-1)**(a.y + b.x) W[y, x]``: a fast transform of
    every column followed by every row.
    """
    cols = walsh_hadamard(W.entries)
    both = walsh_hadamard(np.ascontiguousarray(cols.T)).T
    return ProjectorMoments(W.params, np.ascontiguousarray(both) / W.params.size)


def haar_projector_moment(a: int, b: int, params: ModelParams) -> float:
    """``tr(P_a M_H(P_b)) / D_a``: ``D_b / D_sym``, ``D_b / D_alt`` or 0 by parity."""
    for v in (a, b):
        if not 0 <= v < params.size:
            raise InvalidInputError(f"projector label {v} out of range for n={params.n}")
    wa, wb = hamming_weight(a) % 2, hamming_weight(b) % 2
    if wa != wb:
        return 0.0
    q = float(params.q)
    d_b = q ** params.n * (q - 1.0) ** hamming_weight(b) * (q + 1.0) ** (
        params.n - hamming_weight(b)) / 2.0 ** params.n
    return d_b / (sym_dim(params) if wa == 0 else alt_dim(params))


def haar_projector_matrix(params: ModelParams) -> np.ndarray:
    """All ``haar_projector_moment(a, b)`` values as a ``2**n x 2**n`` array."""
    ranks = projector_ranks(params)
    even = _even_mask(params)
    h = np.zeros((params.size, params.size))
    h[np.ix_(even, even)] = ranks[even][None, :] / sym_dim(params)
    h[np.ix_(~even, ~even)] = ranks[~even][None, :] / alt_dim(params)
    return h


def _relative_errors(mt: ProjectorMoments, tol):
    h = haar_projector_matrix(mt.params)
    matched = h > 0
    stray = np.abs(mt.mtilde[~matched])
    if stray.size and stray.max() > tol:
        raise InconsistencyError(
            f"parity-mismatched projector moment {stray.max():.3e} exceeds {tol}")
    rel = np.zeros_like(h)
    rel[matched] = np.abs(mt.mtilde[matched] - h[matched]) / h[matched]
    return rel


def unitary_design_error(mt: ProjectorMoments, *, tol: float = DEFAULT_TOL) -> float:
    """``max_{a,b} |mtilde - mtilde_H| / mtilde_H`` over parity-matched pairs.

    Parity-mismatched pairs have a vanishing Haar value; they contribute 0
    provided the circuit value also vanishes to within ``tol``.
    """
    return float(_relative_errors(mt, tol).max())


@dataclass(frozen=True)
class PsdDiagnostics:
    dominance_holds: bool
    dominance_margin: float
    diagonal_error: float
    diagonal_argmax: int
    full_error: float
    full_argmax: tuple[int, int]
    max_on_diagonal: bool


def psd_diagnostics(mt: ProjectorMoments, *, tol: float = DEFAULT_TOL) -> PsdDiagnostics:
    """Dominance of ``mtilde[0, 0]`` and diagonal-vs-full unitary-design error.

    ``diagonal_error`` is ``q^n max_a (q^n + (-1)^|a|) mtilde[a, a] / (2 D_a) - 1``,
    which equals the full error whenever the averaged channel is positive
    semidefinite.
    """
    params = mt.params
    m = mt.mtilde
    margin = float(m[0, 0] - m.max())
    d = _qn(params)
    signs = np.where(_even_mask(params), 1.0, -1.0)
    diag_terms = d * (d + signs) * np.diag(m) / (2.0 * projector_ranks(params)) - 1.0
    rel = _relative_errors(mt, tol)
    full = float(rel.max())
    full_idx = np.unravel_index(int(np.argmax(rel)), rel.shape)
    diag_abs = float(np.abs(np.diag(rel)).max())
    return PsdDiagnostics(
        dominance_holds=margin >= -tol,
        dominance_margin=margin,
        diagonal_error=float(diag_terms.max()),
        diagonal_argmax=int(np.argmax(diag_terms)),
        full_error=full,
        full_argmax=(int(full_idx[0]), int(full_idx[1])),
        max_on_diagonal=bool(full - diag_abs <= tol * max(1.0, abs(full))),
    )


@dataclass
class MetricsReport:
    """Scalar metrics for one circuit, plus where they came from."""

    Z_nu: float
    Z_haar: float
    Z_uniform: float
    eps_ac: float
    eps_state: float
    eps_prime: float | None
    holder_upper: float
    theorem1_regime: bool
    theorem1_holds: bool | None
    architecture: dict = field(default_factory=dict)
    seed: int | None = None
    depth: int = 0
    unitary: dict | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def moment_metrics(m: MomentVector, *, tol: float = DEFAULT_TOL) -> dict:
    """Collision probability, anti-concentration and state-design errors of ``m``.

    ``eps_prime`` is ``None`` outside the regime ``eps_ac < 1`` (or for n = 1),
    where the implied bound is not defined.
    """
    params = m.params
    lam = spectral_coeffs(m)
    Z = float(lam.lam[0])
    eps_ac = anticoncentration_error(Z, params)
    eps_state = state_design_error(lam, tol=tol)
    regime = params.n >= 2 and eps_ac < 1.0
    eps_prime = theorem1_bound(eps_ac, params) if regime else None
    return {
        "Z_nu": Z,
        "Z_haar": haar_collision(params),
        "Z_uniform": uniform_collision(params),
        "eps_ac": eps_ac,
        "eps_state": eps_state,
        "eps_prime": eps_prime,
        "holder_upper": holder_upper_error(lam, tol=tol),
        "theorem1_regime": regime,
        "theorem1_holds": (eps_state <= eps_prime + 1e-9) if regime else None,
    }


def unitary_metrics(W: TransferMatrix, *, tol: float = DEFAULT_TOL) -> dict:
    mt = projector_moments(W)
    diag = psd_diagnostics(mt, tol=tol)
    return {
        "unitary_design_error": diag.full_error,
        "unitary_argmax": list(diag.full_argmax),
        "diagonal_error": diag.diagonal_error,
        "diagonal_argmax": diag.diagonal_argmax,
        "max_on_diagonal": diag.max_on_diagonal,
        "dominance_holds": diag.dominance_holds,
        "mtilde_00": float(mt.mtilde[0, 0]),
    }
