"""Circuit layouts: ordered layers of disjoint qudit pairs.

Architecture file schema (UTF-8 JSON)::

    {
      "n": 4,                       # number of qudits, integer >= 1
      "q": 2,                       # local dimension, integer >= 2
      "layers": [                   # ordered gate layers, applied first to last
        [[0, 1], [2, 3]],           # a layer: pairs of distinct qudit indices
        [[1, 2]]
      ]
    }

Within a layer no qudit may appear twice. Additional top-level keys are
ignored.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import ModelParams
from .errors import (
    ArchitectureParseError,
    ArchitectureValidationError,
    InvalidInputError,
)

Pair = tuple[int, int]


@dataclass(frozen=True)
class Architecture:
    """Ordered layers of two-qudit gates on ``params.n`` qudits."""

    params: ModelParams
    layers: tuple[tuple[Pair, ...], ...]

    def __post_init__(self):
        layers = tuple(tuple((int(i), int(j)) for i, j in layer) for layer in self.layers)
        object.__setattr__(self, "layers", layers)
        self.validate()

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def n_gates(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def pairs(self):
        """Iterate over all gates in application order."""
        for layer in self.layers:
            yield from layer

    def validate(self):
        n = self.params.n
        for t, layer in enumerate(self.layers):
            seen = set()
            for i, j in layer:
                for k in (i, j):
                    if not 0 <= k < n:
                        raise ArchitectureValidationError(
                            f"layer {t}: qudit index {k} out of range [0, {n})")
                if i == j:
                    raise ArchitectureValidationError(
                        f"layer {t}: pair ({i}, {j}) acts twice on qudit {i}")
                for k in (i, j):
                    if k in seen:
                        raise ArchitectureValidationError(
                            f"layer {t}: qudit {k} is used by more than one pair")
                    seen.add(k)

    def truncated(self, depth: int) -> "Architecture":
        """The first ``depth`` layers."""
        return Architecture(self.params, self.layers[:depth])

    def to_dict(self) -> dict:
        return {
            "n": self.params.n,
            "q": self.params.q,
            "layers": [[list(p) for p in layer] for layer in self.layers],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def brickwork_1d(params: ModelParams, depth: int, boundary: str = "open") -> Architecture:
    """Nearest-neighbour brickwork in one dimension.

    Layer ``t`` holds the pairs ``(i, i+1)`` with ``i`` of the same parity as
    ``t``. With ``boundary="periodic"`` (even n only) odd layers also hold the
    wrap-around pair ``(n-1, 0)``. For ``n = 2`` with open boundary every
    layer is the single gate ``(0, 1)``.
    """
    n = params.n
    if n < 2:
        raise InvalidInputError("brickwork needs at least 2 qudits")
    if depth < 0:
        raise InvalidInputError(f"depth must be non-negative, got {depth}")
    if boundary not in ("open", "periodic"):
        raise InvalidInputError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    if boundary == "periodic" and n % 2:
        raise InvalidInputError("periodic brickwork requires an even number of qudits")
    layers = []
    for t in range(depth):
        layer = [(i, i + 1) for i in range(t % 2, n - 1, 2)]
        if not layer and boundary == "open":
            layer = [(0, 1)]
        if boundary == "periodic" and t % 2 == 1:
            layer.append((n - 1, 0))
        layers.append(tuple(layer))
    return Architecture(params, tuple(layers))


def random_pairing(n: int, rng: np.random.Generator) -> tuple[Pair, ...]:
    """Uniform maximal matching of ``range(n)``.

    Fisher-Yates: for ``i = n-1 .. 1`` swap position ``i`` with
    ``rng.integers(0, i + 1)``, then pair consecutive entries. With odd n the
    last entry stays idle.
    """
    perm = list(range(n))
    for i in range(n - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return tuple((perm[2 * k], perm[2 * k + 1]) for k in range(n // 2))


def all_to_all(params: ModelParams, depth: int, seed: int = 0) -> Architecture:
    """Layers of uniformly random pairings drawn from ``PCG64(seed)``.

    Layers are drawn sequentially from a single stream, so the first ``d``
    layers do not depend on the total depth.
    """
    if depth < 0:
        raise InvalidInputError(f"depth must be non-negative, got {depth}")
    if seed < 0:
        raise InvalidInputError(f"seed must be non-negative, got {seed}")
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = tuple(random_pairing(params.n, rng) for _ in range(depth))
    return Architecture(params, layers)


def _require_int(value, what, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ArchitectureValidationError(f"{what} must be an integer, got {value!r}")
    if value < minimum:
        raise ArchitectureValidationError(f"{what} must be >= {minimum}, got {value}")
    return value


def parse_architecture(document: str) -> Architecture:
    """Parse and validate an architecture JSON document."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ArchitectureParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ArchitectureParseError("top-level value must be an object")
    for key in ("n", "q", "layers"):
        if key not in data:
            raise ArchitectureParseError(f"missing required field {key!r}")
    n = _require_int(data["n"], "n", 1)
    q = _require_int(data["q"], "q", 2)
    if not isinstance(data["layers"], list):
        raise ArchitectureParseError("'layers' must be an array")
    layers = []
    for t, layer in enumerate(data["layers"]):
        if not isinstance(layer, list):
            raise ArchitectureParseError(f"layer {t} must be an array of pairs")
        pairs = []
        for p, pair in enumerate(layer):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise ArchitectureParseError(
                    f"layer {t}, entry {p}: expected a 2-element array")
            i = _require_int(pair[0], f"layer {t}, entry {p} index", 0)
            j = _require_int(pair[1], f"layer {t}, entry {p} index", 0)
            pairs.append((i, j))
        layers.append(tuple(pairs))
    return Architecture(ModelParams(n, q), tuple(layers))


def load_architecture(path) -> Architecture:
    with open(path, encoding="utf-8") as fh:
        return parse_architecture(fh.read())
