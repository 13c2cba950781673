"""Random MaxCut / MaxQP / QUBO instances and their cost functions.

All three objectives are maximized and written as full double sums over
``(i, j)``:

* MaxCut: ``1/2 sum_ij w_ij (1 - z_i z_j) / 2`` with ``z = 1 - 2b``
* MaxQP:  ``sum_ij w_ij z_i z_j``
* QUBO:   ``sum_ij w_ij b_i b_j``
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .statevec import MAX_QUBITS, basis_bits


class ProblemKind(str, enum.Enum):
    MAXCUT = "maxcut"
    MAXQP = "maxqp"
    QUBO = "qubo"

    @classmethod
    def parse(cls, value) -> "ProblemKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


_KIND_INDEX = {ProblemKind.MAXCUT: 0, ProblemKind.MAXQP: 1, ProblemKind.QUBO: 2}


@dataclass(eq=False)
class ProblemInstance:
    kind: ProblemKind
    w: np.ndarray
    seed: int | None = None
    m: float | None = None
    M: float | None = None
    _table: np.ndarray | None = field(default=None, init=False, repr=False)
    _normalized: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.kind = ProblemKind.parse(self.kind)
        w = np.array(self.w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weight matrix must be square, got shape {w.shape}")
        if not np.array_equal(w, w.T):
            raise ValueError("weight matrix must be symmetric")
        if not 1 <= w.shape[0] <= MAX_QUBITS:
            raise ConfigurationError(f"variable count must be in [1, {MAX_QUBITS}], got {w.shape[0]}")
        if self.kind is not ProblemKind.QUBO and np.any(np.diag(w) != 0):
            raise ValueError(f"{self.kind.value} instances need a zero diagonal")
        if self.kind is ProblemKind.MAXCUT and np.any(w < 0):
            raise ValueError("maxcut weights must be nonnegative")
        w.setflags(write=False)
        self.w = w

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def cost_table(self) -> np.ndarray:
        """Cost of every basis index, computed once."""
        if self._table is None:
            self._table = cost_many(self, basis_bits(self.n))
            self._table.setflags(write=False)
        return self._table

    def normalized_table(self) -> np.ndarray:
        if self._normalized is None:
            m, M = extremes(self)
            if M == m:
                norm = np.ones_like(self.cost_table())
            else:
                norm = (self.cost_table() - m) / (M - m)
            norm.setflags(write=False)
            self._normalized = norm
        return self._normalized


def _check_n(n):
    if not 1 <= n <= MAX_QUBITS:
        raise ConfigurationError(f"variable count must be in [1, {MAX_QUBITS}], got {n}")


def generate(kind, n: int, seed: int) -> ProblemInstance:
    """Draw one instance; ``(kind, n, seed)`` fully determines the weights."""
    kind = ProblemKind.parse(kind)
    _check_n(n)
    rng = np.random.default_rng([int(seed), _KIND_INDEX[kind]])
    w = np.zeros((n, n))
    if kind is ProblemKind.MAXCUT:
        iu = np.triu_indices(n, 1)
        edges = rng.random(iu[0].size) < 0.5
        weights = rng.random(iu[0].size)
        w[iu] = np.where(edges, weights, 0.0)
    elif kind is ProblemKind.MAXQP:
        iu = np.triu_indices(n, 1)
        w[iu] = rng.uniform(-1.0, 1.0, iu[0].size)
    else:
        iu = np.triu_indices(n)
        w[iu] = rng.uniform(-1.0, 1.0, iu[0].size)
    w = np.triu(w, 1).T + w
    return ProblemInstance(kind, w, seed=int(seed))


def _as_bits(instance, b) -> np.ndarray:
    b = np.asarray(b)
    if b.shape[-1] != instance.n:
        raise ValueError(f"bitstring length {b.shape[-1]} does not match n={instance.n}")
    return b.astype(np.float64)


def cost_many(instance: ProblemInstance, bits) -> np.ndarray:
    """Cost of each row of a ``(k, n)`` 0/1 array."""
    x = _as_bits(instance, bits)
    w = instance.w
    if instance.kind is ProblemKind.QUBO:
        return np.einsum("bi,ij,bj->b", x, w, x)
    if instance.kind is ProblemKind.MAXQP:
        z = 1.0 - 2.0 * x
        return np.einsum("bi,ij,bj->b", z, w, z)
    # equal to 1/2 sum_ij w_ij (1 - z_i z_j) / 2; summing only cut edges keeps
    # the empty cut and its complement at exactly 0
    i, j = np.nonzero(np.triu(w, 1))
    return (x[:, i] != x[:, j]) @ w[i, j]


def cost(instance: ProblemInstance, b) -> float:
    b = np.asarray(b)
    if b.ndim != 1:
        raise ValueError("cost takes a single bitstring")
    return float(cost_many(instance, b[None, :])[0])


def extremes(instance: ProblemInstance) -> tuple[float, float]:
    """Brute-force ``(min, max)`` of the cost over all ``2**n`` bitstrings; cached."""
    if instance.m is None or instance.M is None:
        table = instance.cost_table()
        instance.m = float(table.min())
        instance.M = float(table.max())
    return instance.m, instance.M


def normalized_cost(instance: ProblemInstance, b) -> float:
    b = np.asarray(b)
    if b.shape != (instance.n,):
        raise ValueError(f"bitstring length {b.shape[-1]} does not match n={instance.n}")
    idx = int(b.astype(np.int64) @ (1 << np.arange(instance.n)))
    return float(instance.normalized_table()[idx])


def wtilde_length(n: int) -> int:
    return n * (n + 1) // 2


def encode_wtilde(instance: ProblemInstance) -> np.ndarray:
    """Upper triangle of ``w`` including the diagonal, row-major.

    The layout has ``n(n+1)/2`` slots for every kind; diagonal slots are zero
    for MaxCut and MaxQP.
    """
    return instance.w[np.triu_indices(instance.n)].copy()


def decode_wtilde(values, n: int) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.size != wtilde_length(n):
        raise ConfigurationError(f"expected {wtilde_length(n)} entries for n={n}, got {values.size}")
    w = np.zeros((n, n))
    w[np.triu_indices(n)] = values
    return np.triu(w, 1).T + w


def scaled(instance: ProblemInstance, c: float) -> ProblemInstance:
    return ProblemInstance(instance.kind, c * instance.w, seed=instance.seed)


def ising_coefficients(instance: ProblemInstance):
    """Rewrite the cost in spin variables ``z = 1 - 2b``.

    Returns ``(const, h, J)`` with ``J`` strictly upper triangular so that
    ``C = const + h @ z + sum_{i<j} J_ij z_i z_j``.
    """
    w = instance.w
    n = instance.n
    upper = np.triu(w, 1)
    if instance.kind is ProblemKind.MAXCUT:
        return float(upper.sum() / 2), np.zeros(n), -upper / 2
    if instance.kind is ProblemKind.MAXQP:
        return 0.0, np.zeros(n), 2 * upper
    diag = np.diag(w)
    off_row = w.sum(axis=1) - diag
    const = float(diag.sum() / 2 + upper.sum() / 2)
    h = -diag / 2 - off_row / 2
    return const, h, upper / 2


# -- JSON Lines instance files ------------------------------------------------


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "kind": instance.kind.value,
        "n": instance.n,
        "upper": [float(v) for v in encode_wtilde(instance)],
        "seed": instance.seed,
        "m": instance.m,
        "M": instance.M,
    }


def instance_from_dict(d: dict) -> ProblemInstance:
    n = int(d["n"])
    inst = ProblemInstance(d["kind"], decode_wtilde(d["upper"], n), seed=d.get("seed"))
    inst.m = None if d.get("m") is None else float(d["m"])
    inst.M = None if d.get("M") is None else float(d["M"])
    return inst


def dumps_instance(instance: ProblemInstance) -> str:
    return json.dumps(instance_to_dict(instance))


def save_instances(path, instances) -> None:
    with open(path, "w") as f:
        for inst in instances:
            f.write(dumps_instance(inst) + "\n")


def load_instances(path) -> list[ProblemInstance]:
    with open(path) as f:
        return [instance_from_dict(json.loads(line)) for line in f if line.strip()]
