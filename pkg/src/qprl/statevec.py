"""Dense statevector simulator.

Basis convention: qubit ``i`` is bit ``i`` of the basis index (little-endian),
so the bitstring ``b_0 b_1 ... b_{n-1}`` maps to ``sum(b_i << i)``.

Rotations follow the half-angle convention ``R_A(theta) = exp(-i theta A / 2)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError

MAX_QUBITS = 16

GATE_KINDS = ("RX", "RY", "RZ", "CNOT", "H", "CZ", "PHASE_ZZ")
SINGLE_QUBIT_KINDS = ("RX", "RY", "RZ", "H")
TWO_QUBIT_KINDS = ("CNOT", "CZ", "PHASE_ZZ")


@dataclass(frozen=True)
class GateOp:
    """One gate. ``qubits`` is ``(q,)`` or ``(control, target)``."""

    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity = 1 if self.kind in SINGLE_QUBIT_KINDS else 2
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s), got {self.qubits}")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError(f"{self.kind} needs distinct qubits, got {self.qubits}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "angle", float(self.angle))


def rx(theta, q):
    return GateOp("RX", (q,), theta)


def ry(theta, q):
    return GateOp("RY", (q,), theta)


def rz(theta, q):
    return GateOp("RZ", (q,), theta)


def h(q):
    return GateOp("H", (q,))


def cnot(control, target):
    return GateOp("CNOT", (control, target))


def cz(a, b):
    return GateOp("CZ", (a, b))


@dataclass
class StateVector:
    n: int
    amps: np.ndarray = field(repr=False)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm_sq(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amps.copy())


def _check_n(n):
    if not 1 <= n <= MAX_QUBITS:
        raise ConfigurationError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def init_zero(n: int) -> StateVector:
    _check_n(n)
    amps = np.zeros(2**n, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n, amps)


def init_plus(n: int) -> StateVector:
    """Uniform superposition over all ``2**n`` basis states."""
    _check_n(n)
    return StateVector(n, np.full(2**n, 2.0 ** (-n / 2), dtype=np.complex128))


def encode_bits(bits) -> int:
    return int(sum(int(b) << i for i, b in enumerate(bits)))


def decode_index(k: int, n: int) -> np.ndarray:
    return ((int(k) >> np.arange(n)) & 1).astype(np.uint8)


@lru_cache(maxsize=None)
def basis_bits(n: int) -> np.ndarray:
    """``(2**n, n)`` table; row ``k`` holds the bits of basis index ``k``."""
    k = np.arange(2**n)
    bits = ((k[:, None] >> np.arange(n)) & 1).astype(np.int8)
    bits.setflags(write=False)
    return bits


def rotation_matrix(axis: str, theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    if axis == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if axis == "RY":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if axis == "RZ":
        return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128)
    raise ValueError(f"not a rotation axis: {axis!r}")


HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def gate_matrix(g: GateOp) -> np.ndarray:
    """Unitary of ``g`` on its own qubits.

    Two-qubit matrices act on the index ``b_first + 2 * b_second`` where
    ``first, second = g.qubits``.
    """
    if g.kind in ("RX", "RY", "RZ"):
        return rotation_matrix(g.kind, g.angle)
    if g.kind == "H":
        return HADAMARD.copy()
    if g.kind == "CNOT":
        # control is the low bit of the local index
        return np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=np.complex128)
    if g.kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(np.complex128)
    if g.kind == "PHASE_ZZ":
        p = np.exp(-0.5j * g.angle)
        return np.diag([p, np.conj(p), np.conj(p), p])
    raise ValueError(f"unknown gate kind {g.kind!r}")


@lru_cache(maxsize=None)
def _cnot_permutation(n: int, control: int, target: int) -> np.ndarray:
    k = np.arange(2**n)
    perm = np.where((k >> control) & 1, k ^ (1 << target), k)
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=None)
def _parity_sign(n: int, a: int, b: int) -> np.ndarray:
    """+1 where bits ``a`` and ``b`` agree, -1 otherwise."""
    k = np.arange(2**n)
    sign = 1 - 2 * (((k >> a) ^ (k >> b)) & 1)
    sign.setflags(write=False)
    return sign


@lru_cache(maxsize=None)
def _both_set(n: int, a: int, b: int) -> np.ndarray:
    k = np.arange(2**n)
    mask = ((k >> a) & (k >> b) & 1).astype(bool)
    mask.setflags(write=False)
    return mask


def _apply_1q(amps: np.ndarray, n: int, q: int, u: np.ndarray) -> None:
    view = amps.reshape(2 ** (n - 1 - q), 2, 2**q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    view[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def _apply_diag_1q(amps: np.ndarray, n: int, q: int, d0: complex, d1: complex) -> None:
    view = amps.reshape(2 ** (n - 1 - q), 2, 2**q)
    view[:, 0, :] *= d0
    view[:, 1, :] *= d1


def apply_gate(state: StateVector, g: GateOp) -> StateVector:
    """Apply ``g`` to ``state`` in place and return the same object."""
    n = state.n
    for q in g.qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    amps = state.amps
    if g.kind == "RZ":
        _apply_diag_1q(amps, n, g.qubits[0], np.exp(-0.5j * g.angle), np.exp(0.5j * g.angle))
    elif g.kind in ("RX", "RY", "H"):
        _apply_1q(amps, n, g.qubits[0], gate_matrix(g))
    elif g.kind == "CNOT":
        state.amps = amps[_cnot_permutation(n, *g.qubits)]
    elif g.kind == "CZ":
        amps[_both_set(n, *g.qubits)] *= -1
    elif g.kind == "PHASE_ZZ":
        sign = _parity_sign(n, *g.qubits)
        amps *= np.exp(-0.5j * g.angle * sign)
    return state


def apply_program(state: StateVector, program) -> StateVector:
    for g in program:
        apply_gate(state, g)
    return state


def run_program(program, n: int) -> StateVector:
    return apply_program(init_zero(n), program)


def _check_dims(state: StateVector, instance) -> None:
    if instance.n != state.n:
        raise ValueError(f"instance has {instance.n} variables but state has {state.n} qubits")


def apply_phase_zz(state: StateVector, instance, gamma: float) -> StateVector:
    """Multiply each amplitude by ``exp(-i gamma C(b))``, in place."""
    _check_dims(state, instance)
    state.amps *= np.exp(-1j * gamma * instance.cost_table())
    return state


def sample_indices(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    cdf = np.cumsum(state.probabilities())
    u = rng.random(shots) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, cdf.size - 1)


def sample_bitstrings(state: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``shots`` Born-rule samples; row ``i`` column ``j`` is qubit ``j``."""
    return basis_bits(state.n)[sample_indices(state, shots, rng)].astype(np.uint8)


def exact_expectation(state: StateVector, instance) -> float:
    _check_dims(state, instance)
    return float(state.probabilities() @ instance.cost_table())


def overlap(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|``; insensitive to global phase."""
    return float(abs(np.vdot(a.amps, b.amps)))
