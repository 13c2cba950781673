"""Decomposition into the native set {CZ, RZ(theta), RX(+pi/2), RX(-pi/2)}.

All-to-all connectivity is assumed, so no routing is done; the compiled
length is therefore a lower bound on what a topology-aware compiler emits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .quil import format_angle
from .statevec import GateOp, StateVector, apply_program, gate_matrix

NATIVE_KINDS = ("RZ", "RXp", "RXm", "CZ")
TWO_PI = 2 * math.pi
_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class NativeGate:
    kind: str
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in NATIVE_KINDS:
            raise ValueError(f"not a native gate kind: {self.kind!r}")

    def to_gateop(self) -> GateOp:
        if self.kind == "RZ":
            return GateOp("RZ", self.qubits, self.angle)
        if self.kind == "RXp":
            return GateOp("RX", self.qubits, math.pi / 2)
        if self.kind == "RXm":
            return GateOp("RX", self.qubits, -math.pi / 2)
        return GateOp("CZ", self.qubits)

    def text(self) -> str:
        q = " ".join(str(i) for i in self.qubits)
        if self.kind == "RZ":
            return f"RZ({format_angle(self.angle)}) {q}"
        if self.kind == "RXp":
            return f"RX(pi/2) {q}"
        if self.kind == "RXm":
            return f"RX(-pi/2) {q}"
        return f"CZ {q}"


@dataclass
class NativeProgram:
    gates: list = field(default_factory=list)
    sources: list = field(default_factory=list)

    def __len__(self):
        return len(self.gates)

    def to_gateops(self) -> list[GateOp]:
        return [g.to_gateop() for g in self.gates]

    def text(self) -> list[str]:
        return [g.text() for g in self.gates]


def _wrap(theta: float) -> float:
    """Angle in ``(-pi, pi]``; keeps ``RZ(theta)`` equal up to global phase."""
    t = math.remainder(theta, TWO_PI)
    return math.pi if abs(t + math.pi) < _ANGLE_TOL else t


def _is_zero_angle(theta: float) -> bool:
    return abs(math.remainder(theta, TWO_PI)) < 1e-10


def zxzxz_angles(u: np.ndarray) -> tuple[float, float, float]:
    """Angles ``(a, b, c)`` with ``u ~ RZ(c) RX(pi/2) RZ(b) RX(pi/2) RZ(a)``.

    ``u`` is first written as ``e^{i alpha} U3(theta, phi, lam)``; then
    ``a = lam``, ``b = theta + pi``, ``c = phi + pi``.
    """
    u = np.asarray(u, dtype=np.complex128)
    c_abs, s_abs = abs(u[0, 0]), abs(u[1, 0])
    theta = 2 * math.atan2(s_abs, c_abs)
    if s_abs < 1e-12:
        alpha = np.angle(u[0, 0])
        phi, lam = 0.0, float(np.angle(u[1, 1]) - alpha)
    elif c_abs < 1e-12:
        alpha = np.angle(u[1, 0])
        phi, lam = 0.0, float(np.angle(-u[0, 1]) - alpha)
    else:
        alpha = np.angle(u[0, 0])
        phi = float(np.angle(u[1, 0]) - alpha)
        lam = float(np.angle(-u[0, 1]) - alpha)
    return lam, theta + math.pi, phi + math.pi


@lru_cache(maxsize=4096)
def _single_qubit_template(kind: str, angle: float) -> tuple[tuple[str, float], ...]:
    a, b, c = zxzxz_angles(gate_matrix(GateOp(kind, (0,), angle)))
    return (("RZ", _wrap(a)), ("RXp", 0.0), ("RZ", _wrap(b)), ("RXp", 0.0), ("RZ", _wrap(c)))


def _h(q):
    return [NativeGate("RZ", (q,), math.pi / 2), NativeGate("RXp", (q,)), NativeGate("RZ", (q,), math.pi / 2)]


def decompose_gate(g: GateOp) -> list[NativeGate]:
    """Native sequence equal to ``g`` up to global phase."""
    q = g.qubits
    if g.kind == "RZ":
        return [NativeGate("RZ", q, g.angle)]
    if g.kind == "RX" and abs(math.remainder(g.angle - math.pi / 2, TWO_PI)) < _ANGLE_TOL:
        return [NativeGate("RXp", q)]
    if g.kind == "RX" and abs(math.remainder(g.angle + math.pi / 2, TWO_PI)) < _ANGLE_TOL:
        return [NativeGate("RXm", q)]
    if g.kind == "H":
        return _h(q[0])
    if g.kind in ("RX", "RY"):
        return [NativeGate(k, q, a) for k, a in _single_qubit_template(g.kind, g.angle)]
    if g.kind == "CZ":
        return [NativeGate("CZ", q)]
    if g.kind == "CNOT":
        c, t = q
        return _h(t) + [NativeGate("CZ", (c, t))] + _h(t)
    if g.kind == "PHASE_ZZ":
        a, b = q
        return decompose_gate(GateOp("CNOT", (a, b))) + [NativeGate("RZ", (b,), g.angle)] + decompose_gate(GateOp("CNOT", (a, b)))
    raise ValueError(f"cannot decompose gate kind {g.kind!r}")


def peephole(gates, sources):
    """Merge RZs with no other gate between them on their wire; drop RZ(0 mod 2pi)."""
    out, src = [], []
    last_on_wire = {}
    for g, s in zip(gates, sources):
        if g.kind == "RZ":
            j = last_on_wire.get(g.qubits[0])
            if j is not None and out[j] is not None and out[j].kind == "RZ":
                out[j] = NativeGate("RZ", g.qubits, out[j].angle + g.angle)
                continue
        for qb in g.qubits:
            last_on_wire[qb] = len(out)
        out.append(g)
        src.append(s)
    keep = [i for i, g in enumerate(out) if not (g.kind == "RZ" and _is_zero_angle(g.angle))]
    return [out[i] for i in keep], [src[i] for i in keep]


def transpile(program) -> NativeProgram:
    gates, sources = [], []
    for i, g in enumerate(program):
        if isinstance(g, NativeGate):
            native = [g]
        else:
            native = decompose_gate(g)
        gates.extend(native)
        sources.extend([i] * len(native))
    gates, sources = peephole(gates, sources)
    return NativeProgram(gates, sources)


def _as_gateops(program) -> list[GateOp]:
    if isinstance(program, NativeProgram):
        return program.to_gateops()
    return [g.to_gateop() if isinstance(g, NativeGate) else g for g in program]


def program_unitary(program, n: int) -> np.ndarray:
    """Full ``2**n x 2**n`` unitary built one basis column at a time."""
    ops = _as_gateops(program)
    dim = 2**n
    u = np.zeros((dim, dim), dtype=np.complex128)
    for k in range(dim):
        amps = np.zeros(dim, dtype=np.complex128)
        amps[k] = 1.0
        u[:, k] = apply_program(StateVector(n, amps), ops).amps
    return u


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    k = np.unravel_index(np.argmax(np.abs(u)), u.shape)
    if abs(v[k]) < 1e-12:
        return False
    phase = u[k] / v[k]
    phase /= abs(phase)
    return bool(np.max(np.abs(u - phase * v)) <= tol)


def _random_product_state(n: int, rng: np.random.Generator) -> StateVector:
    amps = np.ones(1, dtype=np.complex128)
    for _ in range(n):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        v /= np.linalg.norm(v)
        amps = np.kron(v, amps)  # qubit i ends up as bit i
    return StateVector(n, amps)


def verify_equivalence(a, b, n: int, mode: str | None = None, tol: float = 1e-9, seed: int = 0) -> bool:
    """Are two programs equal up to one global phase?

    ``mode="unitary"`` (default for n <= 4) compares full matrices;
    ``mode="statevector"`` compares outputs on 8 random product inputs.
    """
    mode = mode or ("unitary" if n <= 4 else "statevector")
    ops_a, ops_b = _as_gateops(a), _as_gateops(b)
    if mode == "unitary":
        return equal_up_to_phase(program_unitary(ops_a, n), program_unitary(ops_b, n), tol)
    rng = np.random.default_rng(seed)
    ref_phase = None
    for _ in range(8):
        psi = _random_product_state(n, rng)
        out_a = apply_program(psi.copy(), ops_a).amps
        out_b = apply_program(psi.copy(), ops_b).amps
        ov = np.vdot(out_a, out_b)
        if abs(ov) < 1 - tol:
            return False
        # the same global phase must hold for every input
        phase = ov / abs(ov)
        if ref_phase is None:
            ref_phase = phase
        elif abs(phase - ref_phase) > 1e-6:
            return False
    return True


def native_length(program) -> int:
    return len(transpile(program))
