import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from qprl.env import decode_action
from qprl.quil import format_program, parse_program
from qprl.statevec import GateOp, overlap, run_program
from qprl.transpiler import (
    NativeGate, decompose_gate, equal_up_to_phase, native_length, peephole, program_unitary, transpile,
    verify_equivalence, zxzxz_angles,
)

REFERENCE_PROGRAM = """RX(pi) 8
RY(pi) 1
RY(pi) 0
RX(pi) 9
RX(pi/4) 2
RX(pi/4) 2
RX(pi/4) 2
RX(pi/4) 2
RX(pi/4) 2
RY(pi) 4
RX(pi) 5
RX(pi/4) 2
CNOT 5 9"""


def oracle_unitary(program, n):
    u = np.eye(2**n, dtype=complex)
    for g in program:
        u = oracles.gate_unitary(g.kind, g.qubits, g.angle, n) @ u
    return u


def random_program(rng, n, length=25):
    prog = []
    for _ in range(length):
        a = int(rng.integers(24 * n + n * (n - 1) // 2))
        prog.append(decode_action(a, n))
    return prog


class TestDecompose:
    def test_rz_native(self):
        out = decompose_gate(GateOp("RZ", (0,), 3 * math.pi / 2))
        assert out == [NativeGate("RZ", (0,), 3 * math.pi / 2)]

    def test_rx_half_pi_native(self):
        assert decompose_gate(GateOp("RX", (2,), math.pi / 2)) == [NativeGate("RXp", (2,))]
        assert decompose_gate(GateOp("RX", (2,), 3 * math.pi / 2)) == [NativeGate("RXm", (2,))]

    def test_cnot(self):
        g = GateOp("CNOT", (0, 1))
        out = decompose_gate(g)
        assert len(out) == 7 and [x.kind for x in out].count("CZ") == 1
        native = [x.to_gateop() for x in out]
        assert equal_up_to_phase(oracle_unitary(native, 2), oracle_unitary([g], 2))

    def test_ry_pi(self):
        g = GateOp("RY", (0,), math.pi)
        out = decompose_gate(g)
        assert len(out) <= 5
        assert equal_up_to_phase(oracle_unitary([x.to_gateop() for x in out], 1), oracle_unitary([g], 1))

    def test_unsupported(self):
        with pytest.raises(ValueError):
            decompose_gate(type("G", (), {"kind": "SWAP", "qubits": (0, 1), "angle": 0.0})())

    @settings(max_examples=100, deadline=None)
    @given(st.sampled_from(["RX", "RY", "RZ"]), st.floats(-20, 20))
    def test_any_rotation(self, kind, theta):
        g = GateOp(kind, (0,), theta)
        native = [x.to_gateop() for x in decompose_gate(g)]
        assert equal_up_to_phase(oracle_unitary(native, 1), oracle_unitary([g], 1))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**31))
    def test_zxzxz_on_random_unitary(self, seed):
        rng = np.random.default_rng(seed)
        q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        a, b, c = zxzxz_angles(q)
        prog = [GateOp("RZ", (0,), a), GateOp("RX", (0,), math.pi / 2), GateOp("RZ", (0,), b),
                GateOp("RX", (0,), math.pi / 2), GateOp("RZ", (0,), c)]
        assert equal_up_to_phase(oracle_unitary(prog, 1), q, 1e-9)

    def test_length_bound(self):
        rng = np.random.default_rng(0)
        prog = random_program(rng, 6, 40)
        k = sum(g.kind == "CNOT" for g in prog)
        raw = sum(len(decompose_gate(g)) for g in prog)
        assert raw <= 7 * k + 5 * (len(prog) - k)


class TestPeephole:
    def test_empty(self):
        assert len(transpile([])) == 0

    def test_merge(self):
        out = transpile([GateOp("RZ", (0,), math.pi / 2), GateOp("RZ", (0,), math.pi / 2)])
        assert len(out) == 1
        assert out.gates[0].kind == "RZ" and out.gates[0].angle == pytest.approx(math.pi)

    def test_merge_across_other_wires(self):
        prog = [GateOp("RZ", (0,), 0.3), GateOp("RX", (1,), math.pi / 2), GateOp("RZ", (0,), 0.4)]
        assert len(transpile(prog)) == 2

    def test_no_merge_through_cz(self):
        prog = [GateOp("RZ", (0,), 0.3), GateOp("CZ", (0, 1)), GateOp("RZ", (0,), 0.4)]
        assert len(transpile(prog)) == 3

    def test_identity_removed(self):
        assert len(transpile([GateOp("RZ", (3,), 0.0), GateOp("RZ", (3,), 2 * math.pi)])) == 0
        assert len(transpile([GateOp("RZ", (1,), 0.7), GateOp("RZ", (1,), -0.7)])) == 0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**31))
    def test_never_grows_native_input(self, seed):
        rng = np.random.default_rng(seed)
        gates = []
        for _ in range(30):
            r = rng.integers(3)
            q = int(rng.integers(3))
            if r == 0:
                gates.append(NativeGate("RZ", (q,), float(rng.choice([0.0, math.pi / 4, -math.pi / 4]))))
            elif r == 1:
                gates.append(NativeGate("RXp", (q,)))
            else:
                gates.append(NativeGate("CZ", (q, (q + 1) % 3)))
        out = transpile(gates)
        assert len(out) <= len(gates)
        assert verify_equivalence(gates, out, 3)

    def test_sources_track_input(self):
        out = transpile([GateOp("RX", (0,), math.pi), GateOp("CNOT", (0, 1))])
        assert out.sources == sorted(out.sources)
        assert set(out.sources) == {0, 1}

    def test_peephole_function(self):
        gs = [NativeGate("RZ", (0,), 0.1), NativeGate("RZ", (0,), 0.2)]
        out, src = peephole(gs, [0, 1])
        assert len(out) == 1 and src == [0]


class TestEquivalence:
    def test_self(self):
        prog = random_program(np.random.default_rng(0), 3)
        assert verify_equivalence(prog, prog, 3)

    def test_rx_vs_ry(self):
        assert not verify_equivalence([GateOp("RX", (0,), math.pi)], [GateOp("RY", (0,), math.pi)], 1)

    def test_rx_vs_ry_statevector_mode(self):
        a = [GateOp("RX", (0,), math.pi)]
        b = [GateOp("RY", (0,), math.pi)]
        assert not verify_equivalence(a, b, 6, mode="statevector")

    def test_relative_phase_detected(self):
        # Z on one qubit agrees with identity on |0...0> but not on product states
        a = [GateOp("RZ", (0,), math.pi)]
        assert not verify_equivalence(a, [], 5, mode="statevector")

    def test_all_actions(self):
        for a in range(285):
            g = decode_action(a, 10)
            qs = g.qubits
            local = GateOp(g.kind, tuple(range(len(qs))), g.angle)
            assert verify_equivalence([local], transpile([local]), len(qs)), a

    def test_unitary_builder_matches_oracle(self):
        prog = random_program(np.random.default_rng(4), 3, 10)
        np.testing.assert_allclose(program_unitary(prog, 3), oracle_unitary(prog, 3), atol=1e-12)


class TestReferenceProgram:
    def test_round_trip_text(self):
        prog = parse_program(REFERENCE_PROGRAM)
        assert len(prog) == 13
        assert format_program(prog) == REFERENCE_PROGRAM.splitlines()

    def test_compiled_equivalent(self):
        prog = parse_program(REFERENCE_PROGRAM)
        native = transpile(prog)
        assert overlap(run_program(prog, 10), run_program(native.to_gateops(), 10)) >= 1 - 1e-9
        assert verify_equivalence(prog, native, 10)
        # hand count: RX(pi) -> 4 and RY(pi) -> 3 after dropping RZ(0); the six
        # RX(pi/4) on wire 2 merge 5 RZ pairs (30 - 5); the CNOT target merges
        # once with the RZ(pi) left by RX(pi) 9 (7 - 1)
        assert native_length(prog) == 3 * 4 + 3 * 3 + 25 + 6
