import math

import pytest
from hypothesis import given, strategies as st

from qprl.quil import format_angle, format_gate, parse_angle, parse_gate, parse_program
from qprl.statevec import GateOp


@pytest.mark.parametrize("theta,text", [
    (0.0, "0"), (math.pi, "pi"), (math.pi / 4, "pi/4"), (3 * math.pi / 2, "3*pi/2"), (-math.pi / 2, "-pi/2"),
])
def test_angle_text(theta, text):
    assert format_angle(theta) == text
    assert parse_angle(text) == pytest.approx(theta, abs=1e-15)


@given(st.floats(-50, 50))
def test_angle_round_trip(theta):
    assert parse_angle(format_angle(theta)) == pytest.approx(theta, abs=1e-12)


def test_gate_text():
    assert format_gate(GateOp("RX", (8,), math.pi)) == "RX(pi) 8"
    assert format_gate(GateOp("CNOT", (5, 9))) == "CNOT 5 9"
    assert parse_gate("CNOT 5 9") == GateOp("CNOT", (5, 9))


def test_program_separators_and_comments():
    prog = parse_program("RX(pi) 0; RY(pi/2) 1  # note\n\nCNOT 0 1")
    assert [g.kind for g in prog] == ["RX", "RY", "CNOT"]


def test_bad_line():
    with pytest.raises(ValueError):
        parse_gate("RX pi 0")
