"""Quil-like text for programs: ``RX(pi/4) 2``, ``CNOT 5 9``, ``CZ 0 1``."""
from __future__ import annotations

import math
import re
from fractions import Fraction

from .statevec import GateOp

_ANGLE_TOL = 1e-12


def format_angle(theta: float) -> str:
    """Render multiples of pi/8 symbolically, anything else as a float."""
    frac = Fraction(theta / math.pi).limit_denominator(8)
    if abs(float(frac) * math.pi - theta) > _ANGLE_TOL:
        return repr(float(theta))
    if frac == 0:
        return "0"
    num, den = frac.numerator, frac.denominator
    sign = "-" if num < 0 else ""
    num = abs(num)
    head = "pi" if num == 1 else f"{num}*pi"
    return f"{sign}{head}" if den == 1 else f"{sign}{head}/{den}"


_ANGLE_RE = re.compile(r"^(-)?(?:(\d+)\*)?pi(?:/(\d+))?$")


def parse_angle(text: str) -> float:
    text = text.replace(" ", "")
    m = _ANGLE_RE.match(text)
    if m:
        sign = -1.0 if m.group(1) else 1.0
        num = int(m.group(2) or 1)
        den = int(m.group(3) or 1)
        return sign * num * math.pi / den
    return float(text)


def format_gate(g: GateOp) -> str:
    qubits = " ".join(str(q) for q in g.qubits)
    if g.kind in ("RX", "RY", "RZ", "PHASE_ZZ"):
        return f"{g.kind}({format_angle(g.angle)}) {qubits}"
    return f"{g.kind} {qubits}"


_GATE_RE = re.compile(r"^([A-Z_]+)(?:\(([^)]*)\))?((?:\s+\d+)+)$")


def parse_gate(line: str) -> GateOp:
    m = _GATE_RE.match(line.strip())
    if not m:
        raise ValueError(f"cannot parse instruction {line!r}")
    kind, angle, qubits = m.groups()
    return GateOp(kind, tuple(int(q) for q in qubits.split()), parse_angle(angle) if angle else 0.0)


def format_program(program) -> list[str]:
    return [format_gate(g) for g in program]


def parse_program(text: str) -> list[GateOp]:
    """One instruction per line (or ``;``-separated); ``#`` starts a comment."""
    out = []
    for raw in re.split(r"[\n;]", text):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append(parse_gate(line))
    return out
