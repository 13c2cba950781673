"""Compile a short program to {CZ, RZ, RX(+-pi/2)} and verify equivalence."""
from qprl.quil import parse_program
from qprl.transpiler import transpile, verify_equivalence

program = parse_program("RX(pi/2) 0; RY(pi/4) 1; CNOT 0 1; RZ(pi/2) 1; RZ(pi/2) 1")
native = transpile(program)
print(f"{len(program)} source gates -> {len(native)} native gates")
for line in native.text():
    print("  ", line)
print("equivalent up to global phase:", verify_equivalence(program, native.to_gateops(), 2))
