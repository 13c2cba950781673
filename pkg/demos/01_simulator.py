"""Build a Bell pair, sample it, and check a rotation against its matrix."""
import math

import numpy as np

from qprl.statevec import GateOp, gate_matrix, h, cnot, rx, run_program, sample_bitstrings

bell = run_program([h(0), cnot(0, 1)], 2)
print("Bell amplitudes (index = q0 + 2*q1):", np.round(bell.amps, 4))

shots = sample_bitstrings(bell, 8, np.random.default_rng(0))
print("eight shots, columns q0 q1:")
print(shots)

print("RX(pi/2) matrix:")
print(np.round(gate_matrix(rx(math.pi / 2, 0)), 4))
print("RX(pi) on qubit 2 of |000>:", run_program([GateOp("RX", (2,), math.pi)], 3).probabilities().round(6))
