"""Grid-search p=1 QAOA angles and print the landscape for one instance."""
import numpy as np

from qprl import problems
from qprl.qaoa import QaoaConfig, run_qaoa

inst = problems.generate("maxqp", 6, seed=3)
res = run_qaoa(inst, QaoaConfig(bins=20, shots=10), np.random.default_rng(0))
print(f"best cell gamma={res.gamma_star:.3f} beta={res.beta_star:.3f}")
print(f"exact normalized expectation {res.exact_expectation:.3f}, 10-shot estimate {res.sampled_quality:.3f}")
print("landscape (rows gamma, columns beta, every 4th bin):")
print(np.round(res.grid[::4, ::4], 2))
print("program length", res.uncompiled_len)
