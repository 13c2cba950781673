"""Generate one instance per kind and walk a short episode by hand."""
import numpy as np

from qprl import problems
from qprl.env import EnvConfig, ProgramEnv, decode_action
from qprl.quil import format_gate

for kind in ("maxcut", "maxqp", "qubo"):
    inst = problems.generate(kind, 6, seed=1)
    m, M = problems.extremes(inst)
    table = inst.normalized_table()
    print(f"{kind:7s} cost range [{m:+.3f}, {M:+.3f}], mean normalized cost {table.mean():.3f}")

inst = problems.generate("maxcut", 6, seed=1)
env = ProgramEnv(EnvConfig(n=6), np.random.default_rng(0))
obs = env.reset(inst)
print("observation:", obs.B.shape, "shots x qubits plus", obs.wtilde.size, "weights")
rng = np.random.default_rng(1)
done = False
while not done:
    a = int(rng.integers(env.num_actions))
    _, reward, done, outcome = env.step(a)
    print(f"  {format_gate(decode_action(a, 6)):16s} reward {reward:.3f}")
print("outcome:", outcome.value, "after", len(env.episode.program), "actions")
