"""Train briefly on small MaxCut instances and compare with the untrained policy."""
import numpy as np

from qprl import problems
from qprl.env import EnvConfig
from qprl.ppo import PPOConfig, evaluate, train

env = EnvConfig(n=6)
train_set = [problems.generate("maxcut", 6, s) for s in range(2000)]
test_set = [problems.generate("maxcut", 6, s) for s in range(10_000, 10_100)]

result = train(train_set, env, PPOConfig(total_steps=150_016), seed=0)
for row in result.curve[::50] + result.curve[-1:]:
    print(f"steps {row['steps']:6d}  mean score {row['mean_ep_reward']:.3f}  length {row['mean_ep_len']:.1f}")

trained = np.mean([r["score"] for r in evaluate(result.params, test_set, env, seed=7)])
untrained = np.mean([r["score"] for r in evaluate(None, test_set, env, seed=7)])
print(f"held-out mean score: trained {trained:.3f}, untrained {untrained:.3f}")
