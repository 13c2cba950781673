"""PPO with generalized advantage estimation over one or more environments."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import policy as pn
from .env import EnvConfig, ProgramEnv, episode_record, reward_from_samples
from .errors import NumericError
from .transpiler import transpile

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PPOConfig:
    n_steps: int = 512
    n_envs: int = 1
    gae_lambda: float = 0.95
    discount: float = 0.99
    clip: float = 0.2
    adam_epsilon: float = 1e-5
    lr_initial: float = 2.5e-4
    lr_schedule: str = "linear"
    epochs_per_update: int = 4
    minibatch_size: int = 64
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    max_grad_norm: float | None = 0.5
    normalize_advantage: bool = True
    reward_signal: str = "increment"
    total_steps: int = 512

    def __post_init__(self):
        if not 0 < self.discount <= 1:
            raise ValueError(f"discount must be in (0, 1], got {self.discount}")
        if not 0 <= self.gae_lambda <= 1:
            raise ValueError(f"gae_lambda must be in [0, 1], got {self.gae_lambda}")
        if self.clip <= 0:
            raise ValueError(f"clip must be positive, got {self.clip}")
        if self.reward_signal not in ("increment", "absolute"):
            raise ValueError(f"unknown reward signal {self.reward_signal!r}")
        if self.lr_schedule not in ("linear", "constant"):
            raise ValueError(f"unknown lr schedule {self.lr_schedule!r}")
        if min(self.n_steps, self.n_envs, self.epochs_per_update, self.minibatch_size) < 1:
            raise ValueError("n_steps, n_envs, epochs_per_update and minibatch_size must be >= 1")


def learning_rate(cfg: PPOConfig, steps_done: int) -> float:
    if cfg.lr_schedule == "constant":
        return cfg.lr_initial
    return cfg.lr_initial * (1.0 - steps_done / cfg.total_steps)


@dataclass
class RolloutBuffer:
    """Arrays are ``(n_steps, n_envs, ...)``; ``bootstrap`` holds ``V(s_T)`` per env."""

    obs: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    values: np.ndarray
    logprobs: np.ndarray
    dones: np.ndarray
    bootstrap: np.ndarray
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None
    episodes: list = field(default_factory=list)

    def __len__(self):
        return self.rewards.size

    def flat(self):
        t = self.rewards.size
        return (
            self.obs.reshape(t, -1), self.actions.reshape(t), self.logprobs.reshape(t),
            self.advantages.reshape(t), self.returns.reshape(t), self.values.reshape(t),
        )


def compute_gae(rewards, values, dones, bootstrap, discount: float, lam: float):
    """Backward GAE recursion; ``dones[t]`` marks that the episode ended at step ``t``.

    Works on 1-D traces or ``(T, n_envs)`` arrays with a per-env bootstrap.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    notdone = 1.0 - np.asarray(dones, dtype=np.float64)
    adv = np.zeros_like(rewards)
    next_value = np.asarray(bootstrap, dtype=np.float64)
    next_adv = np.zeros_like(next_value)
    for t in range(rewards.shape[0] - 1, -1, -1):
        delta = rewards[t] + discount * next_value * notdone[t] - values[t]
        next_adv = delta + discount * lam * notdone[t] * next_adv
        adv[t] = next_adv
        next_value = values[t]
    return adv, adv + values


class InstanceSampler:
    """Endless shuffled passes over a dataset."""

    def __init__(self, instances, rng: np.random.Generator):
        if len(instances) == 0:
            raise ValueError("dataset is empty")
        self.instances = list(instances)
        self.rng = rng
        self._order = []

    def __call__(self):
        if not self._order:
            self._order = list(self.rng.permutation(len(self.instances))[::-1])
        return self.instances[self._order.pop()]


class RolloutCollector:
    """Keeps environments mid-episode across successive rollouts."""

    def __init__(self, instances, env_cfg: EnvConfig, n_envs: int, seed: int, reward_signal: str = "increment"):
        self.env_cfg = env_cfg
        self.increments = reward_signal == "increment"
        self.sampler = InstanceSampler(instances, np.random.default_rng([seed, 1]))
        self.envs = [ProgramEnv(env_cfg, np.random.default_rng([seed, 2, i])) for i in range(n_envs)]
        self.action_rng = np.random.default_rng([seed, 3])
        self._prev = {}
        self.obs = np.stack([self._reset(e).flatten() for e in self.envs])

    def _reset(self, env):
        obs = env.reset(self.sampler())
        self._prev[env] = reward_from_samples(obs.B, env.episode.instance)
        return obs

    def collect(self, params: pn.PolicyParams, n_steps: int) -> RolloutBuffer:
        k, d = len(self.envs), self.obs.shape[1]
        obs = np.zeros((n_steps, k, d))
        actions = np.zeros((n_steps, k), dtype=np.int64)
        rewards = np.zeros((n_steps, k))
        values = np.zeros((n_steps, k))
        logprobs = np.zeros((n_steps, k))
        dones = np.zeros((n_steps, k), dtype=bool)
        episodes = []
        for t in range(n_steps):
            logits, v = pn.forward(params, self.obs)
            logp_all = pn.log_softmax(logits)
            cdf = np.cumsum(np.exp(logp_all), axis=1)
            u = self.action_rng.random(k) * cdf[:, -1]
            obs[t] = self.obs
            values[t] = v
            for i, env in enumerate(self.envs):
                a = min(int(np.searchsorted(cdf[i], u[i], side="right")), cdf.shape[1] - 1)
                actions[t, i] = a
                logprobs[t, i] = logp_all[i, a]
                o, r, done, _ = env.step(a)
                rewards[t, i] = r - self._prev[env] if self.increments else r
                self._prev[env] = r
                dones[t, i] = done
                if done:
                    ep = env.episode
                    episodes.append((max(ep.step_rewards), len(ep.step_rewards), ep.outcome.value))
                    o = self._reset(env)
                self.obs[i] = o.flatten()
        _, bootstrap = pn.forward(params, self.obs)
        return RolloutBuffer(obs, actions, rewards, values, logprobs, dones, bootstrap, episodes=episodes)


def collect_rollout(envs_or_collector, params, cfg: PPOConfig) -> RolloutBuffer:
    buf = envs_or_collector.collect(params, cfg.n_steps)
    buf.advantages, buf.returns = compute_gae(
        buf.rewards, buf.values, buf.dones, buf.bootstrap, cfg.discount, cfg.gae_lambda
    )
    return buf


@dataclass
class LossStats:
    loss: float
    policy_loss: float
    value_loss: float
    entropy: float
    clip_fraction: float
    approx_kl: float
    surrogate_clipped: float
    surrogate_unclipped: float


def ppo_loss(params: pn.PolicyParams, obs, actions, old_logp, advantages, returns, cfg: PPOConfig,
             with_grads: bool = True):
    """Clipped-surrogate PPO loss (to be minimized) and its parameter gradients.

    ``loss = -mean(min(r A, clip(r) A)) + value_coef * mean((V - R)^2) - entropy_coef * mean(H)``
    """
    adv = np.asarray(advantages, dtype=np.float64)
    if cfg.normalize_advantage:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    b = adv.size
    logits, value, cache = pn.forward(params, obs, return_cache=True)
    logp_all = pn.log_softmax(logits)
    p = np.exp(logp_all)
    rows = np.arange(b)
    logp = logp_all[rows, actions]
    ratio = np.exp(logp - old_logp)
    clipped = np.clip(ratio, 1.0 - cfg.clip, 1.0 + cfg.clip)
    surr1 = ratio * adv
    surr2 = clipped * adv
    surr = np.minimum(surr1, surr2)
    ent = -(p * logp_all).sum(axis=1)
    verr = value - returns

    policy_loss = -surr.mean()
    value_loss = float((verr**2).mean())
    ent_mean = float(ent.mean())
    loss = policy_loss + cfg.value_coef * value_loss - cfg.entropy_coef * ent_mean
    if not np.isfinite(loss):
        raise NumericError(f"non-finite PPO loss {loss}")
    stats = LossStats(
        loss=float(loss),
        policy_loss=float(policy_loss),
        value_loss=value_loss,
        entropy=ent_mean,
        clip_fraction=float(np.mean(np.abs(ratio - 1.0) > cfg.clip)),
        approx_kl=float(0.5 * np.mean((logp - old_logp) ** 2)),
        surrogate_clipped=float(surr.mean()),
        surrogate_unclipped=float(surr1.mean()),
    )
    if not with_grads:
        return stats, None

    # min() picks the unclipped branch where it is the smaller one
    active = surr1 <= surr2
    dlogp = np.where(active, -ratio * adv, 0.0) / b
    onehot = np.zeros_like(p)
    onehot[rows, actions] = 1.0
    dlogits = dlogp[:, None] * (onehot - p)
    # dH/dlogits_k = -p_k (log p_k + H)
    dlogits += (cfg.entropy_coef / b) * p * (logp_all + ent[:, None])
    dvalue = cfg.value_coef * 2.0 * verr / b
    return stats, pn.backward(params, cache, dlogits, dvalue)


def clip_grad_norm(grads: pn.PolicyParams, max_norm: float | None) -> pn.PolicyParams:
    if max_norm is None:
        return grads
    norm = np.sqrt(sum(float((g * g).sum()) for g in grads.arrays()))
    if norm <= max_norm:
        return grads
    scale = max_norm / (norm + 1e-6)
    return pn.PolicyParams(*(g * scale for g in grads.arrays()))


def ppo_update(buf: RolloutBuffer, params: pn.PolicyParams, opt: pn.AdamState, cfg: PPOConfig,
               lr: float, rng: np.random.Generator):
    """Several epochs of minibatch Adam steps; returns ``(params, mean LossStats)``."""
    obs, actions, old_logp, adv, ret, _ = buf.flat()
    total = adv.size
    history = []
    for _ in range(cfg.epochs_per_update):
        order = rng.permutation(total)
        for start in range(0, total, cfg.minibatch_size):
            idx = order[start:start + cfg.minibatch_size]
            stats, grads = ppo_loss(params, obs[idx], actions[idx], old_logp[idx], adv[idx], ret[idx], cfg)
            assert stats.surrogate_clipped <= stats.surrogate_unclipped + 1e-12
            params = pn.adam_step(params, clip_grad_norm(grads, cfg.max_grad_norm), opt, lr)
            history.append(stats)
    mean = LossStats(*(float(np.mean([getattr(s, f) for s in history])) for f in LossStats.__dataclass_fields__))
    return params, mean


CURVE_COLUMNS = ("steps", "mean_ep_reward", "mean_ep_len", "entropy", "clip_fraction", "approx_kl")


@dataclass
class TrainResult:
    params: pn.PolicyParams
    curve: list = field(default_factory=list)
    best_params: pn.PolicyParams | None = None
    best_val_score: float | None = None
    checkpoints: list = field(default_factory=list)


def train(instances, env_cfg: EnvConfig, cfg: PPOConfig, seed: int, val_instances=None,
          eval_every: int = 10, checkpoint_dir=None, checkpoint_every: int | None = None,
          params: pn.PolicyParams | None = None) -> TrainResult:
    """Alternate rollouts and PPO updates until ``cfg.total_steps`` environment steps.

    Each curve row summarizes the episodes completed during one update window;
    ``mean_ep_reward`` there is the mean episode score (best step reward).
    When ``val_instances`` is given, the policy is scored on it every
    ``eval_every`` updates and after the last one, and the best is kept.
    """
    rng = np.random.default_rng([seed, 0])
    if params is None:
        params = pn.init_params(env_cfg.obs_dim, env_cfg.num_actions, rng)
    opt = pn.AdamState.for_params(params, eps=cfg.adam_epsilon)
    collector = RolloutCollector(instances, env_cfg, cfg.n_envs, seed, cfg.reward_signal)
    result = TrainResult(params)
    per_update = cfg.n_steps * cfg.n_envs
    n_updates = max(1, -(-cfg.total_steps // per_update))
    steps = 0
    for u in range(n_updates):
        lr = learning_rate(cfg, steps)
        buf = collect_rollout(collector, params, cfg)
        steps += per_update
        params, stats = ppo_update(buf, params, opt, cfg, lr, rng)
        scores = [e[0] for e in buf.episodes]
        lengths = [e[1] for e in buf.episodes]
        result.curve.append({
            "steps": steps,
            "mean_ep_reward": float(np.mean(scores)) if scores else float("nan"),
            "mean_ep_len": float(np.mean(lengths)) if lengths else float("nan"),
            "entropy": stats.entropy,
            "clip_fraction": stats.clip_fraction,
            "approx_kl": stats.approx_kl,
        })
        log.debug("update %d/%d: %s", u + 1, n_updates, result.curve[-1])
        last = u == n_updates - 1
        if val_instances and ((u + 1) % eval_every == 0 or last):
            recs = evaluate(params, val_instances, env_cfg, seed)
            score = float(np.mean([r["score"] for r in recs]))
            if result.best_val_score is None or score > result.best_val_score:
                result.best_val_score = score
                result.best_params = params.copy()
        if checkpoint_dir is not None and checkpoint_every and (u + 1) % checkpoint_every == 0:
            path = f"{checkpoint_dir}/checkpoint_{steps:09d}.bin"
            pn.save_checkpoint(path, params, {"steps": steps})
            result.checkpoints.append(path)
    result.params = params
    return result


def run_episode(params, instance, env_cfg: EnvConfig, rng: np.random.Generator) -> dict:
    """One stochastic episode. ``params=None`` samples actions uniformly."""
    env = ProgramEnv(env_cfg, rng)
    obs = env.reset(instance)
    done = False
    while not done:
        if params is None:
            a = int(rng.integers(env.num_actions))
        else:
            logits, _ = pn.forward(params, obs.flatten())
            a, _, _ = pn.sample_action(logits, rng)
        obs, _, done, _ = env.step(a)
    ep = env.episode
    best = int(np.argmax(ep.step_rewards))
    prefix = ep.program[:best + 1]
    return episode_record(
        ep,
        agent="untrained" if params is None else "trained",
        instructions=best + 1,
        compiled_instructions=len(transpile(prefix)),
    )


def evaluate(params, instances, env_cfg: EnvConfig, seed: int) -> list[dict]:
    """One episode per instance; instance ``i`` always uses the generator seeded ``[seed, i]``."""
    return [run_episode(params, inst, env_cfg, np.random.default_rng([seed, i])) for i, inst in enumerate(instances)]

