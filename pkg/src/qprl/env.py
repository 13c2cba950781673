"""Episodic program-synthesis environment.

Each action appends one gate to the program, the register is re-measured
``shots`` times, and the reward is the mean normalized cost of the sampled
bitstrings. An episode is won as soon as the reward exceeds the threshold
and lost once the program reaches ``max_program_len`` gates without a win.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import problems
from .errors import ConfigurationError, UsageError
from .quil import format_program
from .statevec import GateOp, StateVector, basis_bits, init_zero, apply_gate, sample_indices

N_ANGLES = 8
AXES = ("RX", "RY", "RZ")


def num_single_actions(n: int) -> int:
    return len(AXES) * n * N_ANGLES


def num_actions(n: int) -> int:
    return num_single_actions(n) + n * (n - 1) // 2


def _pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def decode_action(action: int, n: int) -> GateOp:
    """Map an action id to its gate.

    Ids below ``24n`` are rotations laid out as (axis, qubit, k) with angle
    ``2 pi k / 8``; the rest are CNOTs over pairs ``i < j`` in lexicographic
    order with the lower index as control.
    """
    action = int(action)
    if not 0 <= action < num_actions(n):
        raise ValueError(f"action {action} out of range [0, {num_actions(n)})")
    per_axis = n * N_ANGLES
    if action < num_single_actions(n):
        axis, rest = divmod(action, per_axis)
        qubit, k = divmod(rest, N_ANGLES)
        return GateOp(AXES[axis], (qubit,), 2 * math.pi * k / N_ANGLES)
    i, j = _pairs(n)[action - num_single_actions(n)]
    return GateOp("CNOT", (i, j))


def action_label(action: int, n: int) -> str:
    """Qubit-free family label, e.g. ``RX(pi)`` or ``CNOT``."""
    g = decode_action(action, n)
    if g.kind == "CNOT":
        return "CNOT"
    return format_program([g])[0].rsplit(" ", 1)[0]


class RewardMode(str, enum.Enum):
    SAMPLED = "sampled"
    EXACT = "exact"


class Outcome(str, enum.Enum):
    RUNNING = "running"
    WON = "won"
    LOST = "lost"


@dataclass(frozen=True)
class EnvConfig:
    n: int = 10
    shots: int = 10
    max_program_len: int = 25
    win_threshold: float = 0.8
    reward_mode: RewardMode = RewardMode.SAMPLED

    def __post_init__(self):
        object.__setattr__(self, "reward_mode", RewardMode(self.reward_mode))
        if self.shots < 1:
            raise ConfigurationError(f"shots must be >= 1, got {self.shots}")
        if self.max_program_len < 1:
            raise ConfigurationError(f"max_program_len must be >= 1, got {self.max_program_len}")
        if not 0 < self.win_threshold < 1:
            raise ConfigurationError(f"win_threshold must lie in (0, 1), got {self.win_threshold}")

    @property
    def num_actions(self) -> int:
        return num_actions(self.n)

    @property
    def obs_dim(self) -> int:
        return self.shots * self.n + problems.wtilde_length(self.n)


@dataclass
class Observation:
    B: np.ndarray
    wtilde: np.ndarray

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.B.ravel().astype(np.float64), self.wtilde])


def reward_from_samples(B, instance) -> float:
    """Mean normalized cost over the rows of a shots x n measurement matrix."""
    B = np.asarray(B)
    idx = B.astype(np.int64) @ (1 << np.arange(instance.n))
    return float(instance.normalized_table()[idx].mean())


def episode_score(rewards) -> float:
    if len(rewards) == 0:
        raise ValueError("episode score needs at least one reward")
    return float(max(rewards))


def observation_counts(B) -> np.ndarray:
    """Histogram of measured bitstrings over basis indices."""
    B = np.asarray(B)
    n = B.shape[1]
    idx = B.astype(np.int64) @ (1 << np.arange(n))
    return np.bincount(idx, minlength=2**n)


@dataclass
class EnvState:
    instance: problems.ProblemInstance
    state: StateVector
    program: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    step_rewards: list = field(default_factory=list)
    outcome: Outcome = Outcome.RUNNING

    @property
    def done(self) -> bool:
        return self.outcome is not Outcome.RUNNING


class ProgramEnv:
    """Gym-style wrapper: ``reset(instance)`` then ``step(action)`` until done.

    The generator passed in drives all measurement sampling, so identical
    seeds, instances and actions reproduce identical observations.
    """

    def __init__(self, cfg: EnvConfig | None = None, rng: np.random.Generator | None = None):
        self.cfg = cfg or EnvConfig()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.episode: EnvState | None = None
        self._wtilde = None

    @property
    def num_actions(self) -> int:
        return self.cfg.num_actions

    def reset(self, instance: problems.ProblemInstance) -> Observation:
        if instance.n != self.cfg.n:
            raise ConfigurationError(f"instance has n={instance.n}, environment expects n={self.cfg.n}")
        problems.extremes(instance)
        self.episode = EnvState(instance, init_zero(self.cfg.n))
        self._wtilde = problems.encode_wtilde(instance)
        idx = sample_indices(self.episode.state, self.cfg.shots, self.rng)
        return Observation(basis_bits(self.cfg.n)[idx].astype(np.uint8), self._wtilde)

    def step(self, action: int):
        """Returns ``(observation, reward, done, outcome)``."""
        ep = self.episode
        if ep is None or ep.done:
            raise UsageError("step() called on a finished or unstarted episode; call reset()")
        g = decode_action(action, self.cfg.n)
        apply_gate(ep.state, g)
        ep.program.append(g)
        ep.actions.append(int(action))

        idx = sample_indices(ep.state, self.cfg.shots, self.rng)
        table = ep.instance.normalized_table()
        if self.cfg.reward_mode is RewardMode.SAMPLED:
            reward = float(table[idx].mean())
        else:
            reward = float(np.clip(ep.state.probabilities() @ table, 0.0, 1.0))
        ep.step_rewards.append(reward)

        if reward > self.cfg.win_threshold:
            ep.outcome = Outcome.WON
        elif len(ep.program) >= self.cfg.max_program_len:
            ep.outcome = Outcome.LOST
        obs = Observation(basis_bits(self.cfg.n)[idx].astype(np.uint8), self._wtilde)
        return obs, reward, ep.done, ep.outcome


def episode_record(ep: EnvState, **extra) -> dict:
    """Episode-log line (see ``EPISODE_LOG_FIELDS``)."""
    rec = {
        "instance_seed": ep.instance.seed,
        "kind": ep.instance.kind.value,
        "n": ep.instance.n,
        "actions": list(ep.actions),
        "program_text": format_program(ep.program),
        "rewards": [float(r) for r in ep.step_rewards],
        "outcome": ep.outcome.value,
        "score": episode_score(ep.step_rewards),
    }
    rec.update(extra)
    return rec


EPISODE_LOG_FIELDS = ("instance_seed", "kind", "n", "actions", "program_text", "rewards", "outcome", "score")
