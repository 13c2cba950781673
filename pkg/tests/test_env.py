import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qprl import problems
from qprl.env import (
    EnvConfig, Outcome, ProgramEnv, RewardMode, action_label, decode_action, episode_record,
    episode_score, num_actions, observation_counts, reward_from_samples,
)
from qprl.errors import ConfigurationError, UsageError
from qprl.statevec import GateOp

REFERENCE_TRACE = [0.497569, 0.503288, 0.691885, 0.687903, 0.676666, 0.669175, 0.661683,
            0.650446, 0.654192, 0.713833, 0.723166, 0.683561, 0.929027]


def single_edge(n=10):
    w = np.zeros((n, n))
    w[0, 1] = w[1, 0] = 1.0
    return problems.ProblemInstance("maxcut", w, seed=0)


class TestActions:
    def test_counts(self):
        assert num_actions(10) == 285
        assert num_actions(6) == 159

    def test_origin(self):
        assert decode_action(0, 10) == GateOp("RX", (0,), 0.0)

    def test_first_cnot(self):
        assert decode_action(240, 10) == GateOp("CNOT", (0, 1))

    def test_last_cnot(self):
        assert decode_action(284, 10) == GateOp("CNOT", (8, 9))

    def test_layout(self):
        # axis block, then qubit, then angle index
        g = decode_action(80 + 8 * 3 + 5, 10)
        assert g.kind == "RY" and g.qubits == (3,)
        assert g.angle == pytest.approx(2 * math.pi * 5 / 8)

    @pytest.mark.parametrize("a", [-1, 285])
    def test_out_of_range(self, a):
        with pytest.raises(ValueError):
            decode_action(a, 10)

    def test_bijective(self):
        seen = {decode_action(a, 10) for a in range(285)}
        assert len(seen) == 285

    def test_labels(self):
        assert action_label(4, 10) == "RX(pi)"
        assert action_label(240, 10) == "CNOT"
        assert action_label(160, 10) == "RZ(0)"


class TestConfig:
    def test_defaults(self):
        cfg = EnvConfig()
        assert (cfg.n, cfg.shots, cfg.max_program_len, cfg.win_threshold) == (10, 10, 25, 0.8)
        assert cfg.obs_dim == 155

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            EnvConfig(shots=0)
        with pytest.raises(ConfigurationError):
            EnvConfig(win_threshold=1.5)


class TestRewards:
    def test_all_at_max(self):
        inst = problems.generate("maxqp", 4, 1)
        best = problems.basis_bits(4)[np.argmax(inst.cost_table())]
        assert reward_from_samples(np.tile(best, (10, 1)), inst) == 1.0

    def test_all_at_min(self):
        inst = problems.generate("maxqp", 4, 1)
        worst = problems.basis_bits(4)[np.argmin(inst.cost_table())]
        assert reward_from_samples(np.tile(worst, (10, 1)), inst) == 0.0

    def test_half_and_half(self):
        inst = problems.generate("qubo", 4, 1)
        bits = problems.basis_bits(4)
        B = np.vstack([np.tile(bits[np.argmax(inst.cost_table())], (5, 1)),
                       np.tile(bits[np.argmin(inst.cost_table())], (5, 1))])
        assert reward_from_samples(B, inst) == 0.5

    def test_episode_score(self):
        assert episode_score([0.2, 0.9, 0.4]) == 0.9
        assert episode_score([0.5]) == 0.5
        assert episode_score(REFERENCE_TRACE) == 0.929027
        with pytest.raises(ValueError):
            episode_score([])

    def test_counts(self):
        c = observation_counts(np.zeros((10, 4), dtype=np.uint8))
        assert c[0] == 10 and c.sum() == 10 and c.size == 16


class TestEnv:
    def test_reset_observes_zeros(self):
        env = ProgramEnv(rng=np.random.default_rng(0))
        obs = env.reset(problems.generate("qubo", 10, 0))
        assert obs.B.shape == (10, 10) and not obs.B.any()
        assert obs.flatten().shape == (155,)

    def test_reset_dimension_mismatch(self):
        with pytest.raises(ConfigurationError):
            ProgramEnv(EnvConfig(n=6)).reset(problems.generate("qubo", 10, 0))

    def test_single_edge_win(self):
        env = ProgramEnv(rng=np.random.default_rng(0))
        env.reset(single_edge())
        obs, r, done, outcome = env.step(4)  # RX(pi) on qubit 0
        expected_row = np.array([1, 0, 0, 0, 0, 0, 0, 0, 0, 0])
        assert (obs.B == expected_row).all()
        assert r == 1.0 and done and outcome is Outcome.WON

    def test_identity_rotations_lose(self):
        inst = problems.generate("maxcut", 10, 3)
        env = ProgramEnv(rng=np.random.default_rng(0))
        env.reset(inst)
        identity = 160  # RZ(0) on qubit 0
        for t in range(25):
            _, r, done, outcome = env.step(identity)
            assert r == 0.0
            assert done == (t == 24)
        assert outcome is Outcome.LOST
        assert len(env.episode.program) == 25
        with pytest.raises(UsageError):
            env.step(identity)

    def test_step_before_reset(self):
        with pytest.raises(UsageError):
            ProgramEnv().step(0)

    def test_exact_mode(self):
        env = ProgramEnv(EnvConfig(n=4, reward_mode=RewardMode.EXACT), np.random.default_rng(0))
        inst = problems.generate("maxqp", 4, 2)
        env.reset(inst)
        _, r, _, _ = env.step(8 * 2 + 2)  # RX(pi/2) on qubit 2
        expect = float(env.episode.state.probabilities() @ inst.normalized_table())
        assert r == expect

    @given(st.integers(0, 2**31), st.lists(st.integers(0, 284), min_size=30, max_size=30))
    def test_reward_bounds_and_termination(self, seed, actions):
        env = ProgramEnv(rng=np.random.default_rng(seed))
        env.reset(problems.generate("maxqp", 10, seed % 50))
        for a in actions:
            _, r, done, outcome = env.step(a)
            assert 0.0 <= r <= 1.0
            assert (outcome is Outcome.WON) == (r > 0.8)
            if done:
                break
        assert len(env.episode.actions) <= 25

    def test_deterministic(self):
        inst = problems.generate("qubo", 10, 5)
        runs = []
        for _ in range(2):
            env = ProgramEnv(rng=np.random.default_rng(9))
            env.reset(inst)
            runs.append([env.step(a)[1] for a in (3, 100, 250, 7)])
        assert runs[0] == runs[1]

    def test_record(self):
        env = ProgramEnv(rng=np.random.default_rng(0))
        env.reset(single_edge())
        env.step(4)
        rec = episode_record(env.episode, agent="x")
        assert rec["program_text"] == ["RX(pi) 0"]
        assert rec["outcome"] == "won" and rec["score"] == 1.0 and rec["agent"] == "x"
