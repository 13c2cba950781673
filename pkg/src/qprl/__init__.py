"""Reinforcement-learning synthesis of short quantum programs for MaxCut, MaxQP and QUBO."""
from .env import EnvConfig, Observation, ProgramEnv, decode_action, episode_score, num_actions
from .policy import PolicyParams, init_params, load_checkpoint, save_checkpoint
from .ppo import PPOConfig, evaluate, train
from .problems import ProblemInstance, ProblemKind, generate
from .qaoa import QaoaConfig, grid_search, run_qaoa
from .statevec import GateOp, StateVector, apply_gate, init_zero
from .transpiler import transpile, verify_equivalence

__version__ = "0.1.0"

__all__ = [
    "EnvConfig", "Observation", "ProgramEnv", "decode_action", "episode_score", "num_actions",
    "PolicyParams", "init_params", "load_checkpoint", "save_checkpoint",
    "PPOConfig", "evaluate", "train",
    "ProblemInstance", "ProblemKind", "generate",
    "QaoaConfig", "grid_search", "run_qaoa",
    "GateOp", "StateVector", "apply_gate", "init_zero",
    "transpile", "verify_equivalence",
]
