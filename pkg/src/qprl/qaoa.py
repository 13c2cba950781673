"""Depth-one QAOA benchmark with exhaustive angle search."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import problems
from .quil import format_program
from .statevec import (
    GateOp, StateVector, apply_gate, apply_phase_zz, init_plus, sample_indices,
)
from .transpiler import transpile


@dataclass(frozen=True)
class QaoaConfig:
    bins: int = 20
    shots: int = 10

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError(f"bins must be >= 2, got {self.bins}")
        if self.shots < 1:
            raise ValueError(f"shots must be >= 1, got {self.shots}")


@dataclass
class QaoaResult:
    gamma_star: float
    beta_star: float
    gamma_index: int
    beta_index: int
    exact_expectation: float
    program: list = field(default_factory=list)
    sampled_quality: float | None = None
    grid: np.ndarray | None = field(default=None, repr=False)

    @property
    def uncompiled_len(self) -> int:
        return len(self.program)


def grid_points(bins: int) -> np.ndarray:
    """Left edges of ``bins`` equal bins on ``[0, 2 pi)``."""
    return 2 * math.pi * np.arange(bins) / bins


def _apply_mixer(state: StateVector, beta: float) -> StateVector:
    for q in range(state.n):
        apply_gate(state, GateOp("RX", (q,), 2 * beta))
    return state


def build_qaoa_state(instance: problems.ProblemInstance, gamma: float, beta: float) -> StateVector:
    """``exp(-i beta sum_j X_j) exp(-i gamma C) |+>^n``."""
    state = init_plus(instance.n)
    apply_phase_zz(state, instance, gamma)
    return _apply_mixer(state, beta)


def normalized_expectation(state: StateVector, instance: problems.ProblemInstance) -> float:
    m, M = problems.extremes(instance)
    if M == m:
        return 1.0
    # clip the last-ulp excess that summation can leave above 1
    return float(np.clip(state.probabilities() @ instance.normalized_table(), 0.0, 1.0))


def grid_search(instance: problems.ProblemInstance, cfg: QaoaConfig | None = None) -> QaoaResult:
    """Best grid cell by exact normalized expectation; ties go to the smallest (gamma, beta) index."""
    cfg = cfg or QaoaConfig()
    pts = grid_points(cfg.bins)
    grid = np.empty((cfg.bins, cfg.bins))
    phased = init_plus(instance.n)
    for i, gamma in enumerate(pts):
        base = apply_phase_zz(init_plus(instance.n), instance, gamma)
        for j, beta in enumerate(pts):
            phased.amps[:] = base.amps
            grid[i, j] = normalized_expectation(_apply_mixer(phased, beta), instance)
    # argmax returns the first maximum in row-major order
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    gamma, beta = float(pts[i]), float(pts[j])
    return QaoaResult(gamma, beta, int(i), int(j), float(grid[i, j]),
                      program=qaoa_program(instance, gamma, beta), grid=grid)


def sampled_quality(instance, gamma: float, beta: float, cfg: QaoaConfig | None, rng: np.random.Generator) -> float:
    """Mean normalized cost of ``cfg.shots`` samples; same estimator as the agent's reward."""
    cfg = cfg or QaoaConfig()
    idx = sample_indices(build_qaoa_state(instance, gamma, beta), cfg.shots, rng)
    return float(instance.normalized_table()[idx].mean())


def qaoa_program(instance: problems.ProblemInstance, gamma: float, beta: float) -> list[GateOp]:
    """Explicit circuit: H layer, RZ for linear terms, CNOT-RZ-CNOT per coupling, RX(2 beta) layer.

    The constant part of the cost only contributes a global phase and is dropped.
    """
    n = instance.n
    _, lin, coupling = problems.ising_coefficients(instance)
    prog = [GateOp("H", (q,)) for q in range(n)]
    for q in range(n):
        if lin[q] != 0:
            prog.append(GateOp("RZ", (q,), 2 * gamma * lin[q]))
    for i in range(n):
        for j in range(i + 1, n):
            if coupling[i, j] != 0:
                prog += [GateOp("CNOT", (i, j)), GateOp("RZ", (j,), 2 * gamma * coupling[i, j]), GateOp("CNOT", (i, j))]
    prog += [GateOp("RX", (q,), 2 * beta) for q in range(n)]
    return prog


def run_qaoa(instance, cfg: QaoaConfig | None, rng: np.random.Generator) -> QaoaResult:
    cfg = cfg or QaoaConfig()
    problems.extremes(instance)
    res = grid_search(instance, cfg)
    res.sampled_quality = sampled_quality(instance, res.gamma_star, res.beta_star, cfg, rng)
    return res


def qaoa_record(instance, res: QaoaResult, win_threshold: float = 0.8) -> dict:
    """Episode-log line for a QAOA run; the score is the final-state value."""
    return {
        "instance_seed": instance.seed,
        "kind": instance.kind.value,
        "n": instance.n,
        "actions": [],
        "program_text": format_program(res.program),
        "rewards": [res.sampled_quality],
        "outcome": "won" if res.sampled_quality > win_threshold else "lost",
        "score": res.sampled_quality,
        "agent": "qaoa",
        "gamma": res.gamma_star,
        "beta": res.beta_star,
        "exact_expectation": res.exact_expectation,
        "instructions": res.uncompiled_len,
        "compiled_instructions": len(transpile(res.program)),
    }
