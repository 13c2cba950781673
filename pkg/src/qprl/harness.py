"""Datasets, paired evaluation of agents and baselines, and report tables."""
from __future__ import annotations

import csv
import json
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import problems
from .env import EnvConfig, action_label, num_actions
from .ppo import run_episode
from .qaoa import QaoaConfig, qaoa_record, run_qaoa

SPLITS = ("train", "val", "test")
_SPLIT_STRIDE = 2**32
SCORE_BINS = 50


@dataclass(frozen=True)
class DatasetSpec:
    """How many instances of each kind go in each split.

    ``counts`` are per kind. Instance seeds for split ``s`` start at
    ``root_seed + s * 2**32`` so splits never share a ``(kind, seed)``.
    """

    kinds: tuple = ("maxcut", "maxqp", "qubo")
    counts: dict = field(default_factory=lambda: {"train": 100, "val": 24, "test": 6})
    root_seed: int = 0
    n: int = 10

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(problems.ProblemKind.parse(k) for k in self.kinds))
        if not self.kinds:
            raise ValueError("at least one problem kind is required")
        for split, c in self.counts.items():
            if split not in SPLITS:
                raise ValueError(f"unknown split {split!r}")
            if c < 1:
                raise ValueError(f"split {split!r} needs at least one instance, got {c}")
            if c > _SPLIT_STRIDE:
                raise ValueError(f"split {split!r} is too large")

    @classmethod
    def full_scale(cls, root_seed: int = 0) -> "DatasetSpec":
        """50k training instances per kind; 12k validation and 3k test in total."""
        return cls(counts={"train": 50_000, "val": 4_000, "test": 1_000}, root_seed=root_seed)

    def seed_for(self, split: str, index: int) -> int:
        return (self.root_seed + SPLITS.index(split) * _SPLIT_STRIDE + index) % 2**64


def make_split(spec: DatasetSpec, split: str) -> list[problems.ProblemInstance]:
    """Instances of one split with extremes filled in; mixed kinds are shuffled by ``root_seed``."""
    count = spec.counts[split]
    out = []
    for kind in spec.kinds:
        for i in range(count):
            inst = problems.generate(kind, spec.n, spec.seed_for(split, i))
            problems.extremes(inst)
            out.append(inst)
    if len(spec.kinds) > 1:
        order = np.random.default_rng([spec.root_seed % 2**64, SPLITS.index(split)]).permutation(len(out))
        out = [out[i] for i in order]
    return out


def gen_dataset(spec: DatasetSpec, out_dir) -> dict:
    """Write ``<split>.jsonl`` for every split in ``spec.counts``; returns split -> path."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    for split in SPLITS:
        if split in spec.counts:
            path = os.path.join(out_dir, f"{split}.jsonl")
            problems.save_instances(path, make_split(spec, split))
            paths[split] = path
    return paths


# -- evaluation -----------------------------------------------------------------


def _agent_job(args):
    tag, params, inst, env_cfg, qaoa_cfg, seed, index = args
    rng = np.random.default_rng([seed, index])
    if tag == "qaoa":
        rec = qaoa_record(inst, run_qaoa(inst, qaoa_cfg, rng), env_cfg.win_threshold)
    else:
        rec = run_episode(params, inst, env_cfg, rng)
    rec["agent"] = tag
    rec["index"] = index
    return rec


def run_eval(agents, instances, env_cfg: EnvConfig, seed: int, qaoa_cfg: QaoaConfig | None = None,
             workers: int = 1) -> list[dict]:
    """One episode (or QAOA run) per instance per agent.

    ``agents`` is a list of ``(tag, params)`` pairs with tag ``trained``,
    ``untrained`` (params ``None``) or ``qaoa``. Every agent sees the same
    instances in the same order, and instance ``i`` always draws from the
    generator seeded ``[seed, i]``, so results do not depend on ``workers``.
    """
    qaoa_cfg = qaoa_cfg or QaoaConfig(shots=env_cfg.shots)
    jobs = [(tag, params, inst, env_cfg, qaoa_cfg, seed, i)
            for tag, params in agents for i, inst in enumerate(instances)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(_agent_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return [_agent_job(j) for j in jobs]


def action_frequencies(records, n: int) -> dict:
    """Normalized counts per action id and per gate family (``RX(pi)``, ``CNOT``, ...)."""
    counts = np.zeros(num_actions(n), dtype=np.int64)
    for rec in records:
        for a in rec["actions"]:
            counts[a] += 1
    total = int(counts.sum())
    if total == 0:
        raise ValueError("no actions in the given records")
    groups = Counter()
    for a in range(counts.size):
        groups[action_label(a, n)] += int(counts[a])
    return {
        "total": total,
        "counts": counts,
        "frequencies": counts / total,
        "groups": {k: v / total for k, v in groups.items()},
        "group_counts": dict(groups),
    }


def _groups(records):
    """Records bucketed by (agent, kind), in first-seen order."""
    out = {}
    for r in records:
        out.setdefault((r["agent"], r["kind"]), []).append(r)
    return out


def summarize(records, n: int | None = None) -> dict:
    """Per (agent, kind) score statistics and histograms, all derived from ``records``."""
    summary = {}
    edges = np.linspace(0.0, 1.0, SCORE_BINS + 1)
    for (agent, kind), recs in _groups(records).items():
        scores = np.array([r["score"] for r in recs])
        lengths = np.array([r["instructions"] for r in recs], dtype=np.int64)
        hist, _ = np.histogram(scores, bins=edges)
        entry = {
            "count": len(recs),
            "mean": float(scores.mean()),
            "std": float(scores.std()),
            "score_hist": hist,
            "instructions_hist": dict(sorted(Counter(lengths.tolist()).items())),
        }
        if n is not None and any(r["actions"] for r in recs):
            entry["actions"] = action_frequencies(recs, n)
        summary[(agent, kind)] = entry
    return summary


def _fmt(x) -> str:
    return repr(float(x))


def emit_report(records, out_dir, n: int) -> dict:
    """Write plot-ready CSV tables plus ``manifest.json``; returns the manifest.

    Output depends only on ``records``, so re-emitting gives identical bytes.
    """
    os.makedirs(out_dir, exist_ok=True)
    summary = summarize(records, n)
    tables = {}

    tables["scores.csv"] = (["agent", "kind", "score"],
                            [[r["agent"], r["kind"], _fmt(r["score"])] for r in records])
    tables["lengths.csv"] = (["agent", "kind", "instructions", "compiled_instructions"],
                             [[r["agent"], r["kind"], r["instructions"], r.get("compiled_instructions", "")]
                              for r in records])
    tables["summary.csv"] = (["agent", "kind", "count", "mean", "std"],
                             [[a, k, s["count"], _fmt(s["mean"]), _fmt(s["std"])] for (a, k), s in summary.items()])
    edges = np.linspace(0.0, 1.0, SCORE_BINS + 1)
    tables["score_hist.csv"] = (["agent", "kind", "bin_lo", "bin_hi", "count"],
                                [[a, k, _fmt(edges[b]), _fmt(edges[b + 1]), int(c)]
                                 for (a, k), s in summary.items() for b, c in enumerate(s["score_hist"])])

    by_agent = {}
    for r in records:
        if r["actions"]:
            by_agent.setdefault(r["agent"], []).append(r)
    freq_rows, group_rows = [], []
    for agent, recs in by_agent.items():
        fr = action_frequencies(recs, n)
        for a in range(fr["counts"].size):
            freq_rows.append([agent, a, action_label(a, n), int(fr["counts"][a]), _fmt(fr["frequencies"][a])])
        for label in sorted(fr["groups"]):
            group_rows.append([agent, label, fr["group_counts"][label], _fmt(fr["groups"][label])])
    tables["frequencies.csv"] = (["agent", "action", "label", "count", "frequency"], freq_rows)
    tables["action_groups.csv"] = (["agent", "label", "count", "frequency"], group_rows)

    manifest = {"files": {}}
    for name, (header, rows) in tables.items():
        with open(os.path.join(out_dir, name), "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        manifest["files"][name] = {"rows": len(rows), "columns": header}
    with open(os.path.join(out_dir, "manifest.json"), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def save_records(path, records) -> None:
    with open(path, "w") as f:
        for r in records:
            f.write(json.dumps(r) + "\n")


def load_records(path) -> list[dict]:
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]
