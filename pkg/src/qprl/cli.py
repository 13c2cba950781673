"""Command-line entry point: ``qprl <subcommand> [flags]``.

Every run prints one JSON line summarizing what it did. Exit status is 0 on
success, 1 for usage errors and 2 for runtime failures.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import harness, policy, ppo, problems, quil
from .env import EnvConfig
from .qaoa import QaoaConfig
from .transpiler import transpile


class UsageExit(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageExit(f"{self.prog}: error: {message}")


def _default_seed() -> int:
    return int(os.environ.get("QPRL_SEED", "0"))


def _add_env_flags(p):
    p.add_argument("--shots", type=int, default=10, help="measurements per step")
    p.add_argument("--max-len", type=int, default=25, help="maximum uncompiled program length")
    p.add_argument("--threshold", type=float, default=0.8, help="win when the reward exceeds this")
    p.add_argument("--reward-mode", choices=["sampled", "exact"], default="sampled",
                   help="reward from shots or from the exact expectation")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="qprl", description=__doc__.splitlines()[0], formatter_class=fmt)
    parser.add_argument("--config", help="optional key=value file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-data", help="generate instance files", formatter_class=fmt)
    p.add_argument("--kinds", default="maxcut,maxqp,qubo", help="comma-separated problem kinds")
    p.add_argument("--n", type=int, default=10, help="variables per instance")
    p.add_argument("--train-n", type=int, default=100, help="training instances per kind")
    p.add_argument("--val-n", type=int, default=24, help="validation instances per kind")
    p.add_argument("--test-n", type=int, default=6, help="test instances per kind")
    p.add_argument("--seed", type=int, default=None, help="root seed (falls back to $QPRL_SEED, then 0)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("train", help="train a PPO agent", formatter_class=fmt)
    p.add_argument("--data", required=True, help="directory with train.jsonl (and val.jsonl) or a .jsonl file")
    p.add_argument("--steps", type=int, default=512, help="total environment steps")
    p.add_argument("--n-steps", type=int, default=512, help="rollout length per update")
    p.add_argument("--n-envs", type=int, default=1, help="parallel environments per rollout")
    p.add_argument("--lr", type=float, default=2.5e-4, help="initial learning rate (decays linearly)")
    p.add_argument("--gae-lambda", type=float, default=0.95, help="advantage estimation coefficient")
    p.add_argument("--discount", type=float, default=0.99, help="return discount factor")
    p.add_argument("--clip", type=float, default=0.2, help="PPO ratio clip range")
    p.add_argument("--epochs", type=int, default=4, help="passes over each rollout")
    p.add_argument("--minibatch", type=int, default=64, help="minibatch size")
    p.add_argument("--reward-signal", choices=["increment", "absolute"], default="increment",
                   help="train on reward differences or on the raw per-step reward")
    p.add_argument("--eval-every", type=int, default=10, help="updates between validation runs")
    p.add_argument("--checkpoint-every", type=int, default=0, help="updates between periodic checkpoints (0: off)")
    _add_env_flags(p)
    p.add_argument("--seed", type=int, default=None, help="root seed (falls back to $QPRL_SEED, then 0)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("eval", help="evaluate a trained or untrained agent", formatter_class=fmt)
    who = p.add_mutually_exclusive_group(required=True)
    who.add_argument("--checkpoint", help="checkpoint file from train")
    who.add_argument("--untrained", action="store_true", help="uniform-random policy")
    p.add_argument("--data", required=True, help="instance .jsonl file or a directory holding test.jsonl")
    _add_env_flags(p)
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--seed", type=int, default=None, help="root seed (falls back to $QPRL_SEED, then 0)")
    p.add_argument("--out", required=True, help="episode records (.jsonl)")

    p = sub.add_parser("qaoa", help="p=1 QAOA grid-search baseline", formatter_class=fmt)
    p.add_argument("--data", required=True, help="instance .jsonl file or a directory holding test.jsonl")
    p.add_argument("--bins", type=int, default=20, help="grid points per angle on [0, 2pi)")
    p.add_argument("--shots", type=int, default=10, help="samples for the final solution quality")
    p.add_argument("--threshold", type=float, default=0.8, help="outcome label threshold")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    p.add_argument("--seed", type=int, default=None, help="root seed (falls back to $QPRL_SEED, then 0)")
    p.add_argument("--out", required=True, help="records (.jsonl)")

    p = sub.add_parser("transpile", help="compile programs to CZ/RZ/RX(+-pi/2)", formatter_class=fmt)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--program", help="program text (';' or newline separated) or a file containing it")
    src.add_argument("--episodes", help="episode records (.jsonl)")
    p.add_argument("--out", required=True, help="output .jsonl")

    p = sub.add_parser("report", help="CSV tables from episode records", formatter_class=fmt)
    p.add_argument("--records", required=True, nargs="+", help="record files (.jsonl)")
    p.add_argument("--n", type=int, default=None, help="qubit count (read from the records when omitted)")
    p.add_argument("--out", required=True, help="output directory")
    parser.commands = sub.choices
    return parser


def _read_config(path) -> dict:
    out = {}
    with open(path) as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageExit(f"config line is not key=value: {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def parse_args(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in parser.commands), None)
    if known.config and command is not None:
        # file values become defaults, so explicit flags still win
        sub = parser.commands[command]
        actions = {a.dest: a for a in sub._actions}
        defaults = {}
        for k, v in _read_config(known.config).items():
            if k not in actions:
                raise UsageExit(f"unknown config key {k!r} for {command}")
            action = actions[k]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[k] = v.lower() in ("1", "true", "yes")
            else:
                defaults[k] = action.type(v) if action.type else v
            action.required = False
        sub.set_defaults(**defaults)
    args = parser.parse_args(argv)
    if hasattr(args, "seed") and args.seed is None:
        args.seed = _default_seed()
    return args


def _instances_path(data, split="test"):
    return os.path.join(data, f"{split}.jsonl") if os.path.isdir(data) else data


def _env_cfg(args, n) -> EnvConfig:
    return EnvConfig(n=n, shots=args.shots, max_program_len=args.max_len,
                     win_threshold=args.threshold, reward_mode=args.reward_mode)


def _n_of(instances) -> int:
    ns = {inst.n for inst in instances}
    if len(ns) != 1:
        raise ValueError(f"instances must share one size, found {sorted(ns)}")
    return ns.pop()


def cmd_gen_data(args) -> dict:
    kinds = tuple(k.strip() for k in args.kinds.split(",") if k.strip())
    spec = harness.DatasetSpec(kinds=kinds, counts={"train": args.train_n, "val": args.val_n, "test": args.test_n},
                               root_seed=args.seed, n=args.n)
    paths = harness.gen_dataset(spec, args.out)
    return {"files": paths, "per_kind": spec.counts, "kinds": [k.value for k in spec.kinds]}


def cmd_train(args) -> dict:
    train_path = _instances_path(args.data, "train")
    instances = problems.load_instances(train_path)
    val_path = os.path.join(args.data, "val.jsonl") if os.path.isdir(args.data) else None
    val = problems.load_instances(val_path) if val_path and os.path.exists(val_path) else None
    n = _n_of(instances)
    env_cfg = _env_cfg(args, n)
    cfg = ppo.PPOConfig(n_steps=args.n_steps, n_envs=args.n_envs, gae_lambda=args.gae_lambda,
                        discount=args.discount, clip=args.clip, lr_initial=args.lr,
                        epochs_per_update=args.epochs, minibatch_size=args.minibatch,
                        reward_signal=args.reward_signal, total_steps=args.steps)
    os.makedirs(args.out, exist_ok=True)
    res = ppo.train(instances, env_cfg, cfg, args.seed, val_instances=val, eval_every=args.eval_every,
                    checkpoint_dir=args.out, checkpoint_every=args.checkpoint_every or None)
    curve_path = os.path.join(args.out, "curve.csv")
    with open(curve_path, "w") as f:
        f.write(",".join(ppo.CURVE_COLUMNS) + "\n")
        for row in res.curve:
            f.write(",".join(repr(row[c]) if c != "steps" else str(row[c]) for c in ppo.CURVE_COLUMNS) + "\n")
    final = os.path.join(args.out, "checkpoint_final.bin")
    policy.save_checkpoint(final, res.params, {"steps": res.curve[-1]["steps"], "n": n})
    out = {"curve": curve_path, "checkpoint": final, "updates": len(res.curve),
           "steps": res.curve[-1]["steps"], "final_mean_ep_reward": res.curve[-1]["mean_ep_reward"],
           "periodic_checkpoints": res.checkpoints}
    if res.best_params is not None:
        best = os.path.join(args.out, "checkpoint_best.bin")
        policy.save_checkpoint(best, res.best_params, {"val_score": res.best_val_score, "n": n})
        out["best_checkpoint"] = best
        out["best_val_score"] = res.best_val_score
    with open(os.path.join(args.out, "train_config.json"), "w") as f:
        json.dump({"ppo": asdict(cfg), "env": {**asdict(env_cfg), "reward_mode": env_cfg.reward_mode.value},
                   "seed": args.seed, "data": train_path}, f, indent=2, sort_keys=True)
        f.write("\n")
    return out


def _summary_line(records) -> dict:
    out = {}
    for (agent, kind), s in harness.summarize(records).items():
        out[f"{agent}/{kind}"] = {"count": s["count"], "mean": s["mean"], "std": s["std"]}
    return out


def cmd_eval(args) -> dict:
    instances = problems.load_instances(_instances_path(args.data))
    n = _n_of(instances)
    env_cfg = _env_cfg(args, n)
    if args.untrained:
        agent = ("untrained", None)
    else:
        params, _ = policy.load_checkpoint(args.checkpoint)
        if params.obs_dim != env_cfg.obs_dim or params.num_actions != env_cfg.num_actions:
            raise ValueError(f"checkpoint shape ({params.obs_dim}, {params.num_actions}) does not fit n={n}, "
                             f"shots={env_cfg.shots}")
        agent = ("trained", params)
    records = harness.run_eval([agent], instances, env_cfg, args.seed, workers=args.workers)
    harness.save_records(args.out, records)
    return {"records": args.out, "summary": _summary_line(records)}


def cmd_qaoa(args) -> dict:
    instances = problems.load_instances(_instances_path(args.data))
    n = _n_of(instances)
    env_cfg = EnvConfig(n=n, shots=args.shots, win_threshold=args.threshold)
    records = harness.run_eval([("qaoa", None)], instances, env_cfg, args.seed,
                               qaoa_cfg=QaoaConfig(bins=args.bins, shots=args.shots), workers=args.workers)
    harness.save_records(args.out, records)
    return {"records": args.out, "summary": _summary_line(records)}


def cmd_transpile(args) -> dict:
    if args.program is not None:
        text = open(args.program).read() if os.path.isfile(args.program) else args.program
        programs = [quil.parse_program(text)]
    else:
        programs = [[quil.parse_gate(t) for t in rec["program_text"]] for rec in harness.load_records(args.episodes)]
    lengths = []
    with open(args.out, "w") as f:
        for prog in programs:
            native = transpile(prog)
            lengths.append(len(native))
            f.write(json.dumps({"source": quil.format_program(prog), "native": native.text(),
                                "uncompiled_len": len(prog), "compiled_len": len(native)}) + "\n")
    return {"out": args.out, "programs": len(programs), "compiled_lengths": lengths}


def cmd_report(args) -> dict:
    records = [r for path in args.records for r in harness.load_records(path)]
    n = args.n
    if n is None:
        ns = {r["n"] for r in records}
        if len(ns) != 1:
            raise ValueError(f"records mix qubit counts {sorted(ns)}; pass --n")
        n = ns.pop()
    manifest = harness.emit_report(records, args.out, n)
    return {"out": args.out, "files": {k: v["rows"] for k, v in manifest["files"].items()}}


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "qaoa": cmd_qaoa,
    "transpile": cmd_transpile,
    "report": cmd_report,
}


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except UsageExit as e:
        print(str(e), file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        result = COMMANDS[args.command](args)
    except UsageExit as e:
        print(str(e), file=sys.stderr)
        return 1
    except Exception as e:  # noqa: BLE001 - surfaced as a runtime error
        print(f"qprl {args.command}: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    config = {k: v for k, v in vars(args).items() if k != "command"}
    print(json.dumps({"command": args.command, "ok": True, "config": config, "result": result},
                     default=_jsonable, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
