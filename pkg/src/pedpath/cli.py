"""Command-line entry point.

Subcommands:
  train    run PPO and write a checkpoint, curve CSV and run manifest
  eval     score a checkpoint on a scenario suite (CSV + SVG figures)
  compare  side-by-side learned planner vs social force baseline
  oracle   reward-optimal plans from the cross-entropy reference search

Exit codes: 0 success, 1 invalid input (config, checkpoint, budget),
2 non-finite training loss, 3 social-force non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import evaluation, plots, policy, training
from .config import ConfigError, config_hash, config_to_dict, load_config
from .rewards import total_reward
from .sfm import NonConvergence

METRICS_HEADER = ["scenario", "method", "total_length", "max_turn_deg",
                  "min_clearance", "left_fraction", "boundary_violations",
                  "total_reward"]


def _fmt(x) -> str:
    return repr(float(x))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pedpath",
        description="Pedestrian corridor path planning: training, evaluation "
                    "and baseline comparison.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--seed", type=int, help="override the run seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="SECTION.KEY=VALUE", help="config override (repeatable)")

    p = sub.add_parser("train", help="run PPO training")
    common(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a suite")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--suite", help="suite JSON (default: the canonical four cases)")

    p = sub.add_parser("compare", help="learned planner vs social force")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--suite")

    p = sub.add_parser("oracle", help="reference-optimizer plans for a suite")
    common(p)
    p.add_argument("--suite")
    p.add_argument("--budget", type=int, default=50_000,
                   help="reward evaluations per scenario")
    return parser


def _load_run_config(args):
    cfg = load_config(args.config, args.overrides)
    if args.seed is not None:
        cfg = load_config(args.config,
                          list(args.overrides) + [f"train.seed={args.seed}",
                                                  f"env.seed={args.seed}"])
    return cfg


def _out_dir(args, cfg) -> Path:
    out = Path(args.out if args.out else cfg.paths.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_suite(args, cfg):
    path = getattr(args, "suite", None) or (cfg.paths.suite or None)
    if path is None:
        return evaluation.canonical_suite()
    return evaluation.load_suite(path)


def _load_checkpoint(path: str):
    try:
        params, _ = policy.load_checkpoint(path)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot load checkpoint {path}: {e}") from e
    return params


def write_manifest(path, cfg, extra: dict) -> None:
    lines = {}
    for section, values in sorted(config_to_dict(cfg).items()):
        for key, value in sorted(values.items()):
            lines[f"{section}.{key}"] = value
    lines.update(extra)
    with open(path, "w") as f:
        for key in sorted(lines):
            f.write(f"{key}={lines[key]}\n")


def write_metrics_csv(path, rows) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_HEADER)
        for row in rows:
            m = row["metrics"]
            writer.writerow([
                row["scenario"], row["method"], _fmt(m.total_length),
                _fmt(m.max_turn_deg), _fmt(m.min_clearance),
                _fmt(m.left_fraction), m.boundary_violations,
                _fmt(row["total_reward"]),
            ])


def cmd_train(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args, cfg)
    result = training.train(cfg.train, cfg.env, cfg.rewards)
    ckpt = Path(cfg.paths.checkpoint) if cfg.paths.checkpoint else out / "checkpoint.bin"
    policy.save_checkpoint(ckpt, result.params, config_hash(cfg))
    training.write_curve_csv(out / "curve.csv", result.curve)
    write_manifest(out / "manifest.txt", cfg, {
        "build_id": config_hash(cfg),
        "params_hash": policy.params_hash(result.params),
        "episodes": result.curve[-1][0] if result.curve else 0,
    })
    return 0


def cmd_eval(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args, cfg)
    params = _load_checkpoint(args.checkpoint)
    suite = _load_suite(args, cfg)
    results = evaluation.evaluate_policy(params, suite, cfg.rewards)
    for row in results:
        row["method"] = "rl"
    write_metrics_csv(out / "metrics.csv", results)
    for (name, scenario), row in zip(suite, results):
        plots.render_scenario(out / f"scenario_{name}.svg", scenario,
                              plan=row["plan"], title=f"scenario {name}")
    return 0


def cmd_compare(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args, cfg)
    params = _load_checkpoint(args.checkpoint)
    suite = _load_suite(args, cfg)
    rows = evaluation.compare_sfm(suite, cfg.sfm, params, cfg.rewards)
    write_metrics_csv(out / "compare.csv", rows)
    by_name = {}
    for row in rows:
        by_name.setdefault(row["scenario"], {})[row["method"]] = row
    for name, pair in by_name.items():
        plots.render_scenario(
            out / f"compare_{name}.svg", pair["rl"]["scenario_obj"],
            plan=pair["rl"]["plan"], trajectory=pair["sfm"]["trajectory"],
            title=f"scenario {name}")
    return 0


def cmd_oracle(args) -> int:
    cfg = _load_run_config(args)
    out = _out_dir(args, cfg)
    suite = _load_suite(args, cfg)
    seed = args.seed if args.seed is not None else cfg.train.seed
    with open(out / "oracle_plans.csv", "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["scenario"] + [f"node_x{i}" for i in range(policy.ACT_DIM)]
                        + ["total_reward"])
        for name, scenario in suite:
            plan = evaluation.reference_optimize(scenario, cfg.rewards,
                                                 args.budget, seed=seed)
            reward = total_reward(scenario, plan, cfg.rewards).total
            writer.writerow([name] + [_fmt(v) for v in plan] + [_fmt(reward)])
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"train": cmd_train, "eval": cmd_eval,
                "compare": cmd_compare, "oracle": cmd_oracle}
    try:
        return handlers[args.command](args)
    except (ConfigError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except training.NonFiniteLossError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NonConvergence as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
