"""Command-line entry point.

Subcommands: train, eval, sweep-b, compare-bo, render, baseline-grid,
baseline-bo.  Exit codes: 0 success, 2 configuration error, 3 numerical
failure, 4 I/O failure.  All artifacts are CSV (UTF-8, header row preceded
by a config-hash comment), 8-bit grayscale PNG, or versioned checkpoint
binaries; reruns with identical config and seeds reproduce them
byte-identically.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ..agents import bo_run, grid_search_1d
from ..chain import LatentDynamics, propagate, tl_reference
from ..env import observation_normalizers
from ..errors import ConfigurationError, GridMismatchError, MeasurementError, NumericalError
from ..pulse import DispersionCoeffs
from .config import ExperimentConfig, load_config
from .emit import write_csv
from .evaluate import compare_bo_controls, evaluate_policy, make_policy, render_episode, sweep_b
from .train import Trainer

__all__ = ["main", "build_parser"]


def _parse_b_list(text: str):
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigurationError(f"bad --b value {text!r}: {exc}") from None
    if not values:
        raise ConfigurationError("--b needs at least one value")
    return values


def _load(args) -> ExperimentConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = int(args.seed)
    if args.out is not None:
        overrides["out_dir"] = str(args.out)
    return load_config(args.config, overrides=overrides)


def _policy_source(args, default="scripted:center"):
    if args.checkpoint is None:
        return default
    return args.checkpoint


def _chain_objective(config: ExperimentConfig, b: float):
    chain = config.chain_config()
    dyn = LatentDynamics(b_integral=float(b), gain=chain.gain)
    ref = tl_reference(chain)

    def on_psi(psi) -> float:
        field = propagate(DispersionCoeffs(*np.asarray(psi, dtype=float)), dyn, chain)
        return float(np.max(np.abs(field.amplitude) ** 2) / ref)

    return on_psi


def cmd_train(args) -> int:
    config = _load(args)
    trainer = Trainer(config)
    result = trainer.run(resume_from=args.checkpoint)
    print(f"trained {result.steps} steps, {result.episodes} episodes")
    print(f"final checkpoint: {result.final_checkpoint}")
    return 0


def cmd_eval(args) -> int:
    config = _load(args)
    if args.checkpoint is None:
        raise ConfigurationError("eval needs --checkpoint (path or scripted:<name>)")
    policy = make_policy(args.checkpoint, config)
    b_values = _parse_b_list(args.b) if args.b else None
    report = evaluate_policy(policy, config, b_values=b_values, episodes=args.episodes)
    out = config.out_dir
    header = ["b_integral", "mean", "std", "min", "max"] + [
        f"success_{t:.2f}" for t in report.thresholds
    ]
    write_csv(out / "eval_summary.csv", header, report.summary_rows(), config.hash)
    write_csv(
        out / "eval_episodes.csv",
        ["b_integral", "episode", "seed", "max_ratio"],
        report.episode_rows(),
        config.hash,
    )
    for b in report.b_values:
        s = report.stats(b)
        print(f"B={b}: mean={s['mean']:.4f} std={s['std']:.4f}")
    return 0


def cmd_sweep_b(args) -> int:
    config = _load(args)
    policy = make_policy(_policy_source(args), config)
    if not args.b:
        raise ConfigurationError("sweep-b needs --b with a comma-separated grid")
    rows, _ = sweep_b(policy, config, _parse_b_list(args.b), episodes=args.episodes)
    path = write_csv(
        config.out_dir / "sweep_b.csv", ["b_integral", "mean", "std"], rows, config.hash
    )
    print(f"wrote {path}")
    return 0


def cmd_compare_bo(args) -> int:
    config = _load(args)
    if args.checkpoint is None:
        raise ConfigurationError("compare-bo needs --checkpoint (path or scripted:<name>)")
    policy = make_policy(args.checkpoint, config)
    b = _parse_b_list(args.b)[0] if args.b else 2.0
    steps = args.episodes if args.episodes is not None else 20
    rows = compare_bo_controls(policy, config, b=b, steps=steps, seed=config.seed)
    path = write_csv(
        config.out_dir / "compare_bo.csv",
        [
            "method",
            "step",
            "gdd",
            "tod",
            "fod",
            "abs_dgdd",
            "abs_dtod",
            "abs_dfod",
            "intensity_ratio",
        ],
        rows,
        config.hash,
    )
    print(f"wrote {path}")
    return 0


def cmd_render(args) -> int:
    config = _load(args)
    policy = make_policy(_policy_source(args), config)
    b = _parse_b_list(args.b)[0] if args.b else 2.0
    out = config.out_dir
    paths, rows = render_episode(policy, config, b=b, seed=config.seed, out_dir=out)
    write_csv(
        out / "render.csv",
        ["t", "gdd", "tod", "fod", "reward", "fwhm"],
        rows,
        config.hash,
    )
    print(f"wrote {len(paths)} frames to {out}")
    return 0


def cmd_baseline_grid(args) -> int:
    config = _load(args)
    b = _parse_b_list(args.b)[0] if args.b else 0.0
    evals = args.episodes if args.episodes is not None else 150
    resolution = max(2, evals // 3)
    objective = _chain_objective(config, b)
    bounds = config.env_config().bounds
    best, history = grid_search_1d(objective, bounds, resolution=resolution)
    rows = [[i, *psi, value] for i, (psi, value) in enumerate(history)]
    path = write_csv(
        config.out_dir / "baseline_grid.csv",
        ["query", "gdd", "tod", "fod", "intensity_ratio"],
        rows,
        config.hash,
    )
    print(f"best psi: {best.tolist()} ratio={objective(best):.4f}")
    print(f"wrote {path}")
    return 0


def cmd_baseline_bo(args) -> int:
    config = _load(args)
    b = _parse_b_list(args.b)[0] if args.b else 0.0
    budget = args.episodes if args.episodes is not None else 100
    objective = _chain_objective(config, b)
    _, from_unit = observation_normalizers(config.env_config())

    def on_unit01(u01):
        return objective(from_unit(2.0 * np.asarray(u01) - 1.0))

    history = bo_run(on_unit01, budget=budget, rng=np.random.default_rng(config.seed), dim=3)
    rows = []
    for i, (u01, value) in enumerate(history):
        psi = from_unit(2.0 * np.asarray(u01) - 1.0)
        rows.append([i, *psi, value])
    path = write_csv(
        config.out_dir / "baseline_bo.csv",
        ["query", "gdd", "tod", "fod", "intensity_ratio"],
        rows,
        config.hash,
    )
    best = max(history, key=lambda h: h[1])
    print(f"best ratio: {best[1]:.4f}")
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pulsekit",
        description="Pulse-shaping simulation and control experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "train": (cmd_train, "run the training loop"),
        "eval": (cmd_eval, "evaluate a checkpoint or scripted policy"),
        "sweep-b": (cmd_sweep_b, "mean intensity ratio over a nonlinearity grid"),
        "compare-bo": (cmd_compare_bo, "paired BO and RL control sequences"),
        "render": (cmd_render, "PNG trace per step of one episode"),
        "baseline-grid": (cmd_baseline_grid, "coordinate-sweep baseline on the chain"),
        "baseline-bo": (cmd_baseline_bo, "Bayesian-optimization baseline on the chain"),
    }
    for name, (fn, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="YAML config file (defaults built in)")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--out", default=None, help="override config output directory")
        p.add_argument(
            "--checkpoint",
            default=None,
            help="checkpoint path; eval/compare-bo/render also accept scripted:center "
            "or scripted:random; for train this resumes",
        )
        p.add_argument("--b", default=None, help="nonlinearity value(s), comma-separated")
        p.add_argument(
            "--episodes",
            type=int,
            default=None,
            help="episode count (eval/sweep-b) or query budget (baselines, compare-bo)",
        )
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, GridMismatchError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, MeasurementError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
