"""Evaluation protocol, baseline comparisons, and episode rendering.

Policies are evaluated deterministically over a fixed set of episode seeds
shared across every nonlinearity value and every method, so comparisons are
paired.  Aggregates are always derived from the per-episode values that get
emitted alongside them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agents import GpSurrogate, SacAgent, bo_suggest
from ..chain import LatentDynamics, propagate, tl_reference
from ..env import LaserEnv, observation_normalizers
from ..errors import ConfigurationError
from ..frog import render_png
from ..pulse import DispersionCoeffs
from .checkpoint import load_checkpoint, restore_agent
from .config import ExperimentConfig

__all__ = [
    "EvalReport",
    "make_policy",
    "evaluate_policy",
    "sweep_b",
    "compare_bo_controls",
    "render_episode",
]


# -- policies ---------------------------------------------------------------


class AgentPolicy:
    """Deterministic wrapper around a trained agent."""

    def __init__(self, agent: SacAgent):
        self.agent = agent

    def begin_episode(self, seed: int) -> None:
        pass

    def act(self, obs) -> np.ndarray:
        return self.agent.policy_act(obs, deterministic=True)


class CenterPolicy:
    """Scripted controller driving psi toward the center of the control box.

    The box is centered on the compressor-cancelling setting, so in
    normalized coordinates the target is the origin and the largest legal
    move toward it is psi_norm / (2 * alpha).
    """

    def __init__(self, alpha: float):
        self.alpha = alpha

    def begin_episode(self, seed: int) -> None:
        pass

    def act(self, obs) -> np.ndarray:
        return np.clip(-obs.psi_norm / (2.0 * self.alpha), -1.0, 1.0)


class RandomPolicy:
    def __init__(self):
        self._rng = np.random.default_rng(0)

    def begin_episode(self, seed: int) -> None:
        self._rng = np.random.default_rng([seed, 0x5EED])

    def act(self, obs) -> np.ndarray:
        return self._rng.uniform(-1.0, 1.0, 3)


def make_policy(source, config: ExperimentConfig):
    """Policy from a checkpoint path, an agent, or a scripted name."""
    if isinstance(source, SacAgent):
        return AgentPolicy(source)
    if isinstance(source, str) and source.startswith("scripted:"):
        name = source.split(":", 1)[1]
        if name == "center":
            return CenterPolicy(alpha=float(config.raw["env"]["alpha"]))
        if name == "random":
            return RandomPolicy()
        raise ConfigurationError(f"unknown scripted policy {name!r}")
    agent = restore_agent(load_checkpoint(source), tensor_prefix="agent")
    return AgentPolicy(agent)


# -- evaluation -------------------------------------------------------------


@dataclass
class EvalReport:
    """Per-B evaluation outcome; aggregates derive from the raw ratios."""

    b_values: list
    episodes: int
    thresholds: list
    seeds: list
    ratios: dict = field(default_factory=dict)
    trajectories: dict = field(default_factory=dict)

    def __post_init__(self):
        for b, values in self.ratios.items():
            arr = np.asarray(values)
            if arr.shape != (self.episodes,):
                raise ConfigurationError(f"need {self.episodes} ratios at B={b}")
            if np.any(arr < 0.0) or np.any(arr > 1.0):
                raise ConfigurationError(f"ratios outside [0, 1] at B={b}")

    def stats(self, b: float) -> dict:
        arr = np.asarray(self.ratios[b])
        return {
            "mean": float(arr.mean()),
            "std": float(arr.std(ddof=0)),
            "min": float(arr.min()),
            "max": float(arr.max()),
        }

    def success_rate(self, b: float, threshold: float) -> float:
        arr = np.asarray(self.ratios[b])
        return float(np.count_nonzero(arr >= threshold)) / self.episodes

    def summary_rows(self):
        rows = []
        for b in self.b_values:
            s = self.stats(b)
            rows.append(
                [b, s["mean"], s["std"], s["min"], s["max"]]
                + [self.success_rate(b, t) for t in self.thresholds]
            )
        return rows

    def episode_rows(self):
        rows = []
        for b in self.b_values:
            for i, ratio in enumerate(self.ratios[b]):
                rows.append([b, i, self.seeds[i], float(ratio)])
        return rows


def evaluate_policy(
    policy,
    config: ExperimentConfig,
    b_values=None,
    episodes=None,
    base_seed=None,
) -> EvalReport:
    """Roll ``episodes`` deterministic episodes at each fixed nonlinearity."""
    ev = config.raw["eval"]
    if b_values is None:
        b_values = [float(b) for b in ev["b_values"]]
    episodes = int(ev["episodes"] if episodes is None else episodes)
    if base_seed is None:
        base_seed = config.seed + int(ev["seed_offset"])
    seeds = [base_seed + i for i in range(episodes)]
    env = LaserEnv(config.env_config())
    gain = config.chain_config().gain
    ratios = {}
    trajectories = {}
    for b in b_values:
        dyn = LatentDynamics(b_integral=float(b), gain=gain)
        per_episode = []
        per_traj = []
        for seed in seeds:
            policy.begin_episode(seed)
            obs = env.reset(seed=seed, latent_override=dyn)
            best = 0.0
            psi_path = [env.psi.as_array()]
            done = False
            while not done:
                res = env.step(policy.act(obs))
                obs = res.observation
                best = max(best, res.info["intensity_ratio"])
                psi_path.append(env.psi.as_array())
                done = res.done
            per_episode.append(min(max(best, 0.0), 1.0))
            per_traj.append(np.stack(psi_path))
        ratios[float(b)] = per_episode
        trajectories[float(b)] = per_traj
    return EvalReport(
        b_values=[float(b) for b in b_values],
        episodes=episodes,
        thresholds=[float(t) for t in ev["thresholds"]],
        seeds=seeds,
        ratios=ratios,
        trajectories=trajectories,
    )


def sweep_b(policy, config: ExperimentConfig, b_grid, episodes=None, base_seed=None):
    """(B, mean, std) rows over a strictly increasing nonlinearity grid."""
    b_grid = [float(b) for b in b_grid]
    if len(b_grid) < 1 or np.any(np.diff(b_grid) <= 0):
        raise ConfigurationError("B grid must be non-empty and strictly increasing")
    report = evaluate_policy(policy, config, b_values=b_grid, episodes=episodes, base_seed=base_seed)
    rows = []
    for b in b_grid:
        s = report.stats(b)
        rows.append([b, s["mean"], s["std"]])
    return rows, report


# -- BO / RL control comparison ----------------------------------------------


def compare_bo_controls(policy, config: ExperimentConfig, b: float, steps: int = 20, seed: int = 0):
    """Paired control sequences from a matched start.

    The RL policy rolls one episode (bounded increments); Bayesian
    optimization queries the same chain objective without any step-size
    restriction, starting from the same initial controls.  Rows are
    (method, step, psi, |delta psi| per coefficient, ratio).
    """
    env_cfg = config.env_config()
    env = LaserEnv(env_cfg)
    chain = config.chain_config()
    dyn = LatentDynamics(b_integral=float(b), gain=chain.gain)
    ref = tl_reference(chain)
    to_unit, from_unit = observation_normalizers(env_cfg)

    policy.begin_episode(seed)
    obs = env.reset(seed=seed, latent_override=dyn)
    psi0 = env.psi.as_array()
    rows = []
    prev = psi0
    for t in range(1, steps + 1):
        res = env.step(policy.act(obs))
        obs = res.observation
        psi = env.psi.as_array()
        delta = np.abs(psi - prev)
        rows.append(["rl", t, *psi, *delta, res.info["intensity_ratio"]])
        prev = psi
        if res.done and t < steps:
            raise ConfigurationError(f"episode shorter than requested {steps} control steps")

    def objective(unit01: np.ndarray) -> float:
        psi = from_unit(2.0 * np.asarray(unit01) - 1.0)
        field = propagate(DispersionCoeffs(*psi), dyn, chain)
        return float(np.max(np.abs(field.amplitude) ** 2) / ref)

    rng = np.random.default_rng(seed)
    gp = GpSurrogate(dim=3)
    init_points = min(10, steps)
    prev = psi0
    for t in range(1, steps + 1):
        if t == 1:
            unit01 = (to_unit(psi0) + 1.0) / 2.0  # matched start
        elif t <= init_points:
            unit01 = rng.uniform(0.0, 1.0, 3)
        else:
            if (t - init_points - 1) % 10 == 0:
                gp.fit()
            unit01 = bo_suggest(gp, rng)
        value = objective(unit01)
        gp.add(unit01, value)
        psi = from_unit(2.0 * unit01 - 1.0)
        delta = np.abs(psi - prev)
        rows.append(["bo", t, *psi, *delta, value])
        prev = psi
    return rows


# -- rendering ---------------------------------------------------------------


def render_episode(policy, config: ExperimentConfig, b: float, seed: int, out_dir):
    """One deterministic episode: a PNG per step plus a metrics CSV's rows.

    Returns (png_paths, csv_rows); rows are (t, gdd, tod, fod, reward, fwhm).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    env = LaserEnv(config.env_config())
    dyn = LatentDynamics(b_integral=float(b), gain=config.chain_config().gain)
    policy.begin_episode(seed)
    obs = env.reset(seed=seed, latent_override=dyn)
    width = max(2, len(str(env.config.horizon)))
    paths = []
    rows = []
    done = False
    t = 0
    while not done:
        t += 1
        res = env.step(policy.act(obs))
        obs = res.observation
        trace = env.render()
        path = out_dir / f"step_{t:0{width}d}.png"
        render_png(trace, path)
        paths.append(path)
        psi = env.psi.as_array()
        rows.append([t, *psi, res.reward, res.info["fwhm"]])
        done = res.done
    return paths, rows
