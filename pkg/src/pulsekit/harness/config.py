"""Experiment configuration: one hierarchical file drives every run.

Every physical and algorithmic constant appears explicitly so a config file
fully determines an experiment.  User files override the defaults below by
deep merge; unknown keys are rejected to catch typos.  The canonical merged
dictionary is hashed (sha256, first 12 hex digits) and stamped into every
emitted artifact, which is what makes reruns attributable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..chain import ChainConfig
from ..env import ControlBounds, EnvConfig
from ..errors import ConfigurationError
from ..frog import FrogConfig
from ..pulse import DispersionCoeffs
from ..randomization import CurriculumState, DrDistribution
from .. import agents

__all__ = ["ExperimentConfig", "load_config", "default_config_dict", "config_hash"]

AGENT_MODES = ("sac", "asymmetric-sac", "mini-sac")
DR_KINDS = ("fixed", "uniform", "doraemon")


def default_config_dict() -> dict:
    """The complete default experiment as a plain dictionary."""
    return {
        "seed": 0,
        "out_dir": "runs/default",
        "chain": {
            "grid_n": 4096,
            "omega0": 1.8287879294260712,
            "d_omega": 0.0005,
            "bandwidth": 0.0178,
            "seed_energy": 1.0,
            "gain": 1.0,
            "compressor": {"gdd": -250000.0, "tod": 2000000.0, "fod": 0.0},
        },
        "env": {
            "horizon": 20,
            "discount": 0.9,
            "alpha": 0.1,
            "frame_stack": 5,
            "half_widths": [50000.0, 400000.0, 2000000.0],
            "init_std_fraction": 0.1,
            "compute_traces": True,
            "frog": {
                "delay_span": 12000.0,
                "freq_span": 0.16,
                "size": 64,
                "n_delay": 128,
            },
        },
        "dr": {
            "kind": "fixed",
            "value": 2.0,
            "lo": 1.5,
            "hi": 2.5,
            "init_a": 60.0,
            "init_b": 90.0,
            "support": [1.0, 3.5],
            "success_threshold": 0.65,
            "success_rate_bound": 0.5,
            "kl_step": 0.1,
            "updates": 20,
            "min_episodes": 500,
        },
        "agent": {
            "mode": "sac",
            "lr": 0.0003,
            "batch_size": 256,
            "replay_capacity": 100000,
            "tau_polyak": 0.005,
            "target_entropy": -3.0,
            "init_temperature": 0.1,
            "warmup_steps": 2000,
        },
        "train": {
            "total_steps": 200000,
            "checkpoint_interval": 10000,
        },
        "eval": {
            "episodes": 25,
            "b_values": [0.5, 2.17, 3.83],
            "thresholds": [0.7, 0.75, 0.8],
            "seed_offset": 1000000,
        },
    }


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigurationError(f"unknown config key: {where}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigurationError(f"{where} must be a mapping")
            out[key] = _merge(base[key], value, where)
        else:
            out[key] = value
    return out


def config_hash(raw: dict) -> str:
    """Stable short digest of the fully-merged configuration."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


@dataclass(frozen=True)
class ExperimentConfig:
    """Typed view over the merged configuration dictionary."""

    raw: dict = field(default_factory=default_config_dict)

    def __post_init__(self):
        r = self.raw
        if r["agent"]["mode"] not in AGENT_MODES:
            raise ConfigurationError(
                f"agent.mode must be one of {AGENT_MODES}, got {r['agent']['mode']!r}"
            )
        if r["dr"]["kind"] not in DR_KINDS:
            raise ConfigurationError(
                f"dr.kind must be one of {DR_KINDS}, got {r['dr']['kind']!r}"
            )
        for t in r["eval"]["thresholds"]:
            if not 0.0 < t < 1.0:
                raise ConfigurationError(f"eval thresholds must lie in (0, 1), got {t}")
        if r["train"]["total_steps"] < 1:
            raise ConfigurationError("train.total_steps must be positive")
        if r["train"]["checkpoint_interval"] < 1:
            raise ConfigurationError("train.checkpoint_interval must be positive")
        if r["eval"]["episodes"] < 1:
            raise ConfigurationError("eval.episodes must be positive")
        # construct the derived objects once so invalid values fail at load
        self.env_config()
        self.hyperparams()

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def out_dir(self) -> Path:
        return Path(self.raw["out_dir"])

    @property
    def agent_mode(self) -> str:
        return self.raw["agent"]["mode"]

    def chain_config(self) -> ChainConfig:
        c = self.raw["chain"]
        comp = c["compressor"]
        return ChainConfig(
            grid_n=int(c["grid_n"]),
            omega0=float(c["omega0"]),
            d_omega=float(c["d_omega"]),
            bandwidth=float(c["bandwidth"]),
            seed_energy=float(c["seed_energy"]),
            compressor_psi=DispersionCoeffs(
                gdd=float(comp["gdd"]), tod=float(comp["tod"]), fod=float(comp["fod"])
            ),
            gain=float(c["gain"]),
        )

    def initial_distribution(self) -> DrDistribution:
        d = self.raw["dr"]
        if d["kind"] == "fixed":
            return DrDistribution.fixed(d["value"])
        if d["kind"] == "uniform":
            return DrDistribution.uniform(d["lo"], d["hi"])
        return DrDistribution.beta(d["init_a"], d["init_b"], *d["support"])

    def curriculum_state(self) -> CurriculumState:
        d = self.raw["dr"]
        if d["kind"] != "doraemon":
            raise ConfigurationError("curriculum state only exists for dr.kind=doraemon")
        return CurriculumState(
            a=float(d["init_a"]),
            b=float(d["init_b"]),
            support=tuple(float(v) for v in d["support"]),
            success_threshold=float(d["success_threshold"]),
            success_rate_bound=float(d["success_rate_bound"]),
            kl_step=float(d["kl_step"]),
            min_episodes=int(d["min_episodes"]),
        )

    def env_config(self, compute_traces=None) -> EnvConfig:
        e = self.raw["env"]
        chain = self.chain_config()
        center = -chain.compressor_psi.as_array()
        bounds = ControlBounds.centered(
            DispersionCoeffs(*center),
            half_widths=tuple(float(w) for w in e["half_widths"]),
            alpha=float(e["alpha"]),
        )
        frac = float(e["init_std_fraction"])
        if compute_traces is None:
            compute_traces = bool(e["compute_traces"])
        f = e["frog"]
        return EnvConfig(
            chain=chain,
            bounds=bounds,
            horizon=int(e["horizon"]),
            discount=float(e["discount"]),
            init_std=tuple(frac * bounds.ranges),
            frame_stack=int(e["frame_stack"]),
            latent_distribution=self.initial_distribution(),
            frog=FrogConfig(
                delay_span=float(f["delay_span"]),
                freq_span=float(f["freq_span"]),
                size=int(f["size"]),
                n_delay=int(f["n_delay"]),
            ),
            compute_traces=compute_traces,
        )

    def hyperparams(self) -> agents.SacHyperparams:
        a = self.raw["agent"]
        return agents.SacHyperparams(
            lr=float(a["lr"]),
            batch_size=int(a["batch_size"]),
            replay_capacity=int(a["replay_capacity"]),
            gamma=float(self.raw["env"]["discount"]),
            tau_polyak=float(a["tau_polyak"]),
            target_entropy=float(a["target_entropy"]),
            init_temperature=float(a["init_temperature"]),
            warmup_steps=int(a["warmup_steps"]),
        )

    def build_agent(self, seed=None) -> agents.SacAgent:
        lo, hi = self.initial_distribution().support
        if lo == hi:
            # point mass: widen so the privileged-input normalization stays affine
            lo, hi = 0.0, max(hi, 1.0)
        return agents.SacAgent(
            mode=self.agent_mode,
            frame_stack=int(self.raw["env"]["frame_stack"]),
            latent_range=(lo, hi),
            hyperparams=self.hyperparams(),
            seed=self.seed if seed is None else seed,
        )


def load_config(path=None, overrides: dict = None) -> ExperimentConfig:
    """Read a YAML file (or nothing) and merge it over the defaults."""
    merged = default_config_dict()
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"malformed config {path}: {exc}") from exc
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigurationError(f"config root must be a mapping, got {type(data).__name__}")
        merged = _merge(merged, data)
    if overrides:
        merged = _merge(merged, overrides)
    return ExperimentConfig(raw=merged)
