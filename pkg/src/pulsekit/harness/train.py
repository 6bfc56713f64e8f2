"""Single-worker training loop with deterministic resume.

All randomness flows through two checkpointed generators: the trainer's
numpy generator (episode seeds, latent draws, warmup actions, replay
sampling) and the agent's torch generator (policy noise).  Checkpoints are
written at episode boundaries only, at the first boundary on or after each
interval multiple; that keeps the environment out of the snapshot entirely,
so a resumed run replays the remaining episodes bit-for-bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..agents import ReplayBuffer
from ..chain import LatentDynamics
from ..env import LaserEnv
from ..errors import ConfigurationError
from ..randomization import (
    CurriculumState,
    DrDistribution,
    doraemon_update,
    entropy,
    sample,
    success_indicator,
)
from .checkpoint import agent_payload, load_checkpoint, restore_agent, save_checkpoint
from .config import ExperimentConfig
from .emit import format_cell

__all__ = ["Trainer", "TrainResult"]

TRAIN_LOG_COLUMNS = [
    "step",
    "episode",
    "b_integral",
    "episode_return",
    "max_ratio",
    "terminal_ratio",
    "success",
    "success_rate",
    "critic_loss",
    "actor_loss",
    "temperature_loss",
    "curriculum_a",
    "curriculum_b",
    "curriculum_entropy",
]

CURRICULUM_COLUMNS = ["k", "a", "b", "entropy", "success_estimate"]


@dataclass
class TrainResult:
    steps: int
    episodes: int
    checkpoints: list = field(default_factory=list)
    final_checkpoint: Path = None
    log_path: Path = None
    curriculum_path: Path = None


class Trainer:
    def __init__(self, config: ExperimentConfig, out_dir=None):
        self.config = config
        self.out = Path(out_dir if out_dir is not None else config.out_dir)
        mode = config.agent_mode
        env_cfg = config.env_config()
        if mode != "mini-sac" and not env_cfg.compute_traces:
            raise ConfigurationError(f"agent mode {mode!r} needs env.compute_traces=true")
        self.env = LaserEnv(env_cfg)
        self.agent = config.build_agent()
        self.hp = self.agent.hp
        self.replay = ReplayBuffer(
            capacity=self.hp.replay_capacity,
            frame_stack=env_cfg.frame_stack,
            store_frames=mode != "mini-sac",
        )
        self.rng = np.random.default_rng(config.seed)
        self.dist = config.initial_distribution()
        self.curriculum = (
            config.curriculum_state() if config.raw["dr"]["kind"] == "doraemon" else None
        )
        total = int(config.raw["train"]["total_steps"])
        self.total_steps = total
        self.ckpt_interval = int(config.raw["train"]["checkpoint_interval"])
        updates = int(config.raw["dr"]["updates"])
        self.curriculum_stride = max(1, total // updates) if self.curriculum else None
        self.success_threshold = float(config.raw["dr"]["success_threshold"])

        self.global_step = 0
        self.episode_count = 0
        self.success_count = 0
        self._next_ckpt = self.ckpt_interval
        self._losses = {"critic": float("nan"), "actor": float("nan"), "temperature": float("nan")}

    # -- persistence ------------------------------------------------------

    def _snapshot(self):
        tensors, agent_hp, agent_extras = agent_payload(self.agent)
        tensors = {f"agent.{k}": v for k, v in tensors.items()}
        for key, value in self.replay.state().items():
            tensors[f"replay.{key}"] = value
        trainer = {
            "global_step": self.global_step,
            "episode_count": self.episode_count,
            "success_count": self.success_count,
            "next_ckpt": self._next_ckpt,
            "rng_state": self.rng.bit_generator.state,
            "dist": {"kind": self.dist.kind, "params": list(self.dist.params)},
            "losses": self._losses,
        }
        if self.curriculum is not None:
            c = self.curriculum
            trainer["curriculum"] = {
                "a": c.a,
                "b": c.b,
                "support": list(c.support),
                "success_threshold": c.success_threshold,
                "success_rate_bound": c.success_rate_bound,
                "kl_step": c.kl_step,
                "min_episodes": c.min_episodes,
                "update_index": c.update_index,
                "buffer": [list(pair) for pair in c.buffer],
            }
        hyperparams = {"agent": agent_hp, "config_hash": self.config.hash}
        extras = {"agent": agent_extras, "trainer": trainer}
        return tensors, hyperparams, extras

    def save(self, path) -> Path:
        tensors, hyperparams, extras = self._snapshot()
        save_checkpoint(path, "train-state", tensors, hyperparams, extras)
        return Path(path)

    def load(self, path) -> None:
        ckpt = load_checkpoint(path)
        if ckpt.kind != "train-state":
            raise ConfigurationError(f"cannot resume from a {ckpt.kind!r} checkpoint")
        if ckpt.hyperparams.get("config_hash") != self.config.hash:
            raise ConfigurationError(
                "checkpoint was written under a different configuration "
                f"({ckpt.hyperparams.get('config_hash')} != {self.config.hash})"
            )
        self.agent = restore_agent(ckpt, tensor_prefix="agent")
        replay_state = {
            name[len("replay.") :]: arr
            for name, arr in ckpt.tensors.items()
            if name.startswith("replay.")
        }
        self.replay.load_state(replay_state)
        t = ckpt.extras["trainer"]
        self.global_step = int(t["global_step"])
        self.episode_count = int(t["episode_count"])
        self.success_count = int(t["success_count"])
        self._next_ckpt = int(t["next_ckpt"])
        self.rng.bit_generator.state = t["rng_state"]
        self.dist = DrDistribution(kind=t["dist"]["kind"], params=tuple(t["dist"]["params"]))
        self._losses = dict(t["losses"])
        if "curriculum" in t:
            c = t["curriculum"]
            self.curriculum = CurriculumState(
                a=c["a"],
                b=c["b"],
                support=tuple(c["support"]),
                success_threshold=c["success_threshold"],
                success_rate_bound=c["success_rate_bound"],
                kl_step=c["kl_step"],
                min_episodes=int(c["min_episodes"]),
                update_index=int(c["update_index"]),
                buffer=[tuple(pair) for pair in c["buffer"]],
            )

    # -- logging ----------------------------------------------------------

    def _open_log(self, name: str, columns) -> csv.writer:
        path = self.out / name
        fresh = not path.exists()
        fh = open(path, "a", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        if fresh:
            fh.write(f"# config_hash={self.config.hash}\n")
            writer.writerow(columns)
        return fh, writer

    # -- main loop --------------------------------------------------------

    def run(self, resume_from=None) -> TrainResult:
        if resume_from is not None:
            self.load(resume_from)
        self.out.mkdir(parents=True, exist_ok=True)
        log_fh, log_writer = self._open_log("train_log.csv", TRAIN_LOG_COLUMNS)
        cur_fh = cur_writer = None
        if self.curriculum is not None:
            cur_fh, cur_writer = self._open_log("curriculum.csv", CURRICULUM_COLUMNS)
        result = TrainResult(steps=self.global_step, episodes=self.episode_count)
        result.log_path = self.out / "train_log.csv"
        if self.curriculum is not None:
            result.curriculum_path = self.out / "curriculum.csv"

        obs = None
        episode_b = 0.0
        episode_return = 0.0
        max_ratio = 0.0
        terminal_ratio = 0.0
        try:
            while self.global_step < self.total_steps:
                if obs is None:
                    episode_b = sample(self.dist, self.rng)
                    seed = int(self.rng.integers(0, 2**63 - 1))
                    obs = self.env.reset(
                        seed=seed,
                        latent_override=LatentDynamics(
                            b_integral=episode_b, gain=self.config.chain_config().gain
                        ),
                    )
                    self.replay.begin_episode(obs)
                    episode_return = 0.0
                    max_ratio = 0.0

                if self.global_step < self.hp.warmup_steps:
                    action = self.rng.uniform(-1.0, 1.0, self.agent.action_dim)
                else:
                    action = self.agent.policy_act(obs, deterministic=False)
                res = self.env.step(action)
                self.replay.push(
                    action, res.reward, res.observation, res.done, latent_b=episode_b
                )
                obs = res.observation
                self.global_step += 1
                episode_return += res.reward
                max_ratio = max(max_ratio, res.info["intensity_ratio"])
                terminal_ratio = res.info["intensity_ratio"]

                if (
                    self.global_step > self.hp.warmup_steps
                    and len(self.replay) >= self.hp.batch_size
                ):
                    self._losses = self.agent.sac_update(
                        self.replay.sample(self.hp.batch_size, self.rng)
                    )

                if res.done:
                    obs = None
                    self.episode_count += 1
                    success = success_indicator(terminal_ratio, self.success_threshold)
                    self.success_count += int(success)
                    if self.curriculum is not None:
                        self.curriculum.record(episode_b, terminal_ratio)

                if self.curriculum is not None and self.global_step % self.curriculum_stride == 0:
                    self._curriculum_step(cur_writer)

                if res.done:
                    log_writer.writerow(
                        [
                            format_cell(v)
                            for v in self._log_row(
                                episode_b, episode_return, max_ratio, terminal_ratio, success
                            )
                        ]
                    )
                    if self.global_step >= self._next_ckpt:
                        # advance before saving so a resumed run skips this slot
                        while self._next_ckpt <= self.global_step:
                            self._next_ckpt += self.ckpt_interval
                        path = self.out / f"ckpt_step_{self.global_step:08d}.pkc"
                        self.save(path)
                        result.checkpoints.append(path)
        finally:
            log_fh.close()
            if cur_fh is not None:
                cur_fh.close()

        final = self.out / "ckpt_final.pkc"
        self.save(final)
        result.final_checkpoint = final
        result.steps = self.global_step
        result.episodes = self.episode_count
        return result

    def _log_row(self, episode_b, episode_return, max_ratio, terminal_ratio, success):
        if self.curriculum is not None:
            cur_a, cur_b = self.curriculum.a, self.curriculum.b
            cur_entropy = entropy(
                DrDistribution.beta(cur_a, cur_b, *self.curriculum.support)
            )
        else:
            cur_a = cur_b = float("nan")
            cur_entropy = entropy(self.dist)
        return [
            self.global_step,
            self.episode_count,
            episode_b,
            episode_return,
            max_ratio,
            terminal_ratio,
            int(success),
            self.success_count / max(1, self.episode_count),
            self._losses["critic"],
            self._losses["actor"],
            self._losses["temperature"],
            cur_a,
            cur_b,
            cur_entropy,
        ]

    def _curriculum_step(self, writer) -> None:
        buffer = self.curriculum.buffer
        if buffer:
            est = float(
                np.mean(
                    [
                        success_indicator(r, self.curriculum.success_threshold)
                        for _, r in buffer
                    ]
                )
            )
        else:
            est = float("nan")
        self.curriculum = doraemon_update(self.curriculum)
        self.dist = DrDistribution.beta(
            self.curriculum.a, self.curriculum.b, *self.curriculum.support
        )
        writer.writerow(
            [
                format_cell(v)
                for v in [
                    self.curriculum.update_index,
                    self.curriculum.a,
                    self.curriculum.b,
                    entropy(self.dist),
                    est,
                ]
            ]
        )
