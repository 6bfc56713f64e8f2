"""Soft actor-critic in three flavors sharing one implementation.

``sac``             pixel observations (stacked traces + vectors).
``asymmetric-sac``  same policy, but critics additionally see the episode's
                    normalized latent nonlinearity (privileged at training
                    time only; the actor path never touches it).
``mini-sac``        vector-only observations, no encoder.

The conv encoder is owned by the critic: its weights update through the
critic loss, and the actor consumes detached features.  Temperature is
optimized in log space against a fixed target entropy.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ..env import Observation
from ..errors import ConfigurationError, NumericalError
from .networks import Actor, PixelEncoder, TwinCritic

__all__ = ["SacHyperparams", "SacAgent", "mini_sac_observe"]

MODES = ("sac", "asymmetric-sac", "mini-sac")


@dataclass(frozen=True)
class SacHyperparams:
    lr: float = 3e-4
    batch_size: int = 256
    replay_capacity: int = 100_000
    gamma: float = 0.9
    tau_polyak: float = 0.005
    target_entropy: float = -3.0
    init_temperature: float = 0.1
    warmup_steps: int = 2000
    log_std_min: float = -10.0
    log_std_max: float = 2.0


def mini_sac_observe(obs: Observation) -> np.ndarray:
    """Strip the traces; the mini agent sees only the normalized vectors."""
    return obs.as_vector()


class SacAgent:
    def __init__(
        self,
        mode: str = "sac",
        frame_stack: int = 5,
        vec_dim: int = 6,
        action_dim: int = 3,
        latent_range: tuple = (1.0, 3.5),
        hyperparams: SacHyperparams = SacHyperparams(),
        seed: int = 0,
    ):
        if mode not in MODES:
            raise ConfigurationError(f"unknown agent mode {mode!r}, expected one of {MODES}")
        if latent_range[0] >= latent_range[1]:
            raise ConfigurationError(f"bad latent range {latent_range}")
        self.mode = mode
        self.hp = hyperparams
        self.frame_stack = frame_stack
        self.vec_dim = vec_dim
        self.action_dim = action_dim
        self.latent_range = latent_range
        self._gen = torch.Generator().manual_seed(seed)

        self.encoder = None
        self.target_encoder = None
        feature_dim = vec_dim
        # fork the global rng so same-seed agents get identical weights
        # without disturbing unrelated torch state
        with torch.random.fork_rng():
            torch.manual_seed(seed)
            if mode != "mini-sac":
                self.encoder = PixelEncoder(frame_stack)
                self.target_encoder = PixelEncoder(frame_stack)
                self.target_encoder.load_state_dict(self.encoder.state_dict())
                feature_dim += PixelEncoder.embed_dim
            self.feature_dim = feature_dim

            critic_in = feature_dim + action_dim + (1 if mode == "asymmetric-sac" else 0)
            self.actor = Actor(
                feature_dim, action_dim, hyperparams.log_std_min, hyperparams.log_std_max
            )
            self.critic = TwinCritic(critic_in)
        self.target_critic = TwinCritic(critic_in)
        self.target_critic.load_state_dict(self.critic.state_dict())
        for p in self.target_critic.parameters():
            p.requires_grad_(False)
        if self.target_encoder is not None:
            for p in self.target_encoder.parameters():
                p.requires_grad_(False)
        self.log_alpha = torch.tensor(float(np.log(hyperparams.init_temperature)), requires_grad=True)

        critic_params = list(self.critic.parameters())
        if self.encoder is not None:
            critic_params += list(self.encoder.parameters())
        self.critic_opt = torch.optim.Adam(critic_params, lr=hyperparams.lr)
        self.actor_opt = torch.optim.Adam(self.actor.parameters(), lr=hyperparams.lr)
        self.alpha_opt = torch.optim.Adam([self.log_alpha], lr=hyperparams.lr)

    @property
    def temperature(self) -> float:
        return float(self.log_alpha.detach().exp())

    # ---------------- feature paths ----------------

    def _features(self, frames, vecs, target: bool = False) -> torch.Tensor:
        """Observation features for the critic path (encoder has gradients)."""
        if self.mode == "mini-sac":
            return vecs
        enc = self.target_encoder if target else self.encoder
        return torch.cat([enc(frames), vecs], dim=-1)

    def asymmetric_encode(self, features: torch.Tensor, latents: torch.Tensor) -> torch.Tensor:
        """Append the normalized latent to critic features; privileged path."""
        if self.mode != "asymmetric-sac":
            raise ConfigurationError("latent conditioning requires asymmetric-sac mode")
        lo, hi = self.latent_range
        norm = ((latents - lo) / (hi - lo)).reshape(-1, 1)
        return torch.cat([features, norm], dim=-1)

    def _critic_input(self, features, actions, latents) -> torch.Tensor:
        if self.mode == "asymmetric-sac":
            features = self.asymmetric_encode(features, latents)
        return torch.cat([features, actions], dim=-1)

    # ---------------- acting ----------------

    def policy_act(self, obs: Observation, deterministic: bool = False) -> np.ndarray:
        """Action in [-1,1]^dim from a single observation; never sees the latent."""
        with torch.no_grad():
            vecs = torch.as_tensor(obs.as_vector(), dtype=torch.float32).unsqueeze(0)
            if self.mode == "mini-sac":
                features = vecs
            else:
                frames = torch.as_tensor(obs.traces, dtype=torch.float32).unsqueeze(0)
                features = torch.cat([self.encoder(frames), vecs], dim=-1)
            if deterministic:
                mean, _ = self.actor(features)
                action = torch.tanh(mean)
            else:
                noise = torch.randn(1, self.action_dim, generator=self._gen)
                action, _ = self.actor.sample(features, noise)
        return action.squeeze(0).numpy()

    # ---------------- learning ----------------

    def _to_tensors(self, batch: dict) -> dict:
        t = {k: torch.as_tensor(v) for k, v in batch.items()}
        if self.mode == "mini-sac":
            t.pop("obs_frames", None)
            t.pop("next_frames", None)
        return t

    def critic_targets(self, b: dict) -> torch.Tensor:
        """Bootstrapped regression target r + gamma*(1-done)*(min Q' - alpha*logp)."""
        with torch.no_grad():
            rewards, dones, latents = b["rewards"], b["dones"], b["latents"]
            next_frames, next_vecs = b.get("next_frames"), b["next_vec"]
            next_feat = self._features(next_frames, next_vecs, target=True)
            noise = torch.randn(
                len(rewards), self.action_dim, generator=self._gen, dtype=rewards.dtype
            )
            # actor acts on its own (main-encoder) view of the next state
            next_actor_feat = self._features(next_frames, next_vecs)
            next_action, next_logp = self.actor.sample(next_actor_feat, noise)
            tq1, tq2 = self.target_critic(self._critic_input(next_feat, next_action, latents))
            target_v = torch.min(tq1, tq2) - self.log_alpha.exp() * next_logp
            return rewards + self.hp.gamma * (1.0 - dones) * target_v

    def critic_loss(self, b: dict, target_q: torch.Tensor) -> torch.Tensor:
        """Summed mean-square Bellman error of both twins."""
        feat = self._features(b.get("obs_frames"), b["obs_vec"])
        q1, q2 = self.critic(self._critic_input(feat, b["actions"], b["latents"]))
        return nn.functional.mse_loss(q1, target_q) + nn.functional.mse_loss(q2, target_q)

    def sac_update(self, batch: dict) -> dict:
        """One gradient step on critics, actor, and temperature.

        Returns the three scalar losses; raises if any turns non-finite.
        """
        b = self._to_tensors(batch)
        vecs = b["obs_vec"]
        rewards, latents = b["rewards"], b["latents"]

        target_q = self.critic_targets(b)
        critic_loss = self.critic_loss(b, target_q)
        self.critic_opt.zero_grad()
        critic_loss.backward()
        self.critic_opt.step()

        with torch.no_grad():
            actor_feat = self._features(b.get("obs_frames"), vecs)
        noise = torch.randn(len(rewards), self.action_dim, generator=self._gen)
        new_action, logp = self.actor.sample(actor_feat, noise)
        for p in self.critic.parameters():
            p.requires_grad_(False)
        aq1, aq2 = self.critic(self._critic_input(actor_feat, new_action, latents))
        actor_loss = (self.log_alpha.exp().detach() * logp - torch.min(aq1, aq2)).mean()
        self.actor_opt.zero_grad()
        actor_loss.backward()
        self.actor_opt.step()
        for p in self.critic.parameters():
            p.requires_grad_(True)

        alpha_loss = -(self.log_alpha * (logp.detach() + self.hp.target_entropy)).mean()
        self.alpha_opt.zero_grad()
        alpha_loss.backward()
        self.alpha_opt.step()

        losses = {
            "critic": float(critic_loss.detach()),
            "actor": float(actor_loss.detach()),
            "temperature": float(alpha_loss.detach()),
        }
        if not all(np.isfinite(v) for v in losses.values()):
            raise NumericalError(f"non-finite training loss: {losses}")
        self._polyak()
        return losses

    def _polyak(self) -> None:
        tau = self.hp.tau_polyak
        pairs = [(self.target_critic, self.critic)]
        if self.encoder is not None:
            pairs.append((self.target_encoder, self.encoder))
        with torch.no_grad():
            for target, main in pairs:
                for tp, mp in zip(target.parameters(), main.parameters()):
                    tp.mul_(1.0 - tau).add_(mp, alpha=tau)

    # ---------------- checkpointing ----------------

    def state(self) -> dict:
        # deep-copied so the snapshot stays frozen while training continues;
        # optimizer load_state_dict aliases same-dtype tensors otherwise
        out = {
            "actor": self.actor.state_dict(),
            "critic": self.critic.state_dict(),
            "target_critic": self.target_critic.state_dict(),
            "log_alpha": self.log_alpha.detach().clone(),
            "critic_opt": self.critic_opt.state_dict(),
            "actor_opt": self.actor_opt.state_dict(),
            "alpha_opt": self.alpha_opt.state_dict(),
            "generator": self._gen.get_state().clone(),
        }
        if self.encoder is not None:
            out["encoder"] = self.encoder.state_dict()
            out["target_encoder"] = self.target_encoder.state_dict()
        return copy.deepcopy(out)

    def load_state(self, state: dict) -> None:
        state = copy.deepcopy(state)
        self.actor.load_state_dict(state["actor"])
        self.critic.load_state_dict(state["critic"])
        self.target_critic.load_state_dict(state["target_critic"])
        with torch.no_grad():
            self.log_alpha.copy_(state["log_alpha"])
        self.critic_opt.load_state_dict(state["critic_opt"])
        self.actor_opt.load_state_dict(state["actor_opt"])
        self.alpha_opt.load_state_dict(state["alpha_opt"])
        self._gen.set_state(state["generator"])
        if self.encoder is not None:
            self.encoder.load_state_dict(state["encoder"])
            self.target_encoder.load_state_dict(state["target_encoder"])
