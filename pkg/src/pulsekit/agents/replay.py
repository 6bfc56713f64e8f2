"""Uniform-sampling FIFO replay with compact frame storage.

Observations stack the last n trace images, so storing full stacks would
multiply memory by n.  Instead each slot keeps only the frame that is new
at that point in time, quantized to uint8, and stacks are rebuilt on
sampling by walking back within the episode (repeating the episode's first
frame before the start, matching how the environment fills its stack).

A slot is written at every reset (frame only) and every step (frame plus
transition fields).  Old slots are overwritten FIFO; transitions whose
stack window has been partially overwritten are excluded from sampling.
"""

from __future__ import annotations

import numpy as np

from ..env import Observation
from ..errors import ConfigurationError

__all__ = ["ReplayBuffer"]


class ReplayBuffer:
    def __init__(
        self,
        capacity: int = 100_000,
        frame_stack: int = 5,
        frame_shape: tuple = (64, 64),
        vec_dim: int = 6,
        action_dim: int = 3,
        store_frames: bool = True,
    ):
        if capacity < frame_stack + 2:
            raise ConfigurationError(f"capacity {capacity} too small for stack {frame_stack}")
        self.capacity = capacity
        self.frame_stack = frame_stack
        self.store_frames = store_frames
        if store_frames:
            self._frames = np.zeros((capacity, *frame_shape), dtype=np.uint8)
        self._vecs = np.zeros((capacity, vec_dim), dtype=np.float32)
        self._actions = np.zeros((capacity, action_dim), dtype=np.float32)
        self._rewards = np.zeros(capacity, dtype=np.float32)
        self._dones = np.zeros(capacity, dtype=bool)
        self._latents = np.zeros(capacity, dtype=np.float32)
        self._episode_id = np.full(capacity, -1, dtype=np.int64)
        self._step_in_episode = np.full(capacity, -1, dtype=np.int64)
        self._is_transition = np.zeros(capacity, dtype=bool)
        self._head = 0
        self._filled = 0
        self._size = 0  # live transition count
        self._episode_counter = -1
        self._current_step = 0

    def __len__(self) -> int:
        return self._size

    def begin_episode(self, obs: Observation) -> None:
        """Record the reset observation; must precede pushes of the episode."""
        self._episode_counter += 1
        self._current_step = 0
        self._write_slot(obs, is_transition=False)

    def push(self, action, reward: float, next_obs: Observation, done: bool, latent_b: float) -> None:
        """Record one step. The pre-step observation is implied by the slot chain."""
        if self._episode_counter < 0 or self._current_step < 0:
            raise ConfigurationError("push before begin_episode")
        self._current_step += 1
        slot = self._write_slot(next_obs, is_transition=True)
        self._actions[slot] = np.asarray(action, dtype=np.float32)
        self._rewards[slot] = reward
        self._dones[slot] = done
        self._latents[slot] = latent_b
        if done:
            self._current_step = -1

    def _write_slot(self, obs: Observation, is_transition: bool) -> int:
        slot = self._head
        if self._is_transition[slot]:
            self._size -= 1
        if self.store_frames:
            self._frames[slot] = np.round(255.0 * obs.traces[-1]).astype(np.uint8)
        self._vecs[slot] = obs.as_vector().astype(np.float32)
        self._episode_id[slot] = self._episode_counter
        self._step_in_episode[slot] = self._current_step
        self._is_transition[slot] = is_transition
        if is_transition:
            self._size += 1
        self._head = (self._head + 1) % self.capacity
        self._filled = min(self._filled + 1, self.capacity)
        return slot

    def _valid(self, slots: np.ndarray) -> np.ndarray:
        """Sampleable: a transition whose stack window is still intact."""
        ok = self._is_transition[slots]
        if self._filled == self.capacity:
            # slots just ahead of the head are the next to be overwritten;
            # a window reaching past the head would mix episodes
            dist_behind = (slots - self._head) % self.capacity
            ok &= dist_behind >= self.frame_stack
        return ok

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        """Uniform over live transitions; returns numpy arrays ready for training."""
        if self._size < batch_size:
            raise ConfigurationError(f"only {self._size} transitions buffered, need {batch_size}")
        chosen = np.empty(batch_size, dtype=np.int64)
        have = 0
        while have < batch_size:
            cand = rng.integers(0, self._filled, size=2 * (batch_size - have))
            cand = cand[self._valid(cand)]
            take = min(len(cand), batch_size - have)
            chosen[have : have + take] = cand[:take]
            have += take
        prev = (chosen - 1) % self.capacity
        batch = {
            "obs_vec": self._vecs[prev],
            "next_vec": self._vecs[chosen],
            "actions": self._actions[chosen],
            "rewards": self._rewards[chosen],
            "dones": self._dones[chosen].astype(np.float32),
            "latents": self._latents[chosen],
        }
        if self.store_frames:
            batch["obs_frames"] = self._stacks(prev)
            batch["next_frames"] = self._stacks(chosen)
        return batch

    def _stacks(self, slots: np.ndarray) -> np.ndarray:
        """Rebuild (batch, n, H, W) float32 stacks ending at the given slots."""
        n = self.frame_stack
        idx = np.empty((len(slots), n), dtype=np.int64)
        idx[:, -1] = slots
        for k in range(1, n):
            back = (slots - k) % self.capacity
            same = (self._episode_id[back] == self._episode_id[slots]) & (
                self._step_in_episode[back] == self._step_in_episode[slots] - k
            )
            # before the episode start, repeat the earliest frame available
            idx[:, n - 1 - k] = np.where(same, back, idx[:, n - k])
        return self._frames[idx].astype(np.float32) / 255.0

    def state(self) -> dict:
        """Full contents for checkpointing."""
        out = {
            "vecs": self._vecs,
            "actions": self._actions,
            "rewards": self._rewards,
            "dones": self._dones,
            "latents": self._latents,
            "episode_id": self._episode_id,
            "step_in_episode": self._step_in_episode,
            "is_transition": self._is_transition,
            "scalars": np.array(
                [self._head, self._filled, self._size, self._episode_counter, self._current_step],
                dtype=np.int64,
            ),
        }
        if self.store_frames:
            out["frames"] = self._frames
        return out

    def load_state(self, state: dict) -> None:
        if self.store_frames:
            self._frames[:] = state["frames"]
        self._vecs[:] = state["vecs"]
        self._actions[:] = state["actions"]
        self._rewards[:] = state["rewards"]
        self._dones[:] = state["dones"]
        self._latents[:] = state["latents"]
        self._episode_id[:] = state["episode_id"]
        self._step_in_episode[:] = state["step_in_episode"]
        self._is_transition[:] = state["is_transition"]
        (
            self._head,
            self._filled,
            self._size,
            self._episode_counter,
            self._current_step,
        ) = (int(v) for v in state["scalars"])
