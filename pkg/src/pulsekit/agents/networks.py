"""Torch networks: pixel encoder, squashed-Gaussian actor, twin critics."""

from __future__ import annotations

import math

import torch
from torch import nn

__all__ = ["PixelEncoder", "Actor", "TwinCritic"]


class PixelEncoder(nn.Module):
    """Three stride-2 convolutions on the stacked traces, projected to 128-d.

    64 -> 31 -> 15 -> 7 spatial, 32 channels throughout; the projection is
    layer-normalized and squashed so downstream trunks see a bounded input.
    """

    embed_dim = 128

    def __init__(self, frame_stack: int):
        super().__init__()
        self.conv = nn.Sequential(
            nn.Conv2d(frame_stack, 32, kernel_size=3, stride=2),
            nn.ReLU(),
            nn.Conv2d(32, 32, kernel_size=3, stride=2),
            nn.ReLU(),
            nn.Conv2d(32, 32, kernel_size=3, stride=2),
            nn.ReLU(),
            nn.Flatten(),
        )
        self.project = nn.Sequential(
            nn.Linear(32 * 7 * 7, self.embed_dim),
            nn.LayerNorm(self.embed_dim),
            nn.Tanh(),
        )

    def forward(self, frames: torch.Tensor) -> torch.Tensor:
        return self.project(self.conv(frames))


def _trunk(in_dim: int, out_dim: int, hidden: int = 256) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(in_dim, hidden),
        nn.ReLU(),
        nn.Linear(hidden, hidden),
        nn.ReLU(),
        nn.Linear(hidden, out_dim),
    )


class Actor(nn.Module):
    """Gaussian policy head squashed by tanh; outputs stay inside [-1,1]^dim."""

    def __init__(self, feature_dim: int, action_dim: int, log_std_min: float, log_std_max: float):
        super().__init__()
        self.net = _trunk(feature_dim, 2 * action_dim)
        self.action_dim = action_dim
        self.log_std_min = log_std_min
        self.log_std_max = log_std_max

    def forward(self, features: torch.Tensor):
        mean, log_std = self.net(features).chunk(2, dim=-1)
        log_std = torch.clamp(log_std, self.log_std_min, self.log_std_max)
        return mean, log_std

    def sample(self, features: torch.Tensor, noise: torch.Tensor):
        """Reparameterized squashed sample and its log-density.

        The caller supplies the standard-normal noise so action draws stay
        reproducible under an externally managed generator.
        """
        mean, log_std = self(features)
        std = log_std.exp()
        pre_tanh = mean + std * noise
        action = torch.tanh(pre_tanh)
        log_prob = (-0.5 * noise.pow(2) - log_std - 0.5 * math.log(2 * math.pi)).sum(-1)
        # tanh change of variables, in the numerically safe softplus form
        log_prob = log_prob - (
            2.0 * (math.log(2.0) - pre_tanh - nn.functional.softplus(-2.0 * pre_tanh))
        ).sum(-1)
        return action, log_prob


class TwinCritic(nn.Module):
    """Two independent Q heads; training always regresses both."""

    def __init__(self, input_dim: int):
        super().__init__()
        self.q1 = _trunk(input_dim, 1)
        self.q2 = _trunk(input_dim, 1)

    def forward(self, features_and_action: torch.Tensor):
        return (
            self.q1(features_and_action).squeeze(-1),
            self.q2(features_and_action).squeeze(-1),
        )
