"""Episodic pulse-shaping control environment.

Each episode hides a freshly sampled nonlinearity value; the agent nudges
the stretcher dispersion within hard bounds and observes stacked trace
images plus its normalized coefficients and previous action.  Reward is the
peak intensity relative to the transform-limited reference, clipped to 1.

Safety contract: a single step can never move any coefficient by more than
``alpha`` times its allowed range, and coefficients never leave the bounds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .chain import ChainConfig, LatentDynamics, propagate, tl_reference
from .errors import ConfigurationError, EpisodeOverError, MeasurementError
from .frog import FrogConfig, FrogTrace, frog_image
from .pulse import DispersionCoeffs, TemporalField, fwhm, peak_intensity
from .randomization import DrDistribution, sample

__all__ = [
    "ControlBounds",
    "EnvConfig",
    "Observation",
    "StepResult",
    "LaserEnv",
    "observation_normalizers",
]


@dataclass(frozen=True)
class ControlBounds:
    """Hard per-coefficient control box and the step-size fraction."""

    psi_min: tuple
    psi_max: tuple
    alpha: float = 0.1

    def __post_init__(self):
        if len(self.psi_min) != 3 or len(self.psi_max) != 3:
            raise ConfigurationError("bounds must cover the three dispersion orders")
        if not all(lo < hi for lo, hi in zip(self.psi_min, self.psi_max)):
            raise ConfigurationError(f"need min < max, got {self.psi_min} / {self.psi_max}")
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigurationError(f"alpha must be in (0, 1], got {self.alpha}")

    @classmethod
    def centered(
        cls,
        center: DispersionCoeffs,
        half_widths: tuple = (5e4, 4e5, 2e6),
        alpha: float = 0.1,
    ) -> "ControlBounds":
        c = center.as_array()
        w = np.asarray(half_widths, dtype=float)
        return cls(psi_min=tuple(c - w), psi_max=tuple(c + w), alpha=alpha)

    @property
    def lo(self) -> np.ndarray:
        return np.array(self.psi_min, dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.array(self.psi_max, dtype=float)

    @property
    def ranges(self) -> np.ndarray:
        """Full variation c available per coefficient."""
        return self.hi - self.lo


@dataclass(frozen=True)
class EnvConfig:
    """Everything an episode needs; immutable and shareable across instances.

    ``bounds``, ``init_mean`` and ``init_std`` default to values derived
    from the chain's compressor: the control box is centered on the
    cancelling stretcher setting, and episodes start in a moderately tight
    normal neighborhood of it (one tenth of the range as one sigma).
    """

    chain: ChainConfig = ChainConfig()
    bounds: Optional[ControlBounds] = None
    horizon: int = 20
    discount: float = 0.9
    init_mean: Optional[tuple] = None
    init_std: Optional[tuple] = None
    frame_stack: int = 5
    latent_distribution: DrDistribution = DrDistribution.fixed(2.0)
    frog: FrogConfig = FrogConfig()
    compute_traces: bool = True

    def __post_init__(self):
        center = -self.chain.compressor_psi
        if self.bounds is None:
            object.__setattr__(self, "bounds", ControlBounds.centered(center))
        if self.init_mean is None:
            object.__setattr__(self, "init_mean", tuple(center.as_array()))
        if self.init_std is None:
            object.__setattr__(self, "init_std", tuple(0.2 * self.bounds.ranges / 2))
        if self.horizon < 1:
            raise ConfigurationError(f"horizon must be >= 1, got {self.horizon}")
        if not 0.0 < self.discount <= 1.0:
            raise ConfigurationError(f"discount must be in (0, 1], got {self.discount}")
        if self.frame_stack < 1:
            raise ConfigurationError(f"frame stack must be >= 1, got {self.frame_stack}")
        if any(s <= 0 for s in self.init_std):
            raise ConfigurationError("init_std must be positive")
        if self.latent_distribution.support[0] < 0:
            raise ConfigurationError("latent nonlinearity cannot be negative")


@dataclass(frozen=True)
class Observation:
    """What the policy sees: stacked traces (most recent last) and vectors."""

    traces: np.ndarray
    psi_norm: np.ndarray
    prev_action_norm: np.ndarray

    def as_vector(self) -> np.ndarray:
        """Trace-free part, for agents that only consume the vectors."""
        return np.concatenate([self.psi_norm, self.prev_action_norm])


@dataclass(frozen=True)
class StepResult:
    observation: Observation
    reward: float
    done: bool
    info: dict


def observation_normalizers(config: EnvConfig):
    """Affine maps between the control box and the unit cube, exact inverses."""
    mid = (config.bounds.lo + config.bounds.hi) / 2
    half = config.bounds.ranges / 2

    def to_unit(psi) -> np.ndarray:
        return (np.asarray(psi, dtype=float) - mid) / half

    def from_unit(u) -> np.ndarray:
        return mid + np.asarray(u, dtype=float) * half

    return to_unit, from_unit


class LaserEnv:
    """Single-threaded episodic environment; instances are independent."""

    def __init__(self, config: EnvConfig = EnvConfig()):
        self.config = config
        self.tl_peak = tl_reference(config.chain)
        self._to_unit, _ = observation_normalizers(config)
        self._rng = np.random.default_rng()
        self._active = False
        self._field: Optional[TemporalField] = None

    def reset(self, seed: Optional[int] = None, latent_override: Optional[LatentDynamics] = None) -> Observation:
        """Start an episode; deterministic for a given seed."""
        rng = np.random.default_rng(seed) if seed is not None else self._rng
        cfg = self.config
        lo, hi = cfg.bounds.lo, cfg.bounds.hi
        mean = np.asarray(cfg.init_mean, dtype=float)
        std = np.asarray(cfg.init_std, dtype=float)
        psi = mean + std * rng.standard_normal(3)
        for _ in range(100):
            out = (psi < lo) | (psi > hi)
            if not out.any():
                break
            psi[out] = mean[out] + std[out] * rng.standard_normal(int(out.sum()))
        else:
            raise ConfigurationError(
                "could not draw an in-bounds start; init_std too wide for the bounds"
            )
        if latent_override is not None:
            self._dyn = latent_override
        else:
            self._dyn = LatentDynamics(
                b_integral=sample(cfg.latent_distribution, rng), gain=cfg.chain.gain
            )
        self._psi = psi
        self._prev_action = np.zeros(3)
        self._step_index = 0
        self._active = True
        frame = self._evaluate()[2]
        self._stack = np.repeat(frame[None, :, :], cfg.frame_stack, axis=0)
        return self._observation()

    def step(self, action) -> StepResult:
        """Apply one bounded control increment and observe the new pulse."""
        if not self._active:
            raise EpisodeOverError("no active episode; call reset()")
        a = np.asarray(action, dtype=float).reshape(3)
        if not np.all(np.isfinite(a)):
            raise ConfigurationError(f"action must be finite, got {a}")
        a = np.clip(a, -1.0, 1.0)
        cfg = self.config
        delta = a * cfg.bounds.alpha * cfg.bounds.ranges
        self._psi = np.clip(self._psi + delta, cfg.bounds.lo, cfg.bounds.hi)
        self._prev_action = a
        ratio, tau, frame = self._evaluate()
        self._stack = np.concatenate([self._stack[1:], frame[None, :, :]])
        self._step_index += 1
        done = self._step_index >= cfg.horizon
        if done:
            self._active = False
        info = {
            "intensity_ratio": ratio,
            "fwhm": tau,
            "b_integral": self._dyn.b_integral,
            "step": self._step_index,
        }
        return StepResult(
            observation=self._observation(),
            reward=min(ratio, 1.0),
            done=done,
            info=info,
        )

    def render(self) -> FrogTrace:
        """Trace of the pulse currently at the chain output."""
        if self._field is None:
            raise EpisodeOverError("nothing to render; call reset()")
        return frog_image(self._field, self.config.frog)

    @property
    def psi(self) -> DispersionCoeffs:
        return DispersionCoeffs.from_array(self._psi)

    @property
    def latent(self) -> LatentDynamics:
        return self._dyn

    def _evaluate(self):
        cfg = self.config
        self._field = propagate(DispersionCoeffs.from_array(self._psi), self._dyn, cfg.chain)
        ratio = peak_intensity(self._field) / self.tl_peak
        try:
            tau = fwhm(self._field)
        except MeasurementError:
            tau = float("nan")
        if cfg.compute_traces:
            frame = frog_image(self._field, cfg.frog).pixels
        else:
            frame = np.zeros((cfg.frog.size, cfg.frog.size))
        return ratio, tau, frame

    def _observation(self) -> Observation:
        return Observation(
            traces=self._stack.copy(),
            psi_norm=self._to_unit(self._psi),
            prev_action_norm=self._prev_action.copy(),
        )
