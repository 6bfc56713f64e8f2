"""Forward model of a chirped-pulse amplification chain.

The chain is stretch -> amplify -> compress.  The stretcher phase is the
control; the compressor phase is fixed by the hardware.  The amplifier
applies a scalar energy gain plus a lumped self-phase-modulation term whose
peak nonlinear phase equals the dimensionless B value, the usual scalar
summary of accumulated nonlinearity.  With B = 0 and a stretcher phase that
exactly cancels the compressor, the output is the transform-limited pulse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigurationError
from .pulse import (
    DispersionCoeffs,
    FrequencyGrid,
    SpectralField,
    TemporalField,
    apply_phase,
    gaussian_spectrum,
    make_grid,
    peak_intensity,
    taylor_phase,
    to_frequency,
    to_time,
    transform_limited,
)

__all__ = [
    "LatentDynamics",
    "ChainConfig",
    "stretch",
    "amplify",
    "compress",
    "propagate",
    "tl_reference",
]

_OMEGA0_1030NM = 2.0 * np.pi * 299.792458 / 1030.0


@dataclass(frozen=True)
class LatentDynamics:
    """Hidden per-episode physics of the amplifier."""

    b_integral: float
    gain: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.b_integral) or self.b_integral < 0:
            raise ConfigurationError(f"b_integral must be finite and >= 0, got {self.b_integral}")
        if not np.isfinite(self.gain) or self.gain < 1.0:
            raise ConfigurationError(f"gain must be finite and >= 1, got {self.gain}")


@dataclass(frozen=True)
class ChainConfig:
    """Immutable description of the chain: seed pulse, grid, fixed compressor."""

    grid_n: int = 4096
    omega0: float = _OMEGA0_1030NM
    d_omega: float = 5e-4
    bandwidth: float = 0.0178
    seed_energy: float = 1.0
    compressor_psi: DispersionCoeffs = field(
        default=DispersionCoeffs(gdd=-2.5e5, tod=2.0e6, fod=0.0)
    )
    gain: float = 1.0

    def __post_init__(self):
        if self.gain < 1.0:
            raise ConfigurationError(f"gain must be >= 1, got {self.gain}")
        for v in self.compressor_psi.as_array():
            if not np.isfinite(v):
                raise ConfigurationError("compressor coefficients must be finite")

    @cached_property
    def grid(self) -> FrequencyGrid:
        return make_grid(self.grid_n, self.omega0, self.d_omega)

    @cached_property
    def seed(self) -> SpectralField:
        return gaussian_spectrum(self.grid, self.bandwidth, self.seed_energy)


def stretch(field: SpectralField, psi: DispersionCoeffs) -> SpectralField:
    """Apply the controllable stretcher phase (pure spectral phase)."""
    return apply_phase(field, taylor_phase(field.grid, psi))


def amplify(field: SpectralField, dyn: LatentDynamics) -> SpectralField:
    """Scalar gain plus lumped self-phase modulation.

    In the time domain E_out = sqrt(gain) * E_in * exp(i*B*P(t)/P_peak) with
    P = |E_in|^2, so the temporal envelope is only scaled while the phase
    picks up an intensity-shaped modulation; total energy scales exactly by
    the gain.
    """
    pulse = to_time(field)
    power = np.abs(pulse.amplitude) ** 2
    p_peak = float(power.max())
    if p_peak <= 0.0:
        raise ConfigurationError("cannot amplify a zero field")
    nl_phase = dyn.b_integral * power / p_peak
    out = np.sqrt(dyn.gain) * pulse.amplitude * np.exp(1j * nl_phase)
    return to_frequency(TemporalField(grid=field.grid, amplitude=out))


def compress(field: SpectralField, config: ChainConfig) -> SpectralField:
    """Apply the fixed compressor phase."""
    return apply_phase(field, taylor_phase(field.grid, config.compressor_psi))


def propagate(psi: DispersionCoeffs, dyn: LatentDynamics, config: ChainConfig) -> TemporalField:
    """Full chain output for a control psi under latent dynamics dyn.

    Deterministic: identical arguments give bit-identical output.
    """
    return to_time(compress(amplify(stretch(config.seed, psi), dyn), config))


def tl_reference(config: ChainConfig) -> float:
    """Peak intensity of the gain-scaled transform-limited pulse.

    Upper bound for the linear (B=0) chain over all controls; the reward
    denominator.  Constant per configuration.
    """
    return config.gain * peak_intensity(transform_limited(config.seed))
