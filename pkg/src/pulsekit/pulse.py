"""Spectral-domain pulse representation, dispersion, transforms, and metrics.

Fields are stored as complex envelopes sampled on a frequency grid symmetric
about the central angular frequency ``omega0``.  Units are femtoseconds and
rad/fs throughout; energies are in arbitrary units with the convention that
``|amplitude|**2`` integrates (trapezoid-free Riemann sum) to the pulse
energy, both in time and in frequency.

The discrete transforms are scaled so that the continuous unitary Fourier
pair is approximated exactly in the energy sense: Parseval holds to machine
precision, and a frequency->time->frequency round trip is the identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, GridMismatchError, MeasurementError

__all__ = [
    "FrequencyGrid",
    "SpectralField",
    "TemporalField",
    "DispersionCoeffs",
    "PhaseArray",
    "make_grid",
    "gaussian_spectrum",
    "taylor_phase",
    "apply_phase",
    "to_time",
    "to_frequency",
    "peak_intensity",
    "fwhm",
    "transform_limited",
]

#: speed of light in nm/fs, handy for callers converting wavelengths
C_NM_PER_FS = 299.792458


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency grid symmetric about ``omega0``.

    Samples sit at ``omega0 + (k - n/2) * d_omega`` for k = 0..n-1; the
    conjugate time grid sits at ``(k - n/2) * dt`` with ``dt = 2*pi/(n*d_omega)``.
    """

    n: int
    omega0: float
    d_omega: float

    @property
    def dt(self) -> float:
        return 2.0 * np.pi / (self.n * self.d_omega)

    @property
    def offsets(self) -> np.ndarray:
        """omega - omega0 for every sample."""
        return (np.arange(self.n) - self.n // 2) * self.d_omega

    @property
    def omegas(self) -> np.ndarray:
        return self.omega0 + self.offsets

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dt

    @property
    def span(self) -> float:
        """Total angular-frequency width covered by the grid."""
        return self.n * self.d_omega


@dataclass(frozen=True)
class SpectralField:
    """Complex spectral envelope on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    amplitude: np.ndarray

    def __post_init__(self):
        if len(self.amplitude) != self.grid.n:
            raise GridMismatchError(
                f"amplitude length {len(self.amplitude)} != grid size {self.grid.n}"
            )

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.grid.d_omega)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2


@dataclass(frozen=True)
class TemporalField:
    """Complex temporal envelope, sharing the grid of the spectrum it came from."""

    grid: FrequencyGrid
    amplitude: np.ndarray

    def __post_init__(self):
        if len(self.amplitude) != self.grid.n:
            raise GridMismatchError(
                f"amplitude length {len(self.amplitude)} != grid size {self.grid.n}"
            )

    @property
    def energy(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2) * self.grid.dt)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2


@dataclass(frozen=True)
class DispersionCoeffs:
    """Second- to fourth-order dispersion (fs^2, fs^3, fs^4)."""

    gdd: float = 0.0
    tod: float = 0.0
    fod: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.gdd, self.tod, self.fod], dtype=float)

    @classmethod
    def from_array(cls, values) -> "DispersionCoeffs":
        g, t, f = np.asarray(values, dtype=float)
        return cls(float(g), float(t), float(f))

    def __add__(self, other: "DispersionCoeffs") -> "DispersionCoeffs":
        return DispersionCoeffs(self.gdd + other.gdd, self.tod + other.tod, self.fod + other.fod)

    def __neg__(self) -> "DispersionCoeffs":
        return DispersionCoeffs(-self.gdd, -self.tod, -self.fod)


@dataclass(frozen=True)
class PhaseArray:
    """Real spectral phase (rad) on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    phase: np.ndarray

    def __post_init__(self):
        if len(self.phase) != self.grid.n:
            raise GridMismatchError(
                f"phase length {len(self.phase)} != grid size {self.grid.n}"
            )


def make_grid(n: int, omega0: float, d_omega: float) -> FrequencyGrid:
    """Build a frequency grid.

    Parameters
    ----------
    n : int
        Sample count; must be a power of two (>= 8).
    omega0 : float
        Central angular frequency in rad/fs.
    d_omega : float
        Angular-frequency step in rad/fs.
    """
    if n < 8 or (n & (n - 1)) != 0:
        raise ConfigurationError(f"grid size must be a power of two >= 8, got {n}")
    if omega0 <= 0 or d_omega <= 0:
        raise ConfigurationError("omega0 and d_omega must be positive")
    return FrequencyGrid(n=int(n), omega0=float(omega0), d_omega=float(d_omega))


def gaussian_spectrum(grid: FrequencyGrid, fwhm_bandwidth: float, energy: float = 1.0) -> SpectralField:
    """Real Gaussian spectral envelope centered at omega0.

    ``fwhm_bandwidth`` is the full width at half maximum of the spectral
    *intensity* in rad/fs.  The amplitude is normalized so the spectral
    energy equals ``energy``.
    """
    if energy <= 0:
        raise ConfigurationError("energy must be positive")
    if fwhm_bandwidth <= 0 or 4.0 * fwhm_bandwidth >= grid.span:
        raise ConfigurationError(
            f"bandwidth {fwhm_bandwidth} does not fit the grid span {grid.span}"
        )
    # |a|^2 = exp(-4 ln2 (delta/fwhm)^2)  ->  a = exp(-2 ln2 (delta/fwhm)^2)
    delta = grid.offsets
    amp = np.exp(-2.0 * np.log(2.0) * (delta / fwhm_bandwidth) ** 2)
    norm = np.sum(amp**2) * grid.d_omega
    amp = amp * np.sqrt(energy / norm)
    return SpectralField(grid=grid, amplitude=amp.astype(complex))


def taylor_phase(grid: FrequencyGrid, psi: DispersionCoeffs) -> PhaseArray:
    """Polynomial spectral phase from the order-2..4 dispersion coefficients.

    phase(omega) = gdd*d^2/2 + tod*d^3/6 + fod*d^4/24 with d = omega - omega0.
    Orders 0 and 1 only translate the pulse and are omitted.
    """
    d = grid.offsets
    phase = psi.gdd * d**2 / 2.0 + psi.tod * d**3 / 6.0 + psi.fod * d**4 / 24.0
    return PhaseArray(grid=grid, phase=phase)


def apply_phase(field: SpectralField, phase: PhaseArray) -> SpectralField:
    """Multiply the spectral envelope by exp(i*phase); intensity-preserving."""
    if field.grid != phase.grid:
        raise GridMismatchError("field and phase live on different grids")
    return SpectralField(grid=field.grid, amplitude=field.amplitude * np.exp(1j * phase.phase))


def _f2t_scale(grid: FrequencyGrid) -> float:
    return grid.d_omega * np.sqrt(grid.n / (2.0 * np.pi))


def _t2f_scale(grid: FrequencyGrid) -> float:
    return grid.dt * np.sqrt(grid.n / (2.0 * np.pi))


def to_time(field: SpectralField) -> TemporalField:
    """Frequency -> time, unitary in the energy sense.

    Uses the e^{-i(omega-omega0)t} kernel, so the group delay of a phase
    phi(omega) is +dphi/domega (positive GDD delays the blue side).
    """
    amp = np.fft.fftshift(
        np.fft.fft(np.fft.ifftshift(field.amplitude), norm="ortho")
    ) * _f2t_scale(field.grid)
    return TemporalField(grid=field.grid, amplitude=amp)


def to_frequency(field: TemporalField) -> SpectralField:
    """Time -> frequency; exact inverse of :func:`to_time`."""
    amp = np.fft.fftshift(
        np.fft.ifft(np.fft.ifftshift(field.amplitude), norm="ortho")
    ) * _t2f_scale(field.grid)
    return SpectralField(grid=field.grid, amplitude=amp)


def peak_intensity(field: TemporalField) -> float:
    """Maximum of |amplitude(t)|^2 over the time window."""
    return float(np.max(np.abs(field.amplitude) ** 2))


def fwhm(field: TemporalField) -> float:
    """Full width at half maximum of the temporal intensity profile.

    The outermost half-maximum crossings are located by linear interpolation
    between adjacent samples, which keeps the measure stable on multi-lobed
    profiles.  Raises :class:`MeasurementError` when the profile does not
    cross half-max inside the window (pulse truncated; enlarge the grid).
    """
    intensity = np.abs(field.amplitude) ** 2
    peak = float(intensity.max())
    if peak <= 0:
        raise MeasurementError("zero field has no width")
    half = peak / 2.0
    above = np.nonzero(intensity >= half)[0]
    left, right = int(above[0]), int(above[-1])
    if left == 0 or right == len(intensity) - 1:
        raise MeasurementError(
            "intensity does not fall below half-max inside the window; "
            "the time window is too small for this pulse"
        )
    times = field.grid.times
    frac_l = (half - intensity[left - 1]) / (intensity[left] - intensity[left - 1])
    t_l = times[left - 1] + frac_l * field.grid.dt
    frac_r = (half - intensity[right]) / (intensity[right + 1] - intensity[right])
    t_r = times[right] + frac_r * field.grid.dt
    return float(t_r - t_l)


def transform_limited(field: SpectralField) -> TemporalField:
    """Shortest pulse supported by the spectrum: zero phase, same magnitude.

    Depends only on |amplitude|, so any previously applied spectral phase is
    irrelevant.  Its peak intensity is the reference every phased pulse is
    compared against.
    """
    mag = np.abs(field.amplitude)
    if not np.any(mag > 0):
        raise MeasurementError("zero field has no transform-limited reference")
    flat = SpectralField(grid=field.grid, amplitude=mag.astype(complex))
    return to_time(flat)
