"""Second-harmonic FROG trace synthesis and 64x64 image rendering.

The trace is the delay-resolved power spectrum of the gated field,

    raw(omega, tau) = | sum_t E(t) * E(t - tau) * exp(-i*omega*t) * dt |^2,

with the frequency axis centered at twice the carrier.  Delays are realized
as exact band-limited shifts (spectral phase ramps), so the delay-axis
symmetry of the SHG gate holds to rounding error for every delay value.

For speed the gate products are formed on a working grid restricted to the
central frequency bins that carry the envelope's energy; the grid is widened
automatically if the field is broader than expected.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ConfigurationError
from .pulse import SpectralField, TemporalField, make_grid, to_frequency

__all__ = [
    "FrogConfig",
    "RawFrogTrace",
    "FrogTrace",
    "shg_frog",
    "to_image",
    "frog_image",
    "render_png",
]


@dataclass(frozen=True)
class FrogConfig:
    """Crop spans and output geometry for rendered traces.

    Spans are full widths: the image covers delay in [-delay_span/2,
    +delay_span/2] and frequency in 2*omega0 +- freq_span/2.  Fixed spans
    keep pixel coordinates meaningful across different controls.
    """

    delay_span: float = 12000.0
    freq_span: float = 0.16
    size: int = 64
    n_delay: int = 128
    log_scale: bool = False

    def __post_init__(self):
        if self.delay_span <= 0 or self.freq_span <= 0:
            raise ConfigurationError("crop spans must be positive")
        if self.size < 8:
            raise ConfigurationError(f"image size too small: {self.size}")
        if self.n_delay < 64:
            raise ConfigurationError(f"need at least 64 delays, got {self.n_delay}")


@dataclass(frozen=True)
class RawFrogTrace:
    """Un-normalized trace with its axes; rows are frequency, columns delay."""

    values: np.ndarray
    delays: np.ndarray
    freq_offsets: np.ndarray  # omega - 2*omega0 per row
    omega0: float


@dataclass(frozen=True)
class FrogTrace:
    """Normalized square image of the trace plus the spans it covers."""

    pixels: np.ndarray
    delay_span: float
    freq_span: float

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 2 or p.shape[0] != p.shape[1]:
            raise ConfigurationError(f"trace image must be square, got {p.shape}")
        if p.min() < 0.0 or p.max() > 1.0 + 1e-12:
            raise ConfigurationError("trace pixels must lie in [0, 1]")


def _working_spectrum(field: TemporalField) -> SpectralField:
    """Band-limit to the central bins holding all but <=1e-9 of the energy."""
    spec = to_frequency(field)
    n = field.grid.n
    total = float(np.sum(np.abs(spec.amplitude) ** 2))
    if total <= 0.0:
        raise ConfigurationError("cannot compute a trace for a zero field")
    size = 1024
    while size < n:
        lo = (n - size) // 2
        inner = float(np.sum(np.abs(spec.amplitude[lo : lo + size]) ** 2))
        if total - inner <= 1e-9 * total:
            grid = make_grid(size, field.grid.omega0, field.grid.d_omega)
            return SpectralField(grid=grid, amplitude=spec.amplitude[lo : lo + size].copy())
        size *= 2
    return spec


def shg_frog(field: TemporalField, n_delay: int = 128, n_freq: int = 1024) -> RawFrogTrace:
    """Raw SHG trace of shape (n_freq, n_delay).

    Delays are cell-centered over the field's full time window (symmetric
    about zero); frequency rows cover the working grid's band around twice
    the carrier.
    """
    if n_delay < 64 or n_freq < 64:
        raise ConfigurationError("n_delay and n_freq must both be >= 64")
    spec = _working_spectrum(field)
    grid = spec.grid
    n = grid.n
    window = n * grid.dt
    delays = (np.arange(n_delay) + 0.5 - n_delay / 2) * (window / n_delay)

    # E(t - tau) for all delays at once: ramp the spectrum, transform back
    ramps = np.exp(1j * np.outer(delays, grid.offsets))
    shifted = np.fft.fftshift(
        np.fft.fft(np.fft.ifftshift(spec.amplitude * ramps, axes=-1), axis=-1, norm="ortho"),
        axes=-1,
    ) * (grid.d_omega * np.sqrt(n / (2.0 * np.pi)))
    probe = np.fft.fftshift(
        np.fft.fft(np.fft.ifftshift(spec.amplitude), norm="ortho")
    ) * (grid.d_omega * np.sqrt(n / (2.0 * np.pi)))

    gated = probe[None, :] * shifted
    rows = np.fft.fftshift(
        np.fft.fft(np.fft.ifftshift(gated, axes=-1), axis=-1), axes=-1
    ) * grid.dt
    values = np.abs(rows) ** 2  # (n_delay, n) -> transpose below

    freq_offsets = grid.offsets.copy()  # spacing d_omega, centered on 2*omega0
    raw = values.T
    if n_freq != n:
        dst_edges = np.linspace(
            freq_offsets[0] - grid.d_omega / 2, freq_offsets[-1] + grid.d_omega / 2, n_freq + 1
        )
        raw = _overlap_matrix(_cell_edges(freq_offsets[0], n, grid.d_omega), dst_edges) @ raw
        freq_offsets = (dst_edges[:-1] + dst_edges[1:]) / 2
    return RawFrogTrace(values=raw, delays=delays, freq_offsets=freq_offsets, omega0=grid.omega0)


def _cell_edges(lo_center: float, n: int, step: float) -> np.ndarray:
    """Edges of n cells of the given step whose first center is lo_center."""
    return lo_center - step / 2 + step * np.arange(n + 1)


def _overlap_matrix(src_edges: np.ndarray, dst_edges: np.ndarray) -> np.ndarray:
    """Row-stochastic box-overlap weights mapping src cells onto dst cells.

    Entry (i, j) is the fraction of destination cell i covered by source
    cell j; rows sum to 1 when the destination range lies inside the source
    range, which makes the mapping an exact area average.
    """
    lo = np.maximum(dst_edges[:-1, None], src_edges[None, :-1])
    hi = np.minimum(dst_edges[1:, None], src_edges[None, 1:])
    overlap = np.clip(hi - lo, 0.0, None)
    widths = dst_edges[1:] - dst_edges[:-1]
    return overlap / widths[:, None]


def to_image(raw: RawFrogTrace, config: FrogConfig = FrogConfig()) -> FrogTrace:
    """Crop the raw trace to the configured spans and resample to a square image.

    Area-average (box overlap) resampling avoids aliasing of thin trace
    features; the result is divided by its maximum so the brightest pixel
    is exactly 1.
    """
    if float(raw.values.max()) <= 0.0:
        raise ConfigurationError("cannot normalize an all-zero trace")
    d_tau = float(raw.delays[1] - raw.delays[0])
    d_nu = float(raw.freq_offsets[1] - raw.freq_offsets[0])
    src_tau = _cell_edges(float(raw.delays[0]), len(raw.delays), d_tau)
    src_nu = _cell_edges(float(raw.freq_offsets[0]), len(raw.freq_offsets), d_nu)
    half_tau, half_nu = config.delay_span / 2, config.freq_span / 2
    if -half_tau < src_tau[0] or half_tau > src_tau[-1] or -half_nu < src_nu[0] or half_nu > src_nu[-1]:
        raise ConfigurationError(
            "configured spans exceed the raw trace extent; recompute with a wider trace"
        )
    w_nu = _overlap_matrix(src_nu, np.linspace(-half_nu, half_nu, config.size + 1))
    w_tau = _overlap_matrix(src_tau, np.linspace(-half_tau, half_tau, config.size + 1))
    img = w_nu @ raw.values @ w_tau.T
    img = img / img.max()
    if config.log_scale:
        img = 1.0 + np.log10(np.maximum(img, 1e-4)) / 4.0
    return FrogTrace(pixels=img, delay_span=config.delay_span, freq_span=config.freq_span)


def frog_image(field: TemporalField, config: FrogConfig = FrogConfig()) -> FrogTrace:
    """Trace synthesis and rendering in one step; what an environment observes."""
    return to_image(shg_frog(field, n_delay=config.n_delay), config)


def render_png(trace: FrogTrace, path: str) -> None:
    """Write the trace as an 8-bit grayscale PNG, one byte per pixel.

    Row 0 of the image is the lowest frequency; values map to bytes as
    round(255 * value), so reading the file back reproduces the quantized
    trace exactly.
    """
    data = np.round(255.0 * trace.pixels).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")
