import numpy as np
import pytest
from PIL import Image

from pulsekit import (
    ConfigurationError,
    DispersionCoeffs,
    SpectralField,
    TemporalField,
    apply_phase,
    gaussian_spectrum,
    make_grid,
    taylor_phase,
    to_time,
    transform_limited,
)
from pulsekit.chain import ChainConfig
from pulsekit.frog import FrogConfig, FrogTrace, frog_image, render_png, shg_frog, to_image


@pytest.fixture(scope="module")
def chain():
    return ChainConfig()


@pytest.fixture(scope="module")
def small_field():
    grid = make_grid(256, 1.83, 0.004)
    spec = gaussian_spectrum(grid, 0.05)
    phased = apply_phase(spec, taylor_phase(grid, DispersionCoeffs(gdd=800.0, tod=5e3)))
    return to_time(phased)


def test_raw_shape_and_nonnegative(small_field):
    raw = shg_frog(small_field, n_delay=64, n_freq=128)
    assert raw.values.shape == (128, 64)
    assert raw.values.min() >= 0.0
    assert len(raw.delays) == 64 and len(raw.freq_offsets) == 128


def test_raw_matches_direct_sum(small_field):
    # independent oracle: explicit DFT kernels, no np.fft anywhere
    raw = shg_frog(small_field, n_delay=64, n_freq=256)
    grid = small_field.grid
    offsets, times = grid.offsets, grid.times
    scale = grid.d_omega / np.sqrt(2 * np.pi)
    spec_amp = (
        grid.dt
        / np.sqrt(2 * np.pi)
        * np.einsum("j,mj->m", small_field.amplitude, np.exp(1j * np.outer(offsets, times)))
    )
    probe = scale * np.einsum("m,jm->j", spec_amp, np.exp(-1j * np.outer(times, offsets)))
    assert np.max(np.abs(probe - small_field.amplitude)) < 1e-9
    for k in (0, 17, 31, 32, 63):
        tau = raw.delays[k]
        shifted = scale * np.einsum(
            "m,jm->j", spec_amp * np.exp(1j * offsets * tau), np.exp(-1j * np.outer(times, offsets))
        )
        rows = grid.dt * np.einsum("j,qj->q", probe * shifted, np.exp(-1j * np.outer(offsets, times)))
        expected = np.abs(rows) ** 2
        assert np.allclose(raw.values[:, k], expected, rtol=1e-7, atol=1e-9 * raw.values.max())


def test_raw_delay_symmetry(small_field):
    raw = shg_frog(small_field, n_delay=64, n_freq=128)
    flipped = raw.values[:, ::-1]
    assert np.max(np.abs(raw.values - flipped)) < 1e-6 * raw.values.max()


def test_translation_invariance(small_field):
    grid = small_field.grid
    shift = np.exp(1j * grid.offsets * (5.5 * grid.dt))
    from pulsekit import to_frequency

    spec = to_frequency(small_field)
    moved = to_time(SpectralField(grid=grid, amplitude=spec.amplitude * shift))
    a = shg_frog(small_field, n_delay=64, n_freq=128).values
    b = shg_frog(moved, n_delay=64, n_freq=128).values
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12 * a.max())


def test_tl_pulse_peaks_at_center(chain):
    raw = shg_frog(transform_limited(chain.seed))
    r, c = np.unravel_index(np.argmax(raw.values), raw.values.shape)
    assert abs(raw.freq_offsets[r]) <= 2 * (raw.freq_offsets[1] - raw.freq_offsets[0])
    assert abs(raw.delays[c]) <= (raw.delays[1] - raw.delays[0])


def test_rejects_zero_field_and_small_counts(chain):
    zero = TemporalField(grid=chain.grid, amplitude=np.zeros(chain.grid.n, complex))
    with pytest.raises(ConfigurationError):
        shg_frog(zero)
    with pytest.raises(ConfigurationError):
        shg_frog(transform_limited(chain.seed), n_delay=32)


def test_image_constant_raw_is_all_ones(small_field):
    raw = shg_frog(small_field, n_delay=64, n_freq=128)
    flat = type(raw)(
        values=np.ones_like(raw.values),
        delays=raw.delays,
        freq_offsets=raw.freq_offsets,
        omega0=raw.omega0,
    )
    cfg = FrogConfig(delay_span=1000.0, freq_span=0.3)
    img = to_image(flat, cfg)
    assert np.allclose(img.pixels, 1.0)


def test_image_scale_invariance(chain):
    raw = shg_frog(transform_limited(chain.seed))
    scaled = type(raw)(
        values=37.5 * raw.values, delays=raw.delays, freq_offsets=raw.freq_offsets, omega0=raw.omega0
    )
    a = to_image(raw)
    b = to_image(scaled)
    assert np.allclose(a.pixels, b.pixels, atol=1e-12)


def test_image_geometry_and_normalization(chain):
    img = frog_image(transform_limited(chain.seed))
    assert img.pixels.shape == (64, 64)
    assert img.pixels.max() == pytest.approx(1.0)
    assert img.pixels.min() >= 0.0
    r, c = np.unravel_index(np.argmax(img.pixels), img.pixels.shape)
    assert 30 <= r <= 33 and 30 <= c <= 33


def test_image_delay_symmetry_for_asymmetric_pulse(chain):
    # mixed second- and third-order phase breaks every pulse symmetry,
    # yet the trace must stay delay-symmetric
    field = to_time(
        apply_phase(chain.seed, taylor_phase(chain.grid, DispersionCoeffs(gdd=5e4, tod=1.5e6)))
    )
    img = frog_image(field)
    assert np.max(np.abs(img.pixels - img.pixels[:, ::-1])) < 1e-6
    # and the frequency axis is genuinely asymmetric (the test is not vacuous)
    assert np.max(np.abs(img.pixels - img.pixels[::-1, :])) > 1e-3


def test_image_crop_must_fit(small_field):
    raw = shg_frog(small_field, n_delay=64, n_freq=128)
    with pytest.raises(ConfigurationError):
        to_image(raw, FrogConfig(delay_span=1e6, freq_span=0.01))


def test_image_rejects_all_zero(small_field):
    raw = shg_frog(small_field, n_delay=64, n_freq=128)
    dead = type(raw)(
        values=np.zeros_like(raw.values),
        delays=raw.delays,
        freq_offsets=raw.freq_offsets,
        omega0=raw.omega0,
    )
    with pytest.raises(ConfigurationError):
        to_image(dead)


def test_trace_pixel_range_enforced():
    with pytest.raises(ConfigurationError):
        FrogTrace(pixels=np.full((64, 64), 1.5), delay_span=1.0, freq_span=1.0)


def test_delay_width_grows_with_gdd(chain):
    moments = []
    cols = np.arange(64) - 31.5
    for gdd in (0.0, 5e4, 1e5, 2e5):
        field = to_time(apply_phase(chain.seed, taylor_phase(chain.grid, DispersionCoeffs(gdd=gdd))))
        img = frog_image(field)
        w = img.pixels.sum(axis=0)
        moments.append(float(np.sum(w * cols**2) / np.sum(w)))
    assert moments == sorted(moments)
    assert moments[-1] > 2 * moments[0]


def test_determinism(chain):
    field = to_time(apply_phase(chain.seed, taylor_phase(chain.grid, DispersionCoeffs(gdd=7e4))))
    a = frog_image(field).pixels
    b = frog_image(field).pixels
    assert np.array_equal(a, b)


def test_render_png_round_trip(tmp_path, chain):
    img = frog_image(transform_limited(chain.seed))
    path = tmp_path / "trace.png"
    render_png(img, str(path))
    back = np.asarray(Image.open(path))
    assert back.shape == (64, 64)
    assert back.dtype == np.uint8
    assert np.array_equal(back, np.round(255 * img.pixels).astype(np.uint8))
    assert back.max() == 255
