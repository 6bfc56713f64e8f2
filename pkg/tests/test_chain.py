import numpy as np
import pytest

from pulsekit import DispersionCoeffs, ConfigurationError, fwhm, peak_intensity, to_time
from pulsekit.chain import (
    ChainConfig,
    LatentDynamics,
    amplify,
    compress,
    propagate,
    stretch,
    tl_reference,
)


@pytest.fixture(scope="module")
def config():
    return ChainConfig()


@pytest.fixture(scope="module")
def neutral(config):
    # the control that exactly cancels the compressor
    return -config.compressor_psi


def spectral_width(field):
    """Outermost half-max width of a spectral intensity profile."""
    inten = field.intensity
    above = np.nonzero(inten >= inten.max() / 2)[0]
    return (above[-1] - above[0]) * field.grid.d_omega


def test_latent_dynamics_validation():
    with pytest.raises(ConfigurationError):
        LatentDynamics(b_integral=-0.1)
    with pytest.raises(ConfigurationError):
        LatentDynamics(b_integral=1.0, gain=0.5)


def test_stretch_identity(config):
    out = stretch(config.seed, DispersionCoeffs())
    assert np.array_equal(out.amplitude, config.seed.amplitude)


def test_stretch_ratio(config):
    # pure GDD of 2.5e5 fs^2 stretches the 156 fs seed by ~28.5x
    tau0 = fwhm(to_time(config.seed))
    tau = fwhm(to_time(stretch(config.seed, DispersionCoeffs(gdd=2.5e5))))
    expected = np.sqrt(1 + (4 * np.log(2) * 2.5e5 / tau0**2) ** 2)
    assert tau / tau0 == pytest.approx(expected, rel=1e-2)
    assert 28.0 < tau / tau0 < 29.0


def test_stretch_is_phase_only(config):
    out = stretch(config.seed, DispersionCoeffs(gdd=1e5, tod=-3e5, fod=2e6))
    assert np.allclose(out.intensity, config.seed.intensity)


def test_amplify_linear_case(config):
    dyn = LatentDynamics(b_integral=0.0, gain=4.0)
    out = amplify(config.seed, dyn)
    assert np.allclose(out.amplitude, 2.0 * config.seed.amplitude, atol=1e-12)
    assert out.energy == pytest.approx(4.0 * config.seed.energy, rel=1e-9)


def test_amplify_preserves_temporal_envelope(config):
    stretched = stretch(config.seed, DispersionCoeffs(gdd=2.5e5))
    out = amplify(stretched, LatentDynamics(b_integral=2.0, gain=3.0))
    before = to_time(stretched).intensity
    after = to_time(out).intensity
    assert np.allclose(after, 3.0 * before, rtol=1e-9, atol=1e-12)


def test_amplify_broadens_spectrum(config):
    stretched = stretch(config.seed, DispersionCoeffs(gdd=2.5e5))
    w0 = spectral_width(amplify(stretched, LatentDynamics(b_integral=0.0)))
    w2 = spectral_width(amplify(stretched, LatentDynamics(b_integral=2.0)))
    assert w2 > w0 * 1.05


def test_amplify_rejects_zero_field(config):
    from pulsekit import SpectralField

    zero = SpectralField(grid=config.grid, amplitude=np.zeros(config.grid.n, complex))
    with pytest.raises(ConfigurationError):
        amplify(zero, LatentDynamics(b_integral=1.0))


def test_compress_cancels_matched_stretch(config, neutral):
    out = compress(stretch(config.seed, neutral), config)
    assert np.max(np.abs(out.amplitude - config.seed.amplitude)) < 1e-12
    assert out.energy == pytest.approx(config.seed.energy, rel=1e-12)


def test_compress_identity_when_psi_zero(config):
    cfg = ChainConfig(compressor_psi=DispersionCoeffs())
    out = compress(cfg.seed, cfg)
    assert np.array_equal(out.amplitude, cfg.seed.amplitude)


def test_propagate_neutral_linear_hits_tl(config, neutral):
    out = propagate(neutral, LatentDynamics(b_integral=0.0), config)
    assert peak_intensity(out) == pytest.approx(tl_reference(config), rel=1e-6)


def test_propagate_nonlinearity_breaks_cancellation(config, neutral):
    out = propagate(neutral, LatentDynamics(b_integral=2.0), config)
    assert peak_intensity(out) < 0.95 * tl_reference(config)


def test_propagate_b_changes_width(config, neutral):
    a = fwhm(propagate(neutral, LatentDynamics(b_integral=0.5), config))
    b = fwhm(propagate(neutral, LatentDynamics(b_integral=3.83), config))
    assert abs(a - b) > 0.05 * a


def test_propagate_deterministic(config, neutral):
    dyn = LatentDynamics(b_integral=1.7)
    a = propagate(neutral, dyn, config)
    b = propagate(neutral, dyn, config)
    assert np.array_equal(a.amplitude, b.amplitude)


def test_energy_conservation(config):
    rng = np.random.default_rng(11)
    for _ in range(5):
        psi = DispersionCoeffs.from_array(rng.uniform(-1, 1, 3) * [3e5, 2e6, 1e7])
        dyn = LatentDynamics(b_integral=rng.uniform(0, 4), gain=rng.uniform(1, 10))
        out = propagate(psi, dyn, config)
        assert out.energy == pytest.approx(config.seed.energy * dyn.gain, rel=1e-9)


def test_tl_reference_scales_with_gain():
    base = tl_reference(ChainConfig(gain=1.0))
    assert tl_reference(ChainConfig(gain=4.0)) == pytest.approx(4.0 * base, rel=1e-12)


def test_tl_reference_bounds_linear_chain(config):
    rng = np.random.default_rng(5)
    ref = tl_reference(config)
    dyn = LatentDynamics(b_integral=0.0, gain=config.gain)
    for _ in range(100):
        psi = DispersionCoeffs.from_array(rng.uniform(-1, 1, 3) * [3e5, 2.4e6, 2e6])
        assert peak_intensity(propagate(psi, dyn, config)) <= ref * (1 + 1e-9)


def test_peak_intensity_is_continuous_in_controls(config, neutral):
    # 0.1% steps of the control range move the peak by well under 5%
    ranges = np.array([1e5, 8e5, 4e6])  # full widths of the control box
    dyn = LatentDynamics(b_integral=1.5)
    base = np.array(neutral.as_array())
    p0 = peak_intensity(propagate(DispersionCoeffs.from_array(base), dyn, config))
    for i in range(3):
        stepped = base.copy()
        stepped[i] += 0.001 * ranges[i]
        p1 = peak_intensity(propagate(DispersionCoeffs.from_array(stepped), dyn, config))
        assert abs(p1 - p0) / p0 < 0.05
