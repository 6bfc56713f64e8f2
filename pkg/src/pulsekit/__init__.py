"""Pulse-shaping simulation and learned control for chirped-pulse amplifier chains."""

from .errors import (
    ConfigurationError,
    EpisodeOverError,
    GridMismatchError,
    MeasurementError,
    NumericalError,
    PulsekitError,
)
from .pulse import (
    C_NM_PER_FS,
    DispersionCoeffs,
    FrequencyGrid,
    PhaseArray,
    SpectralField,
    TemporalField,
    apply_phase,
    fwhm,
    gaussian_spectrum,
    make_grid,
    peak_intensity,
    taylor_phase,
    to_frequency,
    to_time,
    transform_limited,
)
from .chain import (
    ChainConfig,
    LatentDynamics,
    amplify,
    compress,
    propagate,
    stretch,
    tl_reference,
)

__version__ = "0.1.0"
