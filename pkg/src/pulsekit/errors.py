"""Exception types shared across the package."""


class PulsekitError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(PulsekitError):
    """Invalid grid, spectrum, bounds, or experiment configuration."""


class GridMismatchError(PulsekitError):
    """Two fields or arrays defined on different frequency grids."""


class MeasurementError(PulsekitError):
    """A pulse metric cannot be evaluated (e.g. FWHM crossing missing)."""


class NumericalError(PulsekitError):
    """Non-finite losses, singular covariances, and similar failures."""


class EpisodeOverError(PulsekitError):
    """step() called on an environment whose episode already ended."""
