"""Non-learning baseline: independent one-dimensional coordinate sweeps."""

from __future__ import annotations

import numpy as np

from ..env import ControlBounds
from ..errors import ConfigurationError

__all__ = ["grid_search_1d"]


def grid_search_1d(objective, bounds: ControlBounds, resolution: int = 50):
    """Sweep each coefficient over its full range, holding the others fixed.

    Dimensions are scanned in a fixed order (second-, third-, fourth-order
    dispersion), each sweep updating the incumbent before the next starts.
    The incumbent begins at the center of the box.  Exactly
    ``3 * resolution`` objective evaluations are made.

    Returns ``(best_psi, history)`` with history the full evaluation record
    as ``(psi, value)`` pairs, in query order.
    """
    if resolution < 2:
        raise ConfigurationError(f"resolution must be >= 2, got {resolution}")
    incumbent = (bounds.lo + bounds.hi) / 2
    history = []
    for dim in range(3):
        candidates = np.linspace(bounds.psi_min[dim], bounds.psi_max[dim], resolution)
        best_value, best_setting = -np.inf, incumbent[dim]
        for value in candidates:
            psi = incumbent.copy()
            psi[dim] = value
            score = float(objective(psi))
            history.append((psi, score))
            if score > best_value:
                best_value, best_setting = score, value
        incumbent[dim] = best_setting
    return incumbent, history
