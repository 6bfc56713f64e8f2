"""
Pulses, spectral phase, and why GDD stretches things
====================================================

A frequency grid, a Gaussian spectrum on it, and Taylor-expanded spectral
phase are all it takes to reproduce the textbook chirp-broadening curve.
"""

import numpy as np

from pulsekit import (
    DispersionCoeffs,
    apply_phase,
    fwhm,
    gaussian_spectrum,
    make_grid,
    peak_intensity,
    taylor_phase,
    to_time,
)

# 1030 nm carrier, 4096 samples, 0.5 mrad/fs spacing: plenty of temporal
# headroom for the largest stretch we apply below
grid = make_grid(4096, omega0=1.8287879294260712, d_omega=5e-4)
spectrum = gaussian_spectrum(grid, fwhm_bandwidth=0.0178)

flat = to_time(spectrum)
tau0 = fwhm(flat)
print(f"transform-limited duration: {tau0:.2f} fs")
print(f"time-bandwidth product:     {tau0 * 0.0178 / (4 * np.log(2)):.4f} (Gaussian: 1)")

# sweep pure second-order phase and compare against the closed form
print("\n  GDD [fs^2]   measured FWHM   analytic FWHM   peak vs TL")
for gdd in [0.0, 2e4, 5e4, 1e5, 2.5e5]:
    phase = taylor_phase(grid, DispersionCoeffs(gdd=gdd))
    chirped = to_time(apply_phase(spectrum, phase))
    width = fwhm(chirped)
    analytic = tau0 * np.sqrt(1.0 + (4 * np.log(2) * gdd / tau0**2) ** 2)
    ratio = peak_intensity(chirped) / peak_intensity(flat)
    print(f"  {gdd:10.0f}   {width:13.2f}   {analytic:13.2f}   {ratio:10.4f}")

# third- and fourth-order terms do not broaden a Gaussian symmetrically;
# they redistribute energy into pre/post pulses instead
print("\nhigher orders at fixed energy:")
for psi in [DispersionCoeffs(tod=2e6), DispersionCoeffs(fod=5e8)]:
    shaped = to_time(apply_phase(spectrum, taylor_phase(grid, psi)))
    print(
        f"  {psi}: fwhm {fwhm(shaped):7.2f} fs, "
        f"peak ratio {peak_intensity(shaped) / peak_intensity(flat):.4f}"
    )

# energy is conserved by construction: the transform is unitary up to the
# integration measure, and spectral phase never touches |amplitude|
print(f"\nenergy flat vs chirped: {flat.energy:.6f} vs {chirped.energy:.6f}")
