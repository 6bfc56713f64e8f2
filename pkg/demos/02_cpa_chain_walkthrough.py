"""
Stretch, amplify, compress: one pass through the chain
======================================================

Follows a seed pulse stage by stage.  The stretcher applies the
controllable phase psi, the amplifier adds gain plus an intensity-shaped
nonlinear phase parameterized by the B-integral, and the fixed compressor
applies psi_c.  With psi = -psi_c and B = 0 the output is exactly the
transform limit; nonlinearity breaks that cancellation.
"""

import csv

import numpy as np

from pulsekit import (
    ChainConfig,
    DispersionCoeffs,
    LatentDynamics,
    amplify,
    compress,
    fwhm,
    peak_intensity,
    propagate,
    stretch,
    tl_reference,
    to_time,
    transform_limited,
)

chain = ChainConfig()
neutral = DispersionCoeffs(*(-chain.compressor_psi.as_array()))
tl_peak = tl_reference(chain)
tl_tau = fwhm(transform_limited(chain.seed))
print(f"seed transform limit: {tl_tau:.2f} fs, peak {tl_peak:.6g}")

# -- stage by stage at B = 0 --------------------------------------------------

stretched = stretch(chain.seed, neutral)
print(f"\nstretched duration: {fwhm(to_time(stretched)):.0f} fs "
      f"({fwhm(to_time(stretched)) / tl_tau:.1f}x the transform limit)")

for b in [0.0, 1.0, 2.0]:
    amped = amplify(stretched, LatentDynamics(b_integral=b, gain=chain.gain))
    out = to_time(compress(amped, chain))
    ratio = peak_intensity(out) / tl_peak
    print(f"B = {b:.1f}: compressed peak ratio {ratio:.4f}, fwhm {fwhm(out):.2f} fs")

# -- the nonlinearity is what the agent has to fight --------------------------
# sweep B at the neutral setting and write the curve for plotting elsewhere

rows = []
for b in np.linspace(0.0, 4.0, 21):
    out = propagate(neutral, LatentDynamics(b_integral=float(b), gain=chain.gain), chain)
    rows.append([float(b), peak_intensity(out) / tl_peak])

with open("demos_chain_sweep.csv", "w", newline="") as fh:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["b_integral", "neutral_peak_ratio"])
    writer.writerows(rows)
print("\nwrote demos_chain_sweep.csv (neutral-setting peak ratio vs B)")

# at B = 2 the neutral setting is no longer the best one; a small extra
# positive GDD partially pre-compensates the SPM phase
dyn = LatentDynamics(b_integral=2.0, gain=chain.gain)
best = max(
    (peak_intensity(propagate(DispersionCoeffs(neutral.gdd + d, neutral.tod, neutral.fod), dyn, chain)) / tl_peak, d)
    for d in np.linspace(-3e4, 3e4, 41)
)
print(f"B = 2: neutral ratio {rows[10][1]:.4f}, "
      f"best GDD offset {best[1]:+.0f} fs^2 gives {best[0]:.4f}")
