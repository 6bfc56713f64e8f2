"""
What the sensor sees: SHG FROG traces
=====================================

The only non-destructive observable in the loop is a 64x64 spectrogram of
the output pulse.  This renders a small gallery: the transform limit, pure
chirp, mixed higher orders, and the chain output under nonlinearity.
"""

from pathlib import Path

from pulsekit import (
    ChainConfig,
    DispersionCoeffs,
    LatentDynamics,
    apply_phase,
    propagate,
    taylor_phase,
    to_time,
    transform_limited,
)
from pulsekit.frog import frog_image, render_png

out = Path("demos_frog_gallery")
out.mkdir(exist_ok=True)
chain = ChainConfig()
neutral = DispersionCoeffs(*(-chain.compressor_psi.as_array()))


def shaped(psi):
    return to_time(apply_phase(chain.seed, taylor_phase(chain.grid, psi)))


gallery = {
    "transform_limited": transform_limited(chain.seed),
    "chirp_5e4": shaped(DispersionCoeffs(gdd=5e4)),
    "third_order_2e6": shaped(DispersionCoeffs(tod=2e6)),
    "mixed_orders": shaped(DispersionCoeffs(gdd=3e4, tod=-1.5e6, fod=4e8)),
    "chain_B2_neutral": propagate(neutral, LatentDynamics(2.0, chain.gain), chain),
    "chain_B2_detuned": propagate(
        DispersionCoeffs(neutral.gdd + 2e4, neutral.tod, neutral.fod),
        LatentDynamics(2.0, chain.gain),
        chain,
    ),
}

for name, field in gallery.items():
    trace = frog_image(field)
    path = out / f"{name}.png"
    render_png(trace, path)
    # a wider pulse concentrates the trace near zero delay less
    occupancy = float((trace.pixels > 0.1).mean())
    print(f"{path}  bright-pixel fraction {occupancy:.3f}")

print(f"\n{len(gallery)} traces in {out}/ "
      "(delay on the horizontal axis, doubled frequency on the vertical)")
