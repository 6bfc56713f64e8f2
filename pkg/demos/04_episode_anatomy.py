"""
Anatomy of a control episode
============================

One episode of the environment, driven by the scripted policy that steers
toward the compressor-cancelling setting.  Shows the bounded increments
(no step moves any coefficient by more than 10% of its range), the reward
signal, and the fixed 20-step horizon.
"""

import numpy as np

from pulsekit.env import LaserEnv
from pulsekit.chain import LatentDynamics
from pulsekit.harness import load_config, make_policy

config = load_config(None, overrides={"env": {"compute_traces": False}})
env = LaserEnv(config.env_config())
policy = make_policy("scripted:center", config)

bounds = env.config.bounds
print("control box (min / max):")
for name, lo, hi in zip(("gdd", "tod", "fod"), bounds.lo, bounds.hi):
    print(f"  {name}: {lo:+.3g} .. {hi:+.3g}")
cap = bounds.alpha * bounds.ranges
print(f"per-step cap alpha*c: {cap}")

b = 2.0
policy.begin_episode(seed=5)
obs = env.reset(seed=5, latent_override=LatentDynamics(b_integral=b, gain=1.0))
print(f"\nepisode at fixed B = {b}")
print(f"start psi: {env.psi.as_array()}")

print("\n  t   |dGDD|     |dTOD|     |dFOD|     reward   fwhm [fs]")
prev = env.psi.as_array()
done, t = False, 0
while not done:
    t += 1
    res = env.step(policy.act(obs))
    obs = res.observation
    psi = env.psi.as_array()
    step = np.abs(psi - prev)
    assert np.all(step <= cap + 1e-9)
    prev = psi
    print(f" {t:3d}  {step[0]:8.1f}  {step[1]:9.1f}  {step[2]:9.1f}"
          f"   {res.reward:7.4f}  {res.info['fwhm']:8.2f}")
    done = res.done

print(f"\nepisode ended after {t} steps (horizon {env.config.horizon})")
print(f"terminal psi: {prev} (the cancelling setting is {-env.config.chain.compressor_psi.as_array()})")
print("with B = 2 the cancelling setting is good but not optimal; "
      "a learned policy beats this script by pre-compensating the SPM phase")
