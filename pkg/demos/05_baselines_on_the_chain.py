"""
Model-free baselines: coordinate sweep and Bayesian optimization
================================================================

Both baselines query the chain directly with no step-size restriction,
which is exactly what makes them unsafe on hardware: a single query can
jump across the whole control box.  Their sample efficiency is the bar
the reinforcement-learning agent has to clear.
"""

import numpy as np

from pulsekit import DispersionCoeffs, LatentDynamics, propagate, tl_reference
from pulsekit.agents import bo_run, grid_search_1d
from pulsekit.harness import load_config
from pulsekit.env import observation_normalizers

config = load_config(None)
chain = config.chain_config()
env_cfg = config.env_config(compute_traces=False)
ref = tl_reference(chain)
B = 2.0
dyn = LatentDynamics(b_integral=B, gain=chain.gain)


def objective(psi) -> float:
    out = propagate(DispersionCoeffs(*np.asarray(psi, dtype=float)), dyn, chain)
    return float(np.max(np.abs(out.amplitude) ** 2) / ref)


# -- coordinate-wise grid sweep, one axis at a time ---------------------------

best, history = grid_search_1d(objective, env_cfg.bounds, resolution=25)
print(f"grid search: {len(history)} queries")
print(f"  best psi   {best}")
print(f"  best ratio {objective(best):.4f}")

# -- GP with expected improvement over the unit cube --------------------------

to_unit, from_unit = observation_normalizers(env_cfg)


def on_unit01(u01) -> float:
    return objective(from_unit(2.0 * np.asarray(u01) - 1.0))


rng = np.random.default_rng(0)
bo_history = bo_run(on_unit01, budget=75, rng=rng, dim=3)
values = [v for _, v in bo_history]
u_best, v_best = max(bo_history, key=lambda h: h[1])
print(f"\nBayesian optimization: {len(bo_history)} queries")
print(f"  best psi   {from_unit(2.0 * np.asarray(u_best) - 1.0)}")
print(f"  best ratio {v_best:.4f}")
print(f"  first query reaching 0.8: "
      f"{next((i + 1 for i, v in enumerate(values) if v >= 0.8), None)}")

# the largest jump between consecutive BO queries, in units of the
# environment's per-step cap: always far above 1
jumps = []
for (u_prev, _), (u_next, _) in zip(bo_history, bo_history[1:]):
    dpsi = np.abs(from_unit(2 * np.asarray(u_next) - 1) - from_unit(2 * np.asarray(u_prev) - 1))
    jumps.append(np.max(dpsi / (env_cfg.bounds.alpha * env_cfg.bounds.ranges)))
print(f"  largest jump: {max(jumps):.1f}x the environment step cap")
