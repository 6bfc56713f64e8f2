"""Regenerate the cross-runtime equivalence fixtures.

Drives the native Python environment directly and records seeded episodes
(initial observation vector, hidden nonlinearity, per-step actions and
rewards).  The vitest suite replays the same actions through the subprocess
bindings and demands matching numbers, which pins the whole stack: YAML
config loading, the wire protocol, and the JS-side decoding.

Run from this directory or the package root:

    python3 scripts/make_fixtures.py
"""

import json
import pathlib

import numpy as np
import yaml

from pulsekit.env import LaserEnv
from pulsekit.harness import load_config

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE.parent / "test" / "fixtures"

# traces off keeps replay at ~1 ms/step; rewards and vectors are unaffected
OVERRIDES = {
    "seed": 3,
    "env": {"compute_traces": False},
    "dr": {"kind": "uniform", "lo": 1.5, "hi": 2.5},
}

N_EPISODES = 50


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    config_path = FIXTURES / "env_config.yaml"
    config_path.write_text(yaml.safe_dump(OVERRIDES))

    config = load_config(config_path)
    env = LaserEnv(config.env_config())
    horizon = config.env_config().horizon

    episodes = []
    for k in range(N_EPISODES):
        seed = 1000 + k
        obs = env.reset(seed=seed)
        rng = np.random.default_rng(seed)
        actions, rewards = [], []
        for _ in range(horizon):
            a = rng.uniform(-1.0, 1.0, size=3)
            res = env.step(a)
            actions.append([float(v) for v in a])
            rewards.append(float(res.reward))
        assert res.done
        episodes.append(
            {
                "seed": seed,
                "b_integral": float(env.latent.b_integral),
                "initial_vector": [float(v) for v in obs.as_vector()],
                "actions": actions,
                "rewards": rewards,
            }
        )

    payload = {
        "config": config_path.name,
        "config_hash": config.hash,
        "horizon": horizon,
        "episodes": episodes,
    }
    out = FIXTURES / "episodes.json"
    out.write_text(json.dumps(payload, indent=1))
    print(f"wrote {out} ({len(episodes)} episodes, hash {config.hash})")


if __name__ == "__main__":
    main()
