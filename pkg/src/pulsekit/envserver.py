"""Line-oriented stdio bridge exposing the environment to other runtimes.

Each request is one JSON object per line on stdin; each reply is one JSON
object per line on stdout.  Requests carry an ``id`` that the reply echoes,
an ``op``, and op-specific fields:

    {"id": 1, "op": "make", "config": "exp.yaml", "images": true}
    {"id": 2, "op": "reset", "handle": 1, "seed": 123}
    {"id": 3, "op": "step", "handle": 1, "action": [0.1, -0.2, 0.0]}
    {"id": 4, "op": "render", "handle": 1}
    {"id": 5, "op": "close", "handle": 1}
    {"id": 6, "op": "shutdown"}

Replies are ``{"id": n, "ok": true, "result": ...}`` on success and
``{"id": n, "ok": false, "error": {"type": t, "message": m}}`` on failure.
Error types: "config", "closed_handle", "episode_over", "numerical",
"protocol", "internal".

Observations are ``{"vector": [6 floats in [-1, 1]], "image": frame}`` where
``frame`` is ``{"shape", "dtype", "data"}`` with base64 little-endian C-order
float32 payload, or null when the handle was made with ``images: false``.
Episodes end by time limit only, so ``step`` reports ``terminated`` false and
``truncated`` true at the horizon.  ``close`` is idempotent; any other op on
a closed or unknown handle fails with "closed_handle".  The process exits on
``shutdown`` or stdin EOF.
"""

from __future__ import annotations

import base64
import json
import sys

import numpy as np

from .env import LaserEnv, Observation
from .errors import (
    ConfigurationError,
    EpisodeOverError,
    GridMismatchError,
    MeasurementError,
    NumericalError,
)
from .harness.config import load_config

__all__ = ["EnvServer", "main"]


class _ClosedHandle(Exception):
    pass


def encode_frame(arr) -> dict:
    a = np.ascontiguousarray(arr, dtype="<f4")
    return {
        "shape": list(a.shape),
        "dtype": "float32",
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def _encode_obs(obs: Observation, images: bool) -> dict:
    return {
        "vector": [float(v) for v in obs.as_vector()],
        "image": encode_frame(obs.traces) if images else None,
    }


def _clean_info(info: dict) -> dict:
    return {k: (float(v) if isinstance(v, (float, np.floating)) else int(v)) for k, v in info.items()}


class EnvServer:
    """Registry of live environments keyed by integer handles."""

    def __init__(self):
        self._envs = {}
        self._next_handle = 1

    def _get(self, req):
        handle = req.get("handle")
        if handle not in self._envs:
            raise _ClosedHandle(f"no open environment with handle {handle!r}")
        return self._envs[handle]

    # -- operations -------------------------------------------------------

    def op_make(self, req) -> dict:
        config = load_config(req.get("config"))
        env = LaserEnv(config.env_config())
        handle = self._next_handle
        self._next_handle += 1
        self._envs[handle] = {"env": env, "images": bool(req.get("images", True))}
        e = env.config
        return {
            "handle": handle,
            "action_dim": 3,
            "vector_dim": 6,
            "image_shape": [e.frame_stack, e.frog.size, e.frog.size],
            "horizon": e.horizon,
            "config_hash": config.hash,
        }

    def op_reset(self, req) -> dict:
        entry = self._get(req)
        seed = req.get("seed")
        obs = entry["env"].reset(seed=None if seed is None else int(seed))
        info = {"b_integral": float(entry["env"].latent.b_integral)}
        return {"observation": _encode_obs(obs, entry["images"]), "info": info}

    def op_step(self, req) -> dict:
        entry = self._get(req)
        action = req.get("action")
        if not isinstance(action, list) or len(action) != 3:
            raise ValueError(f"action must be a list of 3 numbers, got {action!r}")
        res = entry["env"].step(np.asarray(action, dtype=float))
        return {
            "observation": _encode_obs(res.observation, entry["images"]),
            "reward": float(res.reward),
            "terminated": False,  # episodes end by horizon, never by state
            "truncated": bool(res.done),
            "info": _clean_info(res.info),
        }

    def op_render(self, req) -> dict:
        entry = self._get(req)
        return {"image": encode_frame(entry["env"].render().pixels)}

    def op_close(self, req) -> dict:
        self._envs.pop(req.get("handle"), None)
        return {"closed": True}

    def op_shutdown(self, req) -> dict:
        return {"bye": True}

    # -- dispatch ---------------------------------------------------------

    def respond(self, line: str):
        """(reply dict, stop flag) for one request line."""
        req_id = None
        try:
            req = json.loads(line)
            if not isinstance(req, dict):
                raise ValueError("request must be a JSON object")
            req_id = req.get("id")
            op = req.get("op")
            fn = getattr(self, f"op_{op}", None) if isinstance(op, str) else None
            if fn is None:
                raise ValueError(f"unknown op {op!r}")
            result = fn(req)
            return {"id": req_id, "ok": True, "result": result}, op == "shutdown"
        except Exception as exc:  # every failure becomes a typed reply
            return {
                "id": req_id,
                "ok": False,
                "error": {"type": _error_type(exc), "message": str(exc)},
            }, False


def _error_type(exc: Exception) -> str:
    if isinstance(exc, (ConfigurationError, GridMismatchError)):
        return "config"
    if isinstance(exc, _ClosedHandle):
        return "closed_handle"
    if isinstance(exc, EpisodeOverError):
        return "episode_over"
    if isinstance(exc, (NumericalError, MeasurementError)):
        return "numerical"
    if isinstance(exc, (ValueError, TypeError, KeyError, json.JSONDecodeError)):
        return "protocol"
    return "internal"


def main(argv=None) -> int:
    server = EnvServer()
    for line in sys.stdin:
        if not line.strip():
            continue
        reply, stop = server.respond(line)
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()
        if stop:
            break
    return 0


if __name__ == "__main__":
    sys.exit(main())
