"""Versioned binary checkpoint container.

Layout, all integers little-endian:

    bytes 0-7    magic ``PKCHKPT\\x00``
    bytes 8-11   u32 format version (currently 1)
    bytes 12-15  u32 header length H
    bytes 16..   H bytes of UTF-8 JSON header
    rest         tensor payload at header-declared offsets

The JSON header carries ``kind`` (what the payload is), ``hyperparams``,
free-form ``extras`` (RNG states, counters), and a ``tensors`` list of
``{name, dtype, shape, offset, nbytes}`` records.  Tensors are stored
C-contiguous in native numpy dtypes.  Writes go to a temp file in the target
directory followed by an atomic rename, so readers never observe a partial
checkpoint.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..agents import SacAgent, SacHyperparams
from ..errors import ConfigurationError

__all__ = [
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "agent_payload",
    "restore_agent",
]

MAGIC = b"PKCHKPT\x00"
VERSION = 1

_MODULES = ("actor", "critic", "target_critic", "encoder", "target_encoder")
_OPTIMIZERS = ("critic_opt", "actor_opt", "alpha_opt")


@dataclass(frozen=True)
class Checkpoint:
    kind: str
    hyperparams: dict
    extras: dict
    tensors: dict


def save_checkpoint(path, kind: str, tensors: dict, hyperparams: dict = None, extras: dict = None) -> None:
    path = Path(path)
    records = []
    payload = []
    offset = 0
    for name in sorted(tensors):
        arr = np.asarray(tensors[name])
        data = arr.tobytes()  # C-order copy regardless of input layout
        records.append(
            {
                "name": name,
                "dtype": str(arr.dtype),
                "shape": list(arr.shape),
                "offset": offset,
                "nbytes": len(data),
            }
        )
        payload.append(data)
        offset += len(data)
    header = json.dumps(
        {
            "kind": kind,
            "hyperparams": hyperparams or {},
            "extras": extras or {},
            "tensors": records,
        },
        sort_keys=True,
    ).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", VERSION, len(header)))
            fh.write(header)
            for data in payload:
                fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 16 or blob[:8] != MAGIC:
        raise ConfigurationError(f"{path} is not a checkpoint (bad magic)")
    version, hlen = struct.unpack_from("<II", blob, 8)
    if version != VERSION:
        raise ConfigurationError(f"{path}: unsupported checkpoint version {version}")
    if len(blob) < 16 + hlen:
        raise ConfigurationError(f"{path}: truncated header")
    try:
        header = json.loads(blob[16 : 16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"{path}: corrupt header: {exc}") from exc
    base = 16 + hlen
    tensors = {}
    for rec in header["tensors"]:
        start = base + rec["offset"]
        stop = start + rec["nbytes"]
        if stop > len(blob):
            raise ConfigurationError(f"{path}: truncated tensor {rec['name']}")
        arr = np.frombuffer(blob[start:stop], dtype=np.dtype(rec["dtype"]))
        tensors[rec["name"]] = arr.reshape(rec["shape"]).copy()
    return Checkpoint(
        kind=header["kind"],
        hyperparams=header["hyperparams"],
        extras=header["extras"],
        tensors=tensors,
    )


def agent_payload(agent: SacAgent):
    """Flatten an agent into (tensors, hyperparams, extras) for the container."""
    state = agent.state()
    tensors = {}
    for mod in _MODULES:
        if mod in state:
            for key, value in state[mod].items():
                tensors[f"{mod}.{key}"] = value.detach().cpu().numpy()
    tensors["log_alpha"] = state["log_alpha"].cpu().numpy()
    tensors["generator"] = state["generator"].cpu().numpy()
    extras = {"param_groups": {}}
    for opt in _OPTIMIZERS:
        sd = state[opt]
        for idx, entry in sd["state"].items():
            for field, value in entry.items():
                tensors[f"{opt}.{idx}.{field}"] = (
                    value.detach().cpu().numpy() if torch.is_tensor(value) else np.asarray(value)
                )
        extras["param_groups"][opt] = sd["param_groups"]
    hyperparams = {
        "mode": agent.mode,
        "frame_stack": agent.frame_stack,
        "vec_dim": agent.vec_dim,
        "action_dim": agent.action_dim,
        "latent_range": list(agent.latent_range),
        "sac": vars(agent.hp).copy(),
    }
    return tensors, hyperparams, extras


def _collect(tensors: dict, prefix: str) -> dict:
    cut = len(prefix) + 1
    return {
        name[cut:]: torch.from_numpy(arr)
        for name, arr in tensors.items()
        if name.startswith(prefix + ".")
    }


def restore_agent(ckpt: Checkpoint, tensor_prefix: str = "") -> SacAgent:
    """Rebuild an agent from a checkpoint written by :func:`agent_payload`.

    ``tensor_prefix`` selects a namespaced subset (training-state checkpoints
    store agent tensors under ``agent.``).
    """
    hp = ckpt.hyperparams.get("agent") if tensor_prefix else ckpt.hyperparams
    if not hp or "mode" not in hp:
        raise ConfigurationError("checkpoint does not describe an agent")
    tensors = ckpt.tensors
    extras = ckpt.extras.get("agent", ckpt.extras) if tensor_prefix else ckpt.extras
    if tensor_prefix:
        cut = len(tensor_prefix) + 1
        tensors = {
            name[cut:]: arr
            for name, arr in tensors.items()
            if name.startswith(tensor_prefix + ".")
        }
    agent = SacAgent(
        mode=hp["mode"],
        frame_stack=int(hp["frame_stack"]),
        vec_dim=int(hp["vec_dim"]),
        action_dim=int(hp["action_dim"]),
        latent_range=tuple(hp["latent_range"]),
        hyperparams=SacHyperparams(**hp["sac"]),
    )
    state = {}
    for mod in _MODULES:
        sub = _collect(tensors, mod)
        if sub:
            state[mod] = sub
    if "log_alpha" not in tensors or "generator" not in tensors:
        raise ConfigurationError("checkpoint missing agent core tensors")
    state["log_alpha"] = torch.from_numpy(tensors["log_alpha"])
    state["generator"] = torch.from_numpy(tensors["generator"])
    for opt in _OPTIMIZERS:
        entries = {}
        for name, value in _collect(tensors, opt).items():
            idx, field = name.split(".", 1)
            entries.setdefault(int(idx), {})[field] = value
        groups = []
        for group in extras["param_groups"][opt]:
            group = dict(group)
            if "betas" in group:
                group["betas"] = tuple(group["betas"])
            groups.append(group)
        state[opt] = {"state": entries, "param_groups": groups}
    agent.load_state(state)
    return agent
