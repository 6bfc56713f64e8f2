from .checkpoint import Checkpoint, agent_payload, load_checkpoint, restore_agent, save_checkpoint
from .config import ExperimentConfig, config_hash, default_config_dict, load_config
from .emit import format_cell, write_csv
from .evaluate import (
    EvalReport,
    compare_bo_controls,
    evaluate_policy,
    make_policy,
    render_episode,
    sweep_b,
)
from .train import Trainer, TrainResult

__all__ = [
    "Checkpoint",
    "agent_payload",
    "load_checkpoint",
    "restore_agent",
    "save_checkpoint",
    "ExperimentConfig",
    "config_hash",
    "default_config_dict",
    "load_config",
    "format_cell",
    "write_csv",
    "EvalReport",
    "compare_bo_controls",
    "evaluate_policy",
    "make_policy",
    "render_episode",
    "sweep_b",
    "Trainer",
    "TrainResult",
]
