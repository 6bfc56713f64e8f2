from .replay import ReplayBuffer
from .sac import SacAgent, SacHyperparams, mini_sac_observe
from .baselines import grid_search_1d
from .gp import GpSurrogate, bo_run, bo_suggest, expected_improvement

__all__ = [
    "ReplayBuffer",
    "SacAgent",
    "SacHyperparams",
    "mini_sac_observe",
    "grid_search_1d",
    "GpSurrogate",
    "bo_run",
    "bo_suggest",
    "expected_improvement",
]
