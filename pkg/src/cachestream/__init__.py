"""Delay-constrained adaptive video delivery in wireless caching networks.

Node association by frame-based drift-plus-penalty, per-slot quality and
chunk-count decisions by finite-horizon dynamic programming, and a
Monte Carlo simulator comparing the policy with three baselines.
"""

from .config import SimConfig, load_config, dump_config, db_to_linear
from .policy import PolicyKind
from .sim import RunMetrics, run_trial, run_trials, run_experiment

__all__ = ["SimConfig", "load_config", "dump_config", "db_to_linear", "PolicyKind",
           "RunMetrics", "run_trial", "run_trials", "run_experiment"]
__version__ = "0.1.0"
