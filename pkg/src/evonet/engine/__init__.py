from .config import ConfigError, EpidemicConfig, Trajectory, Variant
from .runner import (
    DynamicFactory,
    GraphFactory,
    OutbreakEstimate,
    default_budget,
    estimate_outbreak,
    replica_seeds,
    run_dynamic,
    run_replicas,
    run_static,
    summarize,
)

__all__ = [
    "ConfigError", "EpidemicConfig", "Trajectory", "Variant",
    "DynamicFactory", "GraphFactory", "OutbreakEstimate", "default_budget",
    "estimate_outbreak", "replica_seeds", "run_dynamic", "run_replicas",
    "run_static", "summarize",
]
