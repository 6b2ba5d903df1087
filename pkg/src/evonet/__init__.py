"""SI/SIR epidemics on configuration-model graphs with edge rewiring."""

from .distributions import DegreeDistribution, DistributionError, parse_dist
from .graph import HalfEdgeGraph, StaleEdgeError, gen_config_model, gen_er

__version__ = "0.1.0"

__all__ = [
    "DegreeDistribution", "DistributionError", "parse_dist",
    "HalfEdgeGraph", "StaleEdgeError", "gen_config_model", "gen_er",
]
