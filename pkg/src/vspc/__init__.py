"""Virus spread-performance-cost network formation game."""

from vspc.epidemic import EpidemicParams, SteadyState, SteadyStateCache, steady_state
from vspc.game import CostModel, GameParams, OwnershipProfile, is_ad_stable, is_nash_exact, run_dynamics
from vspc.graph import Graph, from_edge_list

__version__ = "0.1.0"

__all__ = [
    "CostModel", "EpidemicParams", "GameParams", "Graph", "OwnershipProfile", "SteadyState",
    "SteadyStateCache", "from_edge_list", "is_ad_stable", "is_nash_exact", "run_dynamics",
    "steady_state",
]
