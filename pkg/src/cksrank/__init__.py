"""Influential-spreader ranking with Community K-Shell scores."""

__version__ = "0.1.0"

from .baselines import METHODS, rank_method
from .cks import ScoreTable, cks_score, kse, rank_by_cks
from .community import CommunityPartition, louvain, modularity
from .diffusion import ic_monte_carlo, ic_single_run, select_seeds
from .graph import Graph, generate_ba, generate_powerlaw_cluster, parse_edge_list, read_edge_list
from .kshell import community_kshell, kshell_decomposition

__all__ = [
    "METHODS",
    "CommunityPartition",
    "Graph",
    "ScoreTable",
    "cks_score",
    "community_kshell",
    "generate_ba",
    "generate_powerlaw_cluster",
    "ic_monte_carlo",
    "ic_single_run",
    "kse",
    "kshell_decomposition",
    "louvain",
    "modularity",
    "parse_edge_list",
    "rank_by_cks",
    "rank_method",
    "read_edge_list",
    "select_seeds",
]
