"""Heat kernel PageRank estimation (Monte Carlo, TEA, TEA+) and sweep-cut local clustering."""

from .clustering import SweepResult, conductance, sweep
from .errors import GraphFormatError, ParameterError
from .estimators import (
    ApproxHkpr,
    HkprParams,
    ResidueReduction,
    adjusted_failure_prob,
    estimate,
    monte_carlo,
    reduce_residues,
    tea,
    tea_plus,
)
from .graph import Graph, from_edges, graph_stats, load_edge_list, loads_edge_list, write_edge_list
from .oracle import ExactHkpr, exact_hkpr, f1_score, h_oracle, ndcg_at
from .push import PushState, hk_push, hk_push_plus, select_K
from .sampling import AliasTable, RandomSource, build_alias, sample
from .walks import WalkRequest, k_random_walk, run_walk_batch
from .weights import PoissonWeights, poisson_weights, stop_probability

__all__ = [
    "ApproxHkpr", "AliasTable", "ExactHkpr", "Graph", "GraphFormatError", "HkprParams",
    "ParameterError", "PoissonWeights", "PushState", "RandomSource", "ResidueReduction",
    "SweepResult", "WalkRequest", "adjusted_failure_prob", "build_alias", "conductance",
    "estimate", "exact_hkpr", "f1_score", "from_edges", "graph_stats", "h_oracle", "hk_push",
    "hk_push_plus", "k_random_walk", "load_edge_list", "loads_edge_list", "monte_carlo",
    "ndcg_at", "poisson_weights", "reduce_residues", "run_walk_batch", "sample", "select_K",
    "stop_probability", "sweep", "tea", "tea_plus", "write_edge_list",
]
