"""Fairness-aware modularity community detection with proportional group balance."""
from .graph import Graph, GraphError, Partition, aggregate, build_graph, flatten
from .metrics import (
    FairnessContext, balance, delta_objective_move, expected_prop_balance, global_fairness,
    modularity, n_extra, network_phi, objective, prop_balance,
)
from .optimizer import OptimizerConfig, mouflon, step1, step2, validate_partition
from .generators import GeneratorConfig, generate, generate_er, generate_rewired_cliques
from .dataio import RunRecord, load_edge_list, load_groups, load_network

__version__ = "0.1.0"
