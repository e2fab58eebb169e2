"""Causal discovery with bounded-size conditioning sets.

k-closure graphs, k-Markov equivalence, brute-force k-essential graph and
PAG oracles, the k-PC learner, a PC-stable baseline and benchmark tooling.
"""

__version__ = "0.1.0"

from .graphs import (ARROW, CIRCLE, DAG, TAIL, GraphFormatError, Mark, MixedGraph,
                     OrientationConflict, PMG, format_graph, parse_graph, read_graph, write_graph)
from .separation import COVERED, SearchScope, find_sepset_upto_k, is_k_covered, is_separated
from .closure import (construct_k_closure, is_valid_k_closure, k_markov_equivalent,
                      k_markov_equivalent_direct, kclosure_equivalent, mag_markov_equivalent)
from .enumeration import (edge_union, enumerate_dags, essential_graph_oracle, k_essential_oracle,
                          pag_oracle, pmg_subset)
from .citest import Dataset, FisherZTester, GSquareTester, OracleTester, make_tester
from .kpc import KPCOptions, kpc_learn, run_kpc
from .pc import cpdag, pc_stable_learn

__all__ = [
    "ARROW", "CIRCLE", "TAIL", "Mark", "PMG", "MixedGraph", "DAG", "GraphFormatError",
    "OrientationConflict", "parse_graph", "format_graph", "read_graph", "write_graph",
    "COVERED", "SearchScope", "is_separated", "find_sepset_upto_k", "is_k_covered",
    "construct_k_closure", "is_valid_k_closure", "k_markov_equivalent",
    "k_markov_equivalent_direct", "kclosure_equivalent", "mag_markov_equivalent",
    "edge_union", "enumerate_dags", "k_essential_oracle", "essential_graph_oracle",
    "pag_oracle", "pmg_subset", "Dataset", "OracleTester", "GSquareTester", "FisherZTester",
    "make_tester", "KPCOptions", "kpc_learn", "run_kpc", "pc_stable_learn", "cpdag",
]
