"""MAP assignments for discrete Bayesian networks.

A network and its evidence are compiled into a weighted boolean-function
DAG whose minimum-cost satisfying models correspond to the most probable
assignments; best-first search finds them in order of decreasing probability.
"""

from wbfmap.compiler import compile_network
from wbfmap.network import BeliefNetwork, NetworkError, joint_probability, load_network, parse_network
from wbfmap.oracle import kbest_oracle, map_oracle, partial_roots_oracle
from wbfmap.search import (
    Mode,
    NoModelError,
    SolverResult,
    heuristic_min_entry,
    heuristic_zero,
    solve_kbest,
    solve_map,
    solve_map_polytree,
)

__version__ = "0.1.0"
