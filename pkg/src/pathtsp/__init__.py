"""Exact-arithmetic laboratory for best-of-many Christofides on the
metric s-t path TSP: relaxation solving, spanning-tree decompositions,
narrow-cut analysis, distribution reassembly, benefit audits, and tour
construction — every number a Fraction."""

from .bomc import best_of_many, held_karp_opt, min_tjoin, tour_from_tree
from .cuts import CutChain, cut_stats, narrow_cuts
from .instance import (Instance, build_appendix_instance,
                       random_metric_instance, read_instance,
                       write_instance)
from .lp_relax import LpSolution, separate, solve_lp
from .parity import (GammaParams, assign_gamma, benefits, certify_bound,
                     correction_vectors, split_path_join)
from .reassembler import classify, exchange, exchange_left, reassemble
from .tree_decomp import Atom, decompose, round_distribution

__all__ = [
    "Atom", "CutChain", "GammaParams", "Instance", "LpSolution",
    "assign_gamma", "benefits", "best_of_many", "build_appendix_instance",
    "certify_bound", "classify", "correction_vectors", "cut_stats",
    "decompose", "exchange", "exchange_left", "held_karp_opt", "min_tjoin",
    "narrow_cuts", "random_metric_instance", "read_instance", "reassemble",
    "round_distribution", "separate", "solve_lp", "split_path_join",
    "tour_from_tree", "write_instance",
]
