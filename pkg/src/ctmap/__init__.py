"""Connectivity-aware navigation toolkit.

Pipeline: synthesize a 2-D urban scene, compute a best-server RSS coverage
map, build an inverse-signal grid graph, plan signal-aware routes, emit an
instruction-tuning dataset, and evaluate planners against the oracle.
"""

__version__ = "0.1.0"

from .envmodel import (BaseStation, Environment, Rect,  # noqa: F401
                       generate_random_environment, is_blocked,
                       load_environment, segment_blocked)
from .gridgraph import CellId, GridGraph, build_graph, dbm_to_linear, edge_cost  # noqa: F401
from .propagation import (CoverageMap, PropagationParams, compute_coverage,  # noqa: F401
                          load_coverage, rss_at, save_coverage)
from .routing import (Route, brute_force_optimal, plan_greedy_alg1,  # noqa: F401
                      plan_shortest, plan_signal_aware, replan_on_update)
