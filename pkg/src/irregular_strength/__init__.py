"""Edge weightings with pairwise distinct weighted degrees."""
from .engine import SolveConfig, SolveReport, baseline_solve, desk_overrides, run_experiment, solve
from .errors import *  # noqa: F401,F403
from .estimator import IrregularWeighting, check_graph
from .exact import SearchBudget, exact_strength, find_assignment
from .graph import Graph, generate_min_degree_graph, generate_random_regular, load_edge_list
from .params import Parameters, derive_params
from .weighting import EdgeWeighting, lower_bound, verify_irregular, weighted_degrees

__version__ = "0.1.0"
