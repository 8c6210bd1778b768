"""Convergence toolkit for random-walk vertex embeddings."""

from .graph import Graph, TransitionModel, build_transition, from_edges, load_edge_list, read_edge_file
from .walker import Corpus, WalkConfig, generate_corpus, relative_frequencies
from .limits import expected_frequency_matrix, omega_matrix
from .planner import plan

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "TransitionModel",
    "Corpus",
    "WalkConfig",
    "build_transition",
    "from_edges",
    "load_edge_list",
    "read_edge_file",
    "generate_corpus",
    "relative_frequencies",
    "expected_frequency_matrix",
    "omega_matrix",
    "plan",
    "__version__",
]
