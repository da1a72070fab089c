"""Architecture search for QAOA maxcut mixers on a dense statevector simulator."""

__version__ = "0.1.0"

from .circuits import BASELINE_MIXER, DEFAULT_ALPHABET, GateKind, build_mixer, build_qaoa, gate_combinations
from .evaluator import approximation_ratio, compare_mixers, evaluate_mixer
from .graphs import Graph, cut_value, erdos_renyi, maxcut_bruteforce, random_regular
from .optimizer import OptimizerConfig, optimize_ansatz
from .search import SearchConfig, search_dataset, search_mixer, select_best
from .simulator import expectation_cut, init_plus_state, simulate_ansatz

__all__ = [
    "BASELINE_MIXER",
    "DEFAULT_ALPHABET",
    "GateKind",
    "Graph",
    "OptimizerConfig",
    "SearchConfig",
    "approximation_ratio",
    "build_mixer",
    "build_qaoa",
    "compare_mixers",
    "cut_value",
    "erdos_renyi",
    "evaluate_mixer",
    "expectation_cut",
    "gate_combinations",
    "init_plus_state",
    "maxcut_bruteforce",
    "optimize_ansatz",
    "random_regular",
    "search_dataset",
    "search_mixer",
    "select_best",
    "simulate_ansatz",
]
