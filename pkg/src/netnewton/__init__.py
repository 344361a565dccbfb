"""Network Newton: distributed second-order consensus optimization."""

from .adaptive import AdaptiveConfig, SignalState, ann_round, run_adaptive
from .harness import ExperimentConfig, emit_csv, exchanges_to_target, run_experiment
from .metrics import MetricsTrace, StoppingRule, relative_error
from .objective import ProblemInstance, QuadraticLocal, generate_quadratic_family, global_optimum
from .penalty import build_split, penalty_gradient, penalty_value
from .solver import NNConfig, SolverState, dgd_step, nn_direction, nn_step, run_fixed_alpha
from .topology import Graph, WeightMatrix, build_regular_cycle, build_weights, validate_weights

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig", "ExperimentConfig", "Graph", "MetricsTrace", "NNConfig", "ProblemInstance",
    "QuadraticLocal", "SignalState", "SolverState", "StoppingRule", "WeightMatrix", "ann_round",
    "build_regular_cycle", "build_split", "build_weights", "dgd_step", "emit_csv",
    "exchanges_to_target", "generate_quadratic_family", "global_optimum", "nn_direction", "nn_step",
    "penalty_gradient", "penalty_value", "relative_error", "run_adaptive", "run_experiment",
    "run_fixed_alpha", "validate_weights",
]
