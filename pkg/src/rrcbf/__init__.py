"""Reciprocal resistance-based barrier functions and safety filters."""
from .barrier_core import ClassKFn, CrossingPoint, SafeFunctionSpec, rrbf_residual, solve_crossing
from .cbf_constraints import (
    CbfVariantConfig,
    ErrorBoundPolicy,
    PsiChain,
    Variant,
    build_constraint,
    build_ho_constraint,
    build_psi_chain,
)
from .config import ObserverConfig, ScenarioConfig, config_to_text, load_config, parse_config
from .plants import AccBenchmark, DisturbanceSignal, LinearBenchmark, PlantModel, eval_dynamics
from .safety_filter import FilterResult, FilterStatus, HalfspaceConstraint, filter_projection, filter_scalar
from .sim_engine import SafetyMetrics, Trajectory, compute_metrics, rk4_step, run_scenario

__version__ = "0.1.0"

__all__ = [
    "ClassKFn",
    "CrossingPoint",
    "SafeFunctionSpec",
    "rrbf_residual",
    "solve_crossing",
    "CbfVariantConfig",
    "ErrorBoundPolicy",
    "PsiChain",
    "Variant",
    "build_constraint",
    "build_ho_constraint",
    "build_psi_chain",
    "ObserverConfig",
    "ScenarioConfig",
    "config_to_text",
    "load_config",
    "parse_config",
    "AccBenchmark",
    "DisturbanceSignal",
    "LinearBenchmark",
    "PlantModel",
    "eval_dynamics",
    "FilterResult",
    "FilterStatus",
    "HalfspaceConstraint",
    "filter_projection",
    "filter_scalar",
    "SafetyMetrics",
    "Trajectory",
    "compute_metrics",
    "rk4_step",
    "run_scenario",
]
