"""Satisficing multi-armed bandits with Gaussian rewards."""
from .environment import BanditInstance, ObjectiveSpec, Problem
from .belief import Prior
from .policies import EligibleRule, Heuristic, PolicySpec
from .harness import AggregateResult, SimulationConfig, run_monte_carlo, run_trial

__version__ = "0.1.0"

__all__ = [
    "AggregateResult",
    "BanditInstance",
    "EligibleRule",
    "Heuristic",
    "ObjectiveSpec",
    "PolicySpec",
    "Prior",
    "Problem",
    "SimulationConfig",
    "run_monte_carlo",
    "run_trial",
    "__version__",
]
