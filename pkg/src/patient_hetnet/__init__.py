"""Stroke-aware uplink resource block allocation for a two-PBS LTE HetNet.

Modules:

* :mod:`.channel` - link budget (path loss, noise, Rayleigh fading).
* :mod:`.scenario` - random placements and the received-power tensor.
* :mod:`.bayes` - naive Bayes stroke likelihood and user priorities.
* :mod:`.allocator` - SINR, feasibility, objectives, exact solvers.
* :mod:`.milpgen` - MILP model and CPLEX-LP export.
* :mod:`.harness` - Monte Carlo experiment and report files.
"""

from .allocator import (
    AllocationProblem,
    AllocationResult,
    Assignment,
    InfeasibleProblemError,
    Objective,
    check_feasible,
    evaluate_objective,
    make_problem,
    sinr,
    solve,
    solve_bruteforce,
)
from .bayes import CurrentState, MedicalRecord, classify, posterior, priority, train
from .channel import ChannelParams
from .harness import ExperimentConfig, run_experiment, summarize, write_outputs
from .milpgen import PiecewiseLnSpec, build_milp, write_lp
from .scenario import Scenario, ScenarioConfig, generate

__version__ = "0.1.0"

__all__ = [
    "AllocationProblem",
    "AllocationResult",
    "Assignment",
    "ChannelParams",
    "CurrentState",
    "ExperimentConfig",
    "InfeasibleProblemError",
    "MedicalRecord",
    "Objective",
    "PiecewiseLnSpec",
    "Scenario",
    "ScenarioConfig",
    "build_milp",
    "check_feasible",
    "classify",
    "evaluate_objective",
    "generate",
    "make_problem",
    "posterior",
    "priority",
    "run_experiment",
    "sinr",
    "solve",
    "solve_bruteforce",
    "summarize",
    "train",
    "write_lp",
    "write_outputs",
]
