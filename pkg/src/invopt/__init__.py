"""Inverse mixed-integer optimization.

Recover a cost vector close (in l1) to a reference cost under which an
observed mixed-integer point is optimal, or optimal within a controlled gap.
"""

from .closed_form import (ClosedFormSolution, iop2_closed_form, iop2_closed_form_values,
                          iop2_objective_oracle, iop_closed_form)
from .cutting_plane import CutPlaneConfig, CutPlaneState, add_optimality_cut, run, tau_schedule
from .errors import *  # noqa: F401,F403
from .inverse_lp import (inverse_lp_basis, inverse_lp_complementarity, lower_level_gap,
                         min_gap_lp)
from .inverse_mip import (InverseSolution, Metrics, build_bigm_milp, build_concise_lp,
                          compute_metrics, default_tau, default_weights,
                          recover_lp_certificate, scale_cost, shift_epsilon, slack_cost_fold,
                          solve_bigm_model, solve_biobjective_model, solve_concise_model,
                          solve_tolerance_model)
from .lp import LpModel, LpSolution, check_certificate, solve_lp
from .milp import MilpSolution, solve_milp
from .problem import (ForwardProblem, Observation, RawProblem, SupportSets,
                      attach_observation, partition_support, problem_from_arrays, standardize)

__version__ = "0.1.0"

__all__ = [
    "ClosedFormSolution",
    "CutPlaneConfig",
    "CutPlaneState",
    "ForwardProblem",
    "InverseSolution",
    "LpModel",
    "LpSolution",
    "Metrics",
    "MilpSolution",
    "Observation",
    "RawProblem",
    "SupportSets",
    "add_optimality_cut",
    "attach_observation",
    "build_bigm_milp",
    "build_concise_lp",
    "check_certificate",
    "compute_metrics",
    "default_tau",
    "default_weights",
    "inverse_lp_basis",
    "inverse_lp_complementarity",
    "iop2_closed_form",
    "iop2_closed_form_values",
    "iop2_objective_oracle",
    "iop_closed_form",
    "lower_level_gap",
    "min_gap_lp",
    "partition_support",
    "problem_from_arrays",
    "recover_lp_certificate",
    "run",
    "scale_cost",
    "shift_epsilon",
    "slack_cost_fold",
    "solve_bigm_model",
    "solve_biobjective_model",
    "solve_concise_model",
    "solve_lp",
    "solve_milp",
    "solve_tolerance_model",
    "standardize",
    "tau_schedule",
]
