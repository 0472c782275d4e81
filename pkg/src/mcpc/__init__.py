"""Coverage and multiple-knapsack problems with cluster capacities."""

from .clusters import compute_z_star, effective_capacities, solve_mcpc_alg2
from .generate import generate_instance
from .io import parse_assignment, parse_instance, serialize_instance
from .lp import LpStatus, build_joint_lp, build_mcpk_lp, solve_lp
from .mkpc import (
    NoIsolatedCluster,
    detect_disentangled,
    find_isolated_cluster,
    greedy_lp,
    round_cluster,
    solve_mkpc_iterative,
    solve_mkpc_third,
)
from .model import (
    Assignment,
    Cluster,
    CoverSet,
    Instance,
    Item,
    Kind,
    Knapsack,
    ValidationError,
    check_feasible,
    evaluate_assignment,
    validate_and_normalize,
)
from .oracle import OracleLimitExceeded, brute_force_opt, lp_cross_check
from .pipage import evaluate_F, evaluate_L, solve_mcpk_alg1

__version__ = "0.1.0"

__all__ = [
    "Assignment", "Cluster", "CoverSet", "Instance", "Item", "Kind", "Knapsack",
    "LpStatus", "NoIsolatedCluster", "OracleLimitExceeded", "ValidationError",
    "brute_force_opt", "build_joint_lp", "build_mcpk_lp", "check_feasible",
    "compute_z_star", "detect_disentangled", "effective_capacities", "evaluate_F",
    "evaluate_L", "evaluate_assignment", "find_isolated_cluster", "generate_instance",
    "greedy_lp", "lp_cross_check", "parse_assignment", "parse_instance", "round_cluster",
    "serialize_instance", "solve_lp", "solve_mcpc_alg2", "solve_mcpk_alg1",
    "solve_mkpc_iterative", "solve_mkpc_third", "validate_and_normalize",
]
