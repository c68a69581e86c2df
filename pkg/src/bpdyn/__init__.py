"""IRLS and Physarum dynamics for basis pursuit ``min ||x||_1 s.t. A x = b``."""

from .analysis import CheckResult, PotentialReport, compute_alpha
from .dynamics import (
    State,
    StepConfig,
    StoppingRule,
    irls_step,
    physarum_step,
    regularized_irls_step,
    run,
    start_state,
    theorem_step_size,
    unified_step,
)
from .linalg import weighted_l2_min
from .model import GraphSpec, Instance, appendix_a_state, build_graph_instance, random_instance
from .oracle import OracleResult, solve_l1_exact
from .trace import Trace

__version__ = "0.1.0"
