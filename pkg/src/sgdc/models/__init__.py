from .box import BoxConstraint
from .capped import (
    EvaluatedPoint,
    IndexVectors,
    capped_theta,
    eval_primal,
    eval_relaxed,
    evaluate_point,
    index_vectors,
    theta_subgradient,
    theta_value,
)
from .groups import GroupStructure
from .problem import ProblemSpec
from .relaxation import MuSchedule, RelaxationParams, derive_relaxation, mu_at
