from typing import List

from pydantic import BaseModel, ConfigDict, Field


class Certificate(BaseModel):
    """Whether x is an sw-d-stationary point of the relaxed problem.

    Such a point is a nu-strong local minimizer of the l0 problem, and its
    primal and relaxed objective values coincide.
    """

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "feasible": True,
                    "lower_bound_ok": True,
                    "violations": [],
                    "stationarity_residual": 0.0,
                    "is_sw_d_stationary": True,
                    "support": [0],
                    "F_primal": 1.01,
                    "F_relaxed": 1.01,
                    "nu": 0.0196,
                    "tol": 1e-8,
                }
            ]
        }
    )

    feasible: bool
    lower_bound_ok: bool
    violations: List[int] = Field(
        default_factory=list, description="Coordinates with 0 < |x_j| < nu"
    )
    stationarity_residual: float = Field(..., ge=0)
    is_sw_d_stationary: bool
    support: List[int]
    F_primal: float
    F_relaxed: float
    nu: float
    tol: float


class RateRow(BaseModel):
    k: int
    gap: float
    k_inv1: float
    k_inv2: float
    k_inv3: float
