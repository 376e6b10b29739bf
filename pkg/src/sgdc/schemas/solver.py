from __future__ import annotations

import csv
from enum import StrEnum
from typing import IO, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

TRACE_COLUMNS = (
    "k",
    "mu",
    "F_relaxed",
    "F_primal",
    "support_size",
    "step_norm",
    "alpha",
    "inner_iters",
)


class Algorithm(StrEnum):
    line_search = "line_search"
    extrapolation = "extrapolation"


class StopReason(StrEnum):
    tol = "tol"
    max_outer = "max_outer"


class SolverConfig(BaseModel):
    """Parameters shared by both DC algorithms.

    `c` and `alpha_base` default to Ls/2 once Ls is known; `x0` defaults to the origin.
    """

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "rho": 2.0,
                    "alpha_lo": 1e-8,
                    "alpha_hi": 1e8,
                    "window": 1,
                    "beta": 0.0,
                    "max_outer": 10000,
                    "tol": 1e-15,
                    "M": 5.0,
                    "step_divisor": 5.0,
                }
            ]
        }
    )

    rho: float = Field(2.0, gt=1, description="Step growth factor of the line search")
    c: Optional[float] = Field(None, gt=0, description="Sufficient decrease constant, at most Ls")
    alpha_base: Optional[float] = Field(None, gt=0, description="Initial trial step alpha_k^B")
    alpha_lo: float = Field(1e-8, gt=0)
    alpha_hi: float = Field(1e8, gt=0)
    window: int = Field(1, ge=0, description="Nonmonotone window N")
    beta: float = Field(0.0, ge=0, lt=1, description="Extrapolation weight")
    x0: Optional[List[float]] = None
    max_outer: int = Field(10_000, ge=0)
    tol: float = Field(1e-15, ge=0)
    M: float = Field(5.0, ge=0, description="Start of the continuation schedule")
    step_divisor: float = Field(5.0, gt=0)
    safety: float = Field(0.99, gt=0, lt=1)

    @model_validator(mode="after")
    def check_alpha_bounds(self):
        if self.alpha_lo > self.alpha_hi:
            raise ValueError("alpha_lo must not exceed alpha_hi")
        if self.alpha_base is not None and not self.alpha_lo <= self.alpha_base <= self.alpha_hi:
            raise ValueError("alpha_base must lie in [alpha_lo, alpha_hi]")
        return self


class ObjectiveRecord(BaseModel):
    k: int
    mu: float
    F_relaxed: float
    F_primal: float


class SupportRecord(BaseModel):
    "The support from iteration k on, until the next record"

    k: int
    support: List[int]


class AcceptanceRecord(BaseModel):
    "One accepted line-search step: candidate <= reference - (c/2) step_sq"

    k: int
    candidate: float
    reference: float
    step_sq: float


class SolveReport(BaseModel):
    algorithm: Algorithm
    x_final: List[float]
    iterations: int
    stop_reason: StopReason
    wall_time: float
    objective_trace: List[ObjectiveRecord]
    alpha_trace: List[float] = Field(default_factory=list)
    inner_counts: List[int] = Field(default_factory=list)
    step_norms: List[float] = Field(default_factory=list)
    support_sizes: List[int] = Field(default_factory=list)
    support_trace: List[SupportRecord] = Field(default_factory=list)
    support_identified_at: Optional[int] = None
    stationarity_trace: List[float] = Field(default_factory=list)
    lyapunov_trace: Optional[List[float]] = None
    acceptance: Optional[List[AcceptanceRecord]] = None
    nu: Optional[float] = None
    Ls: Optional[float] = None
    Lf: Optional[float] = None
    c: Optional[float] = None
    rho: float = 2.0
    alpha_hi: float = 1e8
    acceptance_slack: float = 0.0
    continuation_end: int = 0
    window: int = 1
    beta: float = 0.0

    @property
    def x(self) -> np.ndarray:
        return np.array(self.x_final, dtype=float)

    @property
    def support(self) -> List[int]:
        return self.support_trace[-1].support if self.support_trace else []

    def trace_rows(self) -> List[dict]:
        "One row per iterate; alpha and inner_iters describe the step that produced it"
        rows = []
        for record in self.objective_trace:
            k = record.k
            rows.append(
                {
                    "k": k,
                    "mu": record.mu,
                    "F_relaxed": record.F_relaxed,
                    "F_primal": record.F_primal,
                    "support_size": self.support_sizes[k] if self.support_sizes else 0,
                    "step_norm": self.step_norms[k - 1] if k else 0.0,
                    "alpha": self.alpha_trace[k - 1] if k else "",
                    "inner_iters": self.inner_counts[k - 1] if k else 0,
                }
            )
        return rows

    def write_csv(self, stream: IO[str]):
        writer = csv.DictWriter(stream, fieldnames=TRACE_COLUMNS)
        writer.writeheader()
        writer.writerows(self.trace_rows())
