from typing import List, Optional

import numpy as np
from fastapi import APIRouter, HTTPException, status
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel, ConfigDict, Field

from sgdc.api.dependencies.core import SettingsDep
from sgdc.diagnostics import certify
from sgdc.models import derive_relaxation
from sgdc.schemas.certificate import Certificate
from sgdc.schemas.problem import ProblemDocument
from sgdc.schemas.solver import Algorithm, SolveReport, SolverConfig
from sgdc.solvers import solve

router = APIRouter(
    prefix="/api/problems",
    tags=["problems"],
    responses={400: {"description": "Invalid problem or configuration"}},
)

EXAMPLE_PROBLEM = ProblemDocument.model_config["json_schema_extra"]["examples"][0]


class SolveRequest(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={
            "examples": [{"problem": EXAMPLE_PROBLEM, "algorithm": "line_search"}]
        }
    )
    problem: ProblemDocument
    config: SolverConfig = Field(default_factory=SolverConfig)
    algorithm: Algorithm = Algorithm.line_search


class CertifyRequest(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={"examples": [{"problem": EXAMPLE_PROBLEM, "x": [2.0, 0.0]}]}
    )
    problem: ProblemDocument
    x: List[float]
    tol: Optional[float] = Field(None, gt=0, description="Residual tolerance")
    safety: float = Field(0.99, gt=0, lt=1)


def _check_size(n: int, settings):
    if n > settings.max_api_dimension:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"n = {n} exceeds the service limit of {settings.max_api_dimension}",
        )


@router.post("/solve", response_model=SolveReport)
async def solve_problem(request: SolveRequest, settings: SettingsDep):
    """Run one of the DC algorithms on a problem document"""
    spec = request.problem.to_spec()
    _check_size(spec.n, settings)
    return await run_in_threadpool(
        solve, spec, None, request.config, request.algorithm
    )


@router.post("/certify", response_model=Certificate)
async def certify_point(request: CertifyRequest, settings: SettingsDep):
    """Check whether a point is an sw-d-stationary point (a nu-strong local minimizer)"""
    spec = request.problem.to_spec()
    _check_size(spec.n, settings)
    rp = derive_relaxation(spec, safety=request.safety)
    tol = request.tol if request.tol is not None else settings.certify_tol
    return certify(spec, rp, np.array(request.x, dtype=float), tol=tol)
