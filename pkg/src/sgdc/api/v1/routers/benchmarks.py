from fastapi import APIRouter, HTTPException, status
from fastapi.concurrency import run_in_threadpool
from pydantic import ValidationError

from sgdc.api.dependencies.core import SettingsDep
from sgdc.bench import run_group_recovery, run_signal_recovery
from sgdc.io import describe_validation_error
from sgdc.schemas.bench import BenchModel, BenchRow, ExperimentSpec

router = APIRouter(
    prefix="/api/benchmarks",
    tags=["benchmarks"],
    responses={400: {"description": "Invalid experiment"}},
)


def _for_model(es: ExperimentSpec, model: BenchModel, settings) -> ExperimentSpec:
    "Re-derive model-dependent defaults when the body names the other model"
    if es.model is not model:
        derived = dict.fromkeys(("s", "lambda1", "lambda2", "x0", "M", "step_divisor"))
        data = es.model_dump() | derived | {"model": model}
        try:
            es = ExperimentSpec.model_validate(data)
        except ValidationError as error:
            raise HTTPException(
                status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                detail=describe_validation_error(error),
            ) from error
    if es.trials > settings.max_api_trials:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"At most {settings.max_api_trials} trials per request",
        )
    if es.n > settings.max_api_dimension:
        raise HTTPException(
            status_code=status.HTTP_413_REQUEST_ENTITY_TOO_LARGE,
            detail=f"n = {es.n} exceeds the service limit of {settings.max_api_dimension}",
        )
    return es


@router.post("/signal", response_model=BenchRow)
async def signal_recovery(es: ExperimentSpec, settings: SettingsDep):
    """Run l0 signal recovery trials and return their means with per-trial detail"""
    es = _for_model(es, BenchModel.l0_signal, settings)
    return await run_in_threadpool(run_signal_recovery, es)


@router.post("/group", response_model=BenchRow)
async def group_recovery(es: ExperimentSpec, settings: SettingsDep):
    """Run group-sparse recovery trials (groups of three, box [-10, 10])"""
    es = _for_model(es, BenchModel.group_l0, settings)
    return await run_in_threadpool(run_group_recovery, es)
