import logging

import uvicorn
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from sgdc import SCHEMA_VERSION, __version__
from sgdc.api.v1.routers.benchmarks import router as benchmarks_router_v1
from sgdc.api.v1.routers.problems import router as problems_router_v1
from sgdc.config import settings
from sgdc.errors import SgdcError
from sgdc.schemas.apiversion import ApiVersion

logger = logging.getLogger(__name__)

description = """
## sgdc
Solvers for sparse group l0-regularized problems over boxes,

    min_{l <= x <= u}  f(x) + lambda1 ||x||_0 + lambda2 sum_l w_l [x_(l) != 0],

where f is a least-squares, logistic or Poisson loss, optionally with an l1 term.
The l0 terms are replaced by a capped-l1 relaxation min(|t|/mu, 1) whose parameter
decreases to a value nu that keeps the relaxation exact at its stationary points.

### Problems
`solve` runs one of two difference-of-convex algorithms: a nonmonotone line-search
variant and an extrapolated fixed-step variant. `certify` checks whether a point is
a nu-strong local minimizer: every nonzero entry has magnitude at least nu and the
gradient vanishes on the support, up to the box's normal cone.

### Benchmarks
Synthetic recovery experiments with Gaussian sensing matrices, reporting mean
MSE, PSNR, support size and iteration counts over seeded trials.
"""

tags_metadata = [
    {
        "name": "problems",
        "description": "Solve problem documents and certify candidate points.",
    },
    {
        "name": "benchmarks",
        "description": "Run seeded synthetic recovery experiments.",
    },
]

app = FastAPI(
    title=settings.project_name,
    description=description,
    version=__version__,
    openapi_tags=tags_metadata,
)


@app.exception_handler(SgdcError)
async def sgdc_error_handler(request: Request, error: SgdcError):
    logger.info("%s on %s: %s", type(error).__name__, request.url.path, error)
    return JSONResponse(
        status_code=error.status_code,
        content={"detail": str(error), "error": type(error).__name__},
    )


@app.get("/currentversion", response_model=ApiVersion)
async def get_current_api_version():
    """Retrieve the current document schema version"""
    return ApiVersion(version=SCHEMA_VERSION, package=__version__)


# Routers
app.include_router(problems_router_v1, prefix="/v1")
app.include_router(benchmarks_router_v1, prefix="/v1")


origins = ["*"]

app.add_middleware(
    CORSMiddleware,
    allow_origins=origins,
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

if __name__ == "__main__":
    uvicorn.run("sgdc.main:app", host="127.0.0.1", reload=True, port=8000)
