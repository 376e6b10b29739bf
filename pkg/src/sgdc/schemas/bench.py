from __future__ import annotations

from enum import StrEnum
from typing import List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from sgdc.schemas.solver import Algorithm, SolverConfig

GROUP_SIZE = 3


class NoiseKind(StrEnum):
    gaussian = "gaussian"
    rayleigh = "rayleigh"
    gamma = "gamma"
    exponential = "exponential"
    uniform = "uniform"
    none = "none"


class BenchModel(StrEnum):
    l0_signal = "l0_signal"
    group_l0 = "group_l0"


class ExperimentSpec(BaseModel):
    """One row of a recovery table: a data model, its sizes and the solver settings.

    Planted magnitudes are uniform on [signal_low, signal_high]. `m` defaults
    to n/2. `s` is the number of nonzeros for l0_signal (default n/10)
    and the number of active groups of three for group_l0 (default n/30).

    l0_signal starts at 1.97 with mu_k = 5 - k/5. group_l0 starts at 0 with
    mu_k = 1 - k/200 for the line search and 1 - k/300 for extrapolation.
    """

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "n": 160,
                    "m": 80,
                    "s": 16,
                    "noise_kind": "gaussian",
                    "sigma": 0.01,
                    "trials": 10,
                    "seed": 7,
                    "model": "l0_signal",
                    "algorithm": "line_search",
                }
            ]
        }
    )

    n: int = Field(160, ge=1)
    m: Optional[int] = Field(None, ge=1)
    s: Optional[int] = Field(None, ge=0)
    noise_kind: NoiseKind = NoiseKind.gaussian
    sigma: float = Field(1e-2, ge=0)
    trials: int = Field(10, ge=1)
    seed: int = Field(0, ge=0)
    model: BenchModel = BenchModel.l0_signal
    algorithm: Algorithm = Algorithm.line_search
    lambda1: Optional[float] = Field(None, gt=0)
    lambda2: Optional[float] = Field(None, ge=0)
    signal_low: float = Field(2.0, gt=0, description="Smallest planted magnitude")
    signal_high: float = Field(10.0, gt=0, le=10, description="Largest planted magnitude")
    x0: Optional[Union[float, Literal["random"]]] = Field(
        None, description="Constant start value, or 'random' for uniform on [-1, 2]"
    )
    M: Optional[float] = Field(None, ge=0, description="Start of the continuation schedule")
    step_divisor: Optional[float] = Field(None, gt=0)
    window: int = Field(1, ge=0)
    beta: float = Field(0.0, ge=0, lt=1)
    rho: float = Field(2.0, gt=1)
    tol: float = Field(1e-15, ge=0)
    max_outer: int = Field(10_000, ge=1)
    certify_tol: float = Field(1e-6, gt=0)
    label: str = ""

    @model_validator(mode="after")
    def fill_dimensions(self):
        if self.model is BenchModel.group_l0 and self.n % GROUP_SIZE:
            raise ValueError(f"group_l0 needs n divisible by {GROUP_SIZE}, got {self.n}")
        if self.m is None:
            self.m = max(1, self.n // 2)
        if self.s is None:
            if self.model is BenchModel.l0_signal:
                self.s = max(1, self.n // 10)
            else:
                self.s = max(1, self.n // (10 * GROUP_SIZE))
        if self.signal_low > self.signal_high:
            raise ValueError("signal_low must not exceed signal_high")
        if self.m > self.n:
            raise ValueError(f"m = {self.m} must not exceed n = {self.n}")
        slots = self.n if self.model is BenchModel.l0_signal else self.n // GROUP_SIZE
        if self.s > slots:
            raise ValueError(f"s = {self.s} exceeds the {slots} available slots")
        if self.lambda1 is None:
            self.lambda1 = 1.0 if self.model is BenchModel.l0_signal else 0.1
        if self.lambda2 is None:
            self.lambda2 = 0.0 if self.model is BenchModel.l0_signal else 0.1
        signal = self.model is BenchModel.l0_signal
        if self.x0 is None:
            self.x0 = 1.97 if signal else 0.0
        if self.M is None:
            self.M = 5.0 if signal else 1.0
        if self.step_divisor is None:
            if signal:
                self.step_divisor = 5.0
            else:
                self.step_divisor = 200.0 if self.algorithm is Algorithm.line_search else 300.0
        return self

    def solver_config(self, x0: List[float]) -> SolverConfig:
        return SolverConfig(
            rho=self.rho,
            window=self.window,
            beta=self.beta,
            x0=x0,
            max_outer=self.max_outer,
            tol=self.tol,
            M=self.M,
            step_divisor=self.step_divisor,
        )


class TrialResult(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    trial: int
    mse: float = Field(..., ge=0)
    psnr: float
    support_size: int
    support_exact: bool = Field(..., description="Recovered support equals the planted one")
    iterations: int
    inner_mean: float
    last_step_norm: float
    wall_time: float
    certified: bool
    lower_bound_ok: bool
    mechanics_ok: bool
    support_identified_at: Optional[int]
    stop_reason: str


class BenchRow(BaseModel):
    "Trial means of one experiment, one CSV row"

    model_config = ConfigDict(ser_json_inf_nan="constants")

    label: str
    model: BenchModel
    algorithm: Algorithm
    n: int
    m: int
    s: int
    noise_kind: NoiseKind
    sigma: float
    M: float
    x0: Union[float, str]
    trials: int
    mean_iterations: float
    mean_time: float
    mean_mse: float
    mean_psnr: float
    mean_last_step: float
    mean_support: float
    exact_support: int
    certified: int
    results: List[TrialResult] = Field(default_factory=list)
