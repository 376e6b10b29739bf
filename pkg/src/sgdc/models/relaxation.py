from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from sgdc.errors import InvalidParameterError
from sgdc.losses import estimate_Lf
from sgdc.models.problem import ProblemSpec

logger = logging.getLogger(__name__)

DEFAULT_SAFETY = 0.99


@dataclass(frozen=True)
class MuSchedule:
    """Continuation mu_k = max(M - k/d, nu): decreasing, then pinned at nu."""

    M: float
    step_divisor: float
    nu: float

    def __post_init__(self):
        if not self.step_divisor > 0:
            raise InvalidParameterError("The schedule step divisor must be positive")
        if not self.nu > 0:
            raise InvalidParameterError("nu must be positive")

    @property
    def continuation_end(self) -> int:
        "K, the first index with M - K/d <= nu"
        if self.M <= self.nu:
            return 0
        k = max(0, math.ceil((self.M - self.nu) * self.step_divisor))
        # ceil on the product can be off by one in floating point
        while k > 0 and self.M - (k - 1) / self.step_divisor <= self.nu:
            k -= 1
        while self.M - k / self.step_divisor > self.nu:
            k += 1
        return k

    def mu_at(self, k: int) -> float:
        if k < 0:
            raise InvalidParameterError(f"Iteration index must be >= 0, got {k}")
        if k >= self.continuation_end:
            return self.nu
        return max(self.M - k / self.step_divisor, self.nu)


def mu_at(schedule: MuSchedule, k: int) -> float:
    return schedule.mu_at(k)


@dataclass(frozen=True)
class RelaxationParams:
    nu: float
    Lf: float
    vartheta: float
    lambda1: float
    schedule: MuSchedule
    safety: float = DEFAULT_SAFETY

    def __post_init__(self):
        if not 0 < self.safety < 1:
            raise InvalidParameterError(f"safety must lie in (0, 1), got {self.safety}")
        if not (self.Lf > 0 and math.isfinite(self.Lf)):
            raise InvalidParameterError(f"Lf must be positive and finite, got {self.Lf}")
        if not 0 < self.nu < self.nu_bound:
            raise InvalidParameterError(
                f"nu = {self.nu} must lie in (0, min(lambda1/Lf, vartheta) = {self.nu_bound})"
            )
        if self.schedule.nu != self.nu:
            raise InvalidParameterError("The schedule must be pinned at the same nu")

    @property
    def nu_bound(self) -> float:
        return min(self.lambda1 / self.Lf, self.vartheta)


def derive_relaxation(
    spec: ProblemSpec,
    M: float = 5.0,
    step_divisor: float = 5.0,
    safety: float = DEFAULT_SAFETY,
    Lf: float | None = None,
    nu: float | None = None,
) -> RelaxationParams:
    """Compute Lf, vartheta and nu = safety * min(lambda1/Lf, vartheta) for a problem."""
    if spec.lambda1 <= 0:
        raise InvalidParameterError("Relaxation parameters require lambda1 > 0")
    if Lf is None:
        Lf = estimate_Lf(spec.loss, spec.box)
    vartheta = spec.box.vartheta
    if nu is None:
        nu = safety * min(spec.lambda1 / Lf, vartheta)
    logger.debug("Relaxation: Lf=%.6g vartheta=%.6g nu=%.6g", Lf, vartheta, nu)
    return RelaxationParams(
        nu=nu,
        Lf=Lf,
        vartheta=vartheta,
        lambda1=spec.lambda1,
        schedule=MuSchedule(M=M, step_divisor=step_divisor, nu=nu),
        safety=safety,
    )
