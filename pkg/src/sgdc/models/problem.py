from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np

from sgdc.errors import InvalidParameterError
from sgdc.models.box import BoxConstraint
from sgdc.models.groups import GroupStructure

if TYPE_CHECKING:
    from sgdc.losses import LossModel


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """min over the box of f(x) + lambda1 ||x||_0 + lambda2 sum_l w_l [x_(l) != 0].

    lambda1 = 0 is accepted here so that diagnostics can enumerate the unpenalized
    problem; deriving relaxation parameters requires lambda1 > 0.
    """

    loss: LossModel
    box: BoxConstraint
    groups: GroupStructure
    lambda1: float
    lambda2: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.lambda1) and self.lambda1 >= 0):
            raise InvalidParameterError(f"lambda1 must be >= 0, got {self.lambda1}")
        if not (np.isfinite(self.lambda2) and self.lambda2 >= 0):
            raise InvalidParameterError(f"lambda2 must be >= 0, got {self.lambda2}")
        dims = {"loss": self.loss.n, "box": self.box.n, "groups": self.groups.n}
        if len(set(dims.values())) != 1:
            raise InvalidParameterError(f"Inconsistent problem dimensions: {dims}")

    @property
    def n(self) -> int:
        return self.box.n

    @cached_property
    def lambda_bar(self) -> np.ndarray:
        "Per-coordinate l1 weight lambda1 + lambda2 * (sum of w_l over groups containing j)"
        return self.lambda1 + self.lambda2 * self.groups.column_weights
