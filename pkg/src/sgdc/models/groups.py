from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from sgdc.errors import InvalidParameterError


@dataclass(frozen=True, eq=False)
class GroupStructure:
    """Index groups G_1..G_L over 0-based coordinates 0..n-1, with weights and a norm selector.

    Groups may overlap when p = 1. The flattened `members` / `owners` arrays
    let group norms and scatter-adds run as a single bincount.
    """

    n: int
    groups: tuple[np.ndarray, ...]
    weights: np.ndarray
    p: int = 1

    def __post_init__(self):
        if self.p not in (1, 2):
            raise InvalidParameterError(f"Norm selector p must be 1 or 2, got {self.p}")
        groups = tuple(np.asarray(g, dtype=np.intp).reshape(-1) for g in self.groups)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        if weights.size != len(groups):
            raise InvalidParameterError(
                f"Got {len(groups)} groups but {weights.size} weights"
            )
        if (weights < 0).any() or not np.isfinite(weights).all():
            raise InvalidParameterError("Group weights must be finite and nonnegative")
        covered = np.zeros(self.n, dtype=bool)
        for index, group in enumerate(groups):
            if group.size == 0:
                raise InvalidParameterError(f"Group {index} is empty")
            if (np.diff(group) <= 0).any():
                raise InvalidParameterError(
                    f"Indices of group {index} must be strictly increasing"
                )
            if group[0] < 0 or group[-1] >= self.n:
                raise InvalidParameterError(
                    f"Group {index} has indices outside 0..{self.n - 1}"
                )
            covered[group] = True
        if not covered.all():
            missing = np.flatnonzero(~covered).tolist()
            raise InvalidParameterError(f"Groups do not cover coordinates {missing}")
        weights.flags.writeable = False
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "weights", weights)
        if self.p == 2 and not self.disjoint:
            raise InvalidParameterError("p = 2 requires disjoint groups")

    @classmethod
    def singletons(cls, n: int, weight: float = 1.0, p: int = 1) -> GroupStructure:
        return cls(n, tuple(np.array([j]) for j in range(n)), np.full(n, weight), p)

    @classmethod
    def consecutive(
        cls, n: int, size: int, weight: float = 1.0, p: int = 1
    ) -> GroupStructure:
        if size <= 0 or n % size:
            raise InvalidParameterError(f"Cannot split {n} coordinates into groups of {size}")
        groups = tuple(np.arange(start, start + size) for start in range(0, n, size))
        return cls(n, groups, np.full(len(groups), weight), p)

    @classmethod
    def from_lists(
        cls, n: int, groups: Sequence[Sequence[int]], weights: Sequence[float], p: int
    ) -> GroupStructure:
        return cls(n, tuple(np.asarray(g) for g in groups), np.asarray(weights), p)

    @property
    def count(self) -> int:
        return len(self.groups)

    @cached_property
    def members(self) -> np.ndarray:
        if not self.groups:
            return np.zeros(0, dtype=np.intp)
        return np.concatenate(self.groups)

    @cached_property
    def owners(self) -> np.ndarray:
        return np.repeat(np.arange(self.count), [g.size for g in self.groups])

    @cached_property
    def disjoint(self) -> bool:
        return self.members.size == np.unique(self.members).size

    @cached_property
    def column_weights(self) -> np.ndarray:
        "Sum of w_l over the groups containing each coordinate"
        return np.bincount(
            self.members, weights=self.weights[self.owners], minlength=self.n
        )

    def norms(self, x: np.ndarray) -> np.ndarray:
        "The p-norm of every group restriction x_(l)"
        values = x[self.members]
        if self.p == 1:
            return np.bincount(self.owners, weights=np.abs(values), minlength=self.count)
        return np.sqrt(np.bincount(self.owners, weights=values**2, minlength=self.count))

    def scatter(self, per_member: np.ndarray) -> np.ndarray:
        "Sum per-member contributions back onto the coordinates"
        return np.bincount(self.members, weights=per_member, minlength=self.n)
