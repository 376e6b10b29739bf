from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from sgdc.errors import InvalidParameterError


@dataclass(frozen=True, eq=False)
class BoxConstraint:
    """The feasible box [lower, upper], which always contains 0.

    Infinite bounds are allowed on either side; lower_j < upper_j for every j.
    """

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.array(self.lower, dtype=float).reshape(-1)
        upper = np.array(self.upper, dtype=float).reshape(-1)
        if lower.shape != upper.shape:
            raise InvalidParameterError(
                f"Box bounds have different lengths: {lower.size} and {upper.size}"
            )
        if np.isnan(lower).any() or np.isnan(upper).any():
            raise InvalidParameterError("Box bounds must not be NaN")
        if (lower > 0).any() or (upper < 0).any():
            raise InvalidParameterError("Box must satisfy lower <= 0 <= upper")
        if (lower >= upper).any():
            raise InvalidParameterError("Box must satisfy lower < upper")
        # -0.0 lower bounds would leak signed zeros through clipping
        lower[lower == 0] = 0.0
        upper[upper == 0] = 0.0
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform(cls, n: int, lower: float, upper: float) -> BoxConstraint:
        return cls(np.full(n, lower, dtype=float), np.full(n, upper, dtype=float))

    @classmethod
    def unbounded(cls, n: int) -> BoxConstraint:
        return cls.uniform(n, -np.inf, np.inf)

    @property
    def n(self) -> int:
        return self.lower.size

    @cached_property
    def vartheta(self) -> float:
        "Smallest finite nonzero bound magnitude; +inf when there is none"
        magnitudes = np.concatenate([-self.lower, self.upper])
        candidates = magnitudes[(magnitudes != 0) & np.isfinite(magnitudes)]
        if candidates.size == 0:
            return float("inf")
        return float(candidates.min())

    @cached_property
    def is_finite(self) -> bool:
        return bool(np.isfinite(self.lower).all() and np.isfinite(self.upper).all())

    @cached_property
    def is_unbounded(self) -> bool:
        return bool(np.isneginf(self.lower).all() and np.isposinf(self.upper).all())

    def contains(self, x: np.ndarray) -> bool:
        return bool(((x >= self.lower) & (x <= self.upper)).all())

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)
