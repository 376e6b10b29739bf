from __future__ import annotations

from pathlib import Path
from typing import List, Literal, Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, model_validator

from sgdc.errors import ConfigError
from sgdc.losses import LinearOperator, LossKind, LossModel
from sgdc.models import BoxConstraint, GroupStructure, ProblemSpec


class CsrDocument(BaseModel):
    shape: List[int] = Field(..., min_length=2, max_length=2)
    data: List[float]
    indices: List[int]
    indptr: List[int]

    @model_validator(mode="after")
    def check_lengths(self):
        if len(self.data) != len(self.indices):
            raise ValueError("CSR data and indices must have the same length")
        if len(self.indptr) != self.shape[0] + 1:
            raise ValueError("CSR indptr must have one entry per row plus one")
        return self


class MatrixDocument(BaseModel):
    "Exactly one of an inline dense matrix, an inline CSR matrix or a file path"

    dense: Optional[List[List[float]]] = None
    csr: Optional[CsrDocument] = None
    path: Optional[str] = Field(
        None,
        description="Dense text (rows of space-separated reals) or Matrix-Market (.mtx), "
        "relative to the problem file",
    )

    @model_validator(mode="after")
    def check_one_source(self):
        given = [name for name in ("dense", "csr", "path") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"Give exactly one of dense, csr or path (got {given or 'none'})")
        if self.dense is not None and len({len(row) for row in self.dense}) > 1:
            raise ValueError("Dense matrix rows must all have the same length")
        return self

    def to_operator(self, base_dir: Path | None = None) -> LinearOperator:
        if self.dense is not None:
            return LinearOperator.from_matrix(np.array(self.dense, dtype=float))
        if self.csr is not None:
            matrix = sp.csr_matrix(
                (self.csr.data, self.csr.indices, self.csr.indptr),
                shape=tuple(self.csr.shape),
            )
            return LinearOperator.from_matrix(matrix)
        # imported here: sgdc.io reads problem documents
        from sgdc.io import load_matrix

        path = Path(self.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return LinearOperator.from_matrix(load_matrix(path))

    @classmethod
    def from_operator(cls, A: LinearOperator) -> MatrixDocument:
        if A.is_sparse:
            csr = A.matrix
            return cls(
                csr=CsrDocument(
                    shape=list(csr.shape),
                    data=csr.data.tolist(),
                    indices=csr.indices.tolist(),
                    indptr=csr.indptr.tolist(),
                )
            )
        return cls(dense=A.to_dense().tolist())


class LossDocument(BaseModel):
    kind: LossKind = LossKind.least_squares
    A: MatrixDocument
    b: List[float]
    l1_extra: float = Field(0.0, ge=0, description="Weight of the optional l1 term f_n")


def _bound(values: Optional[List[Optional[float]]], n: int, infinity: float) -> np.ndarray:
    if values is None:
        return np.full(n, infinity)
    if len(values) != n:
        raise ConfigError(f"Box bound has {len(values)} entries, expected {n}")
    return np.array([infinity if v is None else v for v in values], dtype=float)


def _listed(bound: np.ndarray) -> List[Optional[float]]:
    return [None if np.isinf(v) else float(v) for v in bound]


class BoxDocument(BaseModel):
    "Missing bounds, and null entries, are infinite"

    lower: Optional[List[Optional[float]]] = None
    upper: Optional[List[Optional[float]]] = None


class GroupsDocument(BaseModel):
    groups: Optional[List[List[int]]] = Field(
        None, description="0-based index groups; singletons when omitted"
    )
    weights: Optional[List[float]] = Field(None, description="All ones when omitted")
    p: Literal[1, 2] = 1


class ProblemDocument(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "loss": {
                        "kind": "least_squares",
                        "A": {"dense": [[1.0, 0.0], [0.0, 1.0]]},
                        "b": [2.0, 0.1],
                    },
                    "box": {"lower": [0.0, 0.0], "upper": [10.0, 10.0]},
                    "groups": {"groups": [[0], [1]], "weights": [1.0, 1.0], "p": 1},
                    "lambda1": 1.0,
                    "lambda2": 0.0,
                }
            ]
        }
    )

    loss: LossDocument
    box: BoxDocument = Field(default_factory=BoxDocument)
    groups: GroupsDocument = Field(default_factory=GroupsDocument)
    lambda1: float = Field(..., gt=0)
    lambda2: float = Field(0.0, ge=0)

    def to_spec(self, base_dir: Path | None = None) -> ProblemSpec:
        A = self.loss.A.to_operator(base_dir)
        model = LossModel(self.loss.kind, A, self.loss.b, self.loss.l1_extra)
        n = model.n
        box = BoxConstraint(
            _bound(self.box.lower, n, -np.inf), _bound(self.box.upper, n, np.inf)
        )
        if self.groups.groups is None:
            groups = GroupStructure.singletons(n, p=self.groups.p)
            if self.groups.weights is not None:
                groups = GroupStructure(n, groups.groups, self.groups.weights, self.groups.p)
        else:
            weights = self.groups.weights
            if weights is None:
                weights = [1.0] * len(self.groups.groups)
            groups = GroupStructure.from_lists(n, self.groups.groups, weights, self.groups.p)
        return ProblemSpec(
            loss=model, box=box, groups=groups, lambda1=self.lambda1, lambda2=self.lambda2
        )

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> ProblemDocument:
        return cls(
            loss=LossDocument(
                kind=spec.loss.kind,
                A=MatrixDocument.from_operator(spec.loss.A),
                b=spec.loss.b.tolist(),
                l1_extra=spec.loss.l1_extra,
            ),
            box=BoxDocument(lower=_listed(spec.box.lower), upper=_listed(spec.box.upper)),
            groups=GroupsDocument(
                groups=[g.tolist() for g in spec.groups.groups],
                weights=spec.groups.weights.tolist(),
                p=spec.groups.p,
            ),
            lambda1=spec.lambda1,
            lambda2=spec.lambda2,
        )
