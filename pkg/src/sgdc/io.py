"""Reading and writing problem documents, matrices, vectors and reports."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp
from pydantic import BaseModel, ValidationError

from sgdc.errors import ConfigError
from sgdc.models import ProblemSpec
from sgdc.schemas.problem import ProblemDocument


def describe_validation_error(error: ValidationError) -> str:
    "One line per failing field, dotted path first"
    lines = []
    for detail in error.errors():
        where = ".".join(str(part) for part in detail["loc"]) or "(document)"
        lines.append(f"{where}: {detail['msg']}")
    return "; ".join(lines)


def load_matrix(path: Path):
    """Matrix-Market files (.mtx) load as CSR; anything else as dense text."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Matrix file {path} does not exist")
    if path.suffix == ".mtx":
        matrix = scipy.io.mmread(path)
        return sp.csr_matrix(matrix) if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
    try:
        return np.loadtxt(path, dtype=float, ndmin=2)
    except ValueError as error:
        raise ConfigError(f"{path}: {error}") from error


def read_document(path: Path, schema: type[BaseModel]):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path} does not exist")
    try:
        return schema.model_validate_json(path.read_text())
    except ValidationError as error:
        raise ConfigError(f"{path}: {describe_validation_error(error)}") from error


def load_problem(path: Path) -> ProblemSpec:
    "Matrix paths inside the document resolve against the document's directory"
    path = Path(path)
    document = read_document(path, ProblemDocument)
    return document.to_spec(base_dir=path.parent)


def save_problem(spec: ProblemSpec, path: Path):
    write_document(ProblemDocument.from_spec(spec), path)


def write_document(document: BaseModel, path: Path):
    Path(path).write_text(document.model_dump_json(indent=2) + "\n")


def load_vector(path: Path) -> np.ndarray:
    """A candidate point: a JSON list, a JSON object with `x` or `x_final`
    (a solve report), or whitespace-separated text."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path} does not exist")
    if path.suffix != ".json":
        try:
            return np.loadtxt(path, dtype=float, ndmin=1)
        except ValueError as error:
            raise ConfigError(f"{path}: {error}") from error
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as error:
        raise ConfigError(f"{path}: {error}") from error
    if isinstance(payload, dict):
        for key in ("x", "x_final"):
            if key in payload:
                payload = payload[key]
                break
        else:
            raise ConfigError(f"{path}: expected a list or an object with 'x' or 'x_final'")
    try:
        return np.array(payload, dtype=float).reshape(-1)
    except (TypeError, ValueError) as error:
        raise ConfigError(f"{path}: {error}") from error
