import json

import numpy as np
import pytest
import scipy.io
import scipy.sparse as sp

from sgdc.errors import ConfigError
from sgdc.io import load_matrix, load_problem, load_vector, save_problem
from sgdc.losses import LossModel
from sgdc.models import ProblemSpec
from sgdc.schemas.problem import ProblemDocument

EXAMPLE = ProblemDocument.model_config["json_schema_extra"]["examples"][0]


def test_dense_text_matrix(tmp_path):
    path = tmp_path / "A.txt"
    path.write_text("1 2 3\n4 5 6\n")
    assert load_matrix(path).tolist() == [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]


def test_single_row_text_matrix_stays_two_dimensional(tmp_path):
    path = tmp_path / "A.txt"
    path.write_text("1 2 3\n")
    assert load_matrix(path).shape == (1, 3)


def test_matrix_market_loads_as_csr(tmp_path):
    path = tmp_path / "A.mtx"
    scipy.io.mmwrite(path, sp.csr_matrix(np.array([[0.0, 1.5], [2.0, 0.0]])))
    matrix = load_matrix(path)
    assert sp.issparse(matrix) and matrix.format == "csr"
    assert matrix.toarray().tolist() == [[0.0, 1.5], [2.0, 0.0]]


def test_missing_and_malformed_matrices(tmp_path):
    with pytest.raises(ConfigError):
        load_matrix(tmp_path / "nothing.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3\n")
    with pytest.raises(ConfigError):
        load_matrix(bad)


def test_problem_with_matrix_path(tmp_path):
    (tmp_path / "A.txt").write_text("1 0\n0 1\n")
    document = json.loads(json.dumps(EXAMPLE))
    document["loss"]["A"] = {"path": "A.txt"}
    problem = tmp_path / "problem.json"
    problem.write_text(json.dumps(document))
    spec = load_problem(problem)
    assert spec.n == 2
    assert spec.box.upper.tolist() == [10.0, 10.0]


def test_problem_defaults(tmp_path):
    problem = tmp_path / "problem.json"
    document = {"loss": {"A": {"dense": [[1.0, 2.0]]}, "b": [1.0]}, "lambda1": 0.5}
    problem.write_text(json.dumps(document))
    spec = load_problem(problem)
    assert spec.box.is_unbounded
    assert spec.groups.count == 2
    assert spec.groups.weights.tolist() == [1.0, 1.0]
    assert spec.lambda2 == 0.0


def test_problem_errors_name_the_field(tmp_path):
    problem = tmp_path / "problem.json"
    document = json.loads(json.dumps(EXAMPLE))
    document["lambda1"] = -1.0
    problem.write_text(json.dumps(document))
    with pytest.raises(ConfigError, match="lambda1"):
        load_problem(problem)
    problem.write_text("{not json")
    with pytest.raises(ConfigError):
        load_problem(problem)
    document = json.loads(json.dumps(EXAMPLE))
    document["loss"]["A"] = {"dense": [[1.0, 0.0]], "path": "A.txt"}
    problem.write_text(json.dumps(document))
    with pytest.raises(ConfigError, match="exactly one"):
        load_problem(problem)


def test_save_and_load_problem(tmp_path, toy_spec):
    path = tmp_path / "toy.json"
    save_problem(toy_spec, path)
    spec = load_problem(path)
    assert spec.loss.A.to_dense().tolist() == [[1.0, 0.0], [0.0, 1.0]]
    assert spec.loss.b.tolist() == [2.0, 0.1]
    assert spec.box.lower.tolist() == [0.0, 0.0]
    assert spec.lambda1 == 1.0


def test_infinite_bounds_are_written_as_null(tmp_path, make_problem):
    spec = make_problem(np.eye(2), [1.0, 1.0], [0.0, -np.inf], [np.inf, 0.0])
    path = tmp_path / "p.json"
    save_problem(spec, path)
    payload = json.loads(path.read_text())
    assert payload["box"] == {"lower": [0.0, None], "upper": [None, 0.0]}
    assert load_problem(path).box.vartheta == np.inf


def test_sparse_problem_round_trip(tmp_path, make_problem):
    spec = make_problem(np.eye(3), [1.0, 0.0, 2.0], -1.0, 1.0)
    sparse = ProblemSpec(
        LossModel.least_squares(sp.csr_matrix(np.eye(3)), [1.0, 0.0, 2.0]),
        spec.box,
        spec.groups,
        spec.lambda1,
    )
    path = tmp_path / "sparse.json"
    save_problem(sparse, path)
    assert "csr" in json.loads(path.read_text())["loss"]["A"]
    loaded = load_problem(path)
    assert loaded.loss.A.is_sparse
    assert loaded.loss.A.to_dense().tolist() == np.eye(3).tolist()


@pytest.mark.parametrize(
    "name, content",
    [
        ("x.json", "[1.0, 0.0, 2.5]"),
        ("x.json", '{"x": [1.0, 0.0, 2.5]}'),
        ("report.json", '{"x_final": [1.0, 0.0, 2.5], "iterations": 3}'),
        ("x.txt", "1.0 0.0 2.5\n"),
    ],
)
def test_load_vector(tmp_path, name, content):
    path = tmp_path / name
    path.write_text(content)
    assert load_vector(path).tolist() == [1.0, 0.0, 2.5]


def test_load_vector_errors(tmp_path):
    path = tmp_path / "x.json"
    path.write_text('{"y": [1.0]}')
    with pytest.raises(ConfigError):
        load_vector(path)
    path.write_text("[1.0, ")
    with pytest.raises(ConfigError):
        load_vector(path)
    with pytest.raises(ConfigError):
        load_vector(tmp_path / "missing.json")
