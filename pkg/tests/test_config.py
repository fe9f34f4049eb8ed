#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)

# pylint: disable=redefined-outer-name
"""Tests for model documents, options and report schemas."""
import json
from pathlib import Path

import numpy as np
import pytest
from pytest import raises
import voluptuous as vol

from spin_expansion.config import (
    PARTITION_REPORT_SCHEMA,
    SAMPLE_REPORT_SCHEMA,
    complex_matrix,
    complex_pair,
    default_workers,
    load_model,
    parse_model_document,
    parse_overrides,
    parse_params,
    parse_run_options,
    round_trip,
    vertex_order,
)
from spin_expansion.const import ENV_WORKERS, MAX_URSELL_VERTICES
from spin_expansion.exceptions import ParseError
from spin_expansion.model import kron_all, validate_model

from tests.conftest import X, Z, model_document
from tests.const import MOCK_CONFIG, MOCK_SEED

CONFIG_DIR = Path(__file__).parent.parent / "config"


def test_load_example_models():
    """Test the bundled model documents."""
    ising = load_model(CONFIG_DIR / "ising.json")
    assert ising.n_vertices == 4
    assert ising.graph.edge_ids == ("e01", "e12", "e23")
    assert np.allclose(ising.psi("e12"), kron_all(X, X))
    assert validate_model(ising).valid is True

    hyper = load_model(str(CONFIG_DIR / "hyperedge.json"))
    assert hyper.graph.edge("h012").cardinality == 3
    assert np.allclose(hyper.phi(0), X)
    assert np.allclose(hyper.phi(3), Z)
    assert np.allclose(hyper.phi(1), np.zeros((2, 2)))
    assert validate_model(hyper).valid is True


def test_load_model_round_trip(model_file, single_edge_model):
    """Test that an encoded model decodes to the same operators."""
    model = load_model(model_file)

    assert model.graph.edge_ids == single_edge_model.graph.edge_ids
    assert np.allclose(model.psi("e"), single_edge_model.psi("e"))
    assert np.allclose(model.phi(1), single_edge_model.phi(1))


def test_load_model_errors(tmp_path):
    """Test unreadable files and malformed JSON."""
    with raises(ParseError, match="cannot read"):
        load_model(tmp_path / "missing.json")

    broken = tmp_path / "broken.json"
    broken.write_text('{"d": 2,\n  "n_vertices": }', encoding="utf-8")
    with raises(ParseError) as err:
        load_model(broken)
    assert err.value.path.startswith("broken.json: line 2")


@pytest.mark.parametrize(
    "change,path",
    [
        (lambda doc: doc["edges"][0].pop("vertices"), "edges[0].vertices"),
        (lambda doc: doc["edges"][0].update(vertices=[0, "x"]), "edges[0].vertices[1]"),
        (lambda doc: doc.update(d=1), "d"),
        (lambda doc: doc.update(d=True), "d"),
        (lambda doc: doc.pop("n_vertices"), "n_vertices"),
        (lambda doc: doc["edges"][0].update(vertices=[0, 7]), "edges"),
    ],
)
def test_parse_model_document_errors(single_edge_model, change, path):
    """Test that structural errors name where they occur."""
    document = model_document(single_edge_model)
    change(document)

    with raises(ParseError) as err:
        parse_model_document(document)
    assert err.value.path.startswith(path)
    assert str(err.value).startswith(f"{err.value.path}: ")


def test_parse_model_document_integer_ids(single_edge_model):
    """Test that integer edge ids are accepted as strings."""
    document = model_document(single_edge_model)
    document["edges"][0]["id"] = 7
    document["interactions"] = {"7": document["interactions"]["e"]}

    model = parse_model_document(json.loads(json.dumps(document)))
    assert model.graph.edge_ids == ("7",)
    assert validate_model(model).valid is True


def test_complex_matrix():
    """Test nested and flat encodings."""
    nested = complex_matrix([[[1, 0], [0, -1]], [[0, 1], [2, 0]]])
    assert np.allclose(nested, [[1, -1j], [1j, 2]])

    flat = complex_matrix([[1, 0], [0, 0], [0, 0], [1, 0]])
    assert np.allclose(flat, np.eye(2))

    for value in (
        [],
        [[1, 0], [0, 0], [0, 0]],
        [[[1, 0], [0, 0]], [[0, 0]]],
        [[[1, 0, 0], [0, 0]], [[0, 0], [1, 0]]],
        [[[True, 0], [0, 0]], [[0, 0], [1, 0]]],
        "I",
    ):
        with raises(vol.Invalid):
            complex_matrix(value)


def test_parse_params():
    """Test defaults, complex couplings and range checks."""
    params = parse_params(MOCK_CONFIG)
    assert params.beta == 0.5
    assert params.coupling == 1e-3
    assert params.seed == MOCK_SEED

    defaults = parse_params({"beta": 1})
    assert defaults.coupling == 0
    assert defaults.epsilon == 0.1
    assert defaults.seed is None

    assert parse_params({"beta": 1, "lambda": [0.1, -0.2]}).coupling == 0.1 - 0.2j

    for config in (
        {},
        {"beta": 0},
        {"beta": "1"},
        {"beta": 1, "epsilon": 1.5},
        {"beta": 1, "lambda": [1]},
        {"beta": 1, "seed": -1},
        {"beta": 1, "seed": 1.5},
    ):
        with raises(ParseError):
            parse_params(config)


def test_parse_overrides():
    """Test key=value splitting."""
    assert parse_overrides([]) == {}
    assert parse_overrides(["workers=2", " truncation_c0 = 1.5"]) == {
        "workers": "2",
        "truncation_c0": "1.5",
    }

    for item in ("workers", "=2"):
        with raises(ParseError) as err:
            parse_overrides([item])
        assert err.value.path == "--set"


def test_parse_run_options(monkeypatch):
    """Test option coercion and the worker fallback chain."""
    monkeypatch.delenv(ENV_WORKERS, raising=False)

    options = parse_run_options()
    assert options["workers"] == 1
    assert options["truncation_c0"] == 3.0
    assert options["max_cluster_polymers"] == MAX_URSELL_VERTICES

    options = parse_run_options(
        {"truncation_c0": "1.5", "vertex_order": "2,0,1", "truncation_order": "4"}
    )
    assert options["truncation_c0"] == 1.5
    assert options["vertex_order"] == [2, 0, 1]
    assert options["truncation_order"] == 4

    monkeypatch.setenv(ENV_WORKERS, "3")
    assert parse_run_options()["workers"] == 3
    assert parse_run_options({"workers": "2"})["workers"] == 2
    assert parse_run_options({"workers": "2"}, workers=4)["workers"] == 4

    for overrides in (
        {"truncation_c0": "-1"},
        {"workers": "0"},
        {"max_cluster_polymers": "13"},
        {"vertex_order": "0,0"},
        {"unknown": "1"},
    ):
        with raises(ParseError):
            parse_run_options(overrides)


def test_default_workers(monkeypatch):
    """Test the environment variable."""
    monkeypatch.delenv(ENV_WORKERS, raising=False)
    assert default_workers() == 1

    monkeypatch.setenv(ENV_WORKERS, " ")
    assert default_workers() == 1

    for raw in ("many", "0"):
        monkeypatch.setenv(ENV_WORKERS, raw)
        with raises(ParseError) as err:
            default_workers()
        assert err.value.path == ENV_WORKERS


def test_vertex_order():
    """Test permutation parsing."""
    assert vertex_order([1, 0]) == [1, 0]
    assert vertex_order("1, 2, 0") == [1, 2, 0]

    for value in ("1,a", [1, 2], 3):
        with raises(vol.Invalid):
            vertex_order(value)


def test_report_round_trip():
    """Test that reports survive JSON encoding."""
    partition = {
        "admissible": True,
        "lambda_star": 0.0024787521766663585,
        "max_degree": 1,
        "rank": 2,
        "epsilon": 0.1,
        "truncation_order": 7,
        "cluster_count": None,
        "polymer_count": 1,
        "log_z0": complex_pair(0.24),
        "cluster_sum": complex_pair(1e-7 + 2e-9j),
        "log_z": complex_pair(0.2400001 + 2e-9j),
        "z": complex_pair(1.27),
        "normalized": True,
        "partials": [complex_pair(1e-7), complex_pair(-5e-15)],
        "decay_ratio": None,
        "kp_margin": 0.001,
        "warnings": [],
    }
    text, decoded = round_trip(PARTITION_REPORT_SCHEMA, partition)
    assert decoded == partition
    assert json.loads(text)["log_z0"] == [0.24, 0.0]

    sample = {
        "admissible": False,
        "lambda_star": 0.1,
        "epsilon": 0.1,
        "samples": ["0101"],
        "seed": 2**64 - 1,
        "queries": 8,
    }
    assert round_trip(SAMPLE_REPORT_SCHEMA, sample)[1] == sample

    with raises(vol.Invalid):
        SAMPLE_REPORT_SCHEMA({**sample, "queries": 8.5})
