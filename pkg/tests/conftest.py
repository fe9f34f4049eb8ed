# pylint: disable=protected-access,redefined-outer-name
"""Global fixtures for spin_expansion tests."""
# Fixtures that are defined in conftest.py are available across all tests. You can also
# define fixtures within a particular test file to scope them locally.
#
# See here for more info: https://docs.pytest.org/en/latest/fixture.html (note that
# pytest includes fixtures OOB which you can use as defined on this page)
import json
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pytest

from spin_expansion.hypergraph import Multihypergraph
from spin_expansion.model import SpinModel, kron_all, operator_norm, pauli

from tests.const import MOCK_BETA, MOCK_SEED

X = pauli("X")
Y = pauli("Y")
Z = pauli("Z")


def build_model(
    n_vertices: int,
    edges: Sequence[Tuple[str, Sequence[int]]],
    on_site: Optional[Dict[int, np.ndarray]] = None,
    interactions: Optional[Dict[str, np.ndarray]] = None,
    local_dim: int = 2,
) -> SpinModel:
    """Build a spin model without validation."""
    return SpinModel(
        Multihypergraph(n_vertices, edges),
        local_dim,
        dict(on_site or {}),
        dict(interactions or {}),
    )


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Return a random Hermitian matrix with operator norm 1."""
    matrix = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    matrix = (matrix + matrix.conj().T) / 2
    return matrix / (operator_norm(matrix) * (1 + 1e-12))


def random_model(
    seed: int,
    n_vertices: int,
    edges: Sequence[Tuple[str, Sequence[int]]],
    local_dim: int = 2,
) -> SpinModel:
    """Return a model with random Hermitian operators of norm <= 1."""
    rng = np.random.default_rng(seed)
    return build_model(
        n_vertices,
        edges,
        {v: random_hermitian(rng, local_dim) for v in range(n_vertices)},
        {
            edge_id: random_hermitian(rng, local_dim ** len(vertices))
            for edge_id, vertices in edges
        },
        local_dim,
    )


def matrix_document(matrix: np.ndarray) -> list:
    """Encode a matrix as nested rows of [re, im] pairs."""
    return [[[float(e.real), float(e.imag)] for e in row] for row in np.asarray(matrix)]


def model_document(model: SpinModel) -> dict:
    """Encode a model as a JSON model document."""
    return {
        "d": model.local_dim,
        "n_vertices": model.n_vertices,
        "edges": [
            {"id": edge.edge_id, "vertices": list(edge.vertices)}
            for edge in model.graph.edges
        ],
        "on_site": {str(v): matrix_document(op) for v, op in model.on_site.items()},
        "interactions": {
            e: matrix_document(op) for e, op in model.interactions.items()
        },
    }


@pytest.fixture
def single_edge_model() -> SpinModel:
    """Two qubits, Φ = Z on both, Ψ = X ⊗ X."""
    return build_model(2, [("e", (0, 1))], {0: Z, 1: Z}, {"e": kron_all(X, X)})


@pytest.fixture
def path_model() -> SpinModel:
    """Three qubits on a path with non-commuting couplings."""
    return build_model(
        3,
        [("a", (0, 1)), ("b", (1, 2))],
        {0: Z, 1: X, 2: Z},
        {"a": kron_all(X, X), "b": kron_all(Y, Y)},
    )


@pytest.fixture
def star_model() -> SpinModel:
    """Four qubits, three edges sharing vertex 0."""
    return build_model(
        4,
        [("s1", (0, 1)), ("s2", (0, 2)), ("s3", (0, 3))],
        {0: X, 1: Z, 2: Z, 3: (Z + X) / np.sqrt(2)},
        {"s1": kron_all(Z, Z), "s2": kron_all(X, X), "s3": kron_all(Y, Y)},
    )


@pytest.fixture
def hyperedge_model() -> SpinModel:
    """A rank-3 hyperedge plus a pair edge sharing two of its vertices."""
    return build_model(
        3,
        [("h", (0, 1, 2)), ("p", (2, 0))],
        {0: X, 2: Z},
        {"h": kron_all(Z, Z, Z), "p": kron_all(X, Y)},
    )


@pytest.fixture
def free_model() -> SpinModel:
    """Three qubits with zero on-site terms and λ-only couplings."""
    return build_model(
        3,
        [("a", (0, 1)), ("b", (1, 2))],
        {},
        {"a": kron_all(X, X), "b": kron_all(Z, Z)},
    )


@pytest.fixture
def model_file(tmp_path, single_edge_model):
    """Write the single-edge model to a JSON document."""
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model_document(single_edge_model)), encoding="utf-8")
    return path


@pytest.fixture
def rng():
    """Seeded random generator."""
    return np.random.default_rng(MOCK_SEED)


@pytest.fixture
def beta():
    """Default inverse temperature."""
    return MOCK_BETA
