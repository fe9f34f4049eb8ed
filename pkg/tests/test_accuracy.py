#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)

# pylint: disable=redefined-outer-name
"""Accuracy of the estimator and the sampler on a corpus of small models."""
import cmath

import numpy as np
import pytest

from spin_expansion.expansion import ClusterExpansion
from spin_expansion.model import Params, kron_all, model_threshold
from spin_expansion.oracle import (
    exact_conditionals,
    exact_partition_function,
    exact_thermal_distribution,
)
from spin_expansion.sampler import ChainRuleSampler, total_variation

from tests.conftest import X, Z, build_model, random_hermitian
from tests.const import MOCK_BETA

GRAPHS = {
    "path_4": (4, [("a", (0, 1)), ("b", (1, 2)), ("c", (2, 3))]),
    "cycle_5": (5, [(f"c{i}", (i, (i + 1) % 5)) for i in range(5)]),
    "star_5": (5, [(f"s{i}", (0, i)) for i in range(1, 5)]),
    "tree_7": (
        7,
        [
            ("a", (0, 1)),
            ("b", (0, 2)),
            ("c", (1, 3)),
            ("d", (1, 4)),
            ("e", (2, 5)),
            ("f", (2, 6)),
        ],
    ),
    "prism_6": (
        6,
        [
            ("t0", (0, 1)),
            ("t1", (1, 2)),
            ("t2", (2, 0)),
            ("u0", (3, 4)),
            ("u1", (4, 5)),
            ("u2", (5, 3)),
            ("r0", (0, 3)),
            ("r1", (1, 4)),
            ("r2", (2, 5)),
        ],
    ),
    "hyper_chain_5": (5, [("h1", (0, 1, 2)), ("h2", (2, 3, 4)), ("p", (1, 3))]),
    "cycle_8": (8, [(f"c{i}", (i, (i + 1) % 8)) for i in range(8)]),
    "path_10": (10, [(f"p{i}", (i, i + 1)) for i in range(9)]),
}


def _corpus_model(name, seed=0):
    """Random on-site terms; couplings (I + R)/2 so every edge shifts log Z."""
    n_vertices, edges = GRAPHS[name]
    rng = np.random.default_rng(seed)
    on_site = {v: random_hermitian(rng, 2) for v in range(n_vertices)}
    interactions = {}
    for edge_id, vertices in edges:
        dim = 2 ** len(vertices)
        interactions[edge_id] = (np.eye(dim) + random_hermitian(rng, dim)) / 2
    return build_model(n_vertices, edges, on_site, interactions)


def _ising_model(name):
    """Tilted field on every site, Z ⊗ Z on every pair edge."""
    n_vertices, edges = GRAPHS[name]
    field = (Z + X) / np.sqrt(2)
    return build_model(
        n_vertices,
        edges,
        {v: field for v in range(n_vertices)},
        {edge_id: kron_all(Z, Z) for edge_id, _ in edges},
    )


def _relative_error(estimate, exact):
    return abs(estimate - exact) / abs(exact)


@pytest.mark.parametrize("name", sorted(GRAPHS))
def test_estimate_accuracy_corpus(name):
    """Test |Ẑ/Z − 1| <= ε at λ* for ε = 1e-2 and 1e-3."""
    model = _corpus_model(name)
    threshold = model_threshold(model, MOCK_BETA)
    expansion = ClusterExpansion(model)

    for coupling in (threshold, -threshold):
        exact = exact_partition_function(model, Params(MOCK_BETA, coupling))
        for epsilon in (1e-2, 1e-3):
            report = expansion.log_z(Params(MOCK_BETA, coupling, epsilon))
            error = _relative_error(report.z, exact)
            without_clusters = _relative_error(cmath.exp(report.log_z0), exact)

            assert report.admissible is True
            assert report.warnings == []
            assert error <= epsilon
            assert error <= without_clusters / 100


@pytest.mark.parametrize("name", ["path_4", "cycle_5", "prism_6", "hyper_chain_5"])
def test_estimate_accuracy_strong_coupling(name):
    """Test accuracy where dropping the cluster sum misses by more than ε."""
    model = _corpus_model(name, seed=1)
    expansion = ClusterExpansion(model, workers=2)

    for coupling in (0.15, -0.15):
        exact = exact_partition_function(model, Params(MOCK_BETA, coupling))
        for epsilon in (1e-2, 1e-3):
            report = expansion.log_z(Params(MOCK_BETA, coupling, epsilon))

            assert report.admissible is False
            assert _relative_error(cmath.exp(report.log_z0), exact) > epsilon
            assert _relative_error(report.z, exact) <= epsilon


@pytest.mark.parametrize("name", ["path_4", "star_5", "hyper_chain_5"])
def test_sampler_total_variation_corpus(name):
    """Test d_TV(sampler law, thermal law) <= ε on random models at λ*."""
    model = _corpus_model(name, seed=2)
    threshold = model_threshold(model, MOCK_BETA)
    params = Params(MOCK_BETA, threshold, epsilon=1e-2)

    table = ChainRuleSampler(model, params).table()
    exact = exact_thermal_distribution(model, params)

    assert total_variation(table, exact) <= params.epsilon


@pytest.mark.parametrize("name", ["path_4", "star_5"])
def test_sampler_total_variation_strong_coupling(name):
    """Test the sampler where the product law is more than ε away."""
    model = _ising_model(name)
    params = Params(MOCK_BETA, 0.4, epsilon=0.05)

    table = ChainRuleSampler(model, params).table()
    exact = exact_thermal_distribution(model, params)
    product_law = exact_thermal_distribution(model, Params(MOCK_BETA, 0.0))

    assert total_variation(product_law, exact) > params.epsilon
    assert total_variation(table, exact) <= params.epsilon


@pytest.mark.parametrize(
    "model_factory,name,coupling",
    [
        (_ising_model, "star_5", 0.4),
        (_ising_model, "cycle_5", 0.3),
        (_corpus_model, "hyper_chain_5", None),
        (_corpus_model, "star_5", None),
    ],
)
def test_conditionals_every_step(model_factory, name, coupling):
    """Test every conditional on a sampled path within (ε/n) relative error."""
    model = model_factory(name)
    if coupling is None:
        coupling = model_threshold(model, MOCK_BETA)
    params = Params(MOCK_BETA, coupling, epsilon=0.05, seed=11)
    sampler = ChainRuleSampler(model, params, vertex_order=[4, 2, 0, 3, 1])
    distribution = exact_thermal_distribution(model, params)
    bound = params.epsilon / model.n_vertices

    run = sampler.sample(params.seed)
    prefix = {}
    for vertex, approx in zip(sampler.vertex_order, run.conditionals):
        exact = exact_conditionals(model, params, prefix, vertex, distribution)
        for value, reference in zip(approx, exact):
            assert abs(value - reference) <= bound * reference + 1e-12
        prefix[vertex] = run.assignment[vertex]
    assert run.queries == model.n_vertices * model.local_dim
