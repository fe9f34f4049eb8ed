#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)

# pylint: disable=redefined-outer-name,protected-access
"""Tests for the brute-force reference values."""
import math

import numpy as np
import pytest
from pytest import raises
from scipy.linalg import expm

from spin_expansion.exceptions import (
    AdmissibilityError,
    CapExceededError,
    ModelError,
    NumericalError,
)
from spin_expansion.model import Params, kron_all
from spin_expansion.oracle import (
    _place,
    _taylor_expm,
    abstract_polymer_z_direct,
    check_oracle_caps,
    exact_conditionals,
    exact_exp,
    exact_marginal,
    exact_partition_function,
    exact_thermal_distribution,
    full_hamiltonian,
    oracle_polymer_weight,
    polymer_representation_z,
)
from spin_expansion.weights import z0_product

from tests.conftest import X, Y, Z, build_model, random_hermitian, random_model


def test_place(rng):
    """Test index-arithmetic placement against Kronecker products."""
    a = random_hermitian(rng, 2)
    b = random_hermitian(rng, 2)
    ident = np.eye(2)

    assert np.allclose(_place(a, [0], 3, 2), kron_all(a, ident, ident))
    assert np.allclose(_place(kron_all(a, b), [2, 0], 3, 2), kron_all(b, ident, a))
    assert np.allclose(_place(kron_all(a, b), [1, 2], 3, 2), kron_all(ident, a, b))


def test_full_hamiltonian(path_model):
    """Test the assembled Hamiltonian on a 3-qubit path."""
    ident = np.eye(2)
    expected = (
        kron_all(Z, ident, ident)
        + kron_all(ident, X, ident)
        + kron_all(ident, ident, Z)
        + 0.3 * (kron_all(X, X, ident) + kron_all(ident, Y, Y))
    )

    assert np.allclose(full_hamiltonian(path_model, 0.3), expected)
    assert np.allclose(
        full_hamiltonian(path_model, 0.3, sites=[1, 2], edge_ids=["b"]),
        kron_all(X, ident) + kron_all(ident, Z) + 0.3 * kron_all(Y, Y),
    )


def test_exact_exp(rng):
    """Test both exponential paths against scipy."""
    hermitian = 4 * random_hermitian(rng, 8)
    assert np.allclose(exact_exp(hermitian), expm(hermitian))

    general = hermitian + 0.7j * random_hermitian(rng, 8)
    assert np.allclose(exact_exp(general), expm(general), rtol=1e-10, atol=1e-10)
    assert np.allclose(_taylor_expm(np.zeros((2, 2))), np.eye(2))

    with raises(NumericalError):
        exact_exp(np.diag([800.0, 0.0]))


def test_exact_partition_function_product(path_model, star_model):
    """Test that Z(β, 0) equals the product of vertex factors."""
    for model in (path_model, star_model):
        params = Params(beta=0.7, coupling=0.0)
        assert exact_partition_function(model, params) == pytest.approx(
            z0_product(model, 0.7, range(model.n_vertices)), rel=1e-12
        )


def test_exact_partition_function_high_temperature(hyperedge_model):
    """Test Z → 1 as β → 0."""
    params = Params(beta=1e-8, coupling=0.5)

    assert exact_partition_function(hyperedge_model, params) == pytest.approx(
        1.0, abs=1e-7
    )


def test_exact_partition_function_eigh(single_edge_model):
    """Test a 4×4 case by an independent diagonalization."""
    beta, coupling = 0.5, 0.4
    hamiltonian = kron_all(Z, np.eye(2)) + kron_all(np.eye(2), Z) + coupling * kron_all(
        X, X
    )
    eigenvalues = np.linalg.eigvalsh(hamiltonian)
    expected = np.exp(-beta * eigenvalues).sum() / 4

    assert exact_partition_function(
        single_edge_model, Params(beta, coupling)
    ) == pytest.approx(expected, rel=1e-12)

    closed_form = (
        2 * math.cosh(beta * math.sqrt(4 + coupling**2))
        + 2 * math.cosh(beta * coupling)
    ) / 4
    assert expected == pytest.approx(closed_form, rel=1e-12)


def test_exact_partition_function_complex(single_edge_model):
    """Test complex couplings through the Taylor path."""
    params = Params(beta=0.5, coupling=0.3 + 0.2j)
    hamiltonian = full_hamiltonian(single_edge_model, params.coupling)

    assert exact_partition_function(single_edge_model, params) == pytest.approx(
        np.trace(expm(-0.5 * hamiltonian)) / 4, rel=1e-10
    )


def test_exact_thermal_distribution(path_model, single_edge_model):
    """Test normalization and the product law without coupling."""
    distribution = exact_thermal_distribution(path_model, Params(0.5, 0.2))
    assert len(distribution) == 8
    assert sum(distribution.values()) == pytest.approx(1.0, abs=1e-12)
    assert all(p >= 0 for p in distribution.values())

    beta = 0.5
    down = math.exp(-beta) / (2 * math.cosh(beta))
    product = exact_thermal_distribution(single_edge_model, Params(beta, 0.0))
    assert product[(0, 0)] == pytest.approx(down**2)
    assert product[(0, 1)] == pytest.approx(down * (1 - down))

    with raises(AdmissibilityError):
        exact_thermal_distribution(path_model, Params(0.5, 0.1j))


def test_exact_marginal_consistency(path_model):
    """Test that marginals sum over the free spins."""
    params = Params(beta=0.5, coupling=0.2)
    distribution = exact_thermal_distribution(path_model, params)

    assert exact_marginal(path_model, params, {}, distribution) == pytest.approx(1.0)
    for value in (0, 1):
        parts = [
            exact_marginal(path_model, params, {0: value, 2: y}, distribution)
            for y in (0, 1)
        ]
        assert sum(parts) == pytest.approx(
            exact_marginal(path_model, params, {0: value}, distribution)
        )

    conditionals = exact_conditionals(path_model, params, {0: 1}, 2, distribution)
    assert sum(conditionals) == pytest.approx(1.0)
    assert conditionals[0] == pytest.approx(
        exact_marginal(path_model, params, {0: 1, 2: 0})
        / exact_marginal(path_model, params, {0: 1})
    )


def test_abstract_polymer_z_direct():
    """Test direct summation over compatible sets."""

    def disjoint(a, b):
        return not a & b

    polymers = [{0, 1}, {1, 2}, {2, 3}]
    weights = [0.1, 0.2, 0.3]
    assert abstract_polymer_z_direct(polymers, weights, disjoint) == pytest.approx(
        1 + 0.6 + 0.1 * 0.3
    )
    assert abstract_polymer_z_direct([], [], disjoint) == 1

    with raises(ModelError):
        abstract_polymer_z_direct(polymers, weights[:2], disjoint)
    with raises(CapExceededError):
        abstract_polymer_z_direct([{i} for i in range(21)], [0.0] * 21, disjoint)


def test_oracle_polymer_weight(single_edge_model):
    """Test Z = Z0 (1 + w) for a single polymer."""
    params = Params(beta=0.5, coupling=0.4)
    weight = oracle_polymer_weight(single_edge_model, params, ["e"])
    z0 = exact_partition_function(single_edge_model, Params(0.5, 0.0))

    assert z0 * (1 + weight) == pytest.approx(
        exact_partition_function(single_edge_model, params), rel=1e-12
    )


@pytest.mark.parametrize("coupling", [0.2, -0.5, 0.3j])
def test_polymer_representation_z(path_model, star_model, hyperedge_model, coupling):
    """Test Z = Z(β, 0) · Z(C, w) by brute force."""
    params = Params(beta=0.5, coupling=coupling)

    for model in (path_model, star_model, hyperedge_model):
        assert polymer_representation_z(model, params) == pytest.approx(
            exact_partition_function(model, params), rel=1e-8
        )

    cycle = random_model(
        3, 4, [("a", (0, 1)), ("b", (1, 2)), ("c", (2, 3)), ("d", (3, 0))]
    )
    assert polymer_representation_z(cycle, params) == pytest.approx(
        exact_partition_function(cycle, params), rel=1e-8
    )


def test_oracle_caps():
    """Test spin, state and edge caps."""
    assert check_oracle_caps(build_model(12, [])) == 4096

    with raises(CapExceededError) as err:
        check_oracle_caps(build_model(13, []))
    assert err.value.cap_name == "MAX_ORACLE_SPINS"

    with raises(CapExceededError) as err:
        check_oracle_caps(build_model(7, [], local_dim=4))
    assert err.value.cap_name == "MAX_ORACLE_STATES"

    crowded = build_model(2, [(f"e{i}", (0, 1)) for i in range(11)])
    with raises(CapExceededError) as err:
        polymer_representation_z(crowded, Params(0.5, 0.1))
    assert err.value.cap_name == "MAX_ORACLE_EDGES"
