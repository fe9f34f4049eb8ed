#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Brute-force reference values by full diagonalization.

Nothing here goes through linalg: operators are placed on the full space by
index arithmetic, and exponentials come from eigh or a scaled Taylor series.
"""

from itertools import combinations, product
import logging
import math
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, TypeVar

import numpy as np

from .const import (
    DEFAULT_EXP_REAL_CAP,
    MAX_DIRECT_POLYMERS,
    MAX_ORACLE_EDGES,
    MAX_ORACLE_SPINS,
    MAX_ORACLE_STATES,
    TABLE_SUM_TOL,
)
from .exceptions import AdmissibilityError, CapExceededError, ModelError, NumericalError
from .hypergraph import connected_components
from .model import Params, SpinModel

_LOGGER = logging.getLogger(__name__)

T = TypeVar("T")

_TAYLOR_TERMS = 30
_TAYLOR_NORM = 0.5


def check_oracle_caps(model: SpinModel) -> int:
    """Return d^n, raising when the model is too large for the oracle."""
    if model.n_vertices > MAX_ORACLE_SPINS:
        raise CapExceededError("MAX_ORACLE_SPINS", MAX_ORACLE_SPINS, model.n_vertices)
    n_states = model.local_dim**model.n_vertices
    if n_states > MAX_ORACLE_STATES:
        raise CapExceededError("MAX_ORACLE_STATES", MAX_ORACLE_STATES, n_states)
    return n_states


def _place(
    operator: np.ndarray, sites: Sequence[int], n_sites: int, local_dim: int
) -> np.ndarray:
    """Return the operator on `sites` of an n-site register, identity elsewhere."""
    dim = local_dim**n_sites
    k = len(sites)
    strides = [local_dim ** (n_sites - 1 - s) for s in sites]
    states = np.arange(dim)
    digits = [(states // stride) % local_dim for stride in strides]

    local = np.zeros(dim, dtype=int)
    rest = states.copy()
    for digit, stride in zip(digits, strides):
        local = local * local_dim + digit
        rest = rest - digit * stride

    result = np.zeros((dim, dim), dtype=complex)
    for column_local in range(local_dim**k):
        offset = 0
        value = column_local
        for stride in reversed(strides):
            offset += (value % local_dim) * stride
            value //= local_dim
        result[states, rest + offset] += operator[local, column_local]
    return result


def full_hamiltonian(
    model: SpinModel,
    coupling: complex,
    sites: Optional[Sequence[int]] = None,
    edge_ids: Optional[Sequence[str]] = None,
) -> np.ndarray:
    """Return Σ_v Φ_v + λ Σ_e Ψ_e on the register of `sites` (all spins by default)."""
    sites = list(range(model.n_vertices)) if sites is None else list(sites)
    where = {vertex: pos for pos, vertex in enumerate(sites)}
    edge_ids = model.graph.edge_ids if edge_ids is None else edge_ids
    n_sites = len(sites)
    d = model.local_dim

    hamiltonian = np.zeros((d**n_sites, d**n_sites), dtype=complex)
    for vertex in sites:
        hamiltonian += _place(model.phi(vertex), [where[vertex]], n_sites, d)
    for edge_id in edge_ids:
        edge = model.graph.edge(edge_id)
        hamiltonian += coupling * _place(
            model.psi(edge_id), [where[v] for v in edge.vertices], n_sites, d
        )
    return hamiltonian


def _taylor_expm(matrix: np.ndarray) -> np.ndarray:
    norm = float(np.max(np.sum(np.abs(matrix), axis=1)))
    squarings = max(0, math.ceil(math.log2(norm / _TAYLOR_NORM))) if norm > 0 else 0
    scaled = matrix / 2**squarings
    result = np.eye(matrix.shape[0], dtype=complex)
    term = np.eye(matrix.shape[0], dtype=complex)
    for k in range(1, _TAYLOR_TERMS + 1):
        term = term @ scaled / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def exact_exp(matrix: np.ndarray) -> np.ndarray:
    """Return e^A: eigh for Hermitian A, scaled Taylor series otherwise."""
    if np.allclose(matrix, matrix.conj().T, rtol=0, atol=1e-12):
        eigenvalues, eigenvectors = np.linalg.eigh((matrix + matrix.conj().T) / 2)
        if eigenvalues[-1] > DEFAULT_EXP_REAL_CAP:
            raise NumericalError(f"Oracle exponential overflow: {eigenvalues[-1]}")
        return (eigenvectors * np.exp(eigenvalues)) @ eigenvectors.conj().T
    result = _taylor_expm(matrix)
    if not np.all(np.isfinite(result)):
        raise NumericalError("Oracle exponential is not finite")
    return result


def exact_partition_function(model: SpinModel, params: Params) -> complex:
    """Return Z = Tr[e^{−β(H_Φ + λH_Ψ)}] with Tr(I) = 1."""
    n_states = check_oracle_caps(model)
    gibbs = exact_exp(-params.beta * full_hamiltonian(model, params.coupling))
    value = complex(np.trace(gibbs) / n_states)
    _LOGGER.debug("Exact Z over %d states: %s", n_states, value)
    return value


def exact_thermal_distribution(
    model: SpinModel, params: Params
) -> Dict[Tuple[int, ...], float]:
    """Return μ(x) = ⟨x|ρ|x⟩ for every x in [d]^V."""
    if not params.is_real:
        raise AdmissibilityError(
            f"Thermal distribution needs a real coupling, got {params.coupling}"
        )
    check_oracle_caps(model)
    gibbs = exact_exp(-params.beta * full_hamiltonian(model, params.coupling))
    diagonal = np.real(np.diagonal(gibbs))
    diagonal = diagonal / np.sum(diagonal)
    if np.any(diagonal < -TABLE_SUM_TOL):
        raise NumericalError("Thermal distribution has negative entries")

    states = product(range(model.local_dim), repeat=model.n_vertices)
    return {state: float(max(p, 0.0)) for state, p in zip(states, diagonal)}


def exact_marginal(
    model: SpinModel,
    params: Params,
    assignment: Mapping[int, int],
    distribution: Optional[Mapping[Tuple[int, ...], float]] = None,
) -> float:
    """Return μ(x) summed over all completions of the partial assignment."""
    distribution = distribution or exact_thermal_distribution(model, params)
    return float(
        sum(
            p
            for state, p in distribution.items()
            if all(state[v] == value for v, value in assignment.items())
        )
    )


def exact_conditionals(
    model: SpinModel,
    params: Params,
    prefix: Mapping[int, int],
    vertex: int,
    distribution: Optional[Mapping[Tuple[int, ...], float]] = None,
) -> Tuple[float, ...]:
    """Return μ(x_v = y | prefix) for every y in [d]."""
    distribution = distribution or exact_thermal_distribution(model, params)
    values = [
        exact_marginal(model, params, {**prefix, vertex: y}, distribution)
        for y in range(model.local_dim)
    ]
    total = sum(values)
    if total <= 0:
        raise NumericalError(f"Prefix {dict(prefix)} has zero probability")
    return tuple(value / total for value in values)


def _admissible_sum(
    items: Sequence[T], weights: Sequence[complex], compatible: Callable[[T, T], bool]
) -> complex:
    """Return Σ over pairwise-compatible subsets (empty set included) of Π w."""
    n_items = len(items)

    def extend(start: int, chosen: List[int], product_: complex) -> complex:
        total = product_
        for idx in range(start, n_items):
            if all(compatible(items[idx], items[j]) for j in chosen):
                total += extend(idx + 1, chosen + [idx], product_ * weights[idx])
        return total

    return extend(0, [], 1 + 0j)


def abstract_polymer_z_direct(
    polymers: Sequence[T],
    weights: Sequence[complex],
    compatible: Callable[[T, T], bool],
) -> complex:
    """Return Z(C, w) by direct summation over admissible polymer sets."""
    if len(polymers) != len(weights):
        raise ModelError("Need one weight per polymer")
    if len(polymers) > MAX_DIRECT_POLYMERS:
        raise CapExceededError(
            "MAX_DIRECT_POLYMERS", MAX_DIRECT_POLYMERS, len(polymers)
        )
    return _admissible_sum(polymers, weights, compatible)


def _normalized_trace(matrix: np.ndarray) -> complex:
    return complex(np.trace(exact_exp(matrix)) / matrix.shape[0])


def oracle_polymer_weight(
    model: SpinModel, params: Params, edge_ids: Sequence[str]
) -> complex:
    """Return w_γ by summing over every edge subset T with itertools."""
    support = sorted({v for e in edge_ids for v in model.graph.edge(e).vertices})
    total = 0j
    for n_active in range(len(edge_ids) + 1):
        sign = (-1) ** (len(edge_ids) - n_active)
        for active in combinations(edge_ids, n_active):
            hamiltonian = full_hamiltonian(model, params.coupling, support, active)
            total += sign * _normalized_trace(-params.beta * hamiltonian)

    z0 = 1 + 0j
    for vertex in support:
        z0 *= _normalized_trace(-params.beta * model.phi(vertex))
    return total / z0


def polymer_representation_z(model: SpinModel, params: Params) -> complex:
    """Return Z(β, 0) · Σ over admissible polymer sets of Π w_γ, all by brute force."""
    graph = model.graph
    if graph.n_edges > MAX_ORACLE_EDGES:
        raise CapExceededError("MAX_ORACLE_EDGES", MAX_ORACLE_EDGES, graph.n_edges)

    polymers = []
    for size in range(1, graph.n_edges + 1):
        for subset in combinations(graph.edge_ids, size):
            if len(connected_components(graph, subset)) == 1:
                polymers.append(subset)
    weights = [oracle_polymer_weight(model, params, p) for p in polymers]
    _LOGGER.debug("Brute-force polymer representation: %d polymers", len(polymers))

    def support(edge_ids: Sequence[str]) -> set:
        return {v for e in edge_ids for v in graph.edge(e).vertices}

    non_interacting = exact_partition_function(model, Params(params.beta, 0j))
    return non_interacting * _admissible_sum(
        polymers, weights, lambda a, b: not support(a) & support(b)
    )
