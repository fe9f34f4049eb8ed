#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Polymer weights of the spin-system polymer representation.

w_γ = Σ_{T ⊆ E(γ)} (−1)^{|E(γ) \\ T|} Tr[e^{−β(Σ_v Φ_v + λ Σ_{e∈T} Ψ_e)}] / Z_γ(β, 0)
"""

import cmath
from dataclasses import dataclass
import logging
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .cache import Cache
from .const import DEFAULT_EXP_REAL_CAP
from .exceptions import AdmissibilityError, NumericalError
from .hypergraph import Polymer, degree_and_rank, polymer_from_positions
from .linalg import (
    PartialAssignment,
    embed_polymer_hamiltonian,
    normalized_trace_exp,
    projected_trace_exp,
    restrict,
    validate_assignment,
)
from .model import (
    Params,
    SpinModel,
    intermediate_weight_bound,
    weight_bound,
)

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PolymerWeight:
    """A polymer and its weight."""

    polymer: Polymer
    value: complex


@dataclass(frozen=True)
class BoundViolation:
    """A weight exceeding one of the decay bounds."""

    polymer: Polymer
    value: float
    bound: float
    kind: str


# Absolute floor below which a weight counts as numerical noise.
_BOUND_NOISE = 1e-15


def _cache_key(
    model: SpinModel, params: Params, kind: str, positions: tuple, restriction: tuple
) -> tuple:
    return (
        model.fingerprint,
        kind,
        params.beta,
        params.coupling,
        positions,
        restriction,
    )


def vertex_factor(
    model: SpinModel, beta: float, vertex: int, value: Optional[int] = None
) -> complex:
    """Return Tr[e^{−βΦ_v}], or ⟨s|e^{−βΦ_v}|s⟩/d when the spin is fixed to s."""
    exponent = -beta * model.phi(vertex)
    if value is None:
        return normalized_trace_exp(exponent)

    eigenvalues, eigenvectors = np.linalg.eigh((exponent + exponent.conj().T) / 2)
    diagonal = (np.abs(eigenvectors) ** 2) @ np.exp(eigenvalues)
    return complex(diagonal[int(value)] / model.local_dim)


def z0_product(
    model: SpinModel,
    beta: float,
    vertices: Iterable[int],
    assignment: Optional[PartialAssignment] = None,
) -> complex:
    """Return Π_v of the per-vertex factors, restricted where x fixes v."""
    assignment = assignment or {}
    result = 1 + 0j
    for vertex in vertices:
        result *= vertex_factor(model, beta, vertex, assignment.get(vertex))
    return result


def log_z0(
    model: SpinModel, beta: float, assignment: Optional[PartialAssignment] = None
) -> complex:
    """Return Σ_v log of the per-vertex factors over all vertices."""
    assignment = assignment or {}
    return sum(
        (
            cmath.log(vertex_factor(model, beta, v, assignment.get(v)))
            for v in range(model.n_vertices)
        ),
        0j,
    )


def _local_adjacency(model: SpinModel, polymer: Polymer) -> List[int]:
    """Return, per edge of the polymer, a bitmask of the polymer edges it touches."""
    index = {position: k for k, position in enumerate(polymer.positions)}
    adjacency = []
    for position in polymer.positions:
        mask = 0
        for nbr in model.graph.edge_neighbors(position):
            if nbr in index:
                mask |= 1 << index[nbr]
        adjacency.append(mask)
    return adjacency


def _split(subset: int, adjacency: List[int]) -> List[int]:
    """Split an edge bitmask into the bitmasks of its connected components."""
    components = []
    while subset:
        seen = frontier = subset & -subset
        while frontier:
            reached = 0
            while frontier:
                low = frontier & -frontier
                reached |= adjacency[low.bit_length() - 1]
                frontier ^= low
            frontier = reached & subset & ~seen
            seen |= frontier
        components.append(seen)
        subset &= ~seen
    return components


def component_factor(
    model: SpinModel,
    params: Params,
    positions: Tuple[int, ...],
    restriction: tuple = (),
    cache: Optional[Cache] = None,
    exp_real_cap: float = DEFAULT_EXP_REAL_CAP,
) -> complex:
    """Return Tr[e^{−β(Σ_v Φ_v + λ Σ_{e∈C} Ψ_e)}] / Z_C(β, 0) for a connected C.

    Traces and vertex factors are restricted to the part of `restriction`
    that falls inside the support of C.
    """
    part = polymer_from_positions(model.graph, positions)
    local = dict(restrict(dict(restriction), part.support))

    def compute() -> complex:
        exponent = embed_polymer_hamiltonian(model, params, part, part.edge_ids)
        trace = projected_trace_exp(exponent, part, model, local, exp_real_cap)
        return trace / z0_product(model, params.beta, part.support, local)

    if cache is None:
        return compute()
    key = _cache_key(model, params, "factor", positions, tuple(sorted(local.items())))
    return cache.setdefault(key, compute)


def _mobius_sum(
    model: SpinModel,
    params: Params,
    polymer: Polymer,
    restriction: tuple,
    cache: Optional[Cache],
    exp_real_cap: float,
) -> complex:
    """Return Σ_{T ⊆ E(γ)} (−1)^{|E(γ) \\ T|} Π_{C ∈ components(T)} F(C).

    Subsets are walked in Gray-code order. The normalised trace over γ
    factorises over the components of T and uncovered vertices contribute 1,
    so each connected sub-polymer is exponentiated once.
    """
    adjacency = _local_adjacency(model, polymer)
    factors: Dict[int, complex] = {}
    total = 0j
    for step in range(1 << polymer.size):
        subset = step ^ (step >> 1)
        term = 1 + 0j
        for component in _split(subset, adjacency):
            if component not in factors:
                factors[component] = component_factor(
                    model,
                    params,
                    tuple(
                        p for k, p in enumerate(polymer.positions) if component >> k & 1
                    ),
                    restriction,
                    cache,
                    exp_real_cap,
                )
            term *= factors[component]
        if (polymer.size - bin(subset).count("1")) % 2:
            total -= term
        else:
            total += term
    return total


def _weight(
    model: SpinModel,
    params: Params,
    polymer: Polymer,
    restriction: tuple,
    cache: Optional[Cache],
    exp_real_cap: float,
) -> PolymerWeight:
    def compute() -> PolymerWeight:
        try:
            value = _mobius_sum(
                model, params, polymer, restriction, cache, exp_real_cap
            )
        except NumericalError as err:
            raise NumericalError(
                f"Weight of polymer {polymer.edge_ids}: {err}"
            ) from err
        if not cmath.isfinite(value):
            raise NumericalError(f"Weight of polymer {polymer.edge_ids} is not finite")
        return PolymerWeight(polymer, value)

    if cache is None:
        return compute()
    return cache.setdefault(
        _cache_key(model, params, "weight", polymer.positions, restriction), compute
    )


def polymer_weight(
    model: SpinModel,
    params: Params,
    polymer: Polymer,
    cache: Optional[Cache] = None,
    exp_real_cap: float = DEFAULT_EXP_REAL_CAP,
) -> PolymerWeight:
    """Return w_γ.

    With a cache, each connected sub-polymer's exponential is shared between
    every polymer containing it.
    """
    return _weight(model, params, polymer, (), cache, exp_real_cap)


def polymer_weight_projected(
    model: SpinModel,
    params: Params,
    polymer: Polymer,
    assignment: Optional[PartialAssignment],
    cache: Optional[Cache] = None,
    exp_real_cap: float = DEFAULT_EXP_REAL_CAP,
) -> PolymerWeight:
    """Return the weight with every trace restricted to states consistent with x."""
    if not params.is_real:
        raise AdmissibilityError(
            f"Projected weights need a real coupling, got {params.coupling}"
        )
    assignment = assignment or {}
    validate_assignment(assignment, model.local_dim)
    return _weight(
        model,
        params,
        polymer,
        restrict(assignment, polymer.support),
        cache,
        exp_real_cap,
    )


def check_weight_bounds(
    model: SpinModel,
    params: Params,
    weights: Iterable[PolymerWeight],
) -> List[BoundViolation]:
    """Compare weights against the decay and intermediate bounds.

    Both bounds are only promised inside the weak-interaction regime; each
    violation is logged as a warning.
    """
    max_degree, rank = degree_and_rank(model.graph)
    violations = []
    for weight in weights:
        size = weight.polymer.size
        magnitude = abs(weight.value)
        for kind, bound in (
            ("decay", weight_bound(max_degree, rank, size)),
            (
                "intermediate",
                intermediate_weight_bound(params.beta, params.coupling, rank, size),
            ),
        ):
            if magnitude > bound * (1 + 1e-9) + _BOUND_NOISE:
                _LOGGER.warning(
                    "Polymer %s: |w| = %.6g exceeds %s bound %.6g",
                    weight.polymer.edge_ids,
                    magnitude,
                    kind,
                    bound,
                )
                violations.append(
                    BoundViolation(weight.polymer, magnitude, bound, kind)
                )
    return violations
