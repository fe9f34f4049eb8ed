#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Spin models, run parameters and the weak-interaction regime."""

from dataclasses import dataclass, field
from functools import cached_property, reduce
import hashlib
import logging
import math
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from .const import (
    DEFAULT_MIN_DEGREE,
    DEFAULT_MIN_RANK,
    HERMITIAN_TOL,
    NORM_TOL,
)
from .exceptions import ModelError
from .hypergraph import Multihypergraph, degree_and_rank

_LOGGER = logging.getLogger(__name__)

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# Relative slack on |λ| <= λ* so that phase rotations do not flip the verdict.
_ADMISSIBLE_SLACK = 1e-12


def pauli(name: str) -> np.ndarray:
    """Return a copy of the Pauli matrix I, X, Y or Z."""
    try:
        return _PAULI[name.upper()].copy()
    except KeyError as err:
        raise ModelError(f"Unknown Pauli matrix: {name}") from err


def kron_all(*ops: np.ndarray) -> np.ndarray:
    """Return the Kronecker product of the operators, left factor first."""
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def operator_norm(matrix: np.ndarray) -> float:
    """Return the largest singular value."""
    return float(np.linalg.norm(matrix, ord=2))


@dataclass
class SpinModel:
    """On-site operators Φ_v and edge operators Ψ_e on a multihypergraph.

    Missing on-site operators are zero. Tensor factors of Ψ_e follow the
    edge's stored vertex order.
    """

    graph: Multihypergraph
    local_dim: int
    on_site: Dict[int, np.ndarray] = field(default_factory=dict)
    interactions: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        """Coerce operators to complex arrays."""
        if not isinstance(self.local_dim, int) or self.local_dim < 2:
            raise ModelError(
                f"Local dimension must be an integer >= 2: {self.local_dim}"
            )
        self.on_site = {
            int(v): np.asarray(op, dtype=complex) for v, op in self.on_site.items()
        }
        self.interactions = {
            str(e): np.asarray(op, dtype=complex) for e, op in self.interactions.items()
        }

    @property
    def n_vertices(self) -> int:
        """Return the number of spins."""
        return self.graph.n_vertices

    def phi(self, vertex: int) -> np.ndarray:
        """Return Φ_v, zero when omitted."""
        op = self.on_site.get(vertex)
        if op is None:
            return np.zeros((self.local_dim, self.local_dim), dtype=complex)
        return op

    def psi(self, edge_id: str) -> np.ndarray:
        """Return Ψ_e."""
        try:
            return self.interactions[edge_id]
        except KeyError as err:
            raise ModelError(f"No interaction for edge {edge_id}") from err

    @cached_property
    def fingerprint(self) -> str:
        """Return a digest of the graph and every operator.

        Operators are read once; a model must not be mutated after first use.
        """
        digest = hashlib.blake2b(digest_size=16)
        digest.update(f"{self.local_dim}:{self.n_vertices}".encode())
        for edge in self.graph.edges:
            digest.update(f"|{edge.edge_id}:{edge.vertices}".encode())
        for vertex in sorted(self.on_site):
            digest.update(f"|v{vertex}".encode())
            digest.update(np.ascontiguousarray(self.on_site[vertex]).tobytes())
        for edge_id in sorted(self.interactions):
            digest.update(f"|e{edge_id}".encode())
            digest.update(np.ascontiguousarray(self.interactions[edge_id]).tobytes())
        return digest.hexdigest()


@dataclass(frozen=True)
class Params:
    """Inverse temperature, coupling, accuracy and sampling seed."""

    beta: float
    coupling: complex = 0j
    epsilon: float = 0.1
    seed: Optional[int] = None

    def __post_init__(self):
        """Validate."""
        if not math.isfinite(self.beta) or self.beta <= 0:
            raise ModelError(f"beta must be positive: {self.beta}")
        if not 0 < self.epsilon <= 1:
            raise ModelError(f"epsilon must lie in (0, 1]: {self.epsilon}")
        object.__setattr__(self, "coupling", complex(self.coupling))

    @property
    def is_real(self) -> bool:
        """Return True if the coupling has no imaginary part."""
        return self.coupling.imag == 0


@dataclass(frozen=True)
class Violation:
    """A single failed model invariant."""

    kind: str
    target: str
    detail: str
    measured: Optional[float] = None


@dataclass
class ValidationReport:
    """Outcome of validate_model."""

    violations: List[Violation] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        """Return True if no invariant failed."""
        return not self.violations

    def as_dict(self) -> dict:
        """Return a JSON-ready representation."""
        return {
            "valid": self.valid,
            "violations": [
                {
                    "kind": v.kind,
                    "target": v.target,
                    "detail": v.detail,
                    "measured": v.measured,
                }
                for v in self.violations
            ],
        }


def _check_operator(
    op: np.ndarray, dim: int, target: str, violations: List[Violation]
) -> None:
    if op.shape != (dim, dim):
        violations.append(
            Violation("dimension", target, f"expected {dim}x{dim}, got {op.shape}")
        )
        return
    if not np.all(np.isfinite(op)):
        violations.append(Violation("finite", target, "non-finite entries"))
        return

    deviation = float(np.max(np.abs(op - op.conj().T), initial=0.0))
    if deviation > HERMITIAN_TOL:
        violations.append(
            Violation("hermitian", target, "operator is not Hermitian", deviation)
        )

    norm = operator_norm(op)
    if norm > 1 + NORM_TOL:
        violations.append(
            Violation("norm", target, f"operator norm {norm:.17g} exceeds 1", norm)
        )


def validate_model(model: SpinModel) -> ValidationReport:
    """Check every SpinModel invariant and report each violation."""
    report = ValidationReport()
    d = model.local_dim

    for vertex, op in sorted(model.on_site.items()):
        if not 0 <= vertex < model.n_vertices:
            report.violations.append(
                Violation(
                    "vertex", f"vertex {vertex}", "on-site operator for unknown vertex"
                )
            )
            continue
        _check_operator(op, d, f"vertex {vertex}", report.violations)

    known = set(model.graph.edge_ids)
    for edge_id in sorted(set(model.interactions) - known):
        report.violations.append(
            Violation("edge", f"edge {edge_id}", "interaction for unknown edge")
        )
    for edge in model.graph.edges:
        op = model.interactions.get(edge.edge_id)
        if op is None:
            report.violations.append(
                Violation("missing", f"edge {edge.edge_id}", "no interaction operator")
            )
            continue
        _check_operator(
            op, d**edge.cardinality, f"edge {edge.edge_id}", report.violations
        )

    for violation in report.violations:
        _LOGGER.debug("Model violation: %s", violation)
    return report


def weak_interaction_threshold(beta: float, max_degree: int, rank: int) -> float:
    """Return λ* = e^{-2rβ} / (e^4 β Δ C(r, 2))."""
    if max_degree < 2 or rank < 2:
        raise ModelError(
            f"Threshold needs max_degree >= 2 and rank >= 2: ({max_degree}, {rank})"
        )
    if beta <= 0:
        raise ModelError(f"beta must be positive: {beta}")
    return math.exp(-2 * rank * beta - 4) / (beta * max_degree * math.comb(rank, 2))


def clamped_degree_and_rank(model: SpinModel) -> Tuple[int, int]:
    """Return (Δ_G, r_G) clamped below at 2."""
    max_degree, rank = degree_and_rank(model.graph)
    return max(max_degree, DEFAULT_MIN_DEGREE), max(rank, DEFAULT_MIN_RANK)


def model_threshold(model: SpinModel, beta: float) -> float:
    """Return λ* for a model's clamped degree and rank."""
    return weak_interaction_threshold(beta, *clamped_degree_and_rank(model))


def check_admissible(params: Params, model: SpinModel) -> bool:
    """Return True iff |λ| <= λ*(β, Δ_G, r_G)."""
    threshold = model_threshold(model, params.beta)
    return abs(params.coupling) <= threshold * (1 + _ADMISSIBLE_SLACK)


def weight_bound(max_degree: int, rank: int, size: int) -> float:
    """Return the decay bound (e^3 Δ C(r, 2))^{-size}."""
    max_degree = max(max_degree, DEFAULT_MIN_DEGREE)
    rank = max(rank, DEFAULT_MIN_RANK)
    return (math.e**3 * max_degree * math.comb(rank, 2)) ** (-size)


def intermediate_weight_bound(
    beta: float, coupling: complex, rank: int, size: int
) -> float:
    """Return (e^{2rβ}(e^{β|λ|} - 1))^{size}."""
    rank = max(rank, DEFAULT_MIN_RANK)
    return (math.exp(2 * rank * beta) * math.expm1(beta * abs(coupling))) ** size


def model_from_operators(
    graph: Multihypergraph,
    local_dim: int,
    on_site: Mapping[int, np.ndarray],
    interactions: Mapping[str, np.ndarray],
) -> SpinModel:
    """Build a model and raise ModelError if it fails validation."""
    model = SpinModel(graph, local_dim, dict(on_site), dict(interactions))
    report = validate_model(model)
    if not report.valid:
        first = report.violations[0]
        raise ModelError(f"Invalid model: {first.target}: {first.detail}")
    return model
