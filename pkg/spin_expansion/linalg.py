#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Dense complex kernels on a polymer's Hilbert space.

All traces use the normalisation Tr(I) = 1.
"""

import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np

from .const import DEFAULT_EXP_REAL_CAP, HERMITIAN_DETECT_TOL, MAX_EMBED_DIM
from .exceptions import CapExceededError, ModelError, NumericalError
from .hypergraph import Polymer
from .model import Params, SpinModel

_LOGGER = logging.getLogger(__name__)

PartialAssignment = Mapping[int, int]

# Padé [13/13] coefficients for exp (Higham 2005).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


def as_square_matrix(matrix) -> np.ndarray:
    """Return a complex square array; raise on bad shape or non-finite entries."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise NumericalError(f"Expected a non-empty square matrix, got {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise NumericalError("Matrix has non-finite entries")
    return matrix


def is_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_DETECT_TOL) -> bool:
    """Return True if the matrix equals its conjugate transpose to tolerance."""
    return float(np.max(np.abs(matrix - matrix.conj().T))) <= tol


def expm_pade(matrix: np.ndarray) -> np.ndarray:
    """Return e^A by scaling and squaring around a fixed-order Padé core."""
    one_norm = float(np.max(np.sum(np.abs(matrix), axis=0)))
    scale = 0
    if one_norm > _THETA13:
        scale = max(0, int(np.ceil(np.log2(one_norm / _THETA13))))
        matrix = matrix * (2.0**-scale)
    _LOGGER.debug("Padé exponential: dim=%d, scale=%d", matrix.shape[0], scale)

    b = _PADE13
    ident = np.eye(matrix.shape[0], dtype=complex)
    a2 = matrix @ matrix
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = matrix @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6
        + b[5] * a4
        + b[3] * a2
        + b[1] * ident
    )
    v = a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2
    v = v + b[0] * ident
    try:
        result = np.linalg.solve(v - u, v + u)
    except np.linalg.LinAlgError as err:
        raise NumericalError(f"Padé denominator is singular: {err}") from err

    for _ in range(scale):
        result = result @ result
    return result


def _check_overflow(matrix: np.ndarray, cap: float) -> None:
    """Raise if the numerical abscissa exceeds the cap.

    The abscissa bounds the real part of every eigenvalue.
    """
    top = float(np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)[-1])
    if top > cap:
        raise NumericalError(
            f"Exponential overflow: eigenvalue real part {top} > {cap}"
        )


def normalized_trace_exp(
    matrix, exp_real_cap: float = DEFAULT_EXP_REAL_CAP
) -> complex:
    """Return Tr[e^A] / dim(A)."""
    matrix = as_square_matrix(matrix)
    dim = matrix.shape[0]

    if is_hermitian(matrix):
        hermitian = (matrix + matrix.conj().T) / 2
        eigenvalues = np.linalg.eigvalsh(hermitian)
        if eigenvalues[-1] > exp_real_cap:
            raise NumericalError(
                f"Exponential overflow: eigenvalue {eigenvalues[-1]} > {exp_real_cap}"
            )
        return complex(np.sum(np.exp(eigenvalues)) / dim)

    _check_overflow(matrix, exp_real_cap)
    return complex(np.trace(expm_pade(matrix)) / dim)


def exp_diagonal(matrix, exp_real_cap: float = DEFAULT_EXP_REAL_CAP) -> np.ndarray:
    """Return the diagonal of e^A."""
    matrix = as_square_matrix(matrix)
    if is_hermitian(matrix):
        eigenvalues, eigenvectors = np.linalg.eigh((matrix + matrix.conj().T) / 2)
        if eigenvalues[-1] > exp_real_cap:
            raise NumericalError(
                f"Exponential overflow: eigenvalue {eigenvalues[-1]} > {exp_real_cap}"
            )
        weights = np.abs(eigenvectors) ** 2
        return (weights @ np.exp(eigenvalues)).astype(complex)

    _check_overflow(matrix, exp_real_cap)
    return np.diagonal(expm_pade(matrix)).copy()


def embed_operator(
    operator: np.ndarray, positions: Sequence[int], n_factors: int, local_dim: int
) -> np.ndarray:
    """Return operator ⊗ I routed onto the given tensor factor positions.

    The operator's k-th factor lands on factor `positions[k]` of an
    `n_factors`-fold product, factor 0 being most significant.
    """
    k = len(positions)
    if operator.shape != (local_dim**k, local_dim**k):
        raise ModelError(
            f"Operator shape {operator.shape} does not match "
            f"{k} factors of dim {local_dim}"
        )
    rest = n_factors - k
    full = np.kron(operator, np.eye(local_dim**rest, dtype=complex))
    if list(positions) == list(range(k)):
        return full

    # Axis j of the kron product holds factor `order[j]` of the target.
    order = list(positions) + [p for p in range(n_factors) if p not in positions]
    inverse = np.argsort(order)
    shape = (local_dim,) * (2 * n_factors)
    tensor = full.reshape(shape)
    axes = list(inverse) + [n_factors + i for i in inverse]
    dim = local_dim**n_factors
    return tensor.transpose(axes).reshape(dim, dim)


def support_positions(polymer: Polymer) -> Dict[int, int]:
    """Return vertex -> tensor factor position in the sorted support."""
    return {vertex: pos for pos, vertex in enumerate(polymer.support)}


def check_embed_dim(local_dim: int, n_factors: int) -> int:
    """Return d^n, raising when it exceeds the embedding cap."""
    dim = local_dim**n_factors
    if dim > MAX_EMBED_DIM:
        raise CapExceededError("MAX_EMBED_DIM", MAX_EMBED_DIM, dim)
    return dim


def onsite_block(model: SpinModel, polymer: Polymer) -> np.ndarray:
    """Return Σ_{v ∈ support} Φ_v ⊗ I on the polymer's space."""
    n_factors = polymer.order
    dim = check_embed_dim(model.local_dim, n_factors)
    block = np.zeros((dim, dim), dtype=complex)
    for pos, vertex in enumerate(polymer.support):
        block += embed_operator(model.phi(vertex), [pos], n_factors, model.local_dim)
    return block


def interaction_block(model: SpinModel, polymer: Polymer, edge_id: str) -> np.ndarray:
    """Return Ψ_e ⊗ I on the polymer's space."""
    where = support_positions(polymer)
    edge = model.graph.edge(edge_id)
    try:
        positions = [where[v] for v in edge.vertices]
    except KeyError as err:
        raise ModelError(f"Edge {edge_id} is not inside the polymer support") from err
    check_embed_dim(model.local_dim, polymer.order)
    return embed_operator(model.psi(edge_id), positions, polymer.order, model.local_dim)


def embed_polymer_hamiltonian(
    model: SpinModel,
    params: Params,
    polymer: Polymer,
    active_edges: Iterable[str] = (),
) -> np.ndarray:
    """Return −β(Σ_v Φ_v ⊗ I + λ Σ_{e ∈ T} Ψ_e ⊗ I) on the polymer's support."""
    active_edges = list(active_edges)
    unknown = set(active_edges) - set(polymer.edge_ids)
    if unknown:
        raise ModelError(f"Active edges {sorted(unknown)} are not in the polymer")

    hamiltonian = onsite_block(model, polymer)
    for edge_id in active_edges:
        hamiltonian = hamiltonian + params.coupling * interaction_block(
            model, polymer, edge_id
        )
    return -params.beta * hamiltonian


def validate_assignment(assignment: PartialAssignment, local_dim: int) -> None:
    """Raise if a spin value is out of range."""
    for vertex, value in assignment.items():
        if not 0 <= int(value) < local_dim:
            raise ModelError(
                f"Spin value {value} at vertex {vertex} outside 0..{local_dim - 1}"
            )


def restrict(
    assignment: Optional[PartialAssignment], vertices: Iterable[int]
) -> Tuple[Tuple[int, int], ...]:
    """Return the assignment restricted to vertices as a sorted key."""
    if not assignment:
        return ()
    return tuple(sorted((v, int(assignment[v])) for v in vertices if v in assignment))


def consistent_mask(
    support: Sequence[int], local_dim: int, assignment: PartialAssignment
) -> np.ndarray:
    """Return a boolean mask over basis states agreeing with the assignment."""
    n_factors = len(support)
    digits = np.indices((local_dim,) * n_factors).reshape(n_factors, -1)
    mask = np.ones(local_dim**n_factors, dtype=bool)
    for pos, vertex in enumerate(support):
        if vertex in assignment:
            mask &= digits[pos] == int(assignment[vertex])
    return mask


def projected_trace_exp(
    matrix,
    polymer: Polymer,
    model: SpinModel,
    assignment: Optional[PartialAssignment],
    exp_real_cap: float = DEFAULT_EXP_REAL_CAP,
) -> complex:
    """Return (1/d^{|γ|}) Σ over basis states consistent with x of ⟨s|e^A|s⟩."""
    assignment = assignment or {}
    validate_assignment(assignment, model.local_dim)
    if not restrict(assignment, polymer.support):
        return normalized_trace_exp(matrix, exp_real_cap)

    matrix = as_square_matrix(matrix)
    if matrix.shape[0] != model.local_dim**polymer.order:
        raise ModelError(
            f"Matrix dim {matrix.shape[0]} does not match polymer space "
            f"{model.local_dim}^{polymer.order}"
        )
    diagonal = exp_diagonal(matrix, exp_real_cap)
    mask = consistent_mask(polymer.support, model.local_dim, assignment)
    return complex(np.sum(diagonal[mask]) / matrix.shape[0])
