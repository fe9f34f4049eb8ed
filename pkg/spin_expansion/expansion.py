#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Truncated cluster expansion of log Z.

Clusters are multisets of polymers whose incompatibility graph is connected.
Each multiset stands for all of its distinct orderings, so its contribution is
ordering_count · φ(H_Γ) · Π w_γ, with φ the Ursell function.

Polymers of a spin model are incompatible exactly when their supports meet, so
the sum over clusters of total size k is also the t^k coefficient of
log Σ_{compatible sets} Π w_γ t^{‖γ‖}. The default summation evaluates that
power series instead of listing clusters.
"""

from collections import Counter, defaultdict
from collections.abc import Callable, Iterable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
import cmath
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np

from .cache import Cache
from .const import (
    DEFAULT_DECAY_START,
    DEFAULT_EXP_REAL_CAP,
    DEFAULT_SUMMATION,
    DEFAULT_TRUNCATION_C0,
    DEFAULT_WORKERS,
    MAX_SERIES_STATES,
    MAX_URSELL_EXHAUSTIVE_EDGES,
    MAX_URSELL_VERTICES,
    SUMMATION_CLUSTERS,
    SUMMATION_SERIES,
)
from .exceptions import CapExceededError, ModelError, NumericalError
from .hypergraph import Polymer, are_compatible, enumerate_polymers
from .linalg import PartialAssignment, validate_assignment
from .model import Params, SpinModel, check_admissible, model_threshold
from .weights import (
    PolymerWeight,
    check_weight_bounds,
    log_z0,
    polymer_weight,
    polymer_weight_projected,
)

_LOGGER = logging.getLogger(__name__)


# Ursell function


def _adjacency(n_vertices: int, edges: Iterable[Tuple[int, int]]) -> Tuple[int, ...]:
    masks = [0] * n_vertices
    for u, v in edges:
        if u == v:
            continue
        if not (0 <= u < n_vertices and 0 <= v < n_vertices):
            raise ModelError(f"Edge ({u}, {v}) outside 0..{n_vertices - 1}")
        masks[u] |= 1 << v
        masks[v] |= 1 << u
    return tuple(masks)


def _is_connected(adjacency: Tuple[int, ...]) -> bool:
    full = (1 << len(adjacency)) - 1
    seen = 1
    frontier = 1
    while frontier:
        reached = 0
        for v in range(len(adjacency)):
            if frontier >> v & 1:
                reached |= adjacency[v]
        frontier = reached & ~seen
        seen |= frontier
    return seen == full


def _signed_count_exhaustive(adjacency: Tuple[int, ...]) -> int:
    """Return Σ (−1)^|S| over spanning connected edge subsets, by enumeration."""
    n_vertices = len(adjacency)
    edges = [
        (u, v) for u in range(n_vertices) for v in range(u + 1, n_vertices)
        if adjacency[u] >> v & 1
    ]
    total = 0
    for subset in range(1 << len(edges)):
        n_chosen = bin(subset).count("1")
        if n_chosen < n_vertices - 1:
            continue
        parent = list(range(n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        components = n_vertices
        for idx, (u, v) in enumerate(edges):
            if subset >> idx & 1:
                ru, rv = find(u), find(v)
                if ru != rv:
                    parent[ru] = rv
                    components -= 1
        if components == 1:
            total += -1 if n_chosen % 2 else 1
    return total


def _signed_count_recursive(adjacency: Tuple[int, ...]) -> int:
    """Return the same signed count by recursion over vertex subsets.

    With g(S) = 1 when S spans no edge (else 0), every edge subset of H[S]
    splits uniquely into the connected piece containing min(S) and the rest,
    so c(S) = g(S) − Σ_{min(S) ∈ T ⊊ S} c(T) g(S \\ T).
    """
    n_vertices = len(adjacency)
    size = 1 << n_vertices

    independent = [False] * size
    independent[0] = True
    for subset in range(1, size):
        low = (subset & -subset).bit_length() - 1
        rest = subset & ~(1 << low)
        independent[subset] = independent[rest] and not adjacency[low] & rest

    connected = [0] * size
    for subset in range(1, size):
        low_bit = subset & -subset
        value = 1 if independent[subset] else 0
        others = subset & ~low_bit
        part = others
        while True:
            part = (part - 1) & others
            inner = part | low_bit
            if inner != subset and independent[subset & ~inner]:
                value -= connected[inner]
            if part == 0:
                break
        connected[subset] = value
    return connected[size - 1]


@lru_cache(maxsize=4096)
def _signed_count(adjacency: Tuple[int, ...]) -> int:
    n_edges = sum(bin(mask).count("1") for mask in adjacency) // 2
    if n_edges <= MAX_URSELL_EXHAUSTIVE_EDGES:
        return _signed_count_exhaustive(adjacency)
    return _signed_count_recursive(adjacency)


def _is_complete(adjacency: Tuple[int, ...]) -> bool:
    full = (1 << len(adjacency)) - 1
    return all((mask | 1 << v) == full for v, mask in enumerate(adjacency))


def ursell(
    n_vertices: int,
    edges: Iterable[Tuple[int, int]],
    cap: int = MAX_URSELL_VERTICES,
) -> Fraction:
    """Return φ(H) = (1/|H|!) Σ_{S spanning connected} (−1)^|S| exactly.

    Complete graphs use φ(K_k) = (−1)^{k−1}/k and are not subject to the cap.
    """
    if n_vertices < 1:
        raise ModelError("Ursell function needs at least one vertex")
    adjacency = _adjacency(n_vertices, edges)
    if _is_complete(adjacency):
        return Fraction((-1) ** (n_vertices - 1), n_vertices)
    if not _is_connected(adjacency):
        return Fraction(0)
    if n_vertices > cap:
        raise CapExceededError("MAX_URSELL_VERTICES", cap, n_vertices)
    return Fraction(_signed_count(adjacency), math.factorial(n_vertices))


# Clusters


@dataclass(frozen=True)
class Cluster:
    """A multiset of polymers (by index) with a connected incompatibility graph."""

    members: Tuple[int, ...]
    total_size: int
    ordering_count: int
    phi: Fraction
    polymers: Tuple[Polymer, ...] = ()

    @property
    def coefficient(self) -> Fraction:
        """Return ordering_count · φ(H_Γ)."""
        return self.ordering_count * self.phi

    @property
    def root(self) -> int:
        """Return the smallest member index."""
        return self.members[0]


@dataclass
class ExpansionReport:
    """Truncated cluster expansion of log Z.

    `cluster_count` is only known when clusters were listed one by one.
    """

    log_z0: complex
    cluster_sum: complex
    truncation_order: int
    cluster_count: Optional[int] = None
    polymer_count: int = 0
    partials: List[complex] = field(default_factory=list)
    admissible: bool = True
    threshold: Optional[float] = None
    warnings: List[str] = field(default_factory=list)

    @property
    def log_z(self) -> complex:
        """Return log Ẑ."""
        return self.log_z0 + self.cluster_sum

    @property
    def z(self) -> complex:
        """Return Ẑ; raise NumericalError when it is not representable."""
        try:
            return cmath.exp(self.log_z)
        except OverflowError as err:
            raise NumericalError(
                f"Partition function overflows: log Z = {self.log_z:.6g}"
            ) from err


def _ordering_count(members: Sequence[int]) -> int:
    count = math.factorial(len(members))
    for multiplicity in Counter(members).values():
        count //= math.factorial(multiplicity)
    return count


def _incompatibility_edges(
    members: Sequence[int], overlaps: Sequence[frozenset]
) -> List[Tuple[int, int]]:
    return [
        (i, j)
        for i in range(len(members))
        for j in range(i + 1, len(members))
        if members[j] in overlaps[members[i]]
    ]


def enumerate_abstract_clusters(
    sizes: Sequence[int],
    overlaps: Sequence[Iterable[int]],
    max_order: int,
    max_polymers: int = MAX_URSELL_VERTICES,
) -> Iterator[Cluster]:
    """Yield every cluster with total size < max_order exactly once.

    `overlaps[i]` lists the polymers incompatible with polymer i (i itself
    included). Multisets are grown one polymer at a time; new members never
    precede the root, and each level is deduplicated. Only the current level
    is held in memory.
    """
    if max_order < 1:
        raise ModelError(f"Truncation order must be >= 1: {max_order}")
    overlaps = [frozenset(o) | {i} for i, o in enumerate(overlaps)]

    level = sorted((i,) for i, size in enumerate(sizes) if size < max_order)
    while level:
        _LOGGER.debug("Clusters with %d polymers: %d", len(level[0]), len(level))
        grown = set()
        for members in level:
            total = sum(sizes[i] for i in members)
            yield Cluster(
                members=members,
                total_size=total,
                ordering_count=_ordering_count(members),
                phi=ursell(
                    len(members),
                    _incompatibility_edges(members, overlaps),
                    cap=max_polymers,
                ),
            )

            root = members[0]
            candidates = set()
            for i in set(members):
                candidates.update(overlaps[i])
            for candidate in candidates:
                if candidate >= root and total + sizes[candidate] < max_order:
                    grown.add(tuple(sorted(members + (candidate,))))
        level = sorted(grown)


def _overlaps_from_predicate(
    n_polymers: int, incompatible: Callable[[int, int], bool]
) -> List[frozenset]:
    return [
        frozenset(j for j in range(n_polymers) if j == i or incompatible(i, j))
        for i in range(n_polymers)
    ]


def _support_overlaps(polymers: Sequence[Polymer]) -> List[frozenset]:
    by_vertex = defaultdict(set)
    for idx, polymer in enumerate(polymers):
        for vertex in polymer.support:
            by_vertex[vertex].add(idx)
    return [
        frozenset().union(*(by_vertex[v] for v in polymer.support))
        for polymer in polymers
    ]


def cluster_series(
    sizes: Sequence[int],
    incompatible: Callable[[int, int], bool],
    weights: Sequence[complex],
    max_order: int,
    max_polymers: int = MAX_URSELL_VERTICES,
) -> List[complex]:
    """Return per-order partial sums of log Z(C, w) for an abstract polymer system.

    Entry k−1 holds the contribution of clusters of total size k, for
    k = 1 .. max_order − 1.
    """
    overlaps = _overlaps_from_predicate(len(sizes), incompatible)
    partials = [0j] * max(max_order - 1, 0)
    clusters = enumerate_abstract_clusters(sizes, overlaps, max_order, max_polymers)
    for cluster in clusters:
        term = complex(float(cluster.coefficient))
        for i in cluster.members:
            term *= weights[i]
        partials[cluster.total_size - 1] += term
    return partials


# Power series


def series_log(coefficients: Sequence[complex]) -> List[complex]:
    """Return [t^k] log A(t) for k = 1 .. len − 1, where A(0) = 1."""
    if len(coefficients) == 0 or coefficients[0] != 1:
        raise NumericalError("Series logarithm needs a leading coefficient of 1")
    logs: List[complex] = []
    for k in range(1, len(coefficients)):
        convolution = sum(
            (j * logs[j - 1] * coefficients[k - j] for j in range(1, k)), 0j
        )
        logs.append(complex(coefficients[k]) - convolution / k)
    return logs


def polymer_gas_series(
    n_vertices: int,
    supports: Sequence[Sequence[int]],
    sizes: Sequence[int],
    weights: Sequence[complex],
    max_order: int,
    max_states: int = MAX_SERIES_STATES,
) -> np.ndarray:
    """Return [t^0 .. t^{m−1}] of Σ over vertex-disjoint polymer sets of Π w_γ t^{‖γ‖}.

    The vertex set shrinks by its lowest vertex v, either dropped or covered
    by a polymer whose lowest support vertex is v; partial sums are memoized
    per remaining vertex set.
    """
    if max_order < 1:
        raise ModelError(f"Truncation order must be >= 1: {max_order}")
    unit = np.zeros(max_order, dtype=complex)
    unit[0] = 1

    starting: Dict[int, List[Tuple[int, int, complex]]] = defaultdict(list)
    for support, size, weight in zip(supports, sizes, weights):
        if support and size < max_order:
            mask = 0
            for vertex in support:
                mask |= 1 << vertex
            starting[min(support)].append((mask, size, complex(weight)))

    memo: Dict[int, np.ndarray] = {0: unit}
    stack = [(1 << n_vertices) - 1]
    while stack:
        remaining = stack[-1]
        if remaining in memo:
            stack.pop()
            continue
        low_bit = remaining & -remaining
        fitting = [
            entry
            for entry in starting.get(low_bit.bit_length() - 1, ())
            if entry[0] & remaining == entry[0]
        ]
        children = [remaining ^ low_bit] + [remaining & ~mask for mask, _, _ in fitting]
        pending = [child for child in children if child not in memo]
        if pending:
            stack.extend(pending)
            continue

        result = memo[remaining ^ low_bit]
        if fitting:
            result = result.copy()
            for mask, size, weight in fitting:
                result[size:] += weight * memo[remaining & ~mask][: max_order - size]
        memo[remaining] = result
        if len(memo) > max_states:
            raise CapExceededError("MAX_SERIES_STATES", max_states, len(memo))
        stack.pop()

    _LOGGER.debug("Polymer gas series: %d vertex sets", len(memo))
    return memo[(1 << n_vertices) - 1]


def kotecky_preiss_margin(
    sizes: Sequence[int],
    incompatible: Callable[[int, int], bool],
    weights: Sequence[complex],
    decay: float = 1.0,
) -> float:
    """Return max_γ Σ_{γ' incompatible with γ} |w_γ'| e^{a‖γ'‖} / (a‖γ‖).

    A value <= 1 certifies absolute convergence of the cluster expansion.
    """
    overlaps = _overlaps_from_predicate(len(sizes), incompatible)
    margin = 0.0
    for i, neighbors in enumerate(overlaps):
        load = sum(abs(weights[j]) * math.exp(decay * sizes[j]) for j in neighbors)
        margin = max(margin, load / (decay * sizes[i]))
    return margin


def decay_ratio(
    report: ExpansionReport, start: int = DEFAULT_DECAY_START
) -> Optional[float]:
    """Return the geometric ratio fitted to |partial_k| for orders k >= start."""
    orders = []
    logs = []
    for order, partial in enumerate(report.partials, start=1):
        if order >= start and abs(partial) > 0:
            orders.append(order)
            logs.append(math.log(abs(partial)))
    if len(orders) < 2:
        return None
    slope = np.polyfit(orders, logs, 1)[0]
    return float(math.exp(slope))


def choose_truncation_order(
    model: SpinModel, params: Params, truncation_c0: float = DEFAULT_TRUNCATION_C0
) -> int:
    """Return m = ⌈c0 + ln(3‖G‖/ε)⌉."""
    n_edges = max(model.graph.n_edges, 1)
    return math.ceil(truncation_c0 + math.log(3 * n_edges / params.epsilon))


class ClusterExpansion:
    """Cluster expansion engine for one spin model.

    Polymers and weights are cached across calls, so repeated evaluations
    (different restrictions x, different orders m) share work.
    """

    def __init__(
        self,
        model: SpinModel,
        cache: Optional[Cache] = None,
        truncation_c0: float = DEFAULT_TRUNCATION_C0,
        exp_real_cap: float = DEFAULT_EXP_REAL_CAP,
        workers: int = DEFAULT_WORKERS,
        max_polymers: int = MAX_URSELL_VERTICES,
        summation: str = DEFAULT_SUMMATION,
    ):
        """Initialize."""
        if summation not in (SUMMATION_SERIES, SUMMATION_CLUSTERS):
            raise ModelError(f"Unknown summation: {summation}")
        self._model = model
        self._weights = cache if cache is not None else Cache({"domain": "weights"})
        self._truncation_c0 = truncation_c0
        self._exp_real_cap = exp_real_cap
        self._workers = max(1, int(workers))
        self._max_polymers = max_polymers
        self._summation = summation
        self._polymers: List[Polymer] = []
        self._polymer_bound = 0

    @property
    def model(self) -> SpinModel:
        """Return the spin model."""
        return self._model

    @property
    def weight_cache(self) -> Cache:
        """Return the weight memo."""
        return self._weights

    @property
    def truncation_c0(self) -> float:
        """Return the truncation calibration constant."""
        return self._truncation_c0

    @property
    def summation(self) -> str:
        """Return how the cluster sum is evaluated."""
        return self._summation

    def truncation_order(self, params: Params) -> int:
        """Return the truncation order for the parameters' accuracy."""
        return choose_truncation_order(self._model, params, self._truncation_c0)

    def polymers(self, max_size: int) -> List[Polymer]:
        """Return all polymers with ‖γ‖ <= max_size in canonical order."""
        if max_size < 1:
            return []
        if max_size > self._polymer_bound:
            self._polymers = list(enumerate_polymers(self._model.graph, max_size))
            self._polymer_bound = max_size
        return [p for p in self._polymers if p.size <= max_size]

    def clusters(self, max_order: int) -> Iterator[Cluster]:
        """Return an iterator over all clusters with total size < max_order."""
        if max_order < 1:
            raise ModelError(f"Truncation order must be >= 1: {max_order}")
        polymers = self.polymers(max_order - 1)
        return (
            replace(cluster, polymers=tuple(polymers[i] for i in cluster.members))
            for cluster in enumerate_abstract_clusters(
                [p.size for p in polymers],
                _support_overlaps(polymers),
                max_order,
                self._max_polymers,
            )
        )

    def weight(
        self,
        params: Params,
        polymer: Polymer,
        assignment: Optional[PartialAssignment] = None,
    ) -> complex:
        """Return the (projected when x is non-empty) weight of a polymer."""
        return self._weight_entry(params, polymer, assignment).value

    def _weight_entry(
        self,
        params: Params,
        polymer: Polymer,
        assignment: Optional[PartialAssignment],
    ) -> PolymerWeight:
        if assignment:
            return polymer_weight_projected(
                self._model,
                params,
                polymer,
                assignment,
                self._weights,
                self._exp_real_cap,
            )
        return polymer_weight(
            self._model, params, polymer, self._weights, self._exp_real_cap
        )

    def weights(
        self,
        params: Params,
        polymers: Sequence[Polymer],
        assignment: Optional[PartialAssignment] = None,
    ) -> List[PolymerWeight]:
        """Return the weights of the polymers in order, on the worker pool."""

        def work(polymer: Polymer) -> PolymerWeight:
            try:
                return self._weight_entry(params, polymer, assignment)
            except NumericalError as err:
                _LOGGER.error("Weight failure on polymer %s", polymer.edge_ids)
                raise NumericalError(
                    f"Cluster expansion aborted at polymer {polymer.edge_ids}: {err}"
                ) from err

        if self._workers > 1 and len(polymers) > 1:
            with ThreadPoolExecutor(max_workers=self._workers) as pool:
                return list(pool.map(work, polymers))
        return [work(polymer) for polymer in polymers]

    def _cluster_partials(
        self, weights: Sequence[PolymerWeight], max_order: int
    ) -> Tuple[List[complex], int]:
        polymers = [weight.polymer for weight in weights]
        partials = [0j] * (max_order - 1)
        count = 0
        for cluster in enumerate_abstract_clusters(
            [p.size for p in polymers],
            _support_overlaps(polymers),
            max_order,
            self._max_polymers,
        ):
            term = complex(float(cluster.coefficient))
            for i in cluster.members:
                term *= weights[i].value
            partials[cluster.total_size - 1] += term
            count += 1
        return partials, count

    def _series_partials(
        self, weights: Sequence[PolymerWeight], max_order: int
    ) -> List[complex]:
        coefficients = polymer_gas_series(
            self._model.n_vertices,
            [weight.polymer.support for weight in weights],
            [weight.polymer.size for weight in weights],
            [weight.value for weight in weights],
            max_order,
        )
        return series_log(coefficients)

    def log_z(
        self,
        params: Params,
        max_order: Optional[int] = None,
        assignment: Optional[PartialAssignment] = None,
    ) -> ExpansionReport:
        """Return the expansion of log Z (restricted to x when given) at order m."""
        if max_order is None:
            max_order = self.truncation_order(params)
        if max_order < 1:
            raise ModelError(f"Truncation order must be >= 1: {max_order}")
        assignment = dict(assignment or {})
        validate_assignment(assignment, self._model.local_dim)

        warnings = []
        threshold = model_threshold(self._model, params.beta)
        admissible = check_admissible(params, self._model)
        if not admissible:
            message = (
                f"|lambda| = {abs(params.coupling):.6g} exceeds lambda* = "
                f"{threshold:.6g}; convergence is not guaranteed"
            )
            _LOGGER.warning("%s", message)
            warnings.append(message)

        polymers = self.polymers(max_order - 1)
        weights = self.weights(params, polymers, assignment)
        if admissible and not assignment:
            violations = check_weight_bounds(self._model, params, weights)
            if violations:
                warnings.append(
                    f"{len(violations)} polymer weight bound(s) exceeded inside "
                    "the weak-interaction regime"
                )

        cluster_count = None
        if self._summation == SUMMATION_CLUSTERS:
            partials, cluster_count = self._cluster_partials(weights, max_order)
        else:
            partials = self._series_partials(weights, max_order)
        _LOGGER.debug(
            "Order %d: %d polymers summed as %s",
            max_order,
            len(polymers),
            self._summation,
        )

        return ExpansionReport(
            log_z0=log_z0(self._model, params.beta, assignment),
            cluster_sum=sum(partials, 0j),
            truncation_order=max_order,
            cluster_count=cluster_count,
            polymer_count=len(polymers),
            partials=partials,
            admissible=admissible,
            threshold=threshold,
            warnings=warnings,
        )

    def kp_margin(self, params: Params, max_size: int) -> float:
        """Return the convergence margin over polymers with ‖γ‖ <= max_size."""
        polymers = self.polymers(max_size)
        if not polymers:
            return 0.0
        weights = [self.weight(params, p) for p in polymers]
        return kotecky_preiss_margin(
            [p.size for p in polymers],
            lambda i, j: not are_compatible(polymers[i], polymers[j]),
            weights,
        )


def enumerate_clusters(model: SpinModel, max_order: int) -> Iterator[Cluster]:
    """Yield every cluster of the model's polymers with total size < m."""
    yield from ClusterExpansion(model).clusters(max_order)


def truncated_log_z(
    model: SpinModel,
    params: Params,
    max_order: int,
    assignment: Optional[PartialAssignment] = None,
    expansion: Optional[ClusterExpansion] = None,
) -> ExpansionReport:
    """Return the truncated expansion of log Z, restricted to x when given."""
    expansion = expansion or ClusterExpansion(model)
    return expansion.log_z(params, max_order, assignment)


def estimate_partition_function(
    model: SpinModel,
    params: Params,
    expansion: Optional[ClusterExpansion] = None,
) -> complex:
    """Return Ẑ = exp(log Z0 + cluster sum) at the chosen truncation order."""
    expansion = expansion or ClusterExpansion(model)
    return expansion.log_z(params).z
