#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Approximate sampling from the thermal distribution over [d]^V.

Spins are drawn one at a time from conditionals built out of approximate
marginals, each marginal evaluated to relative error ε/(3n).
"""

from concurrent.futures import ThreadPoolExecutor
import cmath
from dataclasses import dataclass, field
from itertools import product
import logging
import threading
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .cache import Cache
from .const import (
    DEFAULT_WORKERS,
    IMAG_RESIDUE_TOL,
    MAX_TABLE_STATES,
    SEED_MASK,
    TABLE_SUM_TOL,
)
from .exceptions import (
    AdmissibilityError,
    CapExceededError,
    ModelError,
    NumericalError,
)
from .expansion import ClusterExpansion, choose_truncation_order
from .linalg import PartialAssignment
from .model import Params, SpinModel, check_admissible

_LOGGER = logging.getLogger(__name__)

Assignment = Tuple[int, ...]


@dataclass
class SampleRun:
    """One chain-rule sample with everything needed to replay it."""

    assignment: Assignment
    conditionals: List[Tuple[float, ...]] = field(default_factory=list)
    seed: int = 0
    queries: int = 0

    def as_string(self) -> str:
        """Return the assignment as a d-ary digit string."""
        return "".join(str(value) for value in self.assignment)


def _require_real(params: Params) -> None:
    if not params.is_real:
        raise AdmissibilityError(
            f"Sampling needs a real coupling, got {params.coupling}"
        )


def _marginal_order(
    expansion: ClusterExpansion, params: Params, eps_local: float
) -> int:
    local = Params(params.beta, params.coupling, eps_local / 2, params.seed)
    return choose_truncation_order(expansion.model, local, expansion.truncation_c0)


def approx_marginal(
    model: SpinModel,
    params: Params,
    assignment: Optional[PartialAssignment],
    eps_local: float,
    expansion: Optional[ClusterExpansion] = None,
) -> float:
    """Return μ̂(x) = exp(log Ẑ(x) − log Ẑ) with relative error <= eps_local."""
    _require_real(params)
    if not 0 < eps_local < 1:
        raise ModelError(f"eps_local must lie in (0, 1): {eps_local}")
    if not assignment:
        return 1.0

    expansion = expansion or ClusterExpansion(model)
    max_order = _marginal_order(expansion, params, eps_local)
    restricted = expansion.log_z(params, max_order, assignment)
    unrestricted = expansion.log_z(params, max_order)
    try:
        value = cmath.exp(restricted.log_z - unrestricted.log_z)
    except OverflowError as err:
        raise NumericalError(
            f"Marginal of {dict(assignment)} overflows; truncation failed"
        ) from err

    if abs(value.imag) > IMAG_RESIDUE_TOL * abs(value):
        raise NumericalError(
            f"Marginal of {dict(assignment)} has imaginary residue {value.imag:.3g}"
        )
    if value.real <= 0:
        raise NumericalError(
            f"Marginal of {dict(assignment)} is not positive ({value.real:.3g}); "
            "truncation failed"
        )
    return value.real


class ChainRuleSampler:
    """Chain-rule sampler sharing one expansion and a marginal memo."""

    def __init__(
        self,
        model: SpinModel,
        params: Params,
        expansion: Optional[ClusterExpansion] = None,
        vertex_order: Optional[Sequence[int]] = None,
        workers: int = DEFAULT_WORKERS,
    ):
        """Initialize."""
        _require_real(params)
        if not check_admissible(params, model):
            _LOGGER.warning(
                "Coupling %s is outside the weak-interaction regime; "
                "the sampling guarantee does not apply",
                params.coupling.real,
            )

        self._model = model
        self._params = params
        self._expansion = expansion or ClusterExpansion(model, workers=workers)
        self._workers = max(1, int(workers))

        n_vertices = model.n_vertices
        order = list(range(n_vertices)) if vertex_order is None else list(vertex_order)
        if sorted(order) != list(range(n_vertices)):
            raise ModelError(
                f"vertex_order must be a permutation of 0..{n_vertices - 1}"
            )
        self._order = order
        self._eps_local = params.epsilon / (3 * max(n_vertices, 1))
        self._marginals = Cache({"domain": "marginals"})
        self._lock = threading.Lock()
        self._queries = 0

    @property
    def vertex_order(self) -> List[int]:
        """Return the vertex visit order."""
        return list(self._order)

    @property
    def eps_local(self) -> float:
        """Return the per-marginal accuracy ε/(3n)."""
        return self._eps_local

    @property
    def queries(self) -> int:
        """Return the number of marginal queries issued so far."""
        return self._queries

    def marginal(self, assignment: Mapping[int, int]) -> float:
        """Return μ̂(x), memoized per assignment."""
        key = tuple(sorted(assignment.items()))
        with self._lock:
            self._queries += 1
        return self._marginals.setdefault(
            key,
            lambda: approx_marginal(
                self._model, self._params, dict(key), self._eps_local, self._expansion
            ),
        )

    def conditionals(self, prefix: Mapping[int, int], vertex: int) -> Tuple[float, ...]:
        """Return μ̂(x_v = y | prefix) for every y in [d]."""
        extensions = [{**prefix, vertex: y} for y in range(self._model.local_dim)]
        if self._workers > 1:
            with ThreadPoolExecutor(max_workers=self._workers) as pool:
                values = list(pool.map(self.marginal, extensions))
        else:
            values = [self.marginal(x) for x in extensions]

        total = sum(values)
        if total <= 0:
            raise NumericalError(f"Conditionals at vertex {vertex} sum to {total}")
        return tuple(value / total for value in values)

    def sample(self, seed: Optional[int] = None) -> SampleRun:
        """Draw one assignment."""
        if seed is None:
            seed = int(np.random.SeedSequence().entropy) & SEED_MASK
        rng = np.random.Generator(np.random.Philox(seed))
        start = self._queries

        prefix: Dict[int, int] = {}
        run = SampleRun(assignment=(), seed=seed)
        for step, vertex in enumerate(self._order):
            try:
                probabilities = self.conditionals(prefix, vertex)
            except NumericalError as err:
                raise NumericalError(
                    f"Sampling step {step} (vertex {vertex}): {err}"
                ) from err
            prefix[vertex] = int(rng.choice(self._model.local_dim, p=probabilities))
            run.conditionals.append(probabilities)

        run.assignment = tuple(prefix[v] for v in range(self._model.n_vertices))
        run.queries = self._queries - start
        _LOGGER.debug(
            "Sample %s (seed %d, %d queries)", run.as_string(), seed, run.queries
        )
        return run

    def table(self) -> Dict[Assignment, float]:
        """Return the exact law of `sample` over all of [d]^V."""
        d = self._model.local_dim
        n_states = d**self._model.n_vertices
        if n_states > MAX_TABLE_STATES:
            raise CapExceededError("MAX_TABLE_STATES", MAX_TABLE_STATES, n_states)

        table: Dict[Assignment, float] = {}

        def descend(step: int, prefix: Dict[int, int], mass: float) -> None:
            if step == len(self._order):
                table[tuple(prefix[v] for v in range(self._model.n_vertices))] = mass
                return
            vertex = self._order[step]
            for value, probability in enumerate(self.conditionals(prefix, vertex)):
                descend(step + 1, {**prefix, vertex: value}, mass * probability)

        descend(0, {}, 1.0)
        total = sum(table.values())
        if abs(total - 1) > TABLE_SUM_TOL:
            raise NumericalError(f"Sampler law sums to {total!r}")
        return table


def sample_assignment(
    model: SpinModel,
    params: Params,
    expansion: Optional[ClusterExpansion] = None,
    vertex_order: Optional[Sequence[int]] = None,
) -> SampleRun:
    """Draw one assignment using the parameters' seed."""
    return ChainRuleSampler(model, params, expansion, vertex_order).sample(params.seed)


def sample_many(
    model: SpinModel,
    params: Params,
    n_samples: int,
    seed: Optional[int] = None,
    sampler: Optional[ChainRuleSampler] = None,
) -> List[SampleRun]:
    """Draw independent samples from child seed streams of one root seed."""
    if n_samples < 0:
        raise ModelError(f"n_samples must be >= 0: {n_samples}")
    sampler = sampler or ChainRuleSampler(model, params)
    root = np.random.SeedSequence(seed)
    return [
        sampler.sample(int(child.generate_state(1, np.uint64)[0]))
        for child in root.spawn(n_samples)
    ]


def distribution_table(
    model: SpinModel,
    params: Params,
    expansion: Optional[ClusterExpansion] = None,
    vertex_order: Optional[Sequence[int]] = None,
) -> Dict[Assignment, float]:
    """Return μ̂(x) for every x as the product of chain-rule conditionals."""
    return ChainRuleSampler(model, params, expansion, vertex_order).table()


def all_assignments(n_vertices: int, local_dim: int) -> List[Assignment]:
    """Return [d]^n in lexicographic order (vertex 0 most significant)."""
    return list(product(range(local_dim), repeat=n_vertices))


def total_variation(
    first: Mapping[Assignment, float], second: Mapping[Assignment, float]
) -> float:
    """Return ½ Σ |p(x) − q(x)| over the union of supports."""
    keys = set(first) | set(second)
    return 0.5 * sum(abs(first.get(k, 0.0) - second.get(k, 0.0)) for k in keys)
