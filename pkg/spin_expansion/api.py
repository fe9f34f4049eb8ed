#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Client that ties a spin model, run parameters and the expansion together.

For more details about this package, please refer to the documentation at
README.md in the repository root.
"""

from dataclasses import replace
import logging
import math
from typing import Any, Dict, Optional

import numpy as np

from .cache import Cache
from .config import complex_pair
from .const import (
    ATTR_ADMISSIBLE,
    ATTR_CLUSTER_COUNT,
    ATTR_CLUSTER_SUM,
    ATTR_DECAY_RATIO,
    ATTR_EPSILON,
    ATTR_KP_MARGIN,
    ATTR_LOG_Z,
    ATTR_LOG_Z0,
    ATTR_MAX_DEGREE,
    ATTR_NORMALIZED,
    ATTR_PARTIALS,
    ATTR_PASSED,
    ATTR_POLYMER_COUNT,
    ATTR_QUERIES,
    ATTR_RANK,
    ATTR_REL_ERROR,
    ATTR_SAMPLES,
    ATTR_SEED,
    ATTR_THRESHOLD,
    ATTR_TRUNCATION_ORDER,
    ATTR_TV,
    ATTR_WARNINGS,
    ATTR_Z,
    ATTR_Z_EXACT,
    CONF_EXP_REAL_CAP,
    CONF_MAX_CLUSTER_POLYMERS,
    CONF_SUMMATION,
    CONF_TRUNCATION_C0,
    CONF_TRUNCATION_ORDER,
    CONF_VERTEX_ORDER,
    CONF_WORKERS,
    DEFAULT_EXP_REAL_CAP,
    DEFAULT_SUMMATION,
    DEFAULT_TRUNCATION_C0,
    DEFAULT_WORKERS,
    MAX_URSELL_VERTICES,
    SEED_MASK,
)
from .exceptions import ModelError
from .expansion import ClusterExpansion, ExpansionReport, decay_ratio
from .hypergraph import degree_and_rank
from .model import (
    Params,
    SpinModel,
    ValidationReport,
    check_admissible,
    model_threshold,
    validate_model,
)
from .oracle import (
    check_oracle_caps,
    exact_partition_function,
    exact_thermal_distribution,
)
from .sampler import ChainRuleSampler, sample_many, total_variation

_LOGGER = logging.getLogger(__name__)

class ClusterExpansionClient:
    """Cluster expansion implementation for one model and parameter set."""

    def __init__(
        self,
        model: SpinModel,
        params: Params,
        options: Optional[Dict[str, Any]] = None,
        cache: Optional[Cache] = None,
    ):
        """Initialize."""
        options = options or {}

        vertex_order = options.get(CONF_VERTEX_ORDER)
        if vertex_order is not None and len(vertex_order) != model.n_vertices:
            raise ModelError(
                f"vertex_order has {len(vertex_order)} entries, "
                f"model has {model.n_vertices} vertices"
            )

        _LOGGER.debug(
            "Model: %d vertices, %d edges, d=%d",
            model.n_vertices,
            model.graph.n_edges,
            model.local_dim,
        )
        _LOGGER.debug("Params: %s", params)

        self._model = model
        self._params = params
        self._options = dict(options)
        self._expansion = ClusterExpansion(
            model,
            cache=cache,
            truncation_c0=options.get(CONF_TRUNCATION_C0, DEFAULT_TRUNCATION_C0),
            exp_real_cap=options.get(CONF_EXP_REAL_CAP, DEFAULT_EXP_REAL_CAP),
            workers=options.get(CONF_WORKERS, DEFAULT_WORKERS),
            max_polymers=options.get(CONF_MAX_CLUSTER_POLYMERS, MAX_URSELL_VERTICES),
            summation=options.get(CONF_SUMMATION, DEFAULT_SUMMATION),
        )
        self._sampler: Optional[ChainRuleSampler] = None
        self._last_report: Optional[ExpansionReport] = None

    @property
    def model(self) -> SpinModel:
        """Return the spin model."""
        return self._model

    @property
    def params(self) -> Params:
        """Return run parameters."""
        return self._params

    @property
    def expansion(self) -> ClusterExpansion:
        """Return the cluster expansion engine."""
        return self._expansion

    @property
    def threshold(self) -> float:
        """Return λ* for this model at the current β."""
        return model_threshold(self._model, self._params.beta)

    @property
    def admissible(self) -> bool:
        """Return True if |λ| is inside the weak-interaction regime."""
        return check_admissible(self._params, self._model)

    @property
    def truncation_order(self) -> int:
        """Return the truncation order m, honouring an explicit override."""
        override = self._options.get(CONF_TRUNCATION_ORDER)
        if override is not None:
            return int(override)
        return self._expansion.truncation_order(self._params)

    @property
    def last_report(self) -> Optional[ExpansionReport]:
        """Return the most recent expansion report."""
        return self._last_report

    @property
    def sampler(self) -> ChainRuleSampler:
        """Return the chain-rule sampler, creating it on first use."""
        if self._sampler is None:
            self._sampler = ChainRuleSampler(
                self._model,
                self._params,
                self._expansion,
                self._options.get(CONF_VERTEX_ORDER),
                self._options.get(CONF_WORKERS, DEFAULT_WORKERS),
            )
        return self._sampler

    def _common(self) -> Dict[str, Any]:
        return {
            ATTR_ADMISSIBLE: self.admissible,
            ATTR_THRESHOLD: float(self.threshold),
            ATTR_EPSILON: float(self._params.epsilon),
        }

    def validate(self) -> ValidationReport:
        """Check the model's invariants."""
        return validate_model(self._model)

    def estimate(self) -> ExpansionReport:
        """Run the truncated cluster expansion of log Z."""
        self._last_report = self._expansion.log_z(self._params, self.truncation_order)
        _LOGGER.info(
            "log Z = %s at order %d (%d polymers)",
            self._last_report.log_z,
            self._last_report.truncation_order,
            self._last_report.polymer_count,
        )
        return self._last_report

    def partition(self, unnormalized: bool = False) -> Dict[str, Any]:
        """Return the partition-function report."""
        report = self.estimate()
        max_degree, rank = degree_and_rank(self._model.graph)

        shifted = report
        if unnormalized:
            # Tr(I) = d^n on the unnormalized trace
            shifted = replace(
                report,
                log_z0=report.log_z0
                + self._model.n_vertices * math.log(self._model.local_dim),
            )

        kp_margin = None
        if report.truncation_order > 1 and self._model.graph.n_edges:
            kp_margin = self._expansion.kp_margin(
                self._params, report.truncation_order - 1
            )

        return {
            **self._common(),
            ATTR_MAX_DEGREE: max_degree,
            ATTR_RANK: rank,
            ATTR_TRUNCATION_ORDER: report.truncation_order,
            ATTR_CLUSTER_COUNT: report.cluster_count,
            ATTR_POLYMER_COUNT: report.polymer_count,
            ATTR_LOG_Z0: complex_pair(report.log_z0),
            ATTR_CLUSTER_SUM: complex_pair(report.cluster_sum),
            ATTR_LOG_Z: complex_pair(shifted.log_z),
            ATTR_Z: complex_pair(shifted.z),
            ATTR_NORMALIZED: not unnormalized,
            ATTR_PARTIALS: [complex_pair(p) for p in report.partials],
            ATTR_DECAY_RATIO: decay_ratio(report),
            ATTR_KP_MARGIN: kp_margin,
            ATTR_WARNINGS: list(report.warnings),
        }

    def sample(self, n_samples: int, seed: Optional[int] = None) -> Dict[str, Any]:
        """Draw samples from child streams of one recorded root seed."""
        if seed is None:
            seed = self._params.seed
        if seed is None:
            seed = int(np.random.SeedSequence().entropy) & SEED_MASK

        sampler = self.sampler
        start = sampler.queries
        runs = sample_many(self._model, self._params, n_samples, seed, sampler)
        return {
            **self._common(),
            ATTR_SAMPLES: [run.as_string() for run in runs],
            ATTR_SEED: seed,
            ATTR_QUERIES: sampler.queries - start,
        }

    def distribution(self) -> Dict[tuple, float]:
        """Return the sampler's exact output law."""
        return self.sampler.table()

    def compare(self) -> Dict[str, Any]:
        """Compare the estimator against the exact oracle."""
        check_oracle_caps(self._model)

        z_estimate = self.estimate().z
        z_exact = exact_partition_function(self._model, self._params)
        relative_error = abs(z_estimate - z_exact) / abs(z_exact)

        tv_distance = None
        if self._params.is_real:
            tv_distance = total_variation(
                self.distribution(),
                exact_thermal_distribution(self._model, self._params),
            )

        epsilon = self._params.epsilon
        passed = relative_error <= epsilon and (
            tv_distance is None or tv_distance <= epsilon
        )
        if not passed:
            _LOGGER.warning(
                "Comparison failed: relative error %.3g, TV %s, epsilon %.3g",
                relative_error,
                tv_distance,
                epsilon,
            )
        return {
            **self._common(),
            ATTR_Z: complex_pair(z_estimate),
            ATTR_Z_EXACT: complex_pair(z_exact),
            ATTR_REL_ERROR: float(relative_error),
            ATTR_TV: None if tv_distance is None else float(tv_distance),
            ATTR_PASSED: bool(passed),
        }
