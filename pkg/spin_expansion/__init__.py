#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Cluster expansion for weakly-interacting quantum spin systems.

For more details about this package, please refer to the documentation at
README.md in the repository root.
"""

import logging
from typing import Any, Mapping, Optional

from .api import ClusterExpansionClient
from .cache import Cache
from .config import load_model, parse_params, parse_run_options
from .const import CONF_MODEL, DOMAIN, STARTUP_MESSAGE, VERSION
from .exceptions import (
    AdmissibilityError,
    CapExceededError,
    ModelError,
    NumericalError,
    ParseError,
    SpinExpansionError,
)
from .expansion import (
    ClusterExpansion,
    estimate_partition_function,
    truncated_log_z,
    ursell,
)
from .hypergraph import Multihypergraph, Polymer, enumerate_polymers
from .model import Params, SpinModel, validate_model, weak_interaction_threshold
from .sampler import distribution_table, sample_assignment

_LOGGER = logging.getLogger(__name__)

__version__ = VERSION

__all__ = [
    "AdmissibilityError",
    "Cache",
    "CapExceededError",
    "ClusterExpansion",
    "ClusterExpansionClient",
    "DOMAIN",
    "ModelError",
    "Multihypergraph",
    "NumericalError",
    "Params",
    "ParseError",
    "Polymer",
    "SpinExpansionError",
    "SpinModel",
    "distribution_table",
    "enumerate_polymers",
    "estimate_partition_function",
    "get_client",
    "load_model",
    "sample_assignment",
    "truncated_log_z",
    "ursell",
    "validate_model",
    "weak_interaction_threshold",
]


def get_client(
    config: Mapping[str, Any], options: Optional[Mapping[str, Any]] = None
) -> ClusterExpansionClient:
    """Prepare a client from a config with `model` (path) plus β, λ, ε, seed."""
    _LOGGER.info(STARTUP_MESSAGE)
    config = dict(config)
    model = load_model(config.pop(CONF_MODEL))
    params = parse_params(config)
    return ClusterExpansionClient(model, params, parse_run_options(options))
