#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Model documents, run parameters and report schemas.

Model document format (JSON)::

    {
      "d": 2,
      "n_vertices": 2,
      "edges": [{"id": "e0", "vertices": [0, 1]}],
      "on_site": {"0": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]},
      "interactions": {"e0": [...]}
    }

Matrices are row-major arrays of [re, im] pairs, either nested by row or flat.
Omitted on-site entries are the zero matrix.
"""

import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
import voluptuous as vol

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
    ATTR_VALID,
    ATTR_VIOLATIONS,
    ATTR_WARNINGS,
    ATTR_Z,
    ATTR_Z_EXACT,
    CONF_BETA,
    CONF_EDGE_ID,
    CONF_EDGE_VERTICES,
    CONF_EDGES,
    CONF_EPSILON,
    CONF_EXP_REAL_CAP,
    CONF_INTERACTIONS,
    CONF_LAMBDA,
    CONF_LOCAL_DIM,
    CONF_MAX_CLUSTER_POLYMERS,
    CONF_N_VERTICES,
    CONF_ON_SITE,
    CONF_SEED,
    CONF_SUMMATION,
    CONF_TRUNCATION_C0,
    CONF_TRUNCATION_ORDER,
    CONF_VERTEX_ORDER,
    CONF_WORKERS,
    DEFAULT_EXP_REAL_CAP,
    DEFAULT_SUMMATION,
    DEFAULT_TRUNCATION_C0,
    DEFAULT_WORKERS,
    ENV_WORKERS,
    MAX_URSELL_VERTICES,
    SUMMATION_CLUSTERS,
    SUMMATION_SERIES,
)
from .exceptions import ModelError, ParseError
from .hypergraph import Multihypergraph
from .model import Params, SpinModel

_LOGGER = logging.getLogger(__name__)


def _number(value) -> float:
    """Accept an int or float (not a bool) and return a finite float."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise vol.Invalid(f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise vol.Invalid(f"expected a finite number, got {value!r}")
    return float(value)


def _integer(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise vol.Invalid(f"expected an integer, got {value!r}")
    return value


COMPLEX_PAIR = vol.All(
    vol.ExactSequence([_number, _number]), lambda pair: complex(pair[0], pair[1])
)


def complex_matrix(value) -> np.ndarray:
    """Validate a matrix of [re, im] pairs, nested by row or flat."""
    if not isinstance(value, list) or not value:
        raise vol.Invalid("expected a non-empty array of [re, im] pairs")

    is_nested = all(
        isinstance(row, list) and row and all(isinstance(e, list) for e in row)
        for row in value
    )
    rows = value if is_nested else None
    if rows is None:
        flat = [COMPLEX_PAIR(entry) for entry in value]
        dim = math.isqrt(len(flat))
        if dim * dim != len(flat):
            raise vol.Invalid(f"flat matrix has {len(flat)} entries, not a square")
        return np.array(flat, dtype=complex).reshape(dim, dim)

    matrix = []
    for i, row in enumerate(rows):
        if len(row) != len(rows):
            raise vol.Invalid(f"row {i} has {len(row)} entries, expected {len(rows)}")
        matrix.append([COMPLEX_PAIR(entry) for entry in row])
    return np.array(matrix, dtype=complex)


EDGE_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_EDGE_ID): vol.All(vol.Any(str, _integer), vol.Coerce(str)),
        vol.Required(CONF_EDGE_VERTICES): vol.All([_integer], vol.Length(min=1)),
    }
)

MODEL_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_LOCAL_DIM): vol.All(_integer, vol.Range(min=2)),
        vol.Required(CONF_N_VERTICES): vol.All(_integer, vol.Range(min=0)),
        vol.Required(CONF_EDGES): [EDGE_SCHEMA],
        vol.Optional(CONF_ON_SITE, default={}): {vol.Coerce(int): complex_matrix},
        vol.Optional(CONF_INTERACTIONS, default={}): {str: complex_matrix},
    }
)


def _coupling(value) -> complex:
    if isinstance(value, list):
        return COMPLEX_PAIR(value)
    return complex(_number(value))


PARAMS_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_BETA): vol.All(_number, vol.Range(min=0, min_included=False)),
        vol.Optional(CONF_LAMBDA, default=0.0): _coupling,
        vol.Optional(CONF_EPSILON, default=0.1): vol.All(
            _number, vol.Range(min=0, max=1, min_included=False)
        ),
        vol.Optional(CONF_SEED, default=None): vol.Any(
            None, vol.All(_integer, vol.Range(min=0, max=2**64 - 1))
        ),
    }
)


def vertex_order(value) -> List[int]:
    """Accept a list of ints or a comma-separated string of ints."""
    if isinstance(value, str):
        try:
            value = [int(v) for v in value.split(",") if v.strip()]
        except ValueError as err:
            raise vol.Invalid(f"expected comma-separated integers: {value}") from err
    if not isinstance(value, list) or sorted(value) != list(range(len(value))):
        raise vol.Invalid(f"expected a permutation of 0..n-1: {value}")
    return value


RUN_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_TRUNCATION_C0, default=DEFAULT_TRUNCATION_C0): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Optional(CONF_EXP_REAL_CAP, default=DEFAULT_EXP_REAL_CAP): vol.All(
            vol.Coerce(float), vol.Range(min=0, min_included=False)
        ),
        vol.Optional(CONF_WORKERS): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_VERTEX_ORDER): vertex_order,
        vol.Optional(CONF_TRUNCATION_ORDER): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_MAX_CLUSTER_POLYMERS, default=MAX_URSELL_VERTICES): vol.All(
            vol.Coerce(int), vol.Range(min=1, max=MAX_URSELL_VERTICES)
        ),
        vol.Optional(CONF_SUMMATION, default=DEFAULT_SUMMATION): vol.In(
            [SUMMATION_SERIES, SUMMATION_CLUSTERS]
        ),
    }
)


def _format_path(path: Iterable[Any]) -> str:
    text = ""
    for part in path:
        if isinstance(part, int):
            text += f"[{part}]"
        else:
            text += f".{part}" if text else str(part)
    return text


def _validate(schema: vol.Schema, data: Any) -> Any:
    try:
        return schema(data)
    except vol.MultipleInvalid as err:
        first = err.errors[0]
        raise ParseError(first.error_message, _format_path(first.path)) from err
    except vol.Invalid as err:
        raise ParseError(err.error_message, _format_path(err.path)) from err


def parse_model_document(document: Mapping[str, Any]) -> SpinModel:
    """Build a spin model from a decoded model document.

    Structure is validated here; operator dimensions, Hermiticity and norms
    are left to `validate_model`.
    """
    data = _validate(MODEL_SCHEMA, document)
    try:
        graph = Multihypergraph(
            data[CONF_N_VERTICES],
            [(e[CONF_EDGE_ID], e[CONF_EDGE_VERTICES]) for e in data[CONF_EDGES]],
        )
        return SpinModel(
            graph,
            data[CONF_LOCAL_DIM],
            data[CONF_ON_SITE],
            data[CONF_INTERACTIONS],
        )
    except ModelError as err:
        raise ParseError(str(err), CONF_EDGES) from err


def load_model(path: Union[str, Path]) -> SpinModel:
    """Read and parse a JSON model document."""
    path = Path(path)
    _LOGGER.debug("Loading model from %s", path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise ParseError(f"cannot read model file: {err.strerror}", str(path)) from err
    except json.JSONDecodeError as err:
        raise ParseError(
            err.msg, f"{path.name}: line {err.lineno}, column {err.colno}"
        ) from err
    return parse_model_document(document)


def parse_params(config: Mapping[str, Any]) -> Params:
    """Validate β, λ, ε and seed."""
    data = _validate(PARAMS_SCHEMA, dict(config))
    return Params(
        beta=data[CONF_BETA],
        coupling=data[CONF_LAMBDA],
        epsilon=data[CONF_EPSILON],
        seed=data[CONF_SEED],
    )


def parse_overrides(items: Iterable[str]) -> Dict[str, str]:
    """Split repeated key=value flags into a dict."""
    overrides = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"expected key=value, got {item!r}", "--set")
        overrides[key.strip()] = value.strip()
    return overrides


def default_workers() -> int:
    """Return the worker count from the environment, or 1."""
    raw = os.environ.get(ENV_WORKERS)
    if raw is None or not raw.strip():
        return DEFAULT_WORKERS
    try:
        workers = int(raw)
    except ValueError as err:
        raise ParseError(f"expected an integer, got {raw!r}", ENV_WORKERS) from err
    if workers < 1:
        raise ParseError(f"must be >= 1, got {workers}", ENV_WORKERS)
    return workers


def parse_run_options(
    overrides: Optional[Mapping[str, Any]] = None, workers: Optional[int] = None
) -> Dict[str, Any]:
    """Validate run options; the worker count falls back to the environment."""
    options = _validate(RUN_SCHEMA, dict(overrides or {}))
    if workers is not None:
        options[CONF_WORKERS] = workers
    options.setdefault(CONF_WORKERS, default_workers())
    return options


# Reports


def complex_pair(value: complex) -> List[float]:
    """Serialize a complex number as [re, im]."""
    value = complex(value)
    return [float(value.real), float(value.imag)]


def _float(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise vol.Invalid(f"expected a float, got {value!r}")
    return float(value)


REPORT_COMPLEX = vol.ExactSequence([_float, _float])
OPTIONAL_FLOAT = vol.Any(None, _float)

PARTITION_REPORT_SCHEMA = vol.Schema(
    {
        vol.Required(ATTR_ADMISSIBLE): bool,
        vol.Required(ATTR_THRESHOLD): _float,
        vol.Required(ATTR_MAX_DEGREE): _integer,
        vol.Required(ATTR_RANK): _integer,
        vol.Required(ATTR_EPSILON): _float,
        vol.Required(ATTR_TRUNCATION_ORDER): _integer,
        vol.Required(ATTR_CLUSTER_COUNT): vol.Any(None, _integer),
        vol.Required(ATTR_POLYMER_COUNT): _integer,
        vol.Required(ATTR_LOG_Z0): REPORT_COMPLEX,
        vol.Required(ATTR_CLUSTER_SUM): REPORT_COMPLEX,
        vol.Required(ATTR_LOG_Z): REPORT_COMPLEX,
        vol.Required(ATTR_Z): REPORT_COMPLEX,
        vol.Required(ATTR_NORMALIZED): bool,
        vol.Required(ATTR_PARTIALS): [REPORT_COMPLEX],
        vol.Required(ATTR_DECAY_RATIO): OPTIONAL_FLOAT,
        vol.Required(ATTR_KP_MARGIN): OPTIONAL_FLOAT,
        vol.Required(ATTR_WARNINGS): [str],
    }
)

SAMPLE_REPORT_SCHEMA = vol.Schema(
    {
        vol.Required(ATTR_ADMISSIBLE): bool,
        vol.Required(ATTR_THRESHOLD): _float,
        vol.Required(ATTR_EPSILON): _float,
        vol.Required(ATTR_SAMPLES): [str],
        vol.Required(ATTR_SEED): _integer,
        vol.Required(ATTR_QUERIES): _integer,
    }
)

COMPARE_REPORT_SCHEMA = vol.Schema(
    {
        vol.Required(ATTR_ADMISSIBLE): bool,
        vol.Required(ATTR_THRESHOLD): _float,
        vol.Required(ATTR_EPSILON): _float,
        vol.Required(ATTR_Z): REPORT_COMPLEX,
        vol.Required(ATTR_Z_EXACT): REPORT_COMPLEX,
        vol.Required(ATTR_REL_ERROR): _float,
        vol.Required(ATTR_TV): OPTIONAL_FLOAT,
        vol.Required(ATTR_PASSED): bool,
    }
)

VALIDATION_REPORT_SCHEMA = vol.Schema(
    {
        vol.Required(ATTR_VALID): bool,
        vol.Required(ATTR_VIOLATIONS): [
            {
                vol.Required("kind"): str,
                vol.Required("target"): str,
                vol.Required("detail"): str,
                vol.Required("measured"): OPTIONAL_FLOAT,
            }
        ],
    }
)


def round_trip(schema: vol.Schema, report: Mapping[str, Any]) -> Tuple[str, Any]:
    """Return the JSON text of a report and its schema-validated decoding."""
    text = json.dumps(report, sort_keys=True)
    return text, schema(json.loads(text))
