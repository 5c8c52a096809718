"""Python access to the Bernstein lab: extremal quotients, exponent fits and experiment runs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import _bernstein_lab as _core

LabError = _core.LabError
jensen_constant = _core.jensen_constant
precision_for_degree = _core.precision_for_degree

__all__ = [
    "LabError",
    "extremal_quotient",
    "fit_exponent",
    "jensen_constant",
    "normalize_config",
    "precision_for_degree",
    "run_config",
    "schema_path",
    "zoo_names",
]


def _curve_doc(curve: str | Sequence[Any] | dict) -> dict:
    if isinstance(curve, str):
        return {"coords": [curve], "label": curve}
    if isinstance(curve, dict):
        return curve
    return {"coords": list(curve)}


def zoo_names() -> list[str]:
    return list(_core.zoo_names())


def extremal_quotient(curve, k: int, r: float = 1.0, precision_bits: int = 0) -> dict:
    """ln B(k, r) for a curve given as a built-in name, a list of coordinates, or a curve document."""
    return json.loads(_core.extremal_quotient(json.dumps(_curve_doc(curve)), k, r, precision_bits))


def fit_exponent(ks: Iterable[int], log_quotients: Iterable[float], r: float = 1.0, k_floor: int = 2) -> dict:
    return json.loads(_core.fit_exponent(list(ks), list(log_quotients), r, k_floor))


def normalize_config(config: dict) -> dict:
    """Validated config with every default filled in. Raises LabError (code ConfigInvalid)."""
    return json.loads(_core.normalize_config(json.dumps(config)))


def run_config(config: dict) -> dict:
    """Runs one experiment, writes report.csv and report.json, and returns the report."""
    return json.loads(_core.run_config(json.dumps(config)))


def schema_path() -> Path:
    """Location of the config JSON Schema: the installed copy, else the source checkout."""
    here = Path(__file__).resolve().parent
    installed = here / "experiment_config.schema.json"
    if installed.exists():
        return installed
    return here.parents[1] / "schema" / "experiment_config.schema.json"
