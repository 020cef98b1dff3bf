"""Strict YAML run configuration.

Every section has a fixed key set; unknown keys are rejected. See the
README for the schema.
"""

from __future__ import annotations

import copy
from pathlib import Path
from typing import Any, Optional

import yaml

from .dynamics import RunConfig
from .ensembles import EnsembleSpec, spec_from_dict


class ConfigError(ValueError):
    """Malformed or unknown configuration."""


_PROBS = {"x", "y", "z"}
_RANGE = {"kind", "r", "r_min", "r_max", "rate", "exponent"}
_PATH = {"kind", "anchor_x"}
SCHEMA: dict[str, Any] = {
    "seed": None,
    "workers": None,
    "ensemble": {"family": None, "L": None, "probs": _PROBS, "q0": None, "range": _RANGE,
                 "weights": _PROBS, "r": None, "letters": None},
    "run": {"steps_equilibrate": None, "steps_measure": None, "trajectories": None,
            "observables": None, "i3_divisor": None, "translations": None,
            "sample_every": None, "keep_raw": None},
    "sweep": {"q0": None, "sizes": None},
    "index": {"method": None, "samples": None, "L_idx": None, "cap": None},
    "index_curve": {"family": None, "r": None, "q0": None, "path": _PATH, "boundary": None,
                    "L_idx": None, "anchors": None},
    "graph": {"cap": None},
    "boundary": {"family": None, "r": None, "parity": None, "path": _PATH},
    "collapse": {"input": None, "observable": None, "normalize_peak": None, "init": None},
    "fit": {"input": None, "x": None, "y": None},
    "oracle": {"sequences": None, "measurements": None, "sizes": None},
}


def _check(node, schema, where):
    if schema is None:
        return
    if not isinstance(node, dict):
        raise ConfigError(f"{where or 'config'} must be a mapping")
    allowed = schema if isinstance(schema, set) else set(schema)
    unknown = set(node) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {sorted(unknown)}")
    if isinstance(schema, dict):
        for k, v in node.items():
            _check(v, schema[k], f"{where}.{k}" if where else k)


def validate(cfg: dict) -> dict:
    _check(cfg, SCHEMA, "")
    return cfg


def load_config(path: Optional[Path]) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return validate(data or {})


def apply_override(cfg: dict, assignment: str) -> dict:
    """Apply ``section.key=value`` (value parsed as YAML) to a copy of ``cfg``."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value")
    key, raw = assignment.split("=", 1)
    out = copy.deepcopy(cfg)
    node = out
    parts = key.strip().split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    try:
        node[parts[-1]] = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"bad override value {raw!r}") from exc
    return validate(out)


def ensemble_from_config(cfg: dict) -> EnsembleSpec:
    if "ensemble" not in cfg:
        raise ConfigError("config has no 'ensemble' section")
    try:
        return spec_from_dict(cfg["ensemble"])
    except KeyError as exc:
        raise ConfigError(f"ensemble is missing {exc}") from exc


def run_config_from(cfg: dict, seed: int = 0) -> RunConfig:
    spec = ensemble_from_config(cfg)
    run = dict(cfg.get("run", {}))
    if "observables" in run:
        run["observables"] = tuple(run["observables"])
    return RunConfig(spec, master_seed=int(seed), **run)
