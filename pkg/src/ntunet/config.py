"""Run configuration documents (YAML), validation, hashing and manifests."""

from __future__ import annotations

import copy
import datetime as _dt
import hashlib
import json
import platform

import numpy as np
import yaml

from .dgp import ConfigError

SCHEMA_VERSION = 1

# every accepted key with its default; nested dicts are sections
DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "seed": 0,
    "threads": 1,
    "dgp": {
        "n": 100,
        "d": 3,
        "corr": 0.2,
        "w": "symmetric_abs_diff",
        "support": "AllContinuous",
        "beta0": None,
        "heterogeneity": None,
    },
    "search": {"G": 9, "slack": 0.05, "floor": 1e-9, "margin": 1, "rounds": 20, "tol": 1e-3},
    "mc": {"B": 100, "M": 1000, "kind": "scaled_normal_cdf", "sweep": None},
    "idset": {
        "conditions": ["AllContinuous", "Binary1", "Binary1Discrete2", "AllDiscrete101", "AllDiscrete11"],
        "N": 1000,
        "M": 10000,
        "resolution_deg": 1.0,
        "kind": "indicator",
        "anchor": "beta0",
        "rel_tol": 0.0,
    },
    "data": {
        "nodes": None,
        "dyads": None,
        "edges": None,
        "id_col": "id",
        "i_col": "i",
        "j_col": "j",
        "link_col": "link",
        "link_rule": "binary",
        "recipe": None,
        "first_stage_columns": None,
        "first_stage_pair_means": False,
        "M": 1000,
        "kind": "scaled_normal_cdf",
    },
}

SWEEP_KEYS = ("n", "d", "corr", "w")


def _merge(defaults, given, where):
    if not isinstance(given, dict):
        raise ConfigError(f"{where or 'config'} must be a mapping")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where or 'config'}: {', '.join(map(str, unknown))}")
    out = copy.deepcopy(defaults)
    for k, v in given.items():
        if isinstance(defaults[k], dict):
            out[k] = _merge(defaults[k], v or {}, f"{where}.{k}" if where else k)
        else:
            out[k] = v
    return out


def resolve(doc: dict | None) -> dict:
    """Fill defaults and reject unknown keys or a wrong schema version."""
    doc = {} if doc is None else doc
    cfg = _merge(DEFAULTS, doc, "")
    if cfg["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg['schema_version']!r}; expected {SCHEMA_VERSION}")
    sweep = cfg["mc"]["sweep"]
    if sweep is not None:
        if not isinstance(sweep, dict):
            raise ConfigError("mc.sweep must be a mapping of lists")
        bad = sorted(set(sweep) - set(SWEEP_KEYS))
        if bad:
            raise ConfigError(f"unknown key(s) in mc.sweep: {', '.join(bad)}")
        for k, v in sweep.items():
            if not isinstance(v, list) or not v:
                raise ConfigError(f"mc.sweep.{k} must be a non-empty list")
    for key in ("seed", "threads"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise ConfigError(f"{key} must be an integer")
    return cfg


def load(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from None
    return resolve(doc)


def canonical(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=_jsonable)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical(cfg).encode("utf-8")).hexdigest()


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj).__name__}")


def manifest(cfg: dict, command: str, outputs: list[str], extra: dict | None = None) -> dict:
    """Machine-readable record of a run. Only ``timestamp`` varies between reruns."""
    from . import __version__
    from .kernels import BACKEND

    out = {
        "command": command,
        "config": cfg,
        "config_hash": config_hash(cfg),
        "seed": cfg["seed"],
        "version": __version__,
        "kernel_backend": BACKEND,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "outputs": sorted(outputs),
    }
    if extra:
        out.update(extra)
    out["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    return out


def write_manifest(path, man: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(man, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
