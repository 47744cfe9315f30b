"""Experiment configuration: defaults, file loading, flag overrides and hashing."""
from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from pathlib import Path
from typing import Any, Optional

from .material import ElasticMaterial, make_material
from .spectrum import DomainDescriptor, ScanSettings, canonical_json, rectangle, unit_disk


class ConfigError(ValueError):
    pass


DEFAULTS: dict[str, Any] = {
    "operator": "lame",
    "material": {"ct2": 1.0, "cl2": 1.0},
    "components": 1,
    "domain": {"kind": "unit_disk"},
    "bc": "dir",
    "tau_max": 4.0e4,
    "tolerances": {
        "quadrature": 1e-10,
        "refinement": 1e-13,
        "residual_gate": 1e-8,
        "band_slack": 2.0,
        "scan_subdivisions": 16,
    },
    "gamma_policy": "unit",
    "t_grid": {"per_decade": 40, "t_hi_scale": 0.02},
    "cache_dir": None,
    "out_dir": None,
}

# paths do not change results and are left out of the hash
_NOT_HASHED = ("cache_dir", "out_dir")


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    return data


def build_config(file_path: Optional[str] = None, overrides: Optional[dict] = None) -> dict:
    """defaults < config file < flag overrides; the result is validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if os.environ.get("WEYL_CACHE_DIR"):
        cfg["cache_dir"] = os.environ["WEYL_CACHE_DIR"]
    if file_path:
        cfg = _merge(cfg, load_config_file(file_path))
    if overrides:
        cfg = _merge(cfg, {k: v for k, v in overrides.items() if v is not None})
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    if cfg["operator"] not in ("lame", "scalar_laplace"):
        raise ConfigError(f"operator must be 'lame' or 'scalar_laplace', got {cfg['operator']!r}")
    allowed = ("dir", "free") if cfg["operator"] == "lame" else ("dir", "neu")
    if cfg["bc"] not in allowed:
        raise ConfigError(f"bc for {cfg['operator']} must be one of {allowed}, got {cfg['bc']!r}")
    tm = cfg["tau_max"]
    if not (isinstance(tm, (int, float)) and math.isfinite(tm) and tm > 0):
        raise ConfigError("tau_max must be a positive number")
    for k, v in cfg["tolerances"].items():
        if not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"tolerance {k} must be positive, got {v!r}")
    mat = cfg["material"]
    for k in ("ct2", "cl2"):
        v = mat.get(k)
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError(f"material.{k} must be a positive number, got {v!r}")
    kind = cfg["domain"].get("kind")
    if kind == "rectangle":
        if cfg["operator"] != "scalar_laplace":
            raise ConfigError("the elastic solver supports the unit disk only")
        if not all(cfg["domain"].get(s, 0) > 0 for s in ("a", "b")):
            raise ConfigError("rectangle needs positive sides a and b")
    elif kind != "unit_disk":
        raise ConfigError(f"unknown domain kind {kind!r}")
    gp = cfg["gamma_policy"]
    if not (gp in ("unit", "family") or isinstance(gp, (int, float))):
        raise ConfigError("gamma_policy must be 'unit', 'family' or a number")
    if int(cfg["components"]) < 1:
        raise ConfigError("components must be >= 1")
    tg = cfg["t_grid"]
    if tg.get("per_decade", 0) <= 0 or tg.get("t_hi_scale", 0) <= 0:
        raise ConfigError("t_grid.per_decade and t_grid.t_hi_scale must be positive")


def config_hash(cfg: dict) -> str:
    """Stable under key reordering: sha256 of the canonical JSON form."""
    ident = {k: v for k, v in cfg.items() if k not in _NOT_HASHED}
    return hashlib.sha256(canonical_json(ident).encode()).hexdigest()


def material_of(cfg: dict) -> ElasticMaterial:
    return make_material(float(cfg["material"]["ct2"]), float(cfg["material"]["cl2"]))


def domain_of(cfg: dict) -> DomainDescriptor:
    d = cfg["domain"]
    return unit_disk() if d["kind"] == "unit_disk" else rectangle(d["a"], d["b"])


def scan_settings_of(cfg: dict) -> ScanSettings:
    tol = cfg["tolerances"]
    return ScanSettings(subdivisions=int(tol["scan_subdivisions"]),
                        refine_tol=float(tol["refinement"]),
                        band_slack=float(tol["band_slack"]))


def cache_dir_of(cfg: dict) -> Optional[Path]:
    return Path(cfg["cache_dir"]) if cfg.get("cache_dir") else None
