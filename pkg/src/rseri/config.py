"""Pipeline configuration: a YAML file merged over defaults.

Relative input paths resolve against the config file's directory.
"""
from __future__ import annotations

import copy
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml

from .ingest import CRS_PROJECTED, CRS_WGS84
from .risk import COMPOSITE

OUT_ENV = "RSERI_OUT"

DEFAULTS: Dict[str, Any] = {
    "inputs": {
        "chargers": None,
        "chargers_format": "csv",
        "flood": None,
        "substations": None,
        "roads": None,
        "lads": None,
        "lst": [],
        "ndvi": None,
        "lulc": None,
        "legend": None,
    },
    "crs": CRS_WGS84,          # charger coordinates
    "layer_crs": CRS_PROJECTED,  # vector layer coordinates
    "thresholds": {
        "grid_m": 5000.0,
        "road_m": 2000.0,
        "lst_percentile": 0.9,
        "lst_population": "chargers",  # or "raster"
        "ndvi_low": 0.2,
        "ndvi_high": 0.5,
    },
    "classes": {"low_max": 1.0 / 3.0, "moderate_max": 2.0 / 3.0},
    "weights": {"kind": "equal", "custom": None},
    "graph": {"k": 5, "symmetrize_export": False},
    "analytics": {
        "hex_cell_m": 10000.0,
        "hist_bins": 20,
        "combos": [list(c) for c in (("flood", "lst"), ("flood", "vegetation"),
                                     ("lst", "vegetation"), ("grid", "road"),
                                     ("flood", "lst", "vegetation"))],
        "figures": True,
    },
    "output_dir": "out",
    "threads": 1,
}

REQUIRED_INPUTS = ("chargers", "flood", "substations", "roads", "lst",
                   "ndvi", "lulc", "legend")
PATH_INPUTS = ("chargers", "flood", "substations", "roads", "lads", "ndvi",
               "lulc", "legend")


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        key = f"{prefix}{k}"
        if k not in base:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(base[k], dict):
            if not isinstance(v, dict):
                raise ConfigError(f"{key} must be a mapping")
            out[k] = _merge(base[k], v, key + ".")
        else:
            out[k] = v
    return out


@dataclass
class PipelineConfig:
    data: Dict[str, Any]
    base_dir: Path

    @classmethod
    def from_dict(cls, raw: Optional[dict], base_dir=".") -> "PipelineConfig":
        cfg = cls(_merge(DEFAULTS, raw or {}), Path(base_dir))
        lst = cfg.data["inputs"]["lst"]
        if isinstance(lst, str):
            cfg.data["inputs"]["lst"] = [lst]
        return cfg

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        path = Path(path)
        try:
            raw = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if raw is not None and not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_dict(raw, path.resolve().parent)

    def get(self, dotted: str):
        node = self.data
        for part in dotted.split("."):
            node = node[part]
        return node

    def set(self, dotted: str, value) -> None:
        parts = dotted.split(".")
        node = self.data
        for part in parts[:-1]:
            node = node.get(part) if isinstance(node, dict) else None
            if not isinstance(node, dict):
                raise ConfigError(f"unknown config key {dotted!r}")
        if parts[-1] not in node:
            raise ConfigError(f"unknown config key {dotted!r}")
        node[parts[-1]] = value

    def path(self, key: str) -> Optional[Path]:
        v = self.data["inputs"][key]
        if v is None:
            return None
        p = Path(v)
        return p if p.is_absolute() else self.base_dir / p

    def lst_paths(self) -> List[Path]:
        return [p if p.is_absolute() else self.base_dir / p
                for p in map(Path, self.data["inputs"]["lst"])]

    def output_dir(self, override=None) -> Path:
        if override is not None:
            return Path(override)
        env = os.environ.get(OUT_ENV)
        if env:
            return Path(env)
        p = Path(self.data["output_dir"])
        return p if p.is_absolute() else self.base_dir / p

    def snapshot(self) -> dict:
        """Config contents that affect results (no paths to outputs)."""
        snap = copy.deepcopy(self.data)
        snap.pop("output_dir", None)
        snap.pop("threads", None)
        return snap

    def check(self) -> List[str]:
        """Knob-range problems, as messages (empty when valid)."""
        errs = []
        d = self.data
        for key in REQUIRED_INPUTS:
            if not d["inputs"][key]:
                errs.append(f"inputs.{key} is required")
        if d["crs"] not in (CRS_WGS84, CRS_PROJECTED):
            errs.append(f"crs must be {CRS_WGS84!r} or {CRS_PROJECTED!r}")
        if d["layer_crs"] not in (CRS_WGS84, CRS_PROJECTED):
            errs.append(f"layer_crs must be {CRS_WGS84!r} or {CRS_PROJECTED!r}")
        t = d["thresholds"]
        for key in ("grid_m", "road_m"):
            if not _num(t[key]) or t[key] < 0:
                errs.append(f"thresholds.{key} must be a number >= 0")
        if not _num(t["lst_percentile"]) or not 0 <= t["lst_percentile"] <= 1:
            errs.append("thresholds.lst_percentile must lie in [0, 1]")
        if t["lst_population"] not in ("chargers", "raster"):
            errs.append("thresholds.lst_population must be chargers|raster")
        if not (_num(t["ndvi_low"]) and _num(t["ndvi_high"])
                and -1 <= t["ndvi_low"] <= t["ndvi_high"] <= 1):
            errs.append("need -1 <= thresholds.ndvi_low <= ndvi_high <= 1")
        c = d["classes"]
        if not (_num(c["low_max"]) and _num(c["moderate_max"])
                and 0 <= c["low_max"] <= c["moderate_max"] <= 1):
            errs.append("need 0 <= classes.low_max <= moderate_max <= 1")
        w = d["weights"]
        if w["kind"] not in ("equal", "pca", "custom"):
            errs.append("weights.kind must be equal|pca|custom")
        if w["kind"] == "custom":
            cw = w["custom"]
            if isinstance(cw, dict):
                cw = [cw.get(f, 0.0) for f in COMPOSITE]
            if (not isinstance(cw, list) or len(cw) != len(COMPOSITE)
                    or not all(_num(x) and x >= 0 for x in cw)
                    or abs(sum(cw) - 1) > 1e-12):
                errs.append("weights.custom must be 5 nonnegative numbers "
                            "summing to 1 (flood, lst, grid, road, vegetation)")
        if not isinstance(d["graph"]["k"], int) or d["graph"]["k"] < 1:
            errs.append("graph.k must be a positive integer")
        a = d["analytics"]
        if not _num(a["hex_cell_m"]) or a["hex_cell_m"] <= 0:
            errs.append("analytics.hex_cell_m must be > 0")
        if not isinstance(a["hist_bins"], int) or a["hist_bins"] < 1:
            errs.append("analytics.hist_bins must be a positive integer")
        for combo in a["combos"] or []:
            bad = [f for f in combo if f not in COMPOSITE]
            if bad:
                errs.append(f"analytics.combos: unknown factor(s) {bad}")
        if not isinstance(d["threads"], int) or d["threads"] < 1:
            errs.append("threads must be a positive integer")
        return errs

    def custom_weights(self) -> List[float]:
        cw = self.data["weights"]["custom"]
        if isinstance(cw, dict):
            return [float(cw.get(f, 0.0)) for f in COMPOSITE]
        return [float(x) for x in cw]


def _num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)
