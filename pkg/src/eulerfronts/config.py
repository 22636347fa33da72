"""JSON run configuration: schema, defaults, resolution into library objects."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import EulerFrontsError
from .exact_solution import SolutionFamily
from .process import ProcessCurve, process_from_config
from .thermo import PotentialModel, model_from_config

# Reference family: ideal gas n=3 with R=0.6 so that A0 = sqrt(R (1 + 2/n)) = 1
# at s0 = 0, and alpha = (0, 0, 1, 1).
DEFAULTS: dict = {
    "model": {"model": "ideal", "n": 3, "R": 0.6},
    "process": {"process": "adiabatic", "s0": 0.0, "rho_min": 1e-3, "rho_max": 1e3},
    "solution": {"alpha": [0.0, 0.0, 1.0, 1.0], "rho_window": [1e-3, 1e3]},
    "verify": {"seed": 0, "samples": 100},
    "front": {"steps": 50, "branch": "+"},
    "fvm": {"t0": 0.0, "cells": 1600, "x_min": -5.0, "x_max": 15.0, "cfl": 0.45, "boundary": "analytic"},
    # middle density time is the reference cusp time 2^(2/3) * 9/4
    "figure": {"density_times": [1.0, 3.571652366928448, 7.0], "front_t_max_factor": 2.0, "rho_range": [0.02, 3.0]},
    "output_dir": "out",
}

_number = {"type": "number"}
_window = {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}

SCHEMA: dict = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "model": {
            "type": "object",
            "properties": {"model": {"type": "string"}, "name": {"type": "string"}, "R": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["model"],
        },
        "process": {
            "type": "object",
            "properties": {
                "process": {"enum": ["adiabatic", "isothermal", "table", "cubic"]},
                "s0": _number,
                "T0": {"type": "number", "exclusiveMinimum": 0},
                "rho_min": {"type": "number", "exclusiveMinimum": 0},
                "rho_max": {"type": "number", "exclusiveMinimum": 0},
                "file": {"type": "string"},
                "c0": _number,
                "c1": _number,
                "numeric": {"type": "boolean"},
            },
            "required": ["process"],
            "additionalProperties": False,
        },
        "solution": {
            "type": "object",
            "properties": {
                "alpha": {"type": "array", "items": _number, "minItems": 4, "maxItems": 4},
                "rho_window": _window,
                "antiderivative": {"enum": ["auto", "closed", "quad"]},
            },
            "required": ["alpha"],
            "additionalProperties": False,
        },
        "verify": {
            "type": "object",
            "properties": {"seed": {"type": "integer"}, "samples": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
        "front": {
            "type": "object",
            "properties": {"steps": {"type": "integer", "minimum": 1}, "branch": {"enum": ["+", "-"]}},
            "additionalProperties": False,
        },
        "fvm": {
            "type": "object",
            "properties": {
                "t0": _number,
                "t_end": _number,
                "cells": {"type": "integer", "minimum": 1},
                "x_min": _number,
                "x_max": _number,
                "cfl": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "boundary": {"enum": ["analytic", "outflow", "periodic"]},
            },
            "additionalProperties": False,
        },
        "figure": {
            "type": "object",
            "properties": {
                "density_times": {"type": "array", "items": _number, "minItems": 1},
                "front_t_max_factor": {"type": "number", "exclusiveMinimum": 1},
                "rho_range": _window,
            },
            "additionalProperties": False,
        },
        "output_dir": {"type": "string"},
    },
}


class ConfigError(EulerFrontsError):
    """Missing, unreadable or schema-violating run configuration."""


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("model", "process"):
            out[k] = _merge(out[k], v)
        else:
            # model/process blocks replace wholesale: keys of one model make no sense for another
            out[k] = copy.deepcopy(v)
    return out


@dataclass(frozen=True)
class RunConfig:
    data: dict
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, raw: dict, base_dir=".") -> "RunConfig":
        try:
            jsonschema.validate(raw, SCHEMA)
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        data = _merge(DEFAULTS, raw)
        lo, hi = data["solution"]["rho_window"]
        if not 0 < lo < hi:
            raise ConfigError(f"solution.rho_window must satisfy 0 < lo < hi, got {[lo, hi]}")
        return cls(data, Path(base_dir))

    @classmethod
    def load(cls, path: Optional[str]) -> "RunConfig":
        if path is None:
            return cls.from_dict({})
        p = Path(path)
        try:
            raw = json.loads(p.read_text())
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(raw, p.parent)

    def resolved_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.resolved_json().encode()).hexdigest()[:16]

    def model(self) -> PotentialModel:
        try:
            return model_from_config(self.data["model"])
        except TypeError as exc:
            raise ConfigError(f"bad model block: {exc}") from None

    def curve(self) -> ProcessCurve:
        block = dict(self.data["process"])
        if "file" in block:
            block["file"] = str((self.base_dir / block["file"]).resolve())
        try:
            return process_from_config(self.model(), block)
        except KeyError as exc:
            raise ConfigError(f"process block is missing {exc}") from None
        except FileNotFoundError as exc:
            raise ConfigError(f"pressure table not found: {exc.filename}") from None

    def family(self) -> SolutionFamily:
        sol = self.data["solution"]
        kw = {"antiderivative": sol["antiderivative"]} if "antiderivative" in sol else {}
        return SolutionFamily.from_alpha(sol["alpha"], self.curve(), **kw)

    @property
    def rho_window(self) -> tuple[float, float]:
        lo, hi = self.data["solution"]["rho_window"]
        return float(lo), float(hi)

    def section(self, name: str) -> dict:
        return self.data[name]
