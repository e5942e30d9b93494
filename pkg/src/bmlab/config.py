"""Experiment configuration: plain ``key = value`` files with JSON export.

CLI flags override file values.  The resolution cap keeps label and distance
grids within a documented memory envelope (about 1 GB at the cap).
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields

RESOLUTION_CAP = 8192
OUTPUT_ROOT_ENV = "BMLAB_OUTPUT_ROOT"


@dataclass
class ExperimentConfig:
    seed: int = 1
    kill_mode: str = "fixed"            # "fixed" | "exponential"
    horizon: float = 1.0
    base_step: float = 1e-4
    refine_bound: float | None = None   # default: cell_size / 2
    resolution: int = 512               # grid cells on the longest side
    cell_size: float | None = None      # overrides resolution when set
    padding_cells: int = 8
    min_cells: int = 4
    theta_list: tuple[float, ...] = (0.5, 1.0)
    eps_points: int = 24
    out_dir: str = ""
    experiment: str = "simulate"

    def validate(self) -> None:
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.kill_mode not in ("fixed", "exponential"):
            raise ValueError("kill_mode must be 'fixed' or 'exponential'")
        for name in ("horizon", "base_step"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.refine_bound is not None and self.refine_bound <= 0:
            raise ValueError("refine_bound must be positive")
        if self.cell_size is not None and self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if not (16 <= self.resolution <= RESOLUTION_CAP):
            raise ValueError(f"resolution must lie in [16, {RESOLUTION_CAP}]")
        if self.padding_cells < 2:
            raise ValueError("padding must be at least 2 cells")
        if self.min_cells < 1:
            raise ValueError("min_cells must be at least 1")
        if self.eps_points < 2:
            raise ValueError("eps_points must be at least 2")

    def to_json(self) -> str:
        d = asdict(self)
        d["theta_list"] = list(self.theta_list)
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "theta_list" in d and d["theta_list"] is not None:
            d = dict(d, theta_list=tuple(float(x) for x in d["theta_list"]))
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


_BOOLNONE = {"none": None, "null": None, "": None}


def _coerce(name: str, raw: str):
    raw = raw.strip()
    if raw.lower() in _BOOLNONE:
        return None
    if name in ("seed", "resolution", "padding_cells", "min_cells", "eps_points"):
        return int(raw)
    if name in ("horizon", "base_step", "refine_bound", "cell_size"):
        return float(raw)
    if name == "theta_list":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    return raw


def parse_config_file(path: str) -> ExperimentConfig:
    """Parse a ``key = value`` config file (# comments allowed)."""
    values: dict = {}
    with open(path) as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = line.split("=", 1)
            key = key.strip()
            values[key] = _coerce(key, raw)
    return ExperimentConfig.from_dict(values)


def default_output_root() -> str:
    return os.environ.get(OUTPUT_ROOT_ENV, os.path.join(os.getcwd(), "runs"))
