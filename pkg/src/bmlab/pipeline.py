"""End-to-end runs: sample -> refine -> rasterize -> label -> measure -> laws.

Each run writes one directory: ``manifest.json`` (config echo, hash, and
summary), ``components.csv`` (geometric stats), ``raster_components.csv``
(cell bounding boxes), one ``profile_<name>.csv`` per law profile, and
optionally ``scene.svg``.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import shutil
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import laws, rng
from .compgeo import ComponentStats, component_areas, distance_transform, dump_stats_csv, measure_components
from .config import ExperimentConfig
from .paths import ExponentialRate1, FixedHorizon, PlanarPath, refine_bridge, sample_path
from .raster import ComponentLabeling, RasterScene, dump_components_csv, label_components, rasterize


@dataclass
class RunResult:
    run_id: str
    config: ExperimentConfig
    cell_size: float
    scene: Optional[RasterScene]
    labeling: Optional[ComponentLabeling]
    stats: list[ComponentStats]
    filtered: list[ComponentStats]
    legall: Optional[laws.LawProfile]
    sorted_area: Optional[laws.LawProfile]
    weighted: dict[str, float]
    dyadic: dict[int, float]
    tau_realized: Optional[float] = None


def kill_mode_of(config: ExperimentConfig):
    if config.kill_mode == "fixed":
        return FixedHorizon(config.horizon)
    if config.kill_mode == "exponential":
        return ExponentialRate1()
    raise ValueError(f"unknown kill mode {config.kill_mode!r}")


def cell_size_for(path: PlanarPath, config: ExperimentConfig) -> float:
    if config.cell_size is not None:
        return config.cell_size
    bbox = path.xy.max(axis=0) - path.xy.min(axis=0)
    interior = config.resolution - 2 * config.padding_cells
    if interior <= 0:
        raise ValueError("resolution too small for the padding")
    return float(max(bbox.max(), 1e-12)) / interior


def run_pipeline(config: ExperimentConfig, compute_radii: bool = True,
                 keep_scene: bool = True) -> RunResult:
    """Execute one seeded run and aggregate the law statistics."""
    config.validate()
    mode = kill_mode_of(config)
    path = sample_path(config.seed, mode, config.base_step)
    tau = path.kill_mode.tau_realized if isinstance(path.kill_mode, ExponentialRate1) else None
    h = cell_size_for(path, config)
    bound = config.refine_bound if config.refine_bound is not None else h / 2.0
    if bound > h / 2.0:
        bound = h / 2.0
    path = refine_bridge(path, bound)
    scene = rasterize(path, h, config.padding_cells)
    labeling = label_components(scene)
    run_id = f"seed{config.seed}"

    if compute_radii:
        stats = measure_components(labeling, scene, min_cells=config.min_cells)
    else:
        h2 = h * h
        stats = [ComponentStats(id=cid, area=len(flat) * h2, in_radius=float("nan"),
                                out_radius=float("nan"), circumcenter=(float("nan"),) * 2,
                                cell_count=len(flat))
                 for cid, flat in labeling.component_cells.items()
                 if len(flat) >= config.min_cells]
    filtered = laws.filter_for_laws(stats, h)

    legall = None
    if filtered:
        areas = np.sort(laws.areas_of(filtered))[::-1]
        eps_lo = laws.MIN_AREA_CELLS_DEFAULT * h * h
        eps_hi = float(areas[min(49, len(areas) - 1)])
        eps_hi = min(eps_hi, math.exp(-2.0) * 0.99)
        if eps_hi > eps_lo:
            grid = np.geomspace(eps_lo, eps_hi, config.eps_points)
            legall = laws.legall_profile(filtered, grid, h, (run_id,))
    sorted_area = laws.sorted_area_law(filtered, h, (run_id,)) if filtered else None

    weighted = {}
    if compute_radii:
        for theta in config.theta_list:
            weighted[f"S_R(theta={theta:g})"] = laws.weighted_sum(filtered, theta, "out", "shifted")
            weighted[f"S_r(theta={theta:g})"] = laws.weighted_sum(filtered, theta, "in", "shifted")
    dyadic = laws.dyadic_occupation_from_areas(component_areas(labeling, scene))

    return RunResult(run_id=run_id, config=config, cell_size=h,
                     scene=scene if keep_scene else None,
                     labeling=labeling if keep_scene else None,
                     stats=stats, filtered=filtered, legall=legall,
                     sorted_area=sorted_area, weighted=weighted, dyadic=dyadic,
                     tau_realized=tau)


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(config.to_json().encode()).hexdigest()[:16]


def write_run_outputs(result: RunResult, out_dir: str, render_svg: bool = False) -> dict:
    """Write the run directory; returns the manifest dict.  Partial outputs
    are removed if anything fails."""
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []
    try:
        comp_csv = os.path.join(out_dir, "components.csv")
        dump_stats_csv(result.stats, result.run_id, comp_csv)
        written.append(comp_csv)

        raster_csv = os.path.join(out_dir, "raster_components.csv")
        if result.labeling is not None and result.scene is not None:
            dump_components_csv(result.labeling, result.scene, result.run_id, raster_csv)
            written.append(raster_csv)

        profiles = []
        for name, prof in (("legall", result.legall), ("sorted_area", result.sorted_area)):
            if prof is None:
                continue
            p = os.path.join(out_dir, f"profile_{name}.csv")
            laws.profile_csv(prof, p)
            written.append(p)
            profiles.append(f"profile_{name}.csv")

        if render_svg and result.scene is not None and result.labeling is not None:
            from .render import render_scene

            svg = render_scene(result.scene, result.labeling, result.stats)
            svg_path = os.path.join(out_dir, "scene.svg")
            with open(svg_path, "w") as fp:
                fp.write(svg)
            written.append(svg_path)

        manifest = {
            "run_id": result.run_id,
            "config": json.loads(result.config.to_json()),
            "config_hash": config_hash(result.config),
            "cell_size": result.cell_size,
            "tau_realized": result.tau_realized,
            "n_components": len(result.stats),
            "n_filtered": len(result.filtered),
            "weighted_sums": result.weighted,
            "dyadic_occupation": {str(k): v for k, v in sorted(result.dyadic.items())},
            "files": ["components.csv"] + (["raster_components.csv"] if result.labeling is not None else []) + profiles
            + (["scene.svg"] if render_svg and result.scene is not None else []),
        }
        man_path = os.path.join(out_dir, "manifest.json")
        with open(man_path, "w") as fp:
            json.dump(manifest, fp, indent=2, sort_keys=True)
        written.append(man_path)
        return manifest
    except BaseException:
        for f in written:
            try:
                os.remove(f)
            except OSError:
                pass
        raise
