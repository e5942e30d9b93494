"""Deterministic SVG rendering of scenes: path cells, components by rank,
optional in-/out-circle overlays.

Component cells are merged into horizontal run rectangles to keep files
small.  All coordinates are formatted with fixed precision so identical
inputs produce identical bytes.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .compgeo import ComponentStats
from .raster import ComponentLabeling, RasterScene

_PALETTE = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
            "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"]


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _runs_of_row(cols: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs [start, end] of consecutive column indices."""
    if len(cols) == 0:
        return []
    breaks = np.where(np.diff(cols) > 1)[0]
    starts = np.concatenate([[0], breaks + 1])
    ends = np.concatenate([breaks, [len(cols) - 1]])
    return [(int(cols[s]), int(cols[e])) for s, e in zip(starts, ends)]


class CircleContainmentError(ValueError):
    pass


def render_scene(scene: RasterScene, labeling: ComponentLabeling,
                 stats: Sequence[ComponentStats] = (),
                 draw_circles: bool = False,
                 max_components: int = 256) -> str:
    """Render the scene as an SVG document string.

    With ``draw_circles`` every component's out-circle is geometrically
    re-checked to contain all its cells before being emitted.
    """
    h = scene.cell_size
    ox, oy = scene.origin
    width_w = scene.width * h
    height_w = scene.height * h

    def sx(x: float) -> float:
        return (x - ox) / h

    def sy(y: float) -> float:
        # SVG y axis points down; flip so world y points up
        return scene.height - (y - oy) / h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {scene.width} {scene.height}" '
        f'width="{scene.width}" height="{scene.height}">',
        f'<rect x="0" y="0" width="{scene.width}" height="{scene.height}" '
        'fill="white" stroke="#888" stroke-width="1"/>',
    ]

    ranked = sorted(labeling.component_cells.items(), key=lambda kv: kv[0])[:max_components]
    for rank, (cid, flat) in enumerate(ranked):
        color = _PALETTE[rank % len(_PALETTE)]
        iy, ix = np.divmod(flat, scene.width)
        rows: list[str] = []
        for row in np.unique(iy):
            cols = np.sort(ix[iy == row])
            for c0, c1 in _runs_of_row(cols):
                y_top = scene.height - (int(row) + 1)
                rows.append(f'<rect x="{c0}" y="{y_top}" width="{c1 - c0 + 1}" '
                            f'height="1" fill="{color}" fill-opacity="0.55"/>')
        parts.append(f'<g id="component-{cid}">' + "".join(rows) + "</g>")

    occ = scene.occupied
    rows = []
    for row in range(occ.shape[0]):
        cols = np.where(occ[row])[0]
        for c0, c1 in _runs_of_row(cols):
            y_top = scene.height - (row + 1)
            rows.append(f'<rect x="{c0}" y="{y_top}" width="{c1 - c0 + 1}" height="1" fill="#222"/>')
    parts.append('<g id="path-cells">' + "".join(rows) + "</g>")

    if draw_circles:
        by_id = {s.id: s for s in stats}
        for cid, flat in ranked:
            s = by_id.get(cid)
            if s is None or not math.isfinite(s.out_radius):
                continue
            iy, ix = np.divmod(flat, scene.width)
            centers = scene.cell_centers(ix, iy)
            # corners of every cell must fit inside the drawn out-circle
            d = np.hypot(centers[:, 0] - s.circumcenter[0], centers[:, 1] - s.circumcenter[1])
            if float(d.max()) + h / math.sqrt(2.0) > s.out_radius * (1 + 1e-9) + 1e-12:
                raise CircleContainmentError(
                    f"component {cid}: out-circle does not cover all cells")
            cx, cy = sx(s.circumcenter[0]), sy(s.circumcenter[1])
            parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(s.out_radius / h)}" '
                         'fill="none" stroke="#c33" stroke-width="0.8"/>')
            parts.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(s.in_radius / h)}" '
                         'fill="none" stroke="#36c" stroke-width="0.8" stroke-dasharray="2,2"/>')

    parts.append("</svg>")
    return "\n".join(parts)


def render_path_polyline(scene: RasterScene, xy: np.ndarray, color: str = "#000",
                         width: float = 0.6) -> str:
    """A standalone polyline element in scene coordinates (for composing)."""
    h = scene.cell_size
    ox, oy = scene.origin
    pts = " ".join(f"{_fmt((x - ox) / h)},{_fmt(scene.height - (y - oy) / h)}" for x, y in xy)
    return f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="{width}"/>'
