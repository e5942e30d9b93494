"""Occupancy-grid rasterization of paths and complement labeling.

Topology convention (the only one in this package): the path is rasterized
with supercover occupancy (every cell whose closed square touches a segment,
including both side cells at exact diagonal corner crossings) and free space
is labeled with 4-connectivity.  Together these guarantee that no bounded
free component can leak diagonally into the unbounded one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .paths import PlanarPath

FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.uint8)

PATH_LABEL = 0
UNBOUNDED_LABEL = 1


class UnrefinedPathError(ValueError):
    """Raised when a path's increments exceed half the cell size."""

    def __init__(self, index: int, length: float, cell_size: float):
        self.index = index
        super().__init__(
            f"segment {index} has length {length:.6g} > cell_size/2 = "
            f"{cell_size / 2:.6g}; refine the path first"
        )


@dataclass(frozen=True)
class RasterScene:
    origin: tuple[float, float]   # world coordinates of cell (0,0)'s corner
    cell_size: float
    width: int
    height: int
    occupied: np.ndarray          # bool (height, width), [iy, ix]

    def cell_centers(self, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
        h = self.cell_size
        return np.column_stack([
            self.origin[0] + (np.asarray(ix) + 0.5) * h,
            self.origin[1] + (np.asarray(iy) + 0.5) * h,
        ])


@dataclass(frozen=True)
class ComponentLabeling:
    """Free-space partition: 0 path, 1 unbounded, >=2 bounded components.

    ``component_cells`` maps each bounded id to its flat cell indices
    (row-major, iy * width + ix), ordered by decreasing cell count with ties
    broken by the smallest flat index.  Single-cell components are kept and
    flagged in ``tiny_ids``.
    """

    labels: np.ndarray                      # int32 (height, width)
    component_cells: dict[int, np.ndarray]  # id -> flat indices
    tiny_ids: frozenset[int]

    @property
    def n_bounded(self) -> int:
        return len(self.component_cells)


def _point_cells(u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cells whose closed square contains the point (u, v) in cell units.

    Returns (ix, iy) arrays of shape (n, 4); duplicates for interior points.
    A point exactly on a grid line belongs to both adjacent cells.
    """
    fx = np.floor(u)
    fy = np.floor(v)
    on_x = (u == fx)
    on_y = (v == fy)
    ix = np.stack([fx, fx - on_x, fx, fx - on_x], axis=1)
    iy = np.stack([fy, fy, fy - on_y, fy - on_y], axis=1)
    return ix, iy


def rasterize(path: PlanarPath, cell_size: float, padding_cells: int = 8) -> RasterScene:
    """Supercover-rasterize a refined path onto an occupancy grid.

    Requires every increment to have length <= cell_size/2, so each segment
    crosses at most one vertical and one horizontal grid line; the occupied
    set is then exactly the union of endpoint cells plus the corner-crossing
    cells (both off-diagonal neighbors when the crossing hits a corner
    exactly).
    """
    if cell_size <= 0:
        raise ValueError("cell_size must be positive")
    if padding_cells < 2:
        raise ValueError("padding must be at least 2 cells")
    lens = path.increment_lengths()
    if len(lens) and float(lens.max()) > cell_size / 2:
        idx = int(np.argmax(lens))
        raise UnrefinedPathError(idx, float(lens[idx]), cell_size)

    h = float(cell_size)
    xy = path.xy
    lo = xy.min(axis=0)
    hi = xy.max(axis=0)
    origin = (lo[0] - padding_cells * h, lo[1] - padding_cells * h)
    width = int(np.ceil((hi[0] - origin[0]) / h)) + padding_cells + 1
    height = int(np.ceil((hi[1] - origin[1]) / h)) + padding_cells + 1
    occ = np.zeros((height, width), dtype=bool)

    # all coordinates in cell units
    u = (xy[:, 0] - origin[0]) / h
    v = (xy[:, 1] - origin[1]) / h

    ix, iy = _point_cells(u, v)
    occ[iy.astype(np.int64).ravel(), ix.astype(np.int64).ravel()] = True

    if len(u) < 2:
        return RasterScene((float(origin[0]), float(origin[1])), h, width, height, occ)

    chunk = 1 << 20
    for a in range(0, len(u) - 1, chunk):
        b = min(a + chunk, len(u) - 1)
        u0, v0, u1, v1 = u[a:b], v[a:b], u[a + 1:b + 1], v[a + 1:b + 1]
        c0x, c1x = np.floor(u0), np.floor(u1)
        c0y, c1y = np.floor(v0), np.floor(v1)
        cross_x = c0x != c1x
        cross_y = c0y != c1y
        both = cross_x & cross_y
        if not bool(np.any(both)):
            continue
        # crossing parameters of the single interior grid line in each axis
        gx = np.maximum(c0x, c1x)[both]
        gy = np.maximum(c0y, c1y)[both]
        du = (u1 - u0)[both]
        dv = (v1 - v0)[both]
        sx = (gx - u0[both]) / du
        sy = (gy - v0[both]) / dv
        bx0, bx1 = c0x[both], c1x[both]
        by0, by1 = c0y[both], c1y[both]
        # diagonal traversal passes through (far x, near y) if x-line crossed
        # first, (near x, far y) if y-line first, both cells on an exact corner
        ex_ix = np.where(sx <= sy, bx1, bx0)
        ex_iy = np.where(sx <= sy, by0, by1)
        occ[ex_iy.astype(np.int64), ex_ix.astype(np.int64)] = True
        ex2_ix = np.where(sx >= sy, bx0, bx1)
        ex2_iy = np.where(sx >= sy, by1, by0)
        occ[ex2_iy.astype(np.int64), ex2_ix.astype(np.int64)] = True

    return RasterScene((float(origin[0]), float(origin[1])), h, width, height, occ)


def label_components(scene: RasterScene, tiny_threshold: int = 1) -> ComponentLabeling:
    """Label complement components: 4-connected free space, border-seeded
    unbounded component, bounded components in decreasing cell-count order
    (ties by smallest flat cell index)."""
    free = ~scene.occupied
    raw, n = ndimage.label(free, structure=FOUR_CONN)
    border = np.unique(np.concatenate([
        raw[0, :], raw[-1, :], raw[:, 0], raw[:, -1]
    ]))
    border = set(int(b) for b in border if b != 0)
    if len(border) != 1:
        # padding >= 2 guarantees a connected free ring; anything else means
        # the scene was constructed outside rasterize()
        raise ValueError(f"expected exactly one border component, found {len(border)}")
    unbounded_raw = border.pop()

    labels = np.zeros(raw.shape, dtype=np.int32)
    flat_raw = raw.ravel()
    counts = np.bincount(flat_raw, minlength=n + 1)
    order = np.argsort(flat_raw, kind="stable")
    boundaries = np.cumsum(counts)

    bounded = [lab for lab in range(1, n + 1) if lab != unbounded_raw]
    # first (smallest) flat index per raw label, for deterministic tie-breaks
    first_idx = {lab: int(order[boundaries[lab - 1]]) for lab in bounded}
    bounded.sort(key=lambda lab: (-int(counts[lab]), first_idx[lab]))

    labels.ravel()[flat_raw == unbounded_raw] = UNBOUNDED_LABEL
    cells: dict[int, np.ndarray] = {}
    tiny = []
    for new_id, lab in enumerate(bounded, start=2):
        idx = order[boundaries[lab - 1]:boundaries[lab]].astype(np.int64)
        labels.ravel()[idx] = new_id
        cells[new_id] = np.sort(idx)
        if counts[lab] <= tiny_threshold:
            tiny.append(new_id)
    return ComponentLabeling(labels=labels, component_cells=cells, tiny_ids=frozenset(tiny))


def component_bboxes(labeling: ComponentLabeling, scene: RasterScene) -> dict[int, tuple[int, int, int, int]]:
    """Per-component cell-index bounding boxes (min_x, min_y, max_x, max_y)."""
    out = {}
    for cid, flat in labeling.component_cells.items():
        iy, ix = np.divmod(flat, scene.width)
        out[cid] = (int(ix.min()), int(iy.min()), int(ix.max()), int(iy.max()))
    return out


def dump_components_csv(labeling: ComponentLabeling, scene: RasterScene, run_id: str, fp) -> None:
    """CSV dump: run_id,component_id,cell_count,min_x,min_y,max_x,max_y."""
    close = False
    if isinstance(fp, (str, bytes)):
        fp = open(fp, "w", newline="")
        close = True
    try:
        fp.write("run_id,component_id,cell_count,min_x,min_y,max_x,max_y\n")
        boxes = component_bboxes(labeling, scene)
        for cid in sorted(labeling.component_cells):
            n = len(labeling.component_cells[cid])
            bx = boxes[cid]
            fp.write(f"{run_id},{cid},{n},{bx[0]},{bx[1]},{bx[2]},{bx[3]}\n")
    finally:
        if close:
            fp.close()
