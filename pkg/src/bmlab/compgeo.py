"""Per-component geometry: areas, in-radii, out-radii.

Estimator conventions (both biases are O(h), h the cell size): the in-radius
is the largest free-cell-center distance to the nearest path cell center; the
out-radius is the smallest enclosing circle of the component's cell centers
inflated by h/sqrt(2) so whole cells are covered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError

from .raster import ComponentLabeling, RasterScene


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")

    def contains(self, pts: np.ndarray, slack: float = 1e-9) -> bool:
        pts = np.atleast_2d(pts)
        d = np.hypot(pts[:, 0] - self.center[0], pts[:, 1] - self.center[1])
        return bool(np.all(d <= self.radius * (1 + slack) + slack))


@dataclass(frozen=True)
class ComponentStats:
    id: int
    area: float
    in_radius: float
    out_radius: float
    circumcenter: tuple[float, float]
    cell_count: int


def distance_transform(scene: RasterScene) -> np.ndarray:
    """Exact Euclidean distance (in cells) from each cell center to the
    nearest occupied cell center; zero on occupied cells."""
    if not bool(scene.occupied.any()):
        raise ValueError("distance transform needs at least one occupied cell")
    return ndimage.distance_transform_edt(~scene.occupied)


def _circle_two(a, b) -> Circle:
    cx, cy = (a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0
    return Circle((cx, cy), math.hypot(a[0] - b[0], a[1] - b[1]) / 2.0)


def _circle_three(a, b, c) -> Circle | None:
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay)
          + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx)
          + (cx * cx + cy * cy) * (bx - ax)) / d
    return Circle((ux, uy), math.hypot(ax - ux, ay - uy))


_EPS = 1e-13


def _in_circle(c: Circle, p) -> bool:
    return math.hypot(p[0] - c.center[0], p[1] - c.center[1]) <= c.radius * (1 + _EPS) + _EPS


def _circle_with_two_boundary(pts, p, q) -> Circle:
    """Smallest circle over ``pts`` with p and q on its boundary."""
    circ = _circle_two(p, q)
    px, py = p
    qx, qy = q
    left: Circle | None = None
    right: Circle | None = None
    for s in pts:
        if _in_circle(circ, s):
            continue
        cross = (qx - px) * (s[1] - py) - (qy - py) * (s[0] - px)
        c3 = _circle_three(p, q, s)
        if c3 is None:
            continue
        cross_c = (qx - px) * (c3.center[1] - py) - (qy - py) * (c3.center[0] - px)
        if cross > 0 and (left is None or cross_c >
                          (qx - px) * (left.center[1] - py) - (qy - py) * (left.center[0] - px)):
            left = c3
        elif cross < 0 and (right is None or cross_c <
                            (qx - px) * (right.center[1] - py) - (qy - py) * (right.center[0] - px)):
            right = c3
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left.radius <= right.radius else right


def _circle_with_one_boundary(pts, p) -> Circle:
    c = Circle(tuple(p), 0.0)
    for j, q in enumerate(pts):
        if not _in_circle(c, q):
            if c.radius == 0.0:
                c = _circle_two(p, q)
            else:
                c = _circle_with_two_boundary(pts[: j + 1], p, q)
    return c


def smallest_enclosing_circle(points) -> Circle:
    """Smallest circle containing all points (randomized incremental,
    expected linear time, result supported by at most 3 boundary points).

    The scan order is a seeded shuffle so results are deterministic; large
    inputs are first reduced to their convex hull.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("smallest_enclosing_circle needs at least one point")
    if len(pts) > 64:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:
            pass  # collinear or degenerate input; use the raw points
    order = np.random.Generator(np.random.Philox(12345)).permutation(len(pts))
    shuffled = [tuple(pts[i]) for i in order]

    c: Circle | None = None
    for i, p in enumerate(shuffled):
        if c is None or not _in_circle(c, p):
            c = _circle_with_one_boundary(shuffled[:i], p)
    return c


def measure_components(
    labeling: ComponentLabeling,
    scene: RasterScene,
    min_cells: int = 1,
    edt: np.ndarray | None = None,
) -> list[ComponentStats]:
    """Measure area, in-radius and out-radius of every bounded component
    with at least ``min_cells`` cells.

    area = cell_count * h^2; in-radius from the distance field; out-radius
    from the smallest enclosing circle of cell centers plus h/sqrt(2).
    """
    h = scene.cell_size
    if edt is None:
        edt = distance_transform(scene)
    flat_edt = edt.ravel()
    out: list[ComponentStats] = []
    for cid, flat in labeling.component_cells.items():
        n = len(flat)
        if n < min_cells:
            continue
        iy, ix = np.divmod(flat, scene.width)
        centers = scene.cell_centers(ix, iy)
        sec = smallest_enclosing_circle(centers)
        out.append(ComponentStats(
            id=cid,
            area=n * h * h,
            in_radius=float(flat_edt[flat].max()) * h,
            out_radius=sec.radius + h / math.sqrt(2.0),
            circumcenter=(float(sec.center[0]), float(sec.center[1])),
            cell_count=n,
        ))
    return out


def component_areas(labeling: ComponentLabeling, scene: RasterScene) -> np.ndarray:
    """Areas of all bounded components; cheap path for area-only statistics."""
    h2 = scene.cell_size ** 2
    return np.array([len(flat) * h2 for flat in labeling.component_cells.values()])


def dump_stats_csv(stats, run_id: str, fp) -> None:
    """CSV: run_id,component_id,area,in_radius,out_radius,cx,cy,cell_count."""
    close = False
    if isinstance(fp, (str, bytes)):
        fp = open(fp, "w", newline="")
        close = True
    try:
        fp.write("run_id,component_id,area,in_radius,out_radius,cx,cy,cell_count\n")
        for s in stats:
            fp.write(f"{run_id},{s.id},{s.area!r},{s.in_radius!r},{s.out_radius!r},"
                     f"{s.circumcenter[0]!r},{s.circumcenter[1]!r},{s.cell_count}\n")
    finally:
        if close:
            fp.close()
