"""Planar shape carriers and exact intersection / distance primitives.

Shapes are closed point sets.  Region shapes (``Disc``, ``Annulus``,
``HalfPlane``, ``PolarRect``) support membership and first-entry queries;
curve shapes (``Polyline``) support proximity and exact segment-segment
crossing.  All arcs in this package are centered at the origin, which keeps
the arc predicates simple.

Conventions: points are ``(x, y)`` float pairs, vectorized forms take arrays
of shape ``(n, 2)``.  Angles are radians; angular intervals are taken mod 2pi
with width in ``(0, 2pi)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Shape variants


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("disc radius must be positive")


@dataclass(frozen=True)
class Annulus:
    center: tuple[float, float]
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0 < self.r_inner < self.r_outer):
            raise ValueError("annulus needs 0 < r_inner < r_outer")


@dataclass(frozen=True)
class HalfPlane:
    """Closed region {z : normal . z >= offset}."""

    normal: tuple[float, float]
    offset: float

    def __post_init__(self):
        if math.hypot(*self.normal) == 0:
            raise ValueError("half-plane normal must be nonzero")


@dataclass(frozen=True)
class Polyline:
    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.vertices) < 2:
            raise ValueError("polyline needs at least 2 vertices")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)


@dataclass(frozen=True)
class PolarRect:
    """Origin-centered polar rectangle {r' e^(i th') : r<=r'<r+dr, th<=th'<th+dth}.

    Two line sides (radial segments at ``theta`` and ``theta + dtheta``) and
    two arc sides (radii ``r`` and ``r + dr``).  Set queries use the closure.
    """

    r: float
    theta: float
    dr: float
    dtheta: float

    def __post_init__(self):
        if self.r <= 0 or self.dr <= 0:
            raise ValueError("polar rectangle needs r, dr > 0")
        if not (0 < self.dtheta < TWO_PI):
            raise ValueError("polar rectangle needs dtheta in (0, 2pi)")

    @property
    def r_outer(self) -> float:
        return self.r + self.dr

    @property
    def theta_end(self) -> float:
        return self.theta + self.dtheta

    def line_sides(self) -> list[tuple[np.ndarray, np.ndarray]]:
        out = []
        for ang in (self.theta, self.theta_end):
            d = np.array([math.cos(ang), math.sin(ang)])
            out.append((self.r * d, self.r_outer * d))
        return out

    def arc_sides(self) -> list[tuple[float, float, float]]:
        """(radius, ang_start, ang_width) for the two arc sides."""
        return [(self.r, self.theta, self.dtheta), (self.r_outer, self.theta, self.dtheta)]

    def corners(self) -> np.ndarray:
        angs = [self.theta, self.theta_end]
        pts = [(rr * math.cos(a), rr * math.sin(a)) for rr in (self.r, self.r_outer) for a in angs]
        return np.asarray(pts)


Shape = Disc | Annulus | HalfPlane | Polyline | PolarRect


# ---------------------------------------------------------------------------
# Angle helpers


def ang_in_interval(ang, start, width):
    """Whether angle(s) lie in [start, start+width] mod 2pi (closed)."""
    rel = np.mod(np.asarray(ang) - start, TWO_PI)
    # Points exactly at start+width wrap to width; allow tiny slack for the
    # mod roundoff at the closed end.
    return (rel <= width) | (rel >= TWO_PI - 1e-15)


def ang_dist_to_interval(ang, start, width):
    """Angular distance (radians, >=0) from angle(s) to [start, start+width]."""
    rel = np.mod(np.asarray(ang) - start, TWO_PI)
    inside = rel <= width
    gap = np.minimum(rel - width, TWO_PI - rel)
    return np.where(inside, 0.0, gap)


# ---------------------------------------------------------------------------
# Point distances (vectorized over points)


def point_segment_distance(pts: np.ndarray, a, b) -> np.ndarray:
    """Distance from each point in ``pts`` (n,2) to segment [a, b]."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    den = float(d @ d)
    if den == 0.0:
        return np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    t = np.clip(((pts - a) @ d) / den, 0.0, 1.0)
    proj = a + t[:, None] * d
    return np.hypot(pts[:, 0] - proj[:, 0], pts[:, 1] - proj[:, 1])


def point_polyline_distance(pts: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Distance from points (n,2) to a polyline given by vertices (m,2)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    verts = np.asarray(verts, dtype=float)
    best = np.full(len(pts), np.inf)
    for i in range(len(verts) - 1):
        np.minimum(best, point_segment_distance(pts, verts[i], verts[i + 1]), out=best)
    return best


def point_arc_distance(pts: np.ndarray, radius: float, ang0: float, width: float) -> np.ndarray:
    """Distance from points to an origin-centered arc of given radius."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    rr = np.hypot(pts[:, 0], pts[:, 1])
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    on = ang_in_interval(ang, ang0, width)
    d_radial = np.abs(rr - radius)
    e0 = np.array([radius * math.cos(ang0), radius * math.sin(ang0)])
    e1 = np.array([radius * math.cos(ang0 + width), radius * math.sin(ang0 + width)])
    d_ends = np.minimum(np.hypot(pts[:, 0] - e0[0], pts[:, 1] - e0[1]),
                        np.hypot(pts[:, 0] - e1[0], pts[:, 1] - e1[1]))
    return np.where(on, d_radial, d_ends)


def point_polar_rect_distance(pts: np.ndarray, q: PolarRect) -> np.ndarray:
    """Distance from points to the closed polar rectangle ``q`` (0 inside)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    rr = np.hypot(pts[:, 0], pts[:, 1])
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    in_ang = ang_in_interval(ang, q.theta, q.dtheta)
    in_rad = (rr >= q.r) & (rr <= q.r_outer)
    inside = in_ang & in_rad
    # angular sector: nearest point keeps the angle, clamps the radius
    d_sector = np.maximum(q.r - rr, 0.0) + np.maximum(rr - q.r_outer, 0.0)
    # otherwise nearest point is on one of the line sides
    best = np.where(in_ang, d_sector, np.inf)
    for a, b in q.line_sides():
        np.minimum(best, point_segment_distance(pts, a, b), out=best)
    return np.where(inside, 0.0, best)


# ---------------------------------------------------------------------------
# Segment intersections


def seg_circle_params(p0, p1, center, radius) -> tuple[float, float] | None:
    """Real roots s of |p0 + s (p1-p0) - center| = radius, ascending, or None."""
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    f = p0 - np.asarray(center, dtype=float)
    a = float(d @ d)
    b = 2.0 * float(f @ d)
    c = float(f @ f) - radius * radius
    if a == 0.0:
        return None
    disc = b * b - 4 * a * c
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    # numerically stable pair of roots
    qq = -0.5 * (b + math.copysign(sq, b)) if b != 0 else 0.5 * sq
    if b == 0:
        s1, s2 = -sq / (2 * a), sq / (2 * a)
    else:
        s1, s2 = qq / a, (c / qq if qq != 0 else qq / a)
    return (s1, s2) if s1 <= s2 else (s2, s1)


def seg_circle_first_cross(p0, p1, center, radius) -> Optional[float]:
    """Smallest s in [0,1] with the segment point on the circle, else None."""
    roots = seg_circle_params(p0, p1, center, radius)
    if roots is None:
        return None
    for s in roots:
        if -1e-12 <= s <= 1.0 + 1e-12:
            return min(max(s, 0.0), 1.0)
    return None


def seg_seg_intersection(p0, p1, q0, q1) -> Optional[float]:
    """Parameter s on [p0,p1] of the first intersection with [q0,q1], or None.

    Handles collinear overlap by returning the smallest overlapping s.
    """
    p0 = np.asarray(p0, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    r = np.asarray(p1, dtype=float) - p0
    s = np.asarray(q1, dtype=float) - q0
    denom = r[0] * s[1] - r[1] * s[0]
    qp = q0 - p0
    num_t = qp[0] * s[1] - qp[1] * s[0]
    num_u = qp[0] * r[1] - qp[1] * r[0]
    if denom == 0.0:
        if num_t != 0.0 or num_u != 0.0:
            return None  # parallel, disjoint
        rr = float(r @ r)
        if rr == 0.0:
            return 0.0 if point_segment_distance(p0[None, :], q0, q1)[0] == 0.0 else None
        t0 = float((q0 - p0) @ r) / rr
        t1 = float((np.asarray(q1, dtype=float) - p0) @ r) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        if hi < 0.0 or lo > 1.0:
            return None
        return max(lo, 0.0)
    t = num_t / denom
    u = num_u / denom
    if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
        return min(max(t, 0.0), 1.0)
    return None


def seg_arc_first_cross(p0, p1, radius, ang0, width) -> Optional[float]:
    """First s in [0,1] where the segment meets an origin-centered arc."""
    roots = seg_circle_params(p0, p1, (0.0, 0.0), radius)
    if roots is None:
        return None
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    best = None
    for s in roots:
        if not (-1e-12 <= s <= 1 + 1e-12):
            continue
        pt = p0 + min(max(s, 0.0), 1.0) * d
        if ang_in_interval(math.atan2(pt[1], pt[0]), ang0, width):
            best = min(max(s, 0.0), 1.0) if best is None else min(best, min(max(s, 0.0), 1.0))
    return best


# ---------------------------------------------------------------------------
# Vectorized crossing primitives (one query segment per row)


def seg_seg_param_vec(p0: np.ndarray, p1: np.ndarray, a, b) -> np.ndarray:
    """First parameter s on each row segment [p0_i, p1_i] meeting segment
    [a, b]; NaN where there is no intersection.  Collinear overlaps are not
    resolved here (measure zero for random walkers)."""
    p0 = np.asarray(p0, dtype=float)
    r = np.asarray(p1, dtype=float) - p0
    a = np.asarray(a, dtype=float)
    s = np.asarray(b, dtype=float) - a
    qp = a - p0
    denom = r[:, 0] * s[1] - r[:, 1] * s[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[:, 0] * s[1] - qp[:, 1] * s[0]) / denom
        u = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / denom
    ok = (denom != 0) & (t >= -1e-12) & (t <= 1 + 1e-12) & (u >= -1e-12) & (u <= 1 + 1e-12)
    return np.where(ok, np.clip(t, 0.0, 1.0), np.nan)


def seg_polyline_first_vec(p0: np.ndarray, p1: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """First parameter s on each row segment meeting any polyline segment;
    NaN where none.  Fully broadcast over (rows x polyline segments)."""
    p0 = np.asarray(p0, dtype=float)
    r = np.asarray(p1, dtype=float) - p0
    verts = np.asarray(verts, dtype=float)
    a = verts[:-1]
    s = verts[1:] - a
    denom = r[:, None, 0] * s[None, :, 1] - r[:, None, 1] * s[None, :, 0]
    qp = a[None, :, :] - p0[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[..., 0] * s[None, :, 1] - qp[..., 1] * s[None, :, 0]) / denom
        u = (qp[..., 0] * r[:, None, 1] - qp[..., 1] * r[:, None, 0]) / denom
    ok = (denom != 0) & (t >= -1e-12) & (t <= 1 + 1e-12) & (u >= -1e-12) & (u <= 1 + 1e-12)
    t = np.where(ok, np.clip(t, 0.0, 1.0), np.nan)
    if t.shape[1] == 0:
        return np.full(len(p0), np.nan)
    with np.errstate(invalid="ignore"):
        out = np.nanmin(t, axis=1)
    return out


def seg_circle_first_vec(p0: np.ndarray, p1: np.ndarray, radius: float,
                         ang0: float | None = None, width: float | None = None,
                         center=(0.0, 0.0)) -> np.ndarray:
    """First s in [0,1] where each row segment meets a circle (optionally
    restricted to the arc [ang0, ang0+width]); NaN where it does not."""
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    f = p0 - np.asarray(center, dtype=float)
    a = np.einsum("ij,ij->i", d, d)
    bq = 2.0 * np.einsum("ij,ij->i", f, d)
    c = np.einsum("ij,ij->i", f, f) - radius * radius
    disc = bq * bq - 4 * a * c
    with np.errstate(invalid="ignore", divide="ignore"):
        sq = np.sqrt(disc)
        s1 = (-bq - sq) / (2 * a)
        s2 = (-bq + sq) / (2 * a)
    out = np.full(len(p0), np.nan)
    for s in (s1, s2):
        valid = (disc >= 0) & (a > 0) & (s >= -1e-12) & (s <= 1 + 1e-12)
        if ang0 is not None:
            pt = p0 + np.clip(s, 0, 1)[:, None] * d
            valid &= ang_in_interval(np.arctan2(pt[:, 1] - center[1], pt[:, 0] - center[0]),
                                     ang0, width)
        out = np.where(valid & ~(out <= s), np.clip(s, 0.0, 1.0), out)
    return out


# ---------------------------------------------------------------------------
# Segment-to-set distances (used for exact touching / niceness checks)


def seg_seg_distance(a0, a1, b0, b1) -> float:
    if seg_seg_intersection(a0, a1, b0, b1) is not None:
        return 0.0
    cands = [
        point_segment_distance(np.asarray(a0, dtype=float)[None, :], b0, b1)[0],
        point_segment_distance(np.asarray(a1, dtype=float)[None, :], b0, b1)[0],
        point_segment_distance(np.asarray(b0, dtype=float)[None, :], a0, a1)[0],
        point_segment_distance(np.asarray(b1, dtype=float)[None, :], a0, a1)[0],
    ]
    return float(min(cands))


def seg_arc_distance(a0, a1, radius, ang0, width) -> float:
    """Exact distance between a segment and an origin-centered arc."""
    if seg_arc_first_cross(a0, a1, radius, ang0, width) is not None:
        return 0.0
    a0 = np.asarray(a0, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    cands = [
        float(point_arc_distance(a0[None, :], radius, ang0, width)[0]),
        float(point_arc_distance(a1[None, :], radius, ang0, width)[0]),
    ]
    for ang in (ang0, ang0 + width):
        e = np.array([radius * math.cos(ang), radius * math.sin(ang)])
        cands.append(float(point_segment_distance(e[None, :], a0, a1)[0]))
    # interior-interior critical pair: common normal passes through the origin
    d = a1 - a0
    den = float(d @ d)
    if den > 0:
        t = float(-(a0 @ d)) / den
        if 0.0 < t < 1.0:
            foot = a0 + t * d
            r_f = math.hypot(foot[0], foot[1])
            if r_f > 0 and ang_in_interval(math.atan2(foot[1], foot[0]), ang0, width):
                cands.append(abs(r_f - radius))
    return min(cands)


def arc_arc_distance(r1, a1, w1, r2, a2, w2) -> float:
    """Distance between two origin-centered arcs."""
    rel = np.mod(a2 - a1, TWO_PI)
    overlap = rel <= w1 or rel + w2 >= TWO_PI or np.mod(a1 - a2, TWO_PI) <= w2
    if overlap:
        return abs(r1 - r2)
    cands = []
    for ang in (a1, a1 + w1):
        e = np.array([[r1 * math.cos(ang), r1 * math.sin(ang)]])
        cands.append(float(point_arc_distance(e, r2, a2, w2)[0]))
    for ang in (a2, a2 + w2):
        e = np.array([[r2 * math.cos(ang), r2 * math.sin(ang)]])
        cands.append(float(point_arc_distance(e, r1, a1, w1)[0]))
    return min(cands)


def polar_rect_distance(qa: PolarRect, qb: PolarRect) -> float:
    """Exact distance between two closed polar rectangles."""
    corners = qb.corners()
    if bool(np.any(point_polar_rect_distance(corners, qa) == 0.0)):
        return 0.0
    if bool(np.any(point_polar_rect_distance(qa.corners(), qb) == 0.0)):
        return 0.0
    best = math.inf
    a_lines, b_lines = qa.line_sides(), qb.line_sides()
    a_arcs, b_arcs = qa.arc_sides(), qb.arc_sides()
    for s0, s1 in a_lines:
        for t0, t1 in b_lines:
            best = min(best, seg_seg_distance(s0, s1, t0, t1))
        for rad, ang, w in b_arcs:
            best = min(best, seg_arc_distance(s0, s1, rad, ang, w))
    for rad, ang, w in a_arcs:
        for t0, t1 in b_lines:
            best = min(best, seg_arc_distance(t0, t1, rad, ang, w))
        for rad2, ang2, w2 in b_arcs:
            best = min(best, arc_arc_distance(rad, ang, w, rad2, ang2, w2))
    return best


def polyline_polar_rect_distance(verts: np.ndarray, q: PolarRect) -> float:
    """Exact distance between a polyline and a closed polar rectangle."""
    verts = np.asarray(verts, dtype=float)
    if bool(np.any(point_polar_rect_distance(verts, q) == 0.0)):
        return 0.0
    best = math.inf
    for i in range(len(verts) - 1):
        a0, a1 = verts[i], verts[i + 1]
        if segment_enters_polar_rect(a0, a1, q) is not None:
            return 0.0
        for s0, s1 in q.line_sides():
            best = min(best, seg_seg_distance(a0, a1, s0, s1))
        for rad, ang, w in q.arc_sides():
            best = min(best, seg_arc_distance(a0, a1, rad, ang, w))
    return best


# ---------------------------------------------------------------------------
# Region membership and first entry


def contains(shape: Shape, pt) -> bool:
    """Closed-set membership for region shapes; curve hit for polylines."""
    x, y = float(pt[0]), float(pt[1])
    if isinstance(shape, Disc):
        return math.hypot(x - shape.center[0], y - shape.center[1]) <= shape.radius
    if isinstance(shape, Annulus):
        d = math.hypot(x - shape.center[0], y - shape.center[1])
        return shape.r_inner <= d <= shape.r_outer
    if isinstance(shape, HalfPlane):
        return shape.normal[0] * x + shape.normal[1] * y >= shape.offset
    if isinstance(shape, PolarRect):
        return bool(point_polar_rect_distance(np.array([[x, y]]), shape)[0] == 0.0)
    if isinstance(shape, Polyline):
        return bool(point_polyline_distance(np.array([[x, y]]), shape.as_array())[0] == 0.0)
    raise TypeError(f"unsupported shape {type(shape)!r}")


def segment_enters_polar_rect(p0, p1, q: PolarRect) -> Optional[float]:
    """First s where segment [p0,p1] meets the closed rectangle, else None."""
    if bool(point_polar_rect_distance(np.asarray(p0, dtype=float)[None, :], q)[0] == 0.0):
        return 0.0
    best = None
    for a, b in q.line_sides():
        s = seg_seg_intersection(p0, p1, a, b)
        if s is not None:
            best = s if best is None else min(best, s)
    for rad, ang, w in q.arc_sides():
        s = seg_arc_first_cross(p0, p1, rad, ang, w)
        if s is not None:
            best = s if best is None else min(best, s)
    return best


def segment_entry(shape: Shape, p0, p1, tol: float = 0.0) -> Optional[float]:
    """First parameter s in [0,1] at which the segment meets the shape.

    Region shapes use exact boundary crossings; a segment starting inside
    returns 0.  Polylines use exact segment-segment intersection, plus an
    optional proximity tolerance ``tol`` for near misses of a discrete path.
    """
    if isinstance(shape, (Disc, Annulus, HalfPlane, PolarRect)) and contains(shape, p0):
        return 0.0
    if isinstance(shape, Disc):
        return seg_circle_first_cross(p0, p1, shape.center, shape.radius)
    if isinstance(shape, Annulus):
        d0 = math.hypot(p0[0] - shape.center[0], p0[1] - shape.center[1])
        radius = shape.r_outer if d0 > shape.r_outer else shape.r_inner
        return seg_circle_first_cross(p0, p1, shape.center, radius)
    if isinstance(shape, HalfPlane):
        n, b = shape.normal, shape.offset
        v0 = n[0] * p0[0] + n[1] * p0[1] - b
        v1 = n[0] * p1[0] + n[1] * p1[1] - b
        if v1 < 0 and v0 < 0:
            return None
        return float(v0 / (v0 - v1)) if v0 != v1 else 0.0
    if isinstance(shape, PolarRect):
        return segment_enters_polar_rect(p0, p1, shape)
    if isinstance(shape, Polyline):
        verts = shape.as_array()
        best = None
        for i in range(len(verts) - 1):
            s = seg_seg_intersection(p0, p1, verts[i], verts[i + 1])
            if s is not None:
                best = s if best is None else min(best, s)
        if best is None and tol > 0.0:
            for pt, s in ((p0, 0.0), (p1, 1.0)):
                if point_polyline_distance(np.asarray(pt, dtype=float)[None, :], verts)[0] <= tol:
                    return s if best is None else min(best, s)
        return best
    raise TypeError(f"unsupported shape {type(shape)!r}")


# ---------------------------------------------------------------------------
# Radial projection (Beurling)


def radial_projection_intervals(shapes: Shape | Sequence[Shape]) -> list[tuple[float, float]]:
    """Radial projection {|z| : z in K} of polyline shape(s) as merged intervals.

    Each polyline segment contributes [min |z|, max |z|]; the minimum over a
    segment is the exact point-segment distance to the origin.
    """
    if isinstance(shapes, Polyline):
        shapes = [shapes]
    raw: list[tuple[float, float]] = []
    origin = np.zeros((1, 2))
    for sh in shapes:
        if not isinstance(sh, Polyline):
            raise TypeError("radial projection is defined here for polyline shapes")
        verts = sh.as_array()
        for i in range(len(verts) - 1):
            lo = float(point_segment_distance(origin, verts[i], verts[i + 1])[0])
            hi = float(max(np.hypot(*verts[i]), np.hypot(*verts[i + 1])))
            raw.append((lo, hi))
    raw.sort()
    merged: list[tuple[float, float]] = []
    for lo, hi in raw:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def point_intervals_on_axis_distance(pts: np.ndarray, intervals: Sequence[tuple[float, float]]) -> np.ndarray:
    """Distance from points to the union of segments [lo,hi] x {0} on the x-axis."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    best = np.full(len(pts), np.inf)
    for lo, hi in intervals:
        dx = np.maximum(lo - pts[:, 0], 0.0) + np.maximum(pts[:, 0] - hi, 0.0)
        np.minimum(best, np.hypot(dx, pts[:, 1]), out=best)
    return best
