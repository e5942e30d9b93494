"""Lambda-domains, polar-rectangle collections, and upcrossing extraction.

A lambda-domain is bounded by a curve ``lambda`` from the inner circle to the
outer circle inside the upper sector, the segment ``sigma`` on the negative
imaginary axis, and the two circle arcs joining them through the positive
real axis.  Membership tests use winding-free sector/radius predicates plus
the side of the lower envelope of lambda, not general point-in-polygon.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .paths import PlanarPath
from .shapes import (
    Annulus,
    Disc,
    PolarRect,
    Shape,
    ang_in_interval,
    point_polyline_distance,
    polyline_polar_rect_distance,
    seg_circle_first_vec,
    seg_seg_intersection,
    seg_seg_param_vec,
    segment_enters_polar_rect,
    segment_entry,
)

PolarRectangle = PolarRect  # public alias

# boundary piece ids
LAMBDA = "lambda"
SIGMA = "sigma"
INNER_ARC = "inner_arc"
OUTER_ARC = "outer_arc"


def _polar(r: float, ang: float) -> tuple[float, float]:
    return (r * math.cos(ang), r * math.sin(ang))


@dataclass(frozen=True)
class LambdaDomain:
    eta1: float
    eta2: float
    lambda_vertices: np.ndarray  # (m, 2), from the inner to the outer circle
    shape_name: str = "custom"

    @property
    def inner_angle(self) -> float:
        x, y = self.lambda_vertices[0]
        return math.atan2(y, x)

    @property
    def outer_angle(self) -> float:
        x, y = self.lambda_vertices[-1]
        return math.atan2(y, x)

    @property
    def lambda_min_angle(self) -> float:
        v = self.lambda_vertices
        return float(np.min(np.arctan2(v[:, 1], v[:, 0])))

    def theta_inf_band(self, a: float, b: float) -> float:
        """inf { arg z : z on lambda, |z| in [a, b] } (the paper's theta(j)).

        Along any straight segment not through the origin the argument is
        monotone, so it suffices to evaluate args at the endpoints of the
        (up to two) parameter intervals where the radius lies in [a, b].
        """
        v = self.lambda_vertices
        best = math.inf
        for i in range(len(v) - 1):
            for t in _radius_band_param_endpoints(v[i], v[i + 1], a, b):
                p = v[i] + t * (v[i + 1] - v[i])
                best = min(best, math.atan2(p[1], p[0]))
        return best

    def contains(self, pt) -> bool:
        """Membership below the lower envelope of lambda (open set)."""
        x, y = float(pt[0]), float(pt[1])
        rho = math.hypot(x, y)
        if not (self.eta1 < rho < self.eta2):
            return False
        ang = math.atan2(y, x)
        if ang <= -math.pi / 2:
            return False
        return ang < self.theta_inf_band(rho, rho)

    # -- boundary pieces ---------------------------------------------------

    def sigma_endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array([0.0, -self.eta1]), np.array([0.0, -self.eta2])

    def arc_spans(self) -> dict[str, tuple[float, float, float]]:
        """Arc pieces as (radius, ang_start, width), both starting at -pi/2."""
        return {
            INNER_ARC: (self.eta1, -math.pi / 2, self.inner_angle + math.pi / 2),
            OUTER_ARC: (self.eta2, -math.pi / 2, self.outer_angle + math.pi / 2),
        }

    def exit_crossings(self, p0s: np.ndarray, p1s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized first boundary crossing along row segments.

        Returns (s, piece) with s = NaN and piece = '' where the segment does
        not meet the boundary.
        """
        from .shapes import seg_polyline_first_vec

        p0s = np.atleast_2d(p0s)
        p1s = np.atleast_2d(p1s)
        n = len(p0s)
        best_s = np.full(n, np.nan)
        piece = np.full(n, "", dtype=object)

        def consider(s: np.ndarray, name: str):
            nonlocal best_s, piece
            better = ~np.isnan(s) & ~(best_s <= s)
            best_s = np.where(better, s, best_s)
            piece[better] = name

        consider(seg_polyline_first_vec(p0s, p1s, self.lambda_vertices), LAMBDA)
        a, b = self.sigma_endpoints()
        consider(seg_seg_param_vec(p0s, p1s, a, b), SIGMA)
        for name, (rad, a0, w) in self.arc_spans().items():
            consider(seg_circle_first_vec(p0s, p1s, rad, a0, w), name)
        return best_s, piece

    def inside_distance_bound(self, pts: np.ndarray) -> np.ndarray:
        """Lower bound on the distance from interior points to the boundary.

        Radius and sector gaps are cheap cone bounds; points inside the
        angular shadow of lambda get the exact point-polyline distance.
        """
        pts = np.atleast_2d(pts)
        rho = np.hypot(pts[:, 0], pts[:, 1])
        ang = np.arctan2(pts[:, 1], pts[:, 0])
        d = np.minimum(rho - self.eta1, self.eta2 - rho)
        gap_sigma = np.clip(ang + math.pi / 2, 0.0, math.pi / 2)
        d = np.minimum(d, rho * np.sin(gap_sigma))
        lam_min = self.lambda_min_angle
        gap_lam = np.clip(lam_min - ang, 0.0, math.pi / 2)
        d_lam = rho * np.sin(gap_lam)
        shadow = ang >= lam_min
        if bool(np.any(shadow)):
            d_lam = d_lam.copy()
            d_lam[shadow] = point_polyline_distance(pts[shadow], self.lambda_vertices)
        d = np.minimum(d, d_lam)
        return np.maximum(d, 0.0)

    def to_json_dict(self, rects: Sequence[PolarRect] = ()) -> dict:
        return {
            "eta1": self.eta1,
            "eta2": self.eta2,
            "shape": self.shape_name,
            "lambda_vertices": [[float(x), float(y)] for x, y in self.lambda_vertices],
            "rects": [
                {"r": q.r, "theta": q.theta, "dr": q.dr, "dtheta": q.dtheta} for q in rects
            ],
        }


def _radius_band_param_endpoints(p0, p1, a: float, b: float) -> list[float]:
    """Endpoints of the t-intervals of [p0,p1] where |z(t)| lies in [a, b].

    |z(t)|^2 is a convex quadratic, so the band condition defines at most two
    closed intervals within [0, 1].
    """
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    A = float(d @ d)
    B = 2.0 * float(p0 @ d)
    C0 = float(p0 @ p0)
    if A == 0.0:
        return [0.0] if a * a <= C0 <= b * b else []

    def roots(level):
        disc = B * B - 4 * A * (C0 - level)
        if disc < 0:
            return None
        sq = math.sqrt(disc)
        return ((-B - sq) / (2 * A), (-B + sq) / (2 * A))

    rb = roots(b * b)
    if rb is None:
        lo_hi = None  # entire line above b: empty
    else:
        lo_hi = (max(rb[0], 0.0), min(rb[1], 1.0))
        if lo_hi[0] > lo_hi[1]:
            lo_hi = None
    if lo_hi is None:
        return []
    ra = roots(a * a)
    segs: list[tuple[float, float]]
    if ra is None:
        segs = [lo_hi]
    else:
        segs = []
        if lo_hi[0] < ra[0]:
            segs.append((lo_hi[0], min(ra[0], lo_hi[1])))
        if lo_hi[1] > ra[1]:
            segs.append((max(ra[1], lo_hi[0]), lo_hi[1]))
        if not segs and ra[0] <= lo_hi[0] and lo_hi[1] <= ra[1]:
            return []  # fully below a
    out: list[float] = []
    for lo, hi in segs:
        if lo <= hi:
            out.extend((lo, hi))
    return out


# ---------------------------------------------------------------------------
# Construction of the lambda menu


class LambdaValidationError(ValueError):
    def __init__(self, msg: str, vertex: Optional[tuple[float, float]] = None):
        self.vertex = vertex
        super().__init__(msg if vertex is None else f"{msg} at vertex {vertex}")


def _validate_lambda(verts: np.ndarray, eta1: float, eta2: float) -> None:
    rr = np.hypot(verts[:, 0], verts[:, 1])
    ang = np.arctan2(verts[:, 1], verts[:, 0])
    if not math.isclose(rr[0], eta1, rel_tol=1e-9):
        raise LambdaValidationError("lambda must start on the inner circle", tuple(verts[0]))
    if not math.isclose(rr[-1], eta2, rel_tol=1e-9):
        raise LambdaValidationError("lambda must end on the outer circle", tuple(verts[-1]))
    bad = np.where((ang <= 0) | (ang >= math.pi))[0]
    if len(bad):
        raise LambdaValidationError("lambda leaves the sector 0 < arg z < pi",
                                    tuple(verts[bad[0]]))
    # segment radial range: chords may dip below the endpoint radii
    for i in range(len(verts) - 1):
        ends = _radius_band_param_endpoints(verts[i], verts[i + 1], 0.0, eta2 * (1 + 1e-12))
        if not ends:
            raise LambdaValidationError("lambda leaves the outer circle", tuple(verts[i]))
        lo_t = min(_radius_band_param_endpoints(verts[i], verts[i + 1], 0.0, eta2 + 1.0) or [0])
        seg = verts[i + 1] - verts[i]
        den = float(seg @ seg)
        tmin = 0.0 if den == 0 else float(np.clip(-(verts[i] @ seg) / den, 0.0, 1.0))
        pmin = verts[i] + tmin * seg
        if math.hypot(pmin[0], pmin[1]) < eta1 * (1 - 1e-12):
            raise LambdaValidationError("lambda dips inside the inner circle", tuple(verts[i]))
    # simplicity: no self-intersections between non-adjacent segments
    for i in range(len(verts) - 1):
        for j in range(i + 2, len(verts) - 1):
            if i == 0 and j == len(verts) - 2 and len(verts) == 3:
                continue
            if seg_seg_intersection(verts[i], verts[i + 1], verts[j], verts[j + 1]) is not None:
                raise LambdaValidationError("lambda self-intersects", tuple(verts[j]))


def build_lambda_domain(shape: str, eta1: float, eta2: float, *,
                        angle: float = math.pi / 2,
                        steps: int = 4,
                        turns: float = 0.2,
                        arc_points: int = 12) -> LambdaDomain:
    """Build a validated lambda-domain from the parametric menu.

    ``radial``: straight segment at ``angle`` (pi/2 gives the vertical
    segment from i*eta1 to i*eta2).  ``staircase``: alternating radial and
    angular moves between two angle levels.  ``arc_spiral``: polyline along
    r(s) growing linearly while the angle sweeps ``turns`` revolutions;
    rejected if the sweep leaves the sector.
    """
    if not (0 < eta1 < eta2):
        raise ValueError("need 0 < eta1 < eta2")
    if shape == "radial":
        if not (0 < angle < math.pi):
            raise LambdaValidationError("radial angle must lie in (0, pi)")
        verts = np.array([_polar(eta1, angle), _polar(eta2, angle)])
    elif shape == "staircase":
        if steps < 1:
            raise ValueError("staircase needs at least 1 step")
        hi_ang, lo_ang = 0.625 * math.pi, 0.375 * math.pi
        radii = np.linspace(eta1, eta2, steps + 1)
        pts = [_polar(eta1, hi_ang)]
        ang_cycle = [hi_ang, lo_ang]
        for k in range(steps):
            cur = ang_cycle[k % 2]
            nxt = ang_cycle[(k + 1) % 2]
            pts.append(_polar(radii[k + 1], cur))
            if k < steps - 1:
                # angular move at fixed radius, chorded in short pieces so the
                # dip below the radius stays negligible
                sub = np.linspace(cur, nxt, 8)
                pts.extend(_polar(radii[k + 1], a) for a in sub[1:])
        verts = np.array(pts)
    elif shape == "arc_spiral":
        sweep = turns * 2.0 * math.pi
        # keep the low end of the sweep at 0.15 pi regardless of direction
        ang0 = 0.15 * math.pi + max(0.0, -sweep)
        n = max(arc_points, int(abs(sweep) / 0.15) + 2)
        ss = np.linspace(0.0, 1.0, n)
        verts = np.array([_polar(eta1 + s * (eta2 - eta1), ang0 + s * sweep) for s in ss])
    else:
        raise ValueError(f"unknown lambda shape {shape!r}")
    _validate_lambda(verts, eta1, eta2)
    return LambdaDomain(eta1=float(eta1), eta2=float(eta2), lambda_vertices=verts,
                        shape_name=shape)


# ---------------------------------------------------------------------------
# Polar rectangle grid


def build_polar_grid_rectangles(D: LambdaDomain, rho1: float, rho2: float, n: int) -> list[PolarRect]:
    """The rectangle collection along lambda: dr = (rho2-rho1)/n,
    dtheta = pi/(4n), Q_j rotated counterclockwise until it touches lambda.

    Q_j = q(rho1 + (j-1) dr, theta(j) - dtheta, dr, dtheta) where theta(j) is
    the infimum argument of lambda over the j-th radial band.
    """
    if not (D.eta1 < rho1 < rho2 < D.eta2):
        raise ValueError("need eta1 < rho1 < rho2 < eta2")
    if n < 1:
        raise ValueError("n must be >= 1")
    dr = (rho2 - rho1) / n
    dtheta = math.pi / (4 * n)
    out = []
    for j in range(1, n + 1):
        lo = rho1 + (j - 1) * dr
        theta_j = D.theta_inf_band(lo, lo + dr)
        if not math.isfinite(theta_j):
            raise ValueError(f"lambda has no point with radius in band {j}")
        out.append(PolarRect(r=lo, theta=theta_j - dtheta, dr=dr, dtheta=dtheta))
    return out


# ---------------------------------------------------------------------------
# Nice collections


@dataclass(frozen=True)
class NiceReport:
    radial_band: bool
    aspect: bool
    angular_cap: bool
    separation: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.radial_band and self.aspect and self.angular_cap and self.separation


def validate_nice(rects: Sequence[PolarRect], rho1: float, rho2: float,
                  c1: float, c2: float) -> NiceReport:
    """Check the four conditions of a nice collection, with witnesses.

    (i) all rectangles within the radial band [rho1, rho2]; (ii) aspect
    comparable: c1 dr <= dtheta <= c2 dr; (iii) dtheta <= pi/2; (iv) pairwise
    distance at least dr(Q_i), by exact polar-rectangle distance.
    """
    from .shapes import polar_rect_distance

    wit: dict = {}
    radial = True
    aspect = True
    cap = True
    sep = True
    for i, q in enumerate(rects):
        if q.r < rho1 - 1e-12 or q.r_outer > rho2 + 1e-12:
            radial = False
            wit.setdefault("radial_band", (i, q.r, q.r_outer))
        if not (c1 * q.dr <= q.dtheta * (1 + 1e-12) and q.dtheta <= c2 * q.dr * (1 + 1e-12)):
            aspect = False
            wit.setdefault("aspect", (i, q.dr, q.dtheta))
        if q.dtheta > math.pi / 2 + 1e-12:
            cap = False
            wit.setdefault("angular_cap", (i, q.dtheta))
    for i, qi in enumerate(rects):
        for j, qj in enumerate(rects):
            if i == j:
                continue
            d = polar_rect_distance(qi, qj)
            if d < qi.dr * (1 - 1e-9):
                sep = False
                wit.setdefault("separation", (i, j, d, qi.dr))
    return NiceReport(radial, aspect, cap, sep, wit)


# ---------------------------------------------------------------------------
# Boundary arcs (exit conditioning targets on the non-lambda boundary)


@dataclass(frozen=True)
class BoundaryArc:
    """A sub-arc of the boundary away from lambda.

    On ``sigma`` the interval [lo, hi] is a radius range; on the circle arcs
    it is an angle range (angles in [-pi/2, lambda endpoint angle]).
    """

    piece: str
    lo: float
    hi: float

    def validate(self, D: LambdaDomain) -> None:
        if self.piece == SIGMA:
            if not (D.eta1 - 1e-12 <= self.lo < self.hi <= D.eta2 + 1e-12):
                raise ValueError("sigma arc radius range must lie in [eta1, eta2]")
        elif self.piece in (INNER_ARC, OUTER_ARC):
            spans = D.arc_spans()[self.piece]
            a0, w = spans[1], spans[2]
            if not (a0 - 1e-12 <= self.lo < self.hi <= a0 + w + 1e-12):
                raise ValueError(f"{self.piece} angle range must lie within the arc span")
        else:
            raise ValueError("target arcs must avoid lambda")


def sigma_arc(D: LambdaDomain, center_frac: float = 0.5,
              half_width: float | None = None) -> BoundaryArc:
    """Arc on sigma around the given fraction of its length; the default
    half-width is 0.05 (eta2 - eta1)."""
    if half_width is None:
        half_width = 0.05 * (D.eta2 - D.eta1)
    c = D.eta1 + center_frac * (D.eta2 - D.eta1)
    lo = max(D.eta1, c - half_width)
    hi = min(D.eta2, c + half_width)
    return BoundaryArc(SIGMA, lo, hi)


def full_exit_region(D: LambdaDomain) -> list[BoundaryArc]:
    """The whole of the boundary minus lambda, as three arcs."""
    spans = D.arc_spans()
    return [
        BoundaryArc(SIGMA, D.eta1, D.eta2),
        BoundaryArc(INNER_ARC, spans[INNER_ARC][1], spans[INNER_ARC][1] + spans[INNER_ARC][2]),
        BoundaryArc(OUTER_ARC, spans[OUTER_ARC][1], spans[OUTER_ARC][1] + spans[OUTER_ARC][2]),
    ]


# ---------------------------------------------------------------------------
# Upcrossings


@dataclass(frozen=True)
class Upcrossing:
    start_index: int
    end_index: int
    start_time: float
    end_time: float
    start_point: tuple[float, float]
    end_point: tuple[float, float]


@dataclass(frozen=True)
class UpcrossingResult:
    upcrossings: list[Upcrossing]
    stopping_times: list[float]   # T_1, T_2, ... alternating hit-U / exit-V
    ends_mid_upcrossing: bool


def _uv_gap(U: Shape, V: Shape) -> float:
    if isinstance(U, Disc) and isinstance(V, Disc):
        dc = math.hypot(U.center[0] - V.center[0], U.center[1] - V.center[1])
        return V.radius - (dc + U.radius)
    if isinstance(U, Annulus) and isinstance(V, Annulus):
        if U.center != V.center:
            return -1.0
        return min(U.r_inner - V.r_inner, V.r_outer - U.r_outer)
    raise TypeError("upcrossing sets must be Disc-in-Disc or concentric Annulus-in-Annulus")


def _complement_exit(V: Shape, p0, p1) -> Optional[float]:
    """First s where the segment leaves the closed region V."""
    if isinstance(V, Disc):
        inside0 = math.hypot(p0[0] - V.center[0], p0[1] - V.center[1]) <= V.radius
        if not inside0:
            return 0.0
        from .shapes import seg_circle_first_cross
        return seg_circle_first_cross(p0, p1, V.center, V.radius)
    if isinstance(V, Annulus):
        d0 = math.hypot(p0[0] - V.center[0], p0[1] - V.center[1])
        if not (V.r_inner <= d0 <= V.r_outer):
            return 0.0
        from .shapes import seg_circle_first_cross
        cands = [seg_circle_first_cross(p0, p1, V.center, V.r_inner),
                 seg_circle_first_cross(p0, p1, V.center, V.r_outer)]
        cands = [c for c in cands if c is not None]
        return min(cands) if cands else None
    raise TypeError("unsupported V shape")


def extract_upcrossings(path: PlanarPath, U: Shape, V: Shape) -> UpcrossingResult:
    """Alternating stopping times T_{2i-1} (hit U) and T_{2i} (exit V), with
    segment-exact boundary crossings.  The path must start outside U and U
    must sit inside V with positive gap."""
    if _uv_gap(U, V) <= 0:
        raise ValueError("U must be contained in V with positive gap")
    from .shapes import contains
    if contains(U, path.xy[0]):
        raise ValueError("path must start outside U")

    xy, t = path.xy, path.t
    times: list[float] = []
    ups: list[Upcrossing] = []
    mode_hit_u = True
    pending: Optional[tuple[int, float, tuple[float, float]]] = None
    i = 0
    u = 0.0          # progress within segment i
    cur_pt = xy[0]
    while i < len(xy) - 1:
        p1 = xy[i + 1]
        s = segment_entry(U, cur_pt, p1) if mode_hit_u else _complement_exit(V, cur_pt, p1)
        if s is None or (s >= 1.0 and u >= 1.0):
            i += 1
            u = 0.0
            cur_pt = xy[i]
            continue
        g = u + s * (1.0 - u)
        tc = float(t[i] + g * (t[i + 1] - t[i]))
        pc = (float(cur_pt[0] + s * (p1[0] - cur_pt[0])),
              float(cur_pt[1] + s * (p1[1] - cur_pt[1])))
        times.append(tc)
        if mode_hit_u:
            pending = (i, tc, pc)
        else:
            si, st, sp = pending
            ups.append(Upcrossing(start_index=si, end_index=i, start_time=st,
                                  end_time=tc, start_point=sp, end_point=pc))
            pending = None
        mode_hit_u = not mode_hit_u
        u = g
        cur_pt = np.asarray(pc)
        if u >= 1.0:
            i += 1
            u = 0.0
            if i < len(xy):
                cur_pt = xy[i]
    return UpcrossingResult(upcrossings=ups, stopping_times=times,
                            ends_mid_upcrossing=pending is not None)


# ---------------------------------------------------------------------------
# Rectangle hit counting


def clip_at_first_exit(path: PlanarPath, D: LambdaDomain) -> np.ndarray:
    """Vertices of the path clipped at its first exit of D (exact crossing
    point appended); the whole path if it never leaves."""
    xy = path.xy
    if not D.contains(xy[0]):
        return xy[:1]
    s, piece = D.exit_crossings(xy[:-1], xy[1:])
    hits = np.where(~np.isnan(s))[0]
    if len(hits) == 0:
        return xy
    i = int(hits[0])
    cross = xy[i] + s[i] * (xy[i + 1] - xy[i])
    return np.vstack([xy[: i + 1], cross])


def count_rectangles_hit(path: PlanarPath, D: LambdaDomain,
                         rects: Sequence[PolarRect]) -> int:
    """Number of distinct rectangles intersected by the path clipped at its
    first exit of D; segment-exact against line sides, arc-exact against arc
    sides."""
    verts = clip_at_first_exit(path, D)
    if len(verts) < 1 or not rects:
        return 0
    p0s, p1s = verts[:-1], verts[1:]
    seg_len = np.hypot(*(p1s - p0s).T) if len(p0s) else np.array([])
    hit = 0
    from .shapes import point_polar_rect_distance
    for q in rects:
        d0 = point_polar_rect_distance(verts, q)
        if bool(np.any(d0 == 0.0)):
            hit += 1
            continue
        if len(p0s) == 0:
            continue
        cand = np.where(np.minimum(d0[:-1], d0[1:]) <= seg_len)[0]
        found = False
        for i in cand:
            if segment_enters_polar_rect(p0s[i], p1s[i], q) is not None:
                found = True
                break
        if found:
            hit += 1
    return hit


def domain_to_json(D: LambdaDomain, rects: Sequence[PolarRect] = ()) -> str:
    return json.dumps(D.to_json_dict(rects), indent=2)


def domain_from_json(text: str) -> tuple[LambdaDomain, list[PolarRect]]:
    d = json.loads(text)
    dom = LambdaDomain(eta1=d["eta1"], eta2=d["eta2"],
                       lambda_vertices=np.asarray(d["lambda_vertices"], dtype=float),
                       shape_name=d.get("shape", "custom"))
    rects = [PolarRect(r=q["r"], theta=q["theta"], dr=q["dr"], dtheta=q["dtheta"])
             for q in d.get("rects", [])]
    return dom, rects
