"""Seeded Monte Carlo estimators for every analytic formula and tail claim.

Three engines back the estimators:

* walk-on-spheres for hitting-order events without a clock: each jump is a
  uniform exit of the largest disc not meeting any boundary piece, which is
  exactly distributed; termination uses a proximity shell ``eps`` (the one
  documented bias source).
* adaptive timed Gaussian walks for exponentially killed events: the step
  variance scales like the squared distance to the feature of interest
  (dt = (d/3)^2), and every step runs an exact segment-circle crossing test,
  so a passage can only be missed through a Brownian-bridge excursion of
  more than three step lengths, which has probability exp(-9) per step.
  Hitting times are linearly interpolated within a step (documented bias).
* a lambda-domain walk with exact segment crossing resolution against every
  boundary piece and streaming polar-rectangle hit tracking that applies the
  same side predicates as :func:`bmlab.domains.count_rectangles_hit`.

Samples are drawn in fixed-size blocks with per-block derived streams and
associative aggregation, so every estimate is bit-identical for any worker
count and replayable from (experiment, params, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import rng
from .domains import (
    INNER_ARC,
    LAMBDA,
    OUTER_ARC,
    SIGMA,
    BoundaryArc,
    LambdaDomain,
    PolarRect,
)
from .paths import FixedHorizon, PlanarPath
from .shapes import (
    Polyline,
    Shape,
    ang_in_interval,
    point_intervals_on_axis_distance,
    point_polar_rect_distance,
    point_polyline_distance,
    point_segment_distance,
    radial_projection_intervals,
    seg_circle_first_vec,
    seg_seg_param_vec,
)

WOS_EPS_REL = 1e-9
WOS_MAX_ITER = 200_000
WALK_MAX_ITER = 5_000_000

_PIECE_CODE = {LAMBDA: 0, SIGMA: 1, INNER_ARC: 2, OUTER_ARC: 3}
_PIECE_NAME = {v: k for k, v in _PIECE_CODE.items()}


@dataclass(frozen=True)
class McEstimate:
    p_hat: float
    n: int
    seed: int
    params: dict = field(default_factory=dict)

    @property
    def se(self) -> float:
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.n) if self.n else float("nan")


@dataclass(frozen=True)
class TailFit:
    thresholds: np.ndarray
    survival: np.ndarray
    slope: float
    mu: float
    r_squared: float
    mu_ci: tuple[float, float]
    n: int
    degenerate: bool = False


class InfeasibleConditioningError(RuntimeError):
    pass


def _pool_map(fn, args, workers: int):
    if workers > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(workers) as pool:
            return pool.map(fn, args)
    return [fn(a) for a in args]


# ---------------------------------------------------------------------------
# Walk-on-spheres engine


def _target_distance(pts: np.ndarray, desc: tuple) -> np.ndarray:
    kind = desc[0]
    if kind == "circle_out":          # kill circle around the origin, from inside
        (_, R) = desc
        return R - np.hypot(pts[:, 0], pts[:, 1])
    if kind == "circle_out_at":
        (_, c, R) = desc
        return R - np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
    if kind == "disc":                # disc target approached from outside
        (_, c, r) = desc
        return np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1]) - r
    if kind == "line_y0":
        return np.abs(pts[:, 1])
    if kind == "segment":
        (_, a, b) = desc
        return point_segment_distance(pts, a, b)
    if kind == "polylines":
        (_, vlists) = desc
        best = np.full(len(pts), np.inf)
        for verts in vlists:
            np.minimum(best, point_polyline_distance(pts, np.asarray(verts)), out=best)
        return best
    if kind == "intervals":           # union of [lo,hi] x {0} on the x-axis
        (_, iv) = desc
        return point_intervals_on_axis_distance(pts, iv)
    if kind == "point":
        (_, p) = desc
        return np.hypot(pts[:, 0] - p[0], pts[:, 1] - p[1])
    if kind == "polar_rects":
        (_, rects) = desc
        best = np.full(len(pts), np.inf)
        for q in rects:
            np.minimum(best, point_polar_rect_distance(pts, q), out=best)
        return best
    raise ValueError(f"unknown target descriptor {kind!r}")


def _wos_block(g: np.random.Generator, size: int, start, targets: Sequence[tuple],
               success_mask: Sequence[bool], eps: float) -> int:
    pos = np.tile(np.asarray(start, dtype=float), (size, 1))
    success = 0
    for _ in range(WOS_MAX_ITER):
        if len(pos) == 0:
            break
        dists = np.stack([_target_distance(pos, t) for t in targets])
        kmin = np.argmin(dists, axis=0)
        dmin = dists[kmin, np.arange(len(pos))]
        done = dmin <= eps
        if np.any(done):
            hit = kmin[done]
            for k, is_success in enumerate(success_mask):
                if is_success:
                    success += int(np.sum(hit == k))
            pos = pos[~done]
            dmin = dmin[~done]
        if len(pos) == 0:
            break
        ang = g.uniform(0.0, 2.0 * math.pi, len(pos))
        pos = pos + dmin[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
    return success


def _wos_worker(arg) -> int:
    seed, b, sz, start, targets, success_mask, eps = arg
    return _wos_block(rng.stream(seed, rng.BLOCK, b), sz, start, targets, success_mask, eps)


def _run_wos(seed: int, n: int, start, targets, success_mask, eps: float,
             workers: int = 1) -> float:
    args = [(seed, b, sz, start, targets, success_mask, eps)
            for b, sz in enumerate(rng.block_sizes(n))]
    counts = _pool_map(_wos_worker, args, workers)
    return sum(counts) / float(n)


# ---------------------------------------------------------------------------
# Named events


def _event_spec(event: str, params: dict):
    if event == "annulus_inner_hit":
        r1, r2, rho = params["r1"], params["r2"], params["rho"]
        if not (0 < r1 <= rho <= r2):
            raise ValueError("need 0 < r1 <= rho <= r2")
        return ((rho, 0.0),
                [("disc", (0.0, 0.0), r1), ("circle_out", r2)],
                [True, False], WOS_EPS_REL * r2)
    if event == "escape_before_line":
        delta, r = params["delta"], params["r"]
        if not (0 <= delta <= r):
            raise ValueError("need 0 <= delta <= r")
        return ((0.0, delta),
                [("circle_out_at", (0.0, delta), r), ("line_y0",)],
                [True, False], WOS_EPS_REL * r)
    if event == "segment_miss":
        a, b = params["a"], params["b"]
        if not (0 < a < b <= 1):
            raise ValueError("need 0 < a < b <= 1")
        return ((0.0, 0.0),
                [("circle_out", 1.0), ("segment", (a, 0.0), (b, 0.0))],
                [True, False], WOS_EPS_REL)
    if event == "tangent_ball_hit":
        z, x = complex(params["z"]), params["x"]
        eps_ball = params.get("eps", 1.0 - x)
        return ((z.real, z.imag),
                [("disc", (x, 0.0), eps_ball), ("circle_out", 1.0)],
                [True, False], WOS_EPS_REL)
    if event == "hit_point_before_circle":
        p, R = params["point"], params["R"]
        return (params.get("start", (0.0, 0.0)),
                [("point", tuple(p)), ("circle_out", R)],
                [True, False], WOS_EPS_REL * R)
    raise ValueError(f"unknown event {event!r}")


def estimate_event(event: str, params: dict, n: int, seed: int,
                   workers: int = 1) -> McEstimate:
    """Estimate a named hitting event by walk-on-spheres Monte Carlo."""
    if n < 100:
        raise ValueError("n must be at least 100")
    start, targets, mask, eps = _event_spec(event, dict(params))
    d0 = np.stack([_target_distance(np.asarray(start, dtype=float)[None, :], t) for t in targets])
    k0 = int(np.argmin(d0[:, 0]))
    if d0[k0, 0] <= eps:
        return McEstimate(1.0 if mask[k0] else 0.0, n, seed, dict(params, event=event))
    p = _run_wos(seed, n, start, targets, mask, eps, workers=workers)
    return McEstimate(p, n, seed, dict(params, event=event))


# ---------------------------------------------------------------------------
# Beurling comparison


def beurling_compare(K: Shape | Sequence[Shape], R: float, n: int, seed: int,
                     workers: int = 1) -> tuple[McEstimate, McEstimate]:
    """Paired estimates of hitting K, and its radial projection, before the
    circle of radius R; the two estimates use independent streams."""
    shapes = [K] if isinstance(K, Polyline) else list(K)
    vlists = []
    for sh in shapes:
        if not isinstance(sh, Polyline):
            raise TypeError("Beurling comparison expects polyline shape(s)")
        verts = sh.as_array()
        if float(np.hypot(verts[:, 0], verts[:, 1]).max()) >= R:
            raise ValueError("K must be contained in B(R)")
        vlists.append(verts)
    intervals = radial_projection_intervals(shapes)
    eps = WOS_EPS_REL * R
    p_k = _run_wos(seed, n, (0.0, 0.0), [("polylines", vlists), ("circle_out", R)],
                   [True, False], eps, workers)
    p_p = _run_wos(seed + 1, n, (0.0, 0.0), [("intervals", intervals), ("circle_out", R)],
                   [True, False], eps, workers)
    return (McEstimate(p_k, n, seed, {"set": "K", "R": R}),
            McEstimate(p_p, n, seed + 1, {"set": "projection", "R": R}))


# ---------------------------------------------------------------------------
# Poisson kernel exit histogram


@dataclass(frozen=True)
class ExitHistogram:
    counts: np.ndarray
    freqs: np.ndarray
    expected: np.ndarray
    sup_discrepancy: float
    n: int
    seed: int


def _exit_worker(arg) -> np.ndarray:
    seed, b, sz, ux, uy, bins = arg
    g = rng.stream(seed, rng.BLOCK, b)
    pos = np.tile(np.array([ux, uy]), (sz, 1))
    counts = np.zeros(bins, dtype=np.int64)
    edges = np.linspace(-math.pi, math.pi, bins + 1)
    for _ in range(WOS_MAX_ITER):
        if len(pos) == 0:
            break
        d = 1.0 - np.hypot(pos[:, 0], pos[:, 1])
        done = d <= WOS_EPS_REL
        if np.any(done):
            th = np.arctan2(pos[done, 1], pos[done, 0])
            idx = np.clip(np.searchsorted(edges, th, side="right") - 1, 0, bins - 1)
            counts += np.bincount(idx, minlength=bins)
            pos = pos[~done]
            d = d[~done]
        if len(pos) == 0:
            break
        ang = g.uniform(0.0, 2.0 * math.pi, len(pos))
        pos = pos + d[:, None] * np.column_stack([np.cos(ang), np.sin(ang)])
    return counts


def exit_histogram(u: complex, bins: int, n: int, seed: int,
                   workers: int = 1) -> ExitHistogram:
    """Binned exit angles of Brownian motion from ``u`` versus the per-bin
    integrals of the Poisson kernel; reports the sup-norm discrepancy."""
    from .hitprob import poisson_bin_masses

    u = complex(u)
    if abs(u) >= 1:
        raise ValueError("u must lie in the open unit disc")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    args = [(seed, b, sz, u.real, u.imag, bins) for b, sz in enumerate(rng.block_sizes(n))]
    parts = _pool_map(_exit_worker, args, workers)
    counts = np.sum(parts, axis=0)
    freqs = counts / float(n)
    expected = poisson_bin_masses(u, bins)
    return ExitHistogram(counts, freqs, expected,
                         float(np.max(np.abs(freqs - expected))), n, seed)


# ---------------------------------------------------------------------------
# Upcrossing log law (adaptive timed walks)


def _timed_hit_circle(g: np.random.Generator, pos: np.ndarray, t: np.ndarray,
                      budget: np.ndarray, center: np.ndarray, radius: float,
                      from_inside: bool, scale_floor: float):
    """Run walkers until they cross the circle or exhaust their time budget.

    Returns (hit_mask, hit_pos, hit_t).  Distances drive the step size with
    dt = (max(d, floor)/3)^2; the final step is truncated to the remaining
    budget and every step runs the exact segment-circle crossing test.
    """
    m = len(pos)
    hit = np.zeros(m, dtype=bool)
    hit_pos = np.empty((m, 2))
    hit_t = np.full(m, np.nan)
    idx = np.arange(m)
    pos = pos.copy()
    t = t.copy()
    for _ in range(WALK_MAX_ITER):
        if len(idx) == 0:
            break
        rad = np.hypot(pos[:, 0] - center[0], pos[:, 1] - center[1])
        d = rad - radius if not from_inside else radius - rad
        d = np.maximum(np.abs(d), scale_floor)
        dt = (d / 3.0) ** 2
        rem = budget[idx] - t
        last = dt >= rem
        dt = np.where(last, rem, dt)
        newp = pos + g.standard_normal((len(idx), 2)) * np.sqrt(dt)[:, None]
        s = seg_circle_first_vec(pos, newp, radius, center=tuple(center))
        crossed = ~np.isnan(s)
        t_cross = t + np.where(crossed, s, 0.0) * dt
        good = crossed & (t_cross <= budget[idx])
        if np.any(good):
            tgt = idx[good]
            hit[tgt] = True
            cross_pt = pos[good] + s[good][:, None] * (newp[good] - pos[good])
            hit_pos[tgt] = cross_pt
            hit_t[tgt] = t_cross[good]
        done = good | last
        keep = ~done
        idx = idx[keep]
        pos = newp[keep]
        t = (t + dt)[keep]
    return hit, hit_pos, hit_t


_MAX_UPCROSS_GENERATIONS = 64


def _upcross_worker(arg) -> tuple[np.ndarray, int]:
    """Simulate the full upcrossing alternation for one block.

    Returns (between_counts, completed_ge_one): ``between_counts[n]`` is the
    number of walkers whose clock rang in the interval (T_{2n}, T_{2n+1}),
    i.e. after completing n upcrossings and before next entering U.
    """
    seed, stream_id, sz, zx, zy, eta, scaled, max_gen = arg
    g = rng.stream(seed, rng.BLOCK, stream_id)
    if scaled:
        c = np.array([eta * zx, eta * zy])
    else:
        c = np.array([zx, zy])
    r_u, r_v = eta / 2.0, eta
    tau = g.exponential(1.0, sz)
    floor = eta / 64.0
    between = np.zeros(_MAX_UPCROSS_GENERATIONS + 1, dtype=np.int64)
    completed_one = 0
    pos = np.zeros((sz, 2))
    t = np.zeros(sz)
    budget = tau
    for gen in range(min(max_gen, _MAX_UPCROSS_GENERATIONS)):
        if len(pos) == 0:
            break
        hit, hpos, ht = _timed_hit_circle(g, pos, t, budget, c, r_u,
                                          from_inside=False, scale_floor=floor)
        between[gen] += int(np.sum(~hit))
        if not np.any(hit):
            break
        pos, t, budget = hpos[hit], ht[hit], budget[hit]
        out, opos, ot = _timed_hit_circle(g, pos, t, budget, c, r_v,
                                          from_inside=True, scale_floor=floor)
        if gen == 0:
            completed_one += int(np.sum(out))
        if not np.any(out):
            break
        pos, t, budget = opos[out], ot[out], budget[out]
    return between, completed_one


def upcrossing_log_law(z: complex, eta_list: Sequence[float], n: int, seed: int,
                       n_between: int = 0, scaled_sets: bool = True,
                       workers: int = 1) -> list[tuple[float, float, float]]:
    """For each eta, estimate the probability that the Exp(1) clock rings in
    the between-upcrossing interval (T_{2 n_between}, T_{2 n_between + 1}) of
    the pair U = B(c, eta/2), V = B(c, eta); reports the compensated triple
    (eta, p_hat, p_hat * |ln eta|), which the log law keeps bounded.

    With ``scaled_sets`` the center is c = eta z, so the start at the origin
    sits at distance (|z| - 1) eta from V for every eta, matching the scaling
    hypothesis; otherwise c = z is fixed and only the radii shrink.
    """
    z = complex(z)
    if scaled_sets and abs(z) <= 1:
        raise ValueError("need |z| > 1 so the start lies outside V")
    out = []
    for j, eta in enumerate(eta_list):
        if not (0 < eta < 0.5):
            raise ValueError("eta values must lie in (0, 1/2)")
        args = [(seed, j * 100_003 + b, sz, z.real, z.imag, float(eta), scaled_sets,
                 n_between + 1)
                for b, sz in enumerate(rng.block_sizes(n))]
        parts = _pool_map(_upcross_worker, args, workers)
        between = np.sum([p[0] for p in parts], axis=0)
        p = float(between[n_between]) / n
        out.append((float(eta), p, p * abs(math.log(eta))))
    return out


def upcrossing_presence_trend(z: complex, eta_list: Sequence[float], n: int,
                              seed: int, workers: int = 1) -> list[McEstimate]:
    """P[at least one completed upcrossing before tau] for the fixed-center
    pair U = B(z, eta/2), V = B(z, eta); shrinks like 1/|log eta|."""
    z = complex(z)
    out = []
    for j, eta in enumerate(eta_list):
        if not (0 < eta < 0.5):
            raise ValueError("eta values must lie in (0, 1/2)")
        args = [(seed, j * 100_003 + b, sz, z.real, z.imag, float(eta), False, 1)
                for b, sz in enumerate(rng.block_sizes(n))]
        parts = _pool_map(_upcross_worker, args, workers)
        p = sum(p[1] for p in parts) / float(n)
        out.append(McEstimate(p, n, seed, {"eta": float(eta), "z": (z.real, z.imag)}))
    return out


# ---------------------------------------------------------------------------
# Sup-tail of the exponentially killed path


def _sup_tail_worker(arg) -> np.ndarray:
    seed, b, sz, etas, base_step = arg
    g = rng.stream(seed, rng.BLOCK, b)
    tau = g.exponential(1.0, sz)
    sup = np.zeros(sz)
    pos = np.zeros((sz, 2))
    t = 0.0
    alive = np.arange(sz)
    while len(alive):
        dts = np.minimum(base_step, tau[alive] - t)
        pos = pos + g.standard_normal((len(alive), 2)) * np.sqrt(dts)[:, None]
        sup[alive] = np.maximum(sup[alive], np.hypot(pos[:, 0], pos[:, 1]))
        t += base_step
        live = tau[alive] > t
        alive = alive[live]
        pos = pos[live]
    return np.array([int(np.sum(sup > eta)) for eta in etas], dtype=np.int64)


def sup_tail_exceedance(eta_list: Sequence[float], n: int, seed: int,
                        base_step: float = 0.01, workers: int = 1) -> list[McEstimate]:
    """Empirical P[sup_{[0,tau]} |W| > eta] over exponentially killed paths."""
    etas = tuple(float(e) for e in eta_list)
    args = [(seed, b, sz, etas, base_step) for b, sz in enumerate(rng.block_sizes(n))]
    parts = _pool_map(_sup_tail_worker, args, workers)
    totals = np.sum(parts, axis=0)
    return [McEstimate(float(c) / n, n, seed, {"eta": e, "base_step": base_step})
            for e, c in zip(etas, totals)]


# ---------------------------------------------------------------------------
# Lambda-domain walk engine


@dataclass(frozen=True)
class _BandLayout:
    """Radial band layout of a grid (sub)collection of polar rectangles."""

    rho1: float
    dr: float
    n_bands: int
    rect_of_band: np.ndarray   # band -> rect index or -1
    th_lo: np.ndarray          # per band; NaN where empty
    th_hi: np.ndarray
    r_lo: np.ndarray
    r_hi: np.ndarray


def _band_layout(rects: Sequence[PolarRect], rho1: float, rho2: float) -> _BandLayout:
    if not rects:
        return _BandLayout(rho1, rho2 - rho1, 1, np.array([-1]),
                           np.array([np.nan]), np.array([np.nan]),
                           np.array([rho1]), np.array([rho2]))
    dr = rects[0].dr
    n_bands = int(round((rho2 - rho1) / dr))
    rect_of = np.full(n_bands, -1, dtype=np.int64)
    th_lo = np.full(n_bands, np.nan)
    th_hi = np.full(n_bands, np.nan)
    for i, q in enumerate(rects):
        if abs(q.dr - dr) > 1e-12 * dr:
            raise ValueError("rectangle collection must share a radial size")
        band = int(round((q.r - rho1) / dr))
        if not (0 <= band < n_bands) or abs(rho1 + band * dr - q.r) > 1e-9 * dr:
            raise ValueError("rectangles must align with the radial grid bands")
        if rect_of[band] != -1:
            raise ValueError("at most one rectangle per radial band")
        rect_of[band] = i
        th_lo[band] = q.theta
        th_hi[band] = q.theta_end
    r_lo = rho1 + dr * np.arange(n_bands)
    return _BandLayout(rho1, dr, n_bands, rect_of, th_lo, th_hi, r_lo, r_lo + dr)


def _segment_hits_band_rect(p0, p1, layout: _BandLayout, band: int) -> np.ndarray:
    """Exact per-row test whether segments meet the rectangle of ``band``."""
    r_lo = layout.r_lo[band]
    r_hi = layout.r_hi[band]
    t_lo = layout.th_lo[band]
    width = layout.th_hi[band] - t_lo
    rr0 = np.hypot(p0[:, 0], p0[:, 1])
    an0 = np.arctan2(p0[:, 1], p0[:, 0])
    rr1 = np.hypot(p1[:, 0], p1[:, 1])
    an1 = np.arctan2(p1[:, 1], p1[:, 0])
    inside0 = (rr0 >= r_lo) & (rr0 <= r_hi) & ang_in_interval(an0, t_lo, width)
    inside1 = (rr1 >= r_lo) & (rr1 <= r_hi) & ang_in_interval(an1, t_lo, width)
    hit = inside0 | inside1
    rest = ~hit
    if np.any(rest):
        sub0, sub1 = p0[rest], p1[rest]
        found = np.zeros(len(sub0), dtype=bool)
        for ang in (t_lo, t_lo + width):
            a = (r_lo * math.cos(ang), r_lo * math.sin(ang))
            b = (r_hi * math.cos(ang), r_hi * math.sin(ang))
            found |= ~np.isnan(seg_seg_param_vec(sub0, sub1, a, b))
        for rad in (r_lo, r_hi):
            found |= ~np.isnan(seg_circle_first_vec(sub0, sub1, rad, t_lo, width))
        hit[np.where(rest)[0][found]] = True
    return hit


@dataclass
class _WalkResult:
    exit_piece: np.ndarray    # int8 codes per walker
    exit_point: np.ndarray    # (m, 2)
    rect_mask: np.ndarray     # uint64 bitmask of rectangles hit
    recorded: Optional[tuple[np.ndarray, np.ndarray]] = None  # (t, xy) of one walker


def _domain_walk_block(g: np.random.Generator, size: int, D: LambdaDomain,
                       layout: Optional[_BandLayout], x0, record_idx: int = -1,
                       sigma_cap: float = 0.0) -> _WalkResult:
    """Walk ``size`` independent killed walkers from x0 until they exit D.

    Step scale: one third of the conservative interior distance bound,
    capped inside the rectangle band zone at dr/6 and floored so progress
    never stalls; any step at least as long as the distance bound is
    resolved by exact crossing tests against every boundary piece.
    """
    pos = np.tile(np.asarray(x0, dtype=float), (size, 1))
    t = np.zeros(size)
    alive = np.arange(size)
    exit_piece = np.full(size, -1, dtype=np.int8)
    exit_point = np.full((size, 2), np.nan)
    rect_mask = np.zeros(size, dtype=np.uint64)
    rec_t: list[float] = [0.0]
    rec_xy: list[tuple[float, float]] = [tuple(np.asarray(x0, dtype=float))]

    span = D.eta2 - D.eta1
    floor = span / 1000.0
    cap = sigma_cap if sigma_cap > 0 else span / 8.0
    track = layout is not None and np.any(layout.rect_of_band >= 0)
    if track:
        band_cap = layout.dr / 5.0
        r_band_lo = layout.rho1
        r_band_hi = float(layout.r_hi[-1])
        have = ~np.isnan(layout.th_lo)
        cl_lo = float(np.min(layout.th_lo[have]))
        cl_hi = float(np.max(layout.th_hi[have]))

    for _ in range(WALK_MAX_ITER):
        m = len(alive)
        if m == 0:
            break
        d_bound = D.inside_distance_bound(pos)
        sigma = np.minimum(np.maximum(d_bound / 3.0, floor), cap)
        if track:
            # lower bound on the distance to the rectangle cluster: radial
            # gap to the band and chord gap to its angular interval
            rr = np.hypot(pos[:, 0], pos[:, 1])
            ang = np.arctan2(pos[:, 1], pos[:, 0])
            d_radial = np.maximum(r_band_lo - rr, 0.0) + np.maximum(rr - r_band_hi, 0.0)
            gap_ang = np.maximum(cl_lo - ang, ang - cl_hi)
            d_angular = rr * np.sin(np.clip(gap_ang, 0.0, math.pi / 2))
            d_rect = np.maximum(d_radial, d_angular)
            sigma = np.minimum(sigma, np.maximum(d_rect / 3.0, band_cap))
        dt = sigma ** 2
        newp = pos + g.standard_normal((m, 2)) * sigma[:, None]
        step_len = np.hypot(newp[:, 0] - pos[:, 0], newp[:, 1] - pos[:, 1])
        suspect = step_len >= 0.9 * d_bound
        end = newp.copy()
        s_cross = np.full(m, np.nan)
        piece_code = np.full(m, -1, dtype=np.int8)
        if np.any(suspect):
            s, piece = D.exit_crossings(pos[suspect], newp[suspect])
            sus_idx = np.where(suspect)[0]
            hit = ~np.isnan(s)
            if np.any(hit):
                rows = sus_idx[hit]
                s_cross[rows] = s[hit]
                piece_code[rows] = [_PIECE_CODE[p] for p in piece[hit]]
                end[rows] = pos[rows] + s[hit][:, None] * (newp[rows] - pos[rows])

        if track:
            # candidate bands from the exact radial range of each segment
            rr0 = np.hypot(pos[:, 0], pos[:, 1])
            rr1 = np.hypot(end[:, 0], end[:, 1])
            dseg = end - pos
            den = np.einsum("ij,ij->i", dseg, dseg)
            with np.errstate(invalid="ignore", divide="ignore"):
                tmin = np.clip(-np.einsum("ij,ij->i", pos, dseg) / den, 0.0, 1.0)
            tmin = np.where(den > 0, tmin, 0.0)
            foot = pos + tmin[:, None] * dseg
            rmin = np.minimum(np.hypot(foot[:, 0], foot[:, 1]), np.minimum(rr0, rr1))
            rmax = np.maximum(rr0, rr1)
            b_lo = np.floor((rmin - layout.rho1) / layout.dr).astype(np.int64)
            b_hi = np.floor((rmax - layout.rho1) / layout.dr).astype(np.int64)
            b_lo = np.clip(b_lo, 0, layout.n_bands - 1)
            b_hi = np.clip(b_hi, 0, layout.n_bands - 1)
            # angular prefilter: segments whose endpoints stay more than a
            # step length away from the cluster wedge cannot meet a rectangle
            seg_reach = np.hypot(end[:, 0] - pos[:, 0], end[:, 1] - pos[:, 1])
            near_ang = d_angular <= seg_reach * 1.0000001
            touch = (rmax >= layout.rho1) & (rmin <= layout.r_hi[-1]) & near_ang
            for band in np.unique(np.concatenate([b_lo[touch], b_hi[touch]])):
                ridx = layout.rect_of_band[band]
                if ridx < 0:
                    continue
                bit = np.uint64(1) << np.uint64(ridx)
                cand = touch & (b_lo <= band) & (band <= b_hi) \
                    & ((rect_mask[alive] & bit) == 0)
                if not np.any(cand):
                    continue
                rows = np.where(cand)[0]
                hits = _segment_hits_band_rect(pos[rows], end[rows], layout, int(band))
                if np.any(hits):
                    rect_mask[alive[rows[hits]]] |= bit

        crossed = piece_code >= 0
        if record_idx >= 0:
            where_rec = np.where(alive == record_idx)[0]
            if len(where_rec):
                r = int(where_rec[0])
                tt = t[r] + (s_cross[r] if crossed[r] else 1.0) * dt[r]
                rec_t.append(float(tt))
                rec_xy.append((float(end[r, 0]), float(end[r, 1])))
        if np.any(crossed):
            rows = alive[crossed]
            exit_piece[rows] = piece_code[crossed]
            exit_point[rows] = end[crossed]
        keep = ~crossed
        alive = alive[keep]
        pos = newp[keep]
        t = (t + dt)[keep]

    if len(alive):
        raise RuntimeError("domain walk failed to terminate within the step cap")
    recorded = None
    if record_idx >= 0:
        recorded = (np.asarray(rec_t), np.asarray(rec_xy))
    return _WalkResult(exit_piece, exit_point, rect_mask, recorded)


def _arc_accepts(arcs: Sequence[BoundaryArc], piece_codes: np.ndarray,
                 points: np.ndarray) -> np.ndarray:
    ok = np.zeros(len(piece_codes), dtype=bool)
    for arc in arcs:
        code = _PIECE_CODE[arc.piece]
        sel = piece_codes == code
        if not np.any(sel):
            continue
        pts = points[sel]
        if arc.piece == SIGMA:
            val = np.hypot(pts[:, 0], pts[:, 1])
        else:
            val = np.arctan2(pts[:, 1], pts[:, 0])
        tol = 1e-9
        ok[np.where(sel)[0]] |= (val >= arc.lo - tol) & (val <= arc.hi + tol)
    return ok


@dataclass(frozen=True)
class ConditionedPath:
    path: PlanarPath
    attempts: int
    exit_piece: str
    exit_point: tuple[float, float]
    n_rect_hits: Optional[int] = None   # streaming count when rects were tracked


def _normalize_arcs(D: LambdaDomain, target_arc) -> list[BoundaryArc]:
    arcs = [target_arc] if isinstance(target_arc, BoundaryArc) else list(target_arc)
    if not arcs:
        raise ValueError("target arc list is empty")
    for a in arcs:
        a.validate(D)
        if a.hi - a.lo <= 0:
            raise ValueError("target arc must have positive length")
    return arcs


def conditioned_exit_sampler(D: LambdaDomain, x, target_arc, seed: int,
                             rects: Sequence[PolarRect] = (),
                             pilot_attempts: int = 10_000) -> ConditionedPath:
    """Rejection-sample a killed walk from ``x`` conditioned to exit D
    through ``target_arc``; returns the accepted walk with the attempt count.

    Attempts are indexed into fixed-size blocks with derived streams, so the
    accepted path is a pure function of (domain, x, arc, seed).  Raises
    :class:`InfeasibleConditioningError` if no acceptance occurs within the
    pilot budget.
    """
    arcs = _normalize_arcs(D, target_arc)
    if not D.contains(x):
        raise ValueError("start point must lie inside the domain")
    layout = None
    if rects:
        layout = _band_layout(rects, min(q.r for q in rects), max(q.r_outer for q in rects))
    batch = rng.BLOCK_SIZE
    attempts_done = 0
    for b in range(max(1, pilot_attempts // batch + 1)):
        size = min(batch, pilot_attempts - attempts_done) or batch
        g = rng.stream(seed, rng.BLOCK, b)
        res = _domain_walk_block(g, size, D, layout, x)
        accept = _arc_accepts(arcs, res.exit_piece, res.exit_point)
        hits = np.where(accept)[0]
        if len(hits):
            k = int(hits[0])
            g2 = rng.stream(seed, rng.BLOCK, b)
            res2 = _domain_walk_block(g2, size, D, layout, x, record_idx=k)
            t_arr, xy_arr = res2.recorded
            path = PlanarPath(t=t_arr, xy=xy_arr,
                              kill_mode=FixedHorizon(float(t_arr[-1])),
                              seed=seed, base_step=float(np.max(np.diff(t_arr))))
            hits = int(np.bitwise_count(res.rect_mask[k])) if layout is not None else None
            return ConditionedPath(path=path, attempts=attempts_done + k + 1,
                                   exit_piece=_PIECE_NAME[int(res.exit_piece[k])],
                                   exit_point=(float(res.exit_point[k, 0]),
                                               float(res.exit_point[k, 1])),
                                   n_rect_hits=hits)
        attempts_done += size
        if attempts_done >= pilot_attempts:
            break
    raise InfeasibleConditioningError(
        f"no exit through the target arc in {attempts_done} attempts "
        f"(acceptance below {1.0 / max(attempts_done, 1):.1e})")


def exit_arc_probability(D: LambdaDomain, x, target_arc, n: int, seed: int,
                         workers: int = 1) -> McEstimate:
    """Unconditioned probability that a killed walk from x exits through the
    arc; the denominator of the rejection sampler."""
    arcs = _normalize_arcs(D, target_arc)
    if not D.contains(x):
        raise ValueError("start point must lie inside the domain")
    args = [(seed, b, sz, D, tuple(np.asarray(x, dtype=float)), arcs)
            for b, sz in enumerate(rng.block_sizes(n))]
    counts = _pool_map(_exit_prob_worker, args, workers)
    return McEstimate(sum(counts) / float(n), n, seed, {"experiment": "exit_arc"})


def _exit_prob_worker(arg) -> int:
    seed, b, sz, D, x, arcs = arg
    g = rng.stream(seed, rng.BLOCK, b)
    res = _domain_walk_block(g, sz, D, None, x)
    return int(np.sum(_arc_accepts(arcs, res.exit_piece, res.exit_point)))


# ---------------------------------------------------------------------------
# Tail experiment


def fit_exponential_tail(samples: np.ndarray, seed: int, min_tail: int = 20,
                         bootstrap: int = 200) -> TailFit:
    """Least-squares fit of ln P(N >= t) over thresholds with at least
    ``min_tail`` surviving samples; mu = exp(slope) with a bootstrap CI."""
    samples = np.asarray(samples, dtype=np.int64)
    n = len(samples)
    if n == 0 or samples.max(initial=0) < 1:
        return TailFit(np.array([]), np.array([]), float("nan"), float("nan"),
                       float("nan"), (float("nan"), float("nan")), n, degenerate=True)
    t_max = int(samples.max())
    thresholds = np.arange(1, t_max + 1)
    surv_counts = np.array([int(np.sum(samples >= t)) for t in thresholds])
    survival = surv_counts / float(n)
    use = surv_counts >= min_tail
    if int(use.sum()) < 2:
        return TailFit(thresholds, survival, float("nan"), float("nan"),
                       float("nan"), (float("nan"), float("nan")), n, degenerate=True)

    def _fit(vals: np.ndarray) -> tuple[float, float]:
        t_used = thresholds[use].astype(float)
        y = np.log(vals[use])
        A = np.vstack([t_used, np.ones_like(t_used)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        yhat = A @ coef
        ss_res = float(np.sum((y - yhat) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        return float(coef[0]), r2

    slope, r2 = _fit(survival)
    g = rng.stream(seed, rng.SHUFFLE)
    mus = []
    for _ in range(bootstrap):
        resample = samples[g.integers(0, n, n)]
        sc = np.array([int(np.sum(resample >= t)) for t in thresholds])
        with np.errstate(divide="ignore"):
            sv = sc / float(n)
        ok = (sc >= min_tail) & use
        if int(ok.sum()) < 2:
            continue
        t_used = thresholds[ok].astype(float)
        y = np.log(sv[ok])
        A = np.vstack([t_used, np.ones_like(t_used)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        mus.append(math.exp(coef[0]))
    ci = (float(np.percentile(mus, 2.5)), float(np.percentile(mus, 97.5))) if mus else (float("nan"),) * 2
    return TailFit(thresholds, survival, slope, math.exp(slope), r2, ci, n)


def _tail_worker(arg):
    seed, b, sz, D, x, arcs, rects, rho1, rho2 = arg
    g = rng.stream(seed, rng.BLOCK, b)
    layout = _band_layout(rects, rho1, rho2)
    res = _domain_walk_block(g, sz, D, layout, x)
    accept = _arc_accepts(arcs, res.exit_piece, res.exit_point)
    ns = np.bitwise_count(res.rect_mask[accept]).astype(np.int64)
    return ns


def lambda_tail_experiment(D: LambdaDomain, rects: Sequence[PolarRect], x,
                           target_arc, n: int, seed: int,
                           rho_band: Optional[tuple[float, float]] = None,
                           workers: int = 1,
                           max_attempt_blocks: int = 400) -> TailFit:
    """Survival curve of the number of rectangles hit by walks conditioned
    (by rejection on the exit arc) to leave D away from lambda.

    Rectangle hits are tracked during the walk with the same segment-exact
    side predicates as the offline counter.  Returns the fitted tail.
    """
    arcs = _normalize_arcs(D, target_arc)
    if not D.contains(x):
        raise ValueError("start point must lie inside the domain")
    if not rects:
        return fit_exponential_tail(np.zeros(max(n, 1), dtype=np.int64), seed)
    if rho_band is None:
        rho_band = (min(q.r for q in rects), max(q.r_outer for q in rects))
    collected: list[np.ndarray] = []
    total = 0
    attempts = 0
    x_t = tuple(np.asarray(x, dtype=float))
    for b in range(max_attempt_blocks):
        if total >= n:
            break
        ns = _tail_worker((seed, b, rng.BLOCK_SIZE, D, x_t, arcs, tuple(rects),
                           rho_band[0], rho_band[1]))
        collected.append(ns)
        total += len(ns)
        attempts += rng.BLOCK_SIZE
        if attempts >= 10_000 and total == 0:
            raise InfeasibleConditioningError(
                f"acceptance below 1e-4 after {attempts} attempts")
    if total < n:
        raise InfeasibleConditioningError(
            f"only {total} of {n} conditioned paths accepted in {attempts} attempts")
    samples = np.concatenate(collected)[:n]
    return fit_exponential_tail(samples, seed)


# ---------------------------------------------------------------------------
# Tile-to-curve floor (Beurling floor inside a rectangle)


def tiletile_floor(D: LambdaDomain, rects: Sequence[PolarRect], j: int,
                   grid: int | Sequence, n: int, seed: int,
                   bounding_factor: float = 32.0,
                   workers: int = 1) -> tuple[McEstimate, tuple[float, float]]:
    """Minimum over start points in Q_j of the probability of hitting lambda
    before any other rectangle (termination at a large bounding circle
    counts as a miss, which only lowers the floor)."""
    if not (0 <= j < len(rects)):
        raise ValueError(f"rectangle index {j} out of range")
    q = rects[j]
    if isinstance(grid, int):
        k = grid
        fr = (np.arange(k) + 0.5) / k
        pts = [((q.r + fi * q.dr) * math.cos(q.theta + fj * q.dtheta),
                (q.r + fi * q.dr) * math.sin(q.theta + fj * q.dtheta))
               for fi in fr for fj in fr]
    else:
        pts = [tuple(p) for p in grid]
        for p in pts:
            if float(point_polar_rect_distance(np.asarray(p, dtype=float)[None, :], q)[0]) > 0:
                raise ValueError(f"grid point {p} lies outside rectangle {j}")
    others = [r for i, r in enumerate(rects) if i != j]
    R_big = bounding_factor * D.eta2
    targets = [("polylines", [D.lambda_vertices]), ("circle_out", R_big)]
    mask = [True, False]
    if others:
        targets.insert(1, ("polar_rects", tuple(others)))
        mask = [True, False, False]
    best: Optional[McEstimate] = None
    best_pt = pts[0]
    for i, p in enumerate(pts):
        pk = _run_wos(seed + i, n, p, targets, mask, WOS_EPS_REL * D.eta2, workers)
        est = McEstimate(pk, n, seed + i, {"start": p, "rect": j})
        if best is None or est.p_hat < best.p_hat:
            best = est
            best_pt = p
    return best, best_pt
