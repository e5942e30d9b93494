"""The acceptance battery: one callable per criterion, each returning a
report dict with the measured values, the stated tolerance, and pass/fail.

Suites: ``formulas`` (analytic-vs-MC agreement, bound dominance, Beurling,
Poisson kernel, small-instance oracles), ``laws`` (area-law profiles, dyadic
occupation, resolution trends, the area sandwich), ``tails`` (lambda-domain
rectangle tails, the upcrossing log law), ``all``.

Several law criteria target asymptotic constants whose convergence is
logarithmic; at desk scale they sit outside the stated bands no matter the
resolution (the reports carry the measured values; see the test module for
the expected-failure markers and the analysis).
"""

from __future__ import annotations

import json
import math
import time
from typing import Callable, Optional, Sequence

import numpy as np

from . import laws, rng
from .compgeo import distance_transform, measure_components, smallest_enclosing_circle
from .config import ExperimentConfig
from .domains import (
    INNER_ARC,
    BoundaryArc,
    build_lambda_domain,
    build_polar_grid_rectangles,
)
from .hitprob import (
    annulus_inner_hit,
    ball_hit_bound,
    escape_before_line_exact,
    escape_bound,
    segment_miss_bound,
    tangent_ball_hit_exact,
)
from .mc import (
    beurling_compare,
    estimate_event,
    exit_histogram,
    lambda_tail_experiment,
    upcrossing_log_law,
)
from .paths import FixedHorizon, refine_bridge, sample_path
from .pipeline import run_pipeline
from .raster import label_components, rasterize
from .shapes import Polyline

SUITES = ("formulas", "laws", "tails", "all")


def _report(criterion: int, name: str, passed: bool, **details) -> dict:
    return {"criterion": criterion, "name": name, "passed": bool(passed),
            "details": details}


def _scaled(n: int, scale: float, floor: int = 100) -> int:
    return max(int(n * scale), floor)


# ---------------------------------------------------------------------------
# Criterion 1: analytic vs MC agreement


AGREEMENT_CASES = [
    ("escape_before_line", {"delta": 0.1, "r": 1.0}),
    ("escape_before_line", {"delta": 0.3, "r": 1.0}),
    ("escape_before_line", {"delta": 0.7, "r": 1.2}),
    ("tangent_ball_hit", {"z": 0.0 + 0.0j, "x": 2.0 / 3.0}),   # exact 0.5
    ("tangent_ball_hit", {"z": 0.2j, "x": 0.75}),
    ("tangent_ball_hit", {"z": -0.3 + 0.0j, "x": 0.6}),
    ("tangent_ball_hit", {"z": 0.4 + 0.3j, "x": 0.8}),
    ("annulus_inner_hit", {"r1": 1.0, "r2": 4.0, "rho": 2.0}),  # exact 0.5
    ("annulus_inner_hit", {"r1": 1.0, "r2": 4.0, "rho": 3.0}),
    ("annulus_inner_hit", {"r1": 0.5, "r2": 2.0, "rho": 1.2}),
]


def _exact_of(event: str, params: dict) -> float:
    if event == "escape_before_line":
        return escape_before_line_exact(params["delta"], params["r"]).value
    if event == "tangent_ball_hit":
        return tangent_ball_hit_exact(params["z"], params["x"]).value
    if event == "annulus_inner_hit":
        return annulus_inner_hit(params["r1"], params["r2"], params["rho"]).value
    raise ValueError(event)


def criterion_1(seed: int = 101, scale: float = 1.0, workers: int = 1) -> dict:
    n = _scaled(100_000, scale)
    rows = []
    ok = True
    for i, (event, params) in enumerate(AGREEMENT_CASES):
        est = estimate_event(event, params, n, seed + i, workers=workers)
        exact = _exact_of(event, params)
        se = max(est.se, 1e-12)
        good = abs(est.p_hat - exact) <= 3 * se
        ok &= good
        rows.append({"event": event, "params": {k: str(v) for k, v in params.items()},
                     "exact": exact, "mc": est.p_hat, "se": est.se, "ok": good})
    return _report(1, "analytic_vs_mc_agreement", ok, n=n, cases=rows)


# ---------------------------------------------------------------------------
# Criterion 2: bound dominance sweeps


def criterion_2(seed: int = 202, scale: float = 1.0, workers: int = 1) -> dict:
    n_points = _scaled(1000, scale, floor=20)
    n_mc = _scaled(600, scale, floor=200)
    g = rng.stream(seed, rng.SHUFFLE)
    worst = {"escape": math.inf, "segment": math.inf, "ball": math.inf}
    ok = True

    for i in range(n_points):
        r = float(g.uniform(0.5, 2.0))
        delta = float(g.uniform(0.0, r))
        est = estimate_event("escape_before_line", {"delta": delta, "r": r},
                             n_mc, seed + 10 + i, workers=workers)
        margin = escape_bound(delta, r).value - (est.p_hat - 3 * est.se)
        worst["escape"] = min(worst["escape"], margin)

    for i in range(n_points):
        b = float(g.uniform(0.05, 1.0))
        a = float(g.uniform(0.0, b) or b / 2)
        a = max(a, 1e-6)
        if a >= b:
            a = b / 2
        est = estimate_event("segment_miss", {"a": a, "b": b},
                             n_mc, seed + 20000 + i, workers=workers)
        margin = segment_miss_bound(a, b).value - (est.p_hat - 3 * est.se)
        worst["segment"] = min(worst["segment"], margin)

    count = 0
    i = 0
    while count < n_points:
        x = float(g.uniform(0.1, 0.95))
        eps = float(g.uniform(1 - x, 1.2 * (1 - x)))
        zr = float(g.uniform(0.0, 0.95))
        za = float(g.uniform(0.0, 2 * math.pi))
        z = zr * math.cos(za) + 1j * zr * math.sin(za)
        i += 1
        if abs(z) >= 1 or abs(z - x) <= eps:
            continue
        count += 1
        est = estimate_event("tangent_ball_hit", {"z": z, "x": x, "eps": eps},
                             n_mc, seed + 40000 + i, workers=workers)
        margin = ball_hit_bound(z, x, eps).value - (est.p_hat - 3 * est.se)
        worst["ball"] = min(worst["ball"], margin)

    ok = all(v >= 0 for v in worst.values())
    return _report(2, "bound_dominance_sweeps", ok, n_points=n_points, n_mc=n_mc,
                   worst_margins=worst)


# ---------------------------------------------------------------------------
# Criterion 3: Beurling projection inequality


def canned_beurling_shapes(R: float = 1.0) -> dict[str, object]:
    """Five canned hitting sets inside B(R): arc, spiral segment, staircase
    polyline, radial segment, and a disconnected two-piece set."""
    def polar(r, a):
        return (r * math.cos(a), r * math.sin(a))

    arc = Polyline(tuple(polar(0.55 * R, a) for a in np.linspace(0.3, 2.0, 33)))
    spiral = Polyline(tuple(polar(0.2 * R + 0.5 * R * s, 0.5 + 7.0 * s)
                            for s in np.linspace(0.0, 1.0, 60)))
    stair_pts = []
    for k in range(4):
        r0, r1 = 0.25 * R + 0.12 * R * k, 0.25 * R + 0.12 * R * (k + 1)
        a = 0.8 + 0.35 * (k % 2)
        stair_pts.extend([polar(r0, a), polar(r1, a)])
    staircase = Polyline(tuple(stair_pts))
    radial = Polyline((polar(0.3 * R, 0.7), polar(0.8 * R, 0.7)))
    two_piece = (
        Polyline(tuple(polar(0.35 * R, a) for a in np.linspace(2.6, 3.4, 12))),
        Polyline(tuple(polar(0.7 * R, a) for a in np.linspace(5.2, 5.9, 12))),
    )
    return {"arc": arc, "spiral": spiral, "staircase": staircase,
            "radial": radial, "two_piece": two_piece}


def criterion_3(seed: int = 303, scale: float = 1.0, workers: int = 1) -> dict:
    n = _scaled(30_000, scale)
    R = 1.0
    rows = []
    ok = True
    for i, (name, K) in enumerate(canned_beurling_shapes(R).items()):
        est_k, est_p = beurling_compare(K, R, n, seed + 10 * i, workers=workers)
        joint_se = math.hypot(est_k.se, est_p.se)
        good = est_k.p_hat >= est_p.p_hat - 3 * joint_se
        ok &= good
        rows.append({"shape": name, "p_K": est_k.p_hat, "p_proj": est_p.p_hat,
                     "joint_se": joint_se, "ok": good})
    return _report(3, "beurling_projection_inequality", ok, n=n, shapes=rows)


# ---------------------------------------------------------------------------
# Criterion 4: Poisson kernel exit histogram


def criterion_4(seed: int = 404, scale: float = 1.0, workers: int = 1) -> dict:
    n = _scaled(1_000_000, scale)
    hist = exit_histogram(0.3 + 0.0j, 64, n, seed, workers=workers)
    ok = hist.sup_discrepancy <= 0.005
    return _report(4, "poisson_kernel_exit_histogram", ok, n=n,
                   sup_discrepancy=hist.sup_discrepancy, tolerance=0.005)


# ---------------------------------------------------------------------------
# Criteria 5 and 6: Le Gall profile and sorted-area law at 2048^2


def _law_runs(seeds: Sequence[int], resolution: int, compute_radii: bool = False):
    results = []
    for s in seeds:
        cfg = ExperimentConfig(seed=s, kill_mode="fixed", horizon=1.0,
                               base_step=1e-4, resolution=resolution)
        results.append(run_pipeline(cfg, compute_radii=compute_radii, keep_scene=False))
    return results


def criterion_5(seeds: Sequence[int] = (11, 12, 13, 14, 15),
                resolution: int = 2048, scale: float = 1.0, workers: int = 1) -> dict:
    if scale < 1.0:
        resolution = max(256, int(resolution * math.sqrt(scale)))
    values = []
    monotone_ok = True
    for res in _law_runs(seeds, resolution):
        if res.legall is None:
            continue
        use = res.legall.counts >= 50
        values.extend(res.legall.values[use].tolist())
        monotone_ok &= bool(np.all(np.diff(res.legall.counts) <= 0))
    med = float(np.median(values)) if values else float("nan")
    in_band = math.pi <= med <= 4 * math.pi
    return _report(5, "legall_constant_band", in_band and monotone_ok,
                   median=med, band=[math.pi, 4 * math.pi], target=2 * math.pi,
                   n_values=len(values), monotone_N=monotone_ok,
                   resolution=resolution, seeds=list(seeds))


def criterion_6(seeds: Sequence[int] = (11, 12, 13, 14, 15),
                resolution: int = 2048, scale: float = 1.0, workers: int = 1) -> dict:
    if scale < 1.0:
        resolution = max(256, int(resolution * math.sqrt(scale)))
    medians = []
    for res in _law_runs(seeds, resolution):
        if res.sorted_area is None or len(res.sorted_area.abscissa) == 0:
            continue
        idx = res.sorted_area.abscissa
        sel = (idx >= 100) & (idx <= 1000)
        if not np.any(sel):
            continue
        medians.append(float(np.median(res.sorted_area.values[sel])))
    med = float(np.median(medians)) if medians else float("nan")
    ok = (2 * math.pi / 2.0) <= med <= (2 * math.pi * 2.0)
    return _report(6, "sorted_area_law_band", ok, median=med,
                   band=[math.pi, 4 * math.pi], target=2 * math.pi,
                   per_run=medians, resolution=resolution, seeds=list(seeds))


# ---------------------------------------------------------------------------
# Criterion 7: dyadic occupation slope


def _dyadic_one(args) -> dict[int, float]:
    seed, resolution = args
    cfg = ExperimentConfig(seed=seed, kill_mode="exponential", base_step=1e-4,
                           resolution=resolution)
    res = run_pipeline(cfg, compute_radii=False, keep_scene=False)
    return res.dyadic


def criterion_7(n_runs: int = 200, resolution: int = 1024, seed0: int = 7000,
                scale: float = 1.0, workers: int = 1) -> dict:
    n_runs = max(int(n_runs * scale), 8)
    if scale < 1.0:
        resolution = max(256, int(resolution * math.sqrt(scale)))
    args = [(seed0 + i, resolution) for i in range(n_runs)]
    if workers > 1:
        import multiprocessing as mp

        with mp.get_context("fork").Pool(workers) as pool:
            dyads = pool.map(_dyadic_one, args)
    else:
        dyads = [_dyadic_one(a) for a in args]
    ks = np.arange(3, 11)
    means = np.array([sum(d.get(-int(k), 0.0) for d in dyads) / n_runs for k in ks])
    if np.any(means <= 0):
        return _report(7, "dyadic_occupation_slope", False, n_runs=n_runs,
                       resolution=resolution, means=means.tolist(),
                       note="empty dyadic classes")
    A = np.vstack([np.log(ks), np.ones(len(ks))]).T
    coef, *_ = np.linalg.lstsq(A, np.log(means), rcond=None)
    slope = float(coef[0])
    ok = -3.0 <= slope <= -1.3
    return _report(7, "dyadic_occupation_slope", ok, slope=slope,
                   band=[-3.0, -1.3], target=-2.0, n_runs=n_runs,
                   resolution=resolution,
                   k_sq_means=(means * ks ** 2).round(4).tolist())


# ---------------------------------------------------------------------------
# Criterion 8: theta-threshold resolution trends


def criterion_8(seeds: Sequence[int] = (11, 12, 13, 14, 15),
                scale: float = 1.0, workers: int = 1) -> dict:
    resolutions = (512, 1024, 2048)
    if scale < 1.0:
        resolutions = tuple(max(128, int(r * math.sqrt(scale))) for r in resolutions)
    stable = []
    increasing = 0
    rows = []
    for s in seeds:
        path = sample_path(s, FixedHorizon(1.0), 1e-4)
        bbox = float((path.xy.max(axis=0) - path.xy.min(axis=0)).max())
        h_fine = bbox / (resolutions[-1] - 16)
        path = refine_bridge(path, h_fine / 2)
        s_R = {}
        s_r = {}
        for res in resolutions:
            h = bbox / (res - 16)
            scene = rasterize(path, h)
            lab = label_components(scene)
            stats = laws.filter_for_laws(measure_components(lab, scene, min_cells=4), h)
            s_R[res] = laws.weighted_sum(stats, 0.5, "out", "shifted")
            s_r[res] = laws.weighted_sum(stats, 1.0, "in", "shifted")
        r_mid, r_hi = resolutions[1], resolutions[2]
        change = abs(s_R[r_hi] - s_R[r_mid]) / max(s_R[r_mid], 1e-12)
        stable.append(change)
        inc = s_r[resolutions[0]] < s_r[resolutions[1]] < s_r[resolutions[2]]
        increasing += int(inc)
        rows.append({"seed": s, "S_R": s_R, "S_r": s_r,
                     "S_R_change": change, "S_r_increasing": inc})
    part_a = all(c < 0.10 for c in stable)
    part_b = increasing >= max(len(seeds) - 1, 1)
    return _report(8, "theta_threshold_trends", part_a and part_b,
                   S_R_changes=stable, S_R_stable=part_a,
                   S_r_increasing_runs=increasing, S_r_ok=part_b, per_seed=rows,
                   resolutions=list(resolutions))


# ---------------------------------------------------------------------------
# Criterion 9: lambda-domain rectangle tails


LAMBDA_MENU = (("radial", {"angle": math.pi / 2}),
               ("staircase", {"steps": 4}),
               ("arc_spiral", {"turns": -0.15}))


def tail_setup(D, rects) -> tuple[tuple[float, float], BoundaryArc]:
    """Admissible start point and exit arc for the tail experiment: the start
    sits below the radial band, just under the rectangle cluster (connected
    to the positive real line below the band), and the exit arc lies on the
    inner circle away from the cluster."""
    rho1 = min(q.r for q in rects)
    env_lo = D.theta_inf_band(D.eta1, rho1)
    cl_lo = min(q.theta for q in rects)
    dth = rects[0].dtheta
    ang_x = min(cl_lo, env_lo) - max(0.06, 2 * dth)
    rx = (D.eta1 + 3 * rho1) / 4
    x = (rx * math.cos(ang_x), rx * math.sin(ang_x))
    arc = BoundaryArc(INNER_ARC, max(ang_x - 0.45, -math.pi / 2 + 0.01), ang_x - 0.08)
    return x, arc


def criterion_9(n: int = 3000, seed: int = 909, scale: float = 1.0,
                workers: int = 1) -> dict:
    n = max(int(n * scale), 400)
    rows = []
    ok = True
    for shape, kw in LAMBDA_MENU:
        D = build_lambda_domain(shape, 1.0, 2.0, **kw)
        rho1, rho2 = 4.0 / 3.0, 5.0 / 3.0
        mus = []
        # the spiral wedge is thinner, so its conditioned hits are rarer
        n_shape = 2 * n if shape == "arc_spiral" else n
        for n_rect in (8, 16, 32):
            rects = build_polar_grid_rectangles(D, rho1, rho2, n_rect)
            x, arc = tail_setup(D, rects)
            fit = lambda_tail_experiment(D, rects, x, arc, n=n_shape, seed=seed)
            good = (not fit.degenerate) and fit.mu < 1.0 and fit.r_squared >= 0.9
            ok &= good
            mus.append(fit.mu)
            rows.append({"shape": shape, "n_rect": n_rect, "mu": fit.mu,
                         "r_squared": fit.r_squared, "mu_ci": list(fit.mu_ci),
                         "ok": good})
        if any(math.isnan(m) for m in mus):
            ok = False
            spread = float("nan")
        else:
            spread = max(mus) / min(mus)
            ok &= spread <= 2.0
        rows.append({"shape": shape, "mu_spread": spread, "ok": spread <= 2.0
                     if not math.isnan(spread) else False})
    return _report(9, "lambda_domain_tails", ok, n=n, rows=rows)


# ---------------------------------------------------------------------------
# Criterion 10: upcrossing log law


def criterion_10(n: int = 100_000, seed: int = 1010, scale: float = 1.0,
                 workers: int = 1) -> dict:
    n = max(int(n * scale), 2000)
    etas = [2.0 ** (-k) for k in range(3, 10)]
    triples = upcrossing_log_law(2.0 + 0.0j, etas, n, seed, workers=workers)
    comps = [c for _, _, c in triples]
    spread = max(comps) / min(comps) if min(comps) > 0 else float("inf")
    ok = spread <= 3.0
    return _report(10, "upcrossing_log_law", ok, n=n, spread=spread,
                   triples=[[e, p, c] for e, p, c in triples])


# ---------------------------------------------------------------------------
# Criterion 11: small-instance oracles


def sec_oracle(points: np.ndarray) -> float:
    """Exhaustive smallest enclosing circle: try all support pairs and
    triples, keep the smallest circle containing every point."""
    from .compgeo import _circle_three, _circle_two

    pts = [tuple(p) for p in np.atleast_2d(points)]
    best = None
    candidates = []
    n = len(pts)
    for i in range(n):
        candidates.append((pts[i], 0.0))
    for i in range(n):
        for j in range(i + 1, n):
            c = _circle_two(pts[i], pts[j])
            candidates.append((c.center, c.radius))
            for k in range(j + 1, n):
                c3 = _circle_three(pts[i], pts[j], pts[k])
                if c3 is not None:
                    candidates.append((c3.center, c3.radius))
    for center, radius in sorted(candidates, key=lambda t: t[1]):
        cx, cy = center
        if all(math.hypot(p[0] - cx, p[1] - cy) <= radius + 1e-10 for p in pts):
            if best is None or radius < best:
                best = radius
                break
    return best if best is not None else 0.0


def edt_brute(occupied: np.ndarray) -> np.ndarray:
    """O(n^2 m) brute-force exact Euclidean distance transform."""
    h, w = occupied.shape
    occ = np.argwhere(occupied)
    out = np.zeros((h, w))
    free = np.argwhere(~occupied)
    if len(occ) == 0:
        raise ValueError("no occupied cells")
    d2 = ((free[:, None, :] - occ[None, :, :]) ** 2).sum(axis=2).min(axis=1)
    out[free[:, 0], free[:, 1]] = np.sqrt(d2)
    return out


def criterion_11(seed: int = 1111, scale: float = 1.0, workers: int = 1) -> dict:
    g = rng.stream(seed, rng.SHUFFLE)
    n_sec = max(int(500 * scale), 50)
    worst_sec = 0.0
    for _ in range(n_sec):
        m = int(g.integers(1, 13))
        pts = g.uniform(-1, 1, (m, 2))
        mine = smallest_enclosing_circle(pts).radius
        oracle = sec_oracle(pts)
        worst_sec = max(worst_sec, abs(mine - oracle))
    sec_ok = worst_sec <= 1e-9

    from .raster import RasterScene

    n_edt = max(int(50 * scale), 5)
    edt_ok = True
    for _ in range(n_edt):
        mask = g.uniform(0, 1, (64, 64)) < 0.08
        if not mask.any():
            mask[32, 32] = True
        scene = RasterScene((0.0, 0.0), 1.0, 64, 64, mask)
        mine = distance_transform(scene)
        edt_ok &= bool(np.array_equal(mine, edt_brute(mask)))
    return _report(11, "oracle_equivalence", sec_ok and edt_ok,
                   worst_sec_diff=worst_sec, sec_cases=n_sec,
                   edt_exact_equal=edt_ok, edt_cases=n_edt)


# ---------------------------------------------------------------------------
# Criterion 12: discrete area sandwich


def criterion_12(n_runs: int = 20, resolution: int = 256, seed0: int = 1200,
                 scale: float = 1.0, workers: int = 1) -> dict:
    n_runs = max(int(n_runs * scale), 3)
    violations = 0
    checked = 0
    for i in range(n_runs):
        mode = "fixed" if i % 2 == 0 else "exponential"
        cfg = ExperimentConfig(seed=seed0 + i, kill_mode=mode, base_step=1e-4,
                               resolution=resolution)
        res = run_pipeline(cfg, compute_radii=True, keep_scene=False)
        h = res.cell_size
        for s in res.stats:
            if s.cell_count < 16:
                continue
            checked += 1
            lo_ok = s.area >= 0.9 * math.pi * max(s.in_radius - 2 * h, 0.0) ** 2
            hi_ok = s.area <= 1.1 * math.pi * (s.out_radius + 2 * h) ** 2
            r_ok = s.in_radius <= s.out_radius + h * math.sqrt(2.0)
            if not (lo_ok and hi_ok and r_ok):
                violations += 1
    return _report(12, "area_sandwich", violations == 0, n_runs=n_runs,
                   resolution=resolution, components_checked=checked,
                   violations=violations)


# ---------------------------------------------------------------------------
# Criterion 13: determinism across repeats and worker counts


def criterion_13(scale: float = 0.02, workers_hi: int = 8) -> dict:
    """Bit-identical sub-results across two executions and workers 1 vs 8.

    Runs a reduced-scale battery twice serially and once with ``workers_hi``
    forked workers; block-indexed streams make every estimate independent of
    the worker count.
    """
    def mini(workers: int) -> str:
        parts = [
            criterion_1(scale=scale, workers=workers),
            criterion_3(scale=scale, workers=workers),
            criterion_4(scale=scale, workers=workers),
            criterion_10(scale=scale, workers=workers),
        ]
        return json.dumps(parts, sort_keys=True)

    a = mini(1)
    b = mini(1)
    c = mini(workers_hi)
    ok = (a == b) and (a == c)

    cfg = ExperimentConfig(seed=77, resolution=256)
    import io

    from .compgeo import dump_stats_csv

    outs = []
    for _ in range(2):
        res = run_pipeline(cfg, keep_scene=False)
        buf = io.StringIO()
        dump_stats_csv(res.stats, res.run_id, buf)
        outs.append(buf.getvalue())
    ok &= outs[0] == outs[1]
    return _report(13, "determinism", ok, repeat_identical=a == b,
                   workers_identical=a == c, pipeline_identical=outs[0] == outs[1],
                   scale=scale, workers_hi=workers_hi)


# ---------------------------------------------------------------------------
# Suite driver


CRITERIA: dict[int, tuple[Callable, str]] = {
    1: (criterion_1, "formulas"),
    2: (criterion_2, "formulas"),
    3: (criterion_3, "formulas"),
    4: (criterion_4, "formulas"),
    5: (criterion_5, "laws"),
    6: (criterion_6, "laws"),
    7: (criterion_7, "laws"),
    8: (criterion_8, "laws"),
    9: (criterion_9, "tails"),
    10: (criterion_10, "tails"),
    11: (criterion_11, "formulas"),
    12: (criterion_12, "laws"),
    13: (criterion_13, "formulas"),
}


def run_suite(suite: str = "all", scale: float = 1.0, workers: int = 1,
              emit=None) -> list[dict]:
    """Run a verification suite; returns the report list and optionally
    emits one JSON line per criterion through ``emit``."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    reports = []
    for crit in sorted(CRITERIA):
        fn, group = CRITERIA[crit]
        if suite != "all" and group != suite:
            continue
        t0 = time.time()
        if crit == 13:
            rep = fn()
        else:
            rep = fn(scale=scale, workers=workers)
        rep["seconds"] = round(time.time() - t0, 2)
        reports.append(rep)
        if emit is not None:
            emit(json.dumps(rep, sort_keys=True, default=str))
    return reports
