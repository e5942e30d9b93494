"""Command-line front end.

Subcommands: ``simulate``, ``stats``, ``hitprob``, ``upcrossings``,
``lambda-tail``, ``render``, ``verify``.  Exit codes: 0 ok, 1 criterion
failure, 2 usage error, 3 resource error.  The default output root comes
from the ``BMLAB_OUTPUT_ROOT`` environment variable, else ``./runs``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .config import ExperimentConfig, default_output_root, parse_config_file

EXIT_OK = 0
EXIT_CRITERION = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--kill-mode", choices=("fixed", "exponential"), dest="kill_mode")
    p.add_argument("--horizon", type=float)
    p.add_argument("--base-step", type=float, dest="base_step")
    p.add_argument("--refine-bound", type=float, dest="refine_bound")
    p.add_argument("--resolution", type=int)
    p.add_argument("--cell-size", type=float, dest="cell_size")
    p.add_argument("--min-cells", type=int, dest="min_cells")
    p.add_argument("--theta-list", dest="theta_list",
                   help="comma or space separated thetas")
    p.add_argument("--out", help="output directory for this run")


def _config_from_args(args) -> ExperimentConfig:
    cfg = parse_config_file(args.config) if args.config else ExperimentConfig()
    for name in ("seed", "kill_mode", "horizon", "base_step", "refine_bound",
                 "resolution", "cell_size", "min_cells"):
        val = getattr(args, name, None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "theta_list", None):
        cfg.theta_list = tuple(float(x) for x in args.theta_list.replace(",", " ").split())
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    if not cfg.out_dir:
        cfg.out_dir = os.path.join(default_output_root(), f"run-seed{cfg.seed}")
    cfg.validate()
    return cfg


def cmd_simulate(args) -> int:
    from .pipeline import run_pipeline, write_run_outputs

    cfg = _config_from_args(args)
    result = run_pipeline(cfg)
    manifest = write_run_outputs(result, cfg.out_dir, render_svg=args.svg)
    print(json.dumps({"out_dir": cfg.out_dir,
                      "n_components": manifest["n_components"],
                      "cell_size": manifest["cell_size"],
                      "config_hash": manifest["config_hash"]}, indent=2))
    return EXIT_OK


def cmd_stats(args) -> int:
    """Recompute law statistics from a run directory's components.csv."""
    import csv as csvmod

    from . import laws
    from .compgeo import ComponentStats

    path = os.path.join(args.run_dir, "components.csv")
    if not os.path.exists(path):
        print(f"error: {path} not found", file=sys.stderr)
        return EXIT_USAGE
    with open(path) as fp:
        rows = list(csvmod.DictReader(fp))
    stats = [ComponentStats(id=int(r["component_id"]), area=float(r["area"]),
                            in_radius=float(r["in_radius"]), out_radius=float(r["out_radius"]),
                            circumcenter=(float(r["cx"]), float(r["cy"])),
                            cell_count=int(r["cell_count"])) for r in rows]
    man = json.load(open(os.path.join(args.run_dir, "manifest.json")))
    h = man["cell_size"]
    filtered = laws.filter_for_laws(stats, h)
    out = {
        "n_components": len(stats),
        "n_filtered": len(filtered),
        "dyadic_occupation": {str(k): v for k, v in sorted(laws.dyadic_occupation(stats).items())},
    }
    for theta in (0.5, 1.0):
        out[f"S_R(theta={theta:g})"] = laws.weighted_sum(filtered, theta, "out", "shifted")
        out[f"S_r(theta={theta:g})"] = laws.weighted_sum(filtered, theta, "in", "shifted")
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_hitprob(args) -> int:
    from .hitprob import FORMULAS, ProbValue

    if args.formula not in FORMULAS:
        print(f"error: unknown formula {args.formula!r}; available: "
              f"{', '.join(sorted(FORMULAS))}", file=sys.stderr)
        return EXIT_USAGE
    fn, names, domain = FORMULAS[args.formula]
    kwargs = {}
    for item in args.params:
        if "=" not in item:
            print(f"error: parameters look like name=value, got {item!r}", file=sys.stderr)
            return EXIT_USAGE
        k, v = item.split("=", 1)
        if k not in names:
            print(f"error: {args.formula} takes {names}", file=sys.stderr)
            return EXIT_USAGE
        kwargs[k] = complex(v) if k in ("z", "u", "v") else float(v)
    missing = [n for n in names if n not in kwargs]
    if missing:
        print(f"error: missing parameters {missing}", file=sys.stderr)
        return EXIT_USAGE
    try:
        val = fn(**kwargs)
    except ValueError as e:
        print(json.dumps({"formula": args.formula, "valid": False, "reason": str(e)}))
        return EXIT_OK
    if isinstance(val, ProbValue):
        print(json.dumps({"formula": args.formula, "value": val.value, "kind": val.kind,
                          "clamped": val.clamped, "valid": True, "domain": domain}))
    else:
        print(json.dumps({"formula": args.formula, "value": val, "kind": "density",
                          "valid": True, "domain": domain}))
    return EXIT_OK


def cmd_upcrossings(args) -> int:
    from .mc import upcrossing_log_law

    etas = [2.0 ** (-k) for k in range(args.k_min, args.k_max + 1)]
    triples = upcrossing_log_law(complex(args.z), etas, args.n, args.seed,
                                 workers=args.workers)
    report = {"experiment": "upcrossing_log_law", "z": args.z, "n": args.n,
              "seed": args.seed,
              "rows": [{"eta": e, "p_hat": p, "compensated": c} for e, p, c in triples]}
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_lambda_tail(args) -> int:
    from .domains import build_lambda_domain, build_polar_grid_rectangles
    from .mc import lambda_tail_experiment
    from .verify import tail_setup

    kw = {}
    if args.shape == "radial":
        kw["angle"] = math.pi / 2
    elif args.shape == "staircase":
        kw["steps"] = 4
    else:
        kw["turns"] = args.turns
    D = build_lambda_domain(args.shape, args.eta1, args.eta2, **kw)
    rho1 = (2 * args.eta1 + args.eta2) / 3
    rho2 = (args.eta1 + 2 * args.eta2) / 3
    rects = build_polar_grid_rectangles(D, rho1, rho2, args.n_rect)
    x, arc = tail_setup(D, rects)
    fit = lambda_tail_experiment(D, rects, x, arc, n=args.n, seed=args.seed)
    report = {"experiment": "lambda_tail", "shape": args.shape, "n_rect": args.n_rect,
              "n": args.n, "seed": args.seed, "mu": fit.mu, "r_squared": fit.r_squared,
              "mu_ci": list(fit.mu_ci), "degenerate": fit.degenerate,
              "survival": fit.survival.tolist()}
    print(json.dumps(report, indent=2))
    return EXIT_OK


def cmd_render(args) -> int:
    from .pipeline import run_pipeline
    from .render import render_scene

    man_path = os.path.join(args.run_dir, "manifest.json")
    if not os.path.exists(man_path):
        print(f"error: {man_path} not found", file=sys.stderr)
        return EXIT_USAGE
    man = json.load(open(man_path))
    cfg = ExperimentConfig.from_dict(man["config"])
    result = run_pipeline(cfg)
    svg = render_scene(result.scene, result.labeling, result.stats,
                       draw_circles=args.circles)
    out = args.out or os.path.join(args.run_dir, "scene.svg")
    with open(out, "w") as fp:
        fp.write(svg)
    print(out)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_suite

    reports = run_suite(args.suite, scale=args.scale, workers=args.workers,
                        emit=print if args.jsonl else None)
    failed = [r for r in reports if not r["passed"]]
    for r in reports:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"criterion {r['criterion']:>2} {r['name']:<32} {status} "
              f"({r['seconds']}s)")
    print(f"{len(reports) - len(failed)}/{len(reports)} criteria passed")
    if args.out:
        with open(args.out, "w") as fp:
            for r in reports:
                fp.write(json.dumps(r, sort_keys=True, default=str) + "\n")
    return EXIT_CRITERION if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bmlab",
        description="Geometry lab for bounded complement components of planar "
                    "Brownian paths.",
        epilog="CSV schemas: components.csv = run_id,component_id,area,in_radius,"
               "out_radius,cx,cy,cell_count; raster_components.csv = run_id,"
               "component_id,cell_count,min_x,min_y,max_x,max_y; profiles = "
               "abscissa,value,count; path export = t,x,y.")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="run sample->raster->label->measure->laws")
    _add_config_flags(ps)
    ps.add_argument("--svg", action="store_true", help="also render scene.svg")
    ps.set_defaults(fn=cmd_simulate)

    pst = sub.add_parser("stats", help="recompute law statistics from a run directory")
    pst.add_argument("run_dir")
    pst.set_defaults(fn=cmd_stats)

    ph = sub.add_parser("hitprob", help="evaluate an analytic formula by name")
    ph.add_argument("formula")
    ph.add_argument("params", nargs="*", help="name=value pairs")
    ph.set_defaults(fn=cmd_hitprob)

    pu = sub.add_parser("upcrossings", help="upcrossing log-law experiment")
    pu.add_argument("--z", default="2.0", help="scaled center (complex)")
    pu.add_argument("--k-min", type=int, default=3)
    pu.add_argument("--k-max", type=int, default=9)
    pu.add_argument("--n", type=int, default=100_000)
    pu.add_argument("--seed", type=int, default=1010)
    pu.add_argument("--workers", type=int, default=1)
    pu.set_defaults(fn=cmd_upcrossings)

    pl = sub.add_parser("lambda-tail", help="rectangle-count tail experiment")
    pl.add_argument("--shape", choices=("radial", "staircase", "arc_spiral"),
                    default="radial")
    pl.add_argument("--turns", type=float, default=-0.15)
    pl.add_argument("--eta1", type=float, default=1.0)
    pl.add_argument("--eta2", type=float, default=2.0)
    pl.add_argument("--n-rect", type=int, default=16)
    pl.add_argument("--n", type=int, default=3000)
    pl.add_argument("--seed", type=int, default=909)
    pl.set_defaults(fn=cmd_lambda_tail)

    pr = sub.add_parser("render", help="render a run directory to SVG")
    pr.add_argument("run_dir")
    pr.add_argument("--out")
    pr.add_argument("--circles", action="store_true",
                    help="overlay in-/out-circles per component")
    pr.set_defaults(fn=cmd_render)

    pv = sub.add_parser("verify", help="run the acceptance battery")
    pv.add_argument("--suite", choices=("formulas", "laws", "tails", "all"),
                    default="all")
    pv.add_argument("--scale", type=float, default=1.0,
                    help="sample-size scale factor (1.0 = stated scale)")
    pv.add_argument("--workers", type=int, default=1)
    pv.add_argument("--jsonl", action="store_true", help="stream JSON lines")
    pv.add_argument("--out", help="write JSON lines report to this file")
    pv.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except MemoryError:
        print("error: out of memory; lower the resolution", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RuntimeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
