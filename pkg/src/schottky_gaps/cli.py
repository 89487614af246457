"""Command line entry point.

Exit codes: 0 success, 2 usage error, 3 invalid configuration, 4 numeric
invariant or guard violation (including a failed audit), 1 I/O failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .audit import run_all
from .delta import estimate_delta_counting, estimate_delta_eigenvalue
from .errors import SchottkyError, UsageError
from .gaps import compute_gaps, gap_cdf, power_law_normalizer
from .geometry import wrap_angle
from .io import (RunConfig, load_config, metadata, resolve_output_dir, with_overrides,
                 write_cdf_csv, write_csv, write_gaps_csv, write_histogram_csv, write_orbit_csv,
                 write_report_json, write_text)
from .orbit import count_profile, enumerate_by_depth, enumerate_orbit
from .process import (MAX_BONFERRONI_N, TangencyMeasure, bonferroni_brackets, fit_tail, simulate, zn_compare)
from .render import circles_svg, histogram_svg

DEFAULT_T = math.sqrt(2.0) * 1e3
S_MAX_DEFAULT = 1e5
HIST_MAX_DEFAULT = 100.0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration file")
    common.add_argument("--output-dir", help="output directory (overrides env and config)")
    common.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    common.add_argument("--workers", type=int, default=1, help="worker processes")

    p = _Parser(prog="schottky-gaps", description="Gap statistics for three-reflection Schottky groups.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("enumerate", parents=[common], help="list orbit points below a norm threshold")
    e.add_argument("--T", type=float, help="norm threshold")
    e.add_argument("--depth", type=int, help="list every word up to this length instead")
    e.add_argument("--interval", type=float, nargs=2, metavar=("START", "END"))

    g = sub.add_parser("gaps", parents=[common], help="scaled gaps, CDF and histogram")
    g.add_argument("--T", type=float, help=f"norm threshold (default {DEFAULT_T:.7g})")
    g.add_argument("--interval", type=float, nargs=2, metavar=("START", "END"))
    g.add_argument("--bin", type=float, help="histogram bin width")
    g.add_argument("--s-max", type=float, default=S_MAX_DEFAULT, help="right end of the CDF plot range")
    g.add_argument("--hist-max", type=float, default=HIST_MAX_DEFAULT, help="histogram range")
    g.add_argument("--normalizer", choices=("count", "power-law"), default="count")
    g.add_argument("--svg", action="store_true", help="also write histogram.svg")

    d = sub.add_parser("delta", parents=[common], help="critical exponent estimates")
    d.add_argument("--method", choices=("eigenvalue", "slope-fit", "both"))
    d.add_argument("--depth", type=int, help="cylinder depth for the eigenvalue method")
    d.add_argument("--T-min", type=float, default=100.0)
    d.add_argument("--T-max", type=float, default=DEFAULT_T)
    d.add_argument("--points", type=int, default=12, help="grid size for the slope fit")

    a = sub.add_parser("audit", parents=[common], help="structural audits")
    a.add_argument("--N1", type=int, default=2, help="tail window length")

    pp = sub.add_parser("pointprocess", parents=[common], help="i.i.d. process from the orbit measure")
    pp.add_argument("--N", type=int, default=2000)
    pp.add_argument("--trials", type=int, default=20)
    pp.add_argument("--measure-T", type=float, default=1e4, help="threshold of the approximating orbit")
    pp.add_argument("--delta", type=float, help="exponent (default: eigenvalue estimate at depth 8)")
    pp.add_argument("--symmetric", action="store_true", help="two-sided nearest distance")
    pp.add_argument("--bonferroni-s", type=float, nargs="*", default=[],
                    help="s values for bracket checks (needs N <= 400)")

    r = sub.add_parser("render", parents=[common], help="SVG of the orbit circle family")
    r.add_argument("--depth", type=int, help="word length cap")
    r.add_argument("--size", type=int, help="canvas size in pixels")
    r.add_argument("--stroke", type=float, help="stroke width")
    return p


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return with_overrides(cfg, seed=args.seed)


def _interval(args, cfg: RunConfig):
    if getattr(args, "interval", None):
        return tuple(wrap_angle(x) for x in args.interval)
    return cfg.interval


def cmd_enumerate(args, cfg: RunConfig, out: Path) -> int:
    group = cfg.group()
    if args.depth is not None:
        pts = enumerate_by_depth(group, args.depth)
        meta = metadata(cfg, "enumerate", depth=args.depth)
    else:
        T = args.T or cfg.T
        if T is None:
            raise UsageError("enumerate needs --T, a config T, or --depth")
        cfg = with_overrides(cfg, T=T)
        pts = enumerate_orbit(group, T, _interval(args, cfg), workers=args.workers)
        meta = metadata(cfg, "enumerate", T=T, interval=_interval(args, cfg))
    write_orbit_csv(out / "orbit.csv", pts, meta)
    print(f"{len(pts)} orbit points -> {out / 'orbit.csv'}")
    return 0


def cmd_gaps(args, cfg: RunConfig, out: Path) -> int:
    T = args.T or cfg.T or DEFAULT_T
    interval = _interval(args, cfg)
    cfg = with_overrides(cfg, T=T, interval=interval, histogram_bin=args.bin)
    group = cfg.group()
    pts = enumerate_orbit(group, T, interval, workers=args.workers)
    table = compute_gaps(pts, T, interval)
    normalizer = None
    extra = {}
    if args.normalizer == "power-law":
        delta = estimate_delta_eigenvalue(group, cfg.delta_depth).delta
        prof = count_profile(group, np.geomspace(T / 10.0, T, 8), interval)
        normalizer = power_law_normalizer(prof, delta, T, use_interval=interval is not None)
        extra = {"delta": delta, "normalizer_value": normalizer}
    F = gap_cdf(table, normalizer)
    meta = metadata(cfg, "gaps", T=T, interval=interval, normalizer=args.normalizer,
                    points=table.n_points, **extra)
    jumps = np.unique(F.values)
    write_gaps_csv(out / "gaps.csv", table, meta)
    write_cdf_csv(out / "cdf.csv", np.concatenate([[0.0], jumps]), F(np.concatenate([[0.0], jumps])), meta)
    edges, dens = F.histogram(cfg.histogram_bin, args.hist_max)
    write_histogram_csv(out / "histogram.csv", edges, dens, meta)
    summary = {"T": T, "points": table.n_points, "gaps": len(table.gaps),
               "min_scaled": float(table.scaled.min()), "median_scaled": float(np.median(table.scaled)),
               "F_at_s_max": float(F(args.s_max)), "s_max": args.s_max}
    write_report_json(out / "gaps_summary.json", summary, meta)
    if args.svg:
        write_text(out / "histogram.svg", histogram_svg(edges, dens, meta=meta))
    print(f"{table.n_points} points, {len(table.gaps)} gaps, F(s_max) = {summary['F_at_s_max']:.4f}")
    return 0


def cmd_delta(args, cfg: RunConfig, out: Path) -> int:
    group = cfg.group()
    method = args.method or cfg.delta_method
    depth = args.depth or cfg.delta_depth
    res = {}
    if method in ("eigenvalue", "both"):
        est = estimate_delta_eigenvalue(group, depth)
        res["eigenvalue"] = {"delta": est.delta, **est.diagnostics}
    if method in ("slope-fit", "both"):
        prof = count_profile(group, np.geomspace(args.T_min, args.T_max, args.points))
        est = estimate_delta_counting(prof)
        res["slope-fit"] = {"delta": est.delta, **est.diagnostics}
    write_report_json(out / "delta.json", res, metadata(cfg, "delta", method=method, depth=depth))
    for k, v in res.items():
        print(f"{k}: delta = {v['delta']:.10f}")
    return 0


def cmd_audit(args, cfg: RunConfig, out: Path) -> int:
    reports = run_all(cfg.group(), N1=args.N1, seed=cfg.seed)
    data = {r.name: r.to_dict() for r in reports}
    write_report_json(out / "audit.json", data, metadata(cfg, "audit", N1=args.N1))
    failed = [r.name for r in reports if not r.passed]
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}")
    if failed:
        print(f"failed audits: {', '.join(failed)}", file=sys.stderr)
        return 4
    return 0


def cmd_pointprocess(args, cfg: RunConfig, out: Path) -> int:
    if args.bonferroni_s and args.N > MAX_BONFERRONI_N:
        raise UsageError(f"--bonferroni-s needs --N <= {MAX_BONFERRONI_N}")
    group = cfg.group()
    delta = args.delta or estimate_delta_eigenvalue(group, 8).delta
    measure = TangencyMeasure.from_config(group, args.measure_T)
    run = simulate(measure, args.N, delta, args.trials, cfg.seed, args.symmetric, args.workers)
    s = np.round(np.arange(1, 51) * 0.1, 10)
    zc = zn_compare(run, measure, s)
    meta = metadata(cfg, "pointprocess", N=args.N, trials=args.trials, measure_T=args.measure_T,
                    delta=delta, symmetric=args.symmetric, rng="PCG64/SeedSequence.spawn")
    write_csv(out / "nu.csv", ("s", "nu", "one_minus_Z"), zip(zc.s, zc.nu, zc.one_minus_z), meta)
    tail = fit_tail(run.nu, delta)
    report = {"zn_sup_discrepancy": zc.sup_discrepancy, "tail_rate": tail.rate,
              "tail_rate_lsq": tail.rate_lsq, "tail_holds": tail.holds,
              "median_scaled_distance": float(np.median(run.scaled))}
    if args.bonferroni_s:
        report["bonferroni"] = [bonferroni_brackets(run, measure, s_).to_dict() for s_ in args.bonferroni_s]
    write_report_json(out / "pointprocess.json", report, meta)
    print(f"zn sup discrepancy {zc.sup_discrepancy:.4f}, tail rate {tail.rate:.4f}")
    ok = all(b["brackets_hold"] for b in report.get("bonferroni", []))
    return 0 if ok else 4


def cmd_render(args, cfg: RunConfig, out: Path) -> int:
    cfg = with_overrides(cfg, render_depth=args.depth, canvas_size=args.size, stroke_width=args.stroke)
    meta = metadata(cfg, "render", depth=cfg.render_depth)
    svg = circles_svg(cfg.group(), cfg.render_depth, cfg.canvas_size, cfg.stroke_width, meta=meta)
    path = write_text(out / "circles.svg", svg)
    print(f"-> {path}")
    return 0


COMMANDS = {"enumerate": cmd_enumerate, "gaps": cmd_gaps, "delta": cmd_delta, "audit": cmd_audit,
            "pointprocess": cmd_pointprocess, "render": cmd_render}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        out = resolve_output_dir(cfg, args.output_dir)
        return COMMANDS[args.command](args, cfg, out)
    except SchottkyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
