"""Command-line entry points.

Subcommands: simulate | zero-chain | fragment | stats | render.  Every run
is driven by a plain-text config file with a mandatory seed; outputs are
deterministic data files plus a manifest with per-file digests.  Replicates
can run in parallel; replicate i always uses the stream derived from
(seed, i), so the output bytes do not depend on the worker count.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    RunConfig,
    format_config,
    load_config,
    rule_to_spec,
    write_manifest,
)
from .division import run_in_window, snapshot_at, stit_reference_run
from .fragmentation import run_fragmentation
from .geometry import GeometryError, LambdaRule, Mondrian
from .hyperplanes import build_zero_cell_chain, explosion_diagnostic
from .render import SvgStyle, render_svg
from .streams import replicate_stream
from . import stats as st
from .textio import (
    read_event_log,
    write_chain_trace,
    write_event_log,
    write_explosion_report,
    write_frag_trace,
    write_report,
    write_report_csv,
    write_snapshot,
)

__all__ = ["main"]


def _ensure_dir(path: str) -> None:
    os.makedirs(path, exist_ok=True)


# ---------------------------------------------------------------------------
# simulate


def _simulate_replicate(cfg: RunConfig, rep: int, out_dir: str, stit: bool) -> tuple[list[str], bool]:
    rng = replicate_stream(cfg.seed, rep)
    caps = dict(max_events=cfg.max_events, min_cell_volume=cfg.min_cell_volume, seed=cfg.seed)
    if stit or isinstance(cfg.rule, LambdaRule):
        log = stit_reference_run(cfg.window, cfg.phi, cfg.t_max, rng, **caps)
    else:
        log = run_in_window(cfg.window, cfg.rule, cfg.phi, cfg.t_max, rng, **caps)
    paths = []
    events_path = os.path.join(out_dir, f"events_r{rep:04d}.csv")
    write_event_log(log, events_path)
    paths.append(events_path)
    for j, t in enumerate(cfg.snapshot_times):
        snap_path = os.path.join(out_dir, f"snapshot_r{rep:04d}_s{j}.csv")
        write_snapshot(snapshot_at(log, t), snap_path)
        paths.append(snap_path)
    return paths, log.truncated or log.volume_floor_hits > 0


def _simulate_replicate_text(args: tuple[str, int, str, bool]) -> tuple[list[str], bool]:
    from .config import parse_config

    cfg_text, rep, out_dir, stit = args
    return _simulate_replicate(parse_config(cfg_text), rep, out_dir, stit)


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    out_dir = args.out_dir or cfg.out_dir
    _ensure_dir(out_dir)
    outputs: list[str] = []
    truncated = False
    if args.parallel and cfg.replicates > 1:
        cfg_text = format_config(cfg)
        jobs = [(cfg_text, i, out_dir, args.stit) for i in range(cfg.replicates)]
        with ProcessPoolExecutor(max_workers=args.parallel) as pool:
            for paths, trunc in pool.map(_simulate_replicate_text, jobs):
                outputs.extend(paths)
                truncated = truncated or trunc
    else:
        for i in range(cfg.replicates):
            paths, trunc = _simulate_replicate(cfg, i, out_dir, args.stit)
            outputs.extend(paths)
            truncated = truncated or trunc
    write_manifest(
        os.path.join(out_dir, "manifest.txt"),
        command="simulate",
        cfg=cfg,
        version=__version__,
        outputs=outputs,
    )
    if truncated and not args.allow_truncation:
        print("simulate: output truncated by caps (rerun with --allow-truncation to accept)", file=sys.stderr)
        return 3
    return 0


# ---------------------------------------------------------------------------
# zero-chain


def _cmd_zero_chain(args) -> int:
    cfg = _load(args)
    if not isinstance(cfg.phi, Mondrian):
        raise ConfigError("zero-chain requires a mondrian directional distribution")
    out_dir = args.out_dir or cfg.out_dir
    _ensure_dir(out_dir)
    outputs = []
    for i in range(cfg.replicates):
        rng = replicate_stream(cfg.seed, i)
        chain = build_zero_cell_chain(cfg.phi, cfg.depth, rng)
        report = explosion_diagnostic(chain, cfg.rule)
        chain_path = os.path.join(out_dir, f"chain_r{i:04d}.csv")
        report_path = os.path.join(out_dir, f"explosion_r{i:04d}.csv")
        write_chain_trace(chain, chain_path)
        write_explosion_report(report, report_path)
        outputs.extend([chain_path, report_path])
        print(f"replicate {i}: rule {rule_to_spec(cfg.rule)} depth {cfg.depth} verdict {report.verdict}")
    write_manifest(
        os.path.join(out_dir, "manifest.txt"),
        command="zero-chain",
        cfg=cfg,
        version=__version__,
        outputs=outputs,
    )
    return 0


# ---------------------------------------------------------------------------
# fragment


def _cmd_fragment(args) -> int:
    cfg = _load(args)
    out_dir = args.out_dir or cfg.out_dir
    _ensure_dir(out_dir)
    outputs = []
    xis: list[float] = []
    holds: list[float] = []
    for i in range(cfg.replicates):
        rng = replicate_stream(cfg.seed, i)
        events = run_fragmentation(cfg.n_jumps, rng)
        prev = 0.0
        for e in events:
            xis.append(max(e.u, 1.0 - e.u))
            holds.append(e.time - prev)
            prev = e.time
        path = os.path.join(out_dir, f"frag_r{i:04d}.csv")
        write_frag_trace(events, path)
        outputs.append(path)
    report_path = os.path.join(out_dir, "frag_gof.txt")
    if len(xis) >= 20:
        results = [
            st.ks_test(np.asarray(xis), st.Uniform(0.5, 1.0), name="largest split fraction vs U(1/2,1)"),
            st.ks_test(np.asarray(holds), st.Exp(1.0), name="holding times vs Exp(1)"),
        ]
        write_report(results, report_path)
        for r in results:
            print(r.line())
    else:
        note = f"too few dislocations for goodness-of-fit tests (n={len(xis)} < 20)"
        with open(report_path, "w", encoding="utf-8") as fh:
            fh.write("# celldiv-report 1\n" + note + "\n")
        print(note)
    outputs.append(report_path)
    write_manifest(
        os.path.join(out_dir, "manifest.txt"),
        command="fragment",
        cfg=cfg,
        version=__version__,
        outputs=outputs,
    )
    return 0


# ---------------------------------------------------------------------------
# stats


def _parse_dist(spec: str):
    kind, _, params = spec.partition(":")
    vals = [float(v) for v in params.split(",")] if params else []
    if kind == "exp" and len(vals) == 1:
        return st.Exp(vals[0])
    if kind == "gamma" and len(vals) == 2:
        return st.Gamma(vals[0], vals[1])
    if kind == "uniform" and len(vals) == 2:
        return st.Uniform(vals[0], vals[1])
    if kind == "powermax" and len(vals) == 1:
        return st.PowerMax(int(vals[0]))
    raise ConfigError(
        f"bad distribution spec {spec!r} (use exp:RATE, gamma:SHAPE,RATE, uniform:A,B, powermax:DEGREE)"
    )


def _read_column(path: str, column: int) -> np.ndarray:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(",")
            if column >= len(fields):
                raise ConfigError(f"{path}: row has no column {column}")
            values.append(float(fields[column]))
    return np.asarray(values)


def _cmd_stats(args, parser) -> int:
    if args.acceptance:
        from .acceptance import run_acceptance

        numbers = [int(n) for n in args.criteria.split(",")] if args.criteria else None
        results = run_acceptance(seed=args.seed, numbers=numbers)
        lines = [r.report() for r in results]
        for line in lines:
            print(line)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write("\n".join(lines) + "\n")
        return 0 if all(r.passed for r in results) else 1
    if not args.input:
        parser.error("stats needs --input FILE or --acceptance")
    data = _read_column(args.input, args.column)
    if len(data) == 0:
        parser.error(f"no data rows in {args.input}")
    items = []
    if args.ks:
        items.append(st.ks_test(data, _parse_dist(args.ks), level=args.level))
    if args.cv:
        items.append(st.cv_report(data))
    if not items:
        parser.error("nothing to do: pass --ks SPEC and/or --cv")
    for item in items:
        print(item.line())
    if args.out:
        writer = write_report_csv if args.out.endswith(".csv") else write_report
        writer(items, args.out)
    return 0 if all(getattr(i, "passed", True) for i in items) else 1


# ---------------------------------------------------------------------------
# render


def _cmd_render(args) -> int:
    log = read_event_log(args.events)
    t = args.time if args.time is not None else (0.0 if math.isinf(log.t_max) else log.t_max)
    snap = snapshot_at(log, t)
    style = SvgStyle(fill_mode="birth" if args.color_by_birth else "none")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(render_svg(snap, style))
    print(f"rendered {len(snap)} cells at t={t:g} to {args.out}")
    return 0


# ---------------------------------------------------------------------------


def _load(args) -> RunConfig:
    cfg = load_config(args.config)
    if args.seed is not None:
        from dataclasses import replace

        cfg = replace(cfg, seed=args.seed)
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="celldiv",
        description="Simulate cell-division tessellations and verify their distributional laws.",
    )
    parser.add_argument("--version", action="version", version=f"celldiv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run_args(p):
        p.add_argument("-c", "--config", required=True, help="run configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out-dir", default=None, help="override the config output directory")

    p_sim = sub.add_parser("simulate", help="run the division process in a window")
    add_run_args(p_sim)
    p_sim.add_argument("--stit", action="store_true", help="force the hitting-measure life-time rule")
    p_sim.add_argument("--parallel", type=int, default=0, metavar="N", help="run replicates on N processes")
    p_sim.add_argument("--allow-truncation", action="store_true", help="exit 0 even when caps truncate the run")

    p_zc = sub.add_parser("zero-chain", help="backward zero-cell chain and explosion diagnostic")
    add_run_args(p_zc)

    p_fr = sub.add_parser("fragment", help="run the mass fragmentation chain")
    add_run_args(p_fr)

    p_st = sub.add_parser("stats", help="goodness-of-fit tests on data files, or the acceptance suite")
    p_st.add_argument("--input", help="comma-delimited data file ('#' lines are comments)")
    p_st.add_argument("--column", type=int, default=0, help="0-based column to read")
    p_st.add_argument("--ks", help="KS spec: exp:RATE | gamma:SHAPE,RATE | uniform:A,B | powermax:DEGREE")
    p_st.add_argument("--cv", action="store_true", help="moment / coefficient-of-variation report")
    p_st.add_argument("--level", type=float, default=0.01, help="test level (default 0.01)")
    p_st.add_argument("--acceptance", action="store_true", help="run the full acceptance suite")
    p_st.add_argument("--criteria", help="comma-separated criterion numbers for --acceptance (default: all)")
    p_st.add_argument("--seed", type=int, default=42, help="master seed for --acceptance")
    p_st.add_argument("--out", help="write the report to this file")

    p_rd = sub.add_parser("render", help="render a snapshot of an event log as SVG")
    p_rd.add_argument("--events", required=True, help="event log file")
    p_rd.add_argument("--time", type=float, default=None, help="snapshot time (default: t_max)")
    p_rd.add_argument("--out", required=True, help="output SVG path")
    p_rd.add_argument("--color-by-birth", action="store_true", help="fill cells by birth time")

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "zero-chain":
            return _cmd_zero_chain(args)
        if args.command == "fragment":
            return _cmd_fragment(args)
        if args.command == "stats":
            return _cmd_stats(args, parser)
        if args.command == "render":
            return _cmd_render(args)
    except (ConfigError, GeometryError, OSError) as exc:
        print(f"celldiv {args.command}: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
