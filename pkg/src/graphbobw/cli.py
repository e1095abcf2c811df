"""Command-line front end.

    graphbobw run CONFIG [--out DIR]
    graphbobw sweep CONFIG --horizons T1 T2 ... [--out DIR]
    graphbobw plot TRACE_CSV OUT_SVG [--title TEXT]
    graphbobw graph-info (--family NAME --K K [--edge-prob P] [--graph-seed S] | --file GRAPH_JSON)

Global flags (before or after the command): --seed, --force, --quiet.
GBL_THREADS caps the number of worker processes used for replications.
Exit status: 0 success, 1 runtime failure, 2 invalid input.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import svgplot
from .config import ConfigError, load_config
from .graph import FAMILIES, GraphError, greedy_dominating_set, load_graph, make_graph, unobservable_arms
from .harness import TraceFormatError, read_trace_csv, run_replicated, trace_csv

log = logging.getLogger("graphbobw")

RUN_FILES = ("trace.csv", "events.json", "summary.txt")


class UsageError(Exception):
    pass


def _global_flags(suppress):
    p = argparse.ArgumentParser(add_help=False)
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=default, help="override the config's base seed")
    p.add_argument("--force", action="store_true", default=default if suppress else False,
                   help="overwrite existing outputs")
    p.add_argument("--quiet", action="store_true", default=default if suppress else False,
                   help="only report errors")
    return p


def build_parser():
    parser = argparse.ArgumentParser(
        prog="graphbobw", parents=[_global_flags(False)],
        description="Best-of-both-worlds bandits with graph feedback: experiments, sweeps and plots.",
        epilog="Environment: GBL_THREADS caps replication parallelism.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(True)]

    p = sub.add_parser("run", parents=common, help="run a replicated experiment from a JSON config")
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path, help="output directory (default: output_dir from the config)")

    p = sub.add_parser("sweep", parents=common, help="run the config at several horizons")
    p.add_argument("config", type=Path)
    p.add_argument("--horizons", type=int, nargs="+", required=True)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("plot", parents=common, help="render a trace CSV as a standalone SVG")
    p.add_argument("trace", type=Path)
    p.add_argument("out_svg", type=Path)
    p.add_argument("--title")

    p = sub.add_parser("graph-info", parents=common, help="describe a feedback graph")
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--K", type=int)
    p.add_argument("--edge-prob", type=float)
    p.add_argument("--graph-seed", type=int)
    p.add_argument("--file", type=Path, help="graph JSON file")
    return parser


def _out_dir(args, cfg):
    out = args.out or cfg.output_dir
    if out is None:
        raise UsageError("no output directory: pass --out or set output_dir in the config")
    return Path(out)


def _claim(out: Path, names, force):
    clash = [n for n in names if (out / n).exists()]
    if clash and not force:
        raise UsageError(f"{out} already holds {', '.join(clash)}; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)


def _summary(cfg, rc, agg) -> str:
    runs = agg.runs
    finals = agg.final_regrets
    detected = sum(1 for r in runs if r.detect_round is not None)
    graph = rc.resolve_graph()
    K = len(runs[0].pull_counts)
    mean_pulls = [sum(r.pull_counts[k] for r in runs) / len(runs) for k in range(K)]
    lines = [
        f"policy: {rc.policy}",
        f"graph: K={graph.K} edges={len(graph.edges)}",
        f"dominating set: {list(runs[0].dom)}",
        f"environment: {json.dumps(cfg.environment, sort_keys=True)}",
        f"horizon: {rc.horizon}",
        f"delta: {rc.delta}",
        f"seeds: {rc.seed}..{rc.seed + len(runs) - 1}",
        f"final regret mean: {agg.mean[-1]:.6f}",
        f"final regret std: {agg.std[-1]:.6f}",
        f"final regret q05/q95: {agg.q05[-1]:.6f} / {agg.q95[-1]:.6f}",
        f"final regret min/max: {min(finals):.6f} / {max(finals):.6f}",
        f"runs with adversary detection: {detected}/{len(runs)}",
        "mean pulls per arm: " + ", ".join(f"{k + 1}:{p:.1f}" for k, p in enumerate(mean_pulls)),
    ]
    return "\n".join(lines) + "\n"


def _events_json(agg) -> str:
    if len(agg.runs) == 1:
        d = dict(agg.runs[0].events_dict(), seed=agg.runs[0].seed)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    return json.dumps([dict(r.events_dict(), seed=r.seed) for r in agg.runs], indent=2, sort_keys=True) + "\n"


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_run(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg)
    names = RUN_FILES + (("regret.svg",) if cfg.plot["enabled"] else ())
    _claim(out, names, args.force)
    rc = cfg.run_config()
    agg = run_replicated(rc, cfg.n_seeds)
    trace = trace_csv(agg.runs[0] if cfg.n_seeds == 1 else agg)
    (out / "trace.csv").write_text(trace)
    (out / "events.json").write_text(_events_json(agg))
    (out / "summary.txt").write_text(_summary(cfg, rc, agg))
    if cfg.plot["enabled"]:
        _plot_text(trace, out / "regret.svg", cfg.plot["title"] or f"{rc.policy} regret")
    log.info("wrote %s (mean final regret %.3f)", out, agg.mean[-1])
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args)
    hs = args.horizons
    if any(b <= a for a, b in zip(hs, hs[1:])) or hs[0] < 1:
        raise UsageError(f"horizons must be positive and strictly increasing, got {hs}")
    out = _out_dir(args, cfg)
    _claim(out, ["sweep.csv"] + [f"trace_T{T}.csv" for T in hs], args.force)
    rows = ["T,mean_regret,std"]
    for T in hs:
        agg = run_replicated(cfg.run_config(T), cfg.n_seeds)
        (out / f"trace_T{T}.csv").write_text(trace_csv(agg.runs[0] if cfg.n_seeds == 1 else agg))
        rows.append(f"{T},{agg.mean[-1]!r},{agg.std[-1]!r}")
        log.info("T=%d mean regret %.3f", T, agg.mean[-1])
    (out / "sweep.csv").write_text("\n".join(rows) + "\n")
    return 0


def _plot_text(text, out_svg: Path, title):
    cols = read_trace_csv(text)
    if "regret" in cols:
        svg = svgplot.render(cols["round"], cols["regret"], title=title)
    else:
        svg = svgplot.render(cols["round"], cols["regret_mean"], band=(cols["regret_q05"], cols["regret_q95"]),
                             title=title)
    out_svg.write_text(svg)


def cmd_plot(args) -> int:
    try:
        text = args.trace.read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    if args.out_svg.exists() and not args.force:
        raise UsageError(f"{args.out_svg} exists; pass --force to overwrite")
    try:
        _plot_text(text, args.out_svg, args.title or args.trace.stem)
    except TraceFormatError as exc:
        raise UsageError(f"{args.trace}: {exc}") from None
    return 0


def cmd_graph_info(args) -> int:
    if args.file:
        g = load_graph(args.file)
    elif args.family and args.K is not None:
        g = make_graph(args.family, args.K, args.edge_prob, args.graph_seed)
    else:
        raise UsageError("graph-info needs --file or --family with --K")
    print(f"K: {g.K}")
    print(f"edges: {len(g.edges)}")
    missing = unobservable_arms(g)
    if missing:
        print("observable: NOT OBSERVABLE")
        print(f"uncovered arms: {missing}")
        return 0
    dom = greedy_dominating_set(g)
    print("observable: yes")
    print(f"dominating set: {list(dom.members)}")
    print(f"dominating set size: {len(dom)}")
    return 0


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "plot": cmd_plot, "graph-info": cmd_graph_info}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError, GraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
