"""Command-line driver: ``walkconv <subcommand> [options]``.

Exit status is 0 on success, 1 on validation errors and 2 on usage errors.
Any option can also come from ``--config FILE`` (a JSON object keyed by option
name, or an experiment report, whose ``config`` block is used); options given on
the command line win.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .bounds import (
    bound_report,
    bound_sweep,
    epsilon_for_confidence,
    periodic_rate,
    write_bound_sweep,
)
from .embed import ObjectiveConfig, normalized_objective_value, train, write_embedding
from .errors import WalkConvError
from .graph import build_transition, read_edge_file
from .limits import corpus_error, expected_frequency_matrix, omega_matrix, write_coo_matrix, write_dense_matrix
from .planner import compare_strategies, plan
from .spectral import spectrum_report
from .walker import WalkConfig, generate_corpus, read_corpus, relative_frequencies, write_corpus

# Options that never change a command's results and are left out of report configs.
_NOT_RECORDED = {"config", "out", "format", "threads", "timings"}


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(float(x)) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _start(text):
    if isinstance(text, (list, int)):
        return text
    if text in ("uniform", "stationary"):
        return text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            "start must be 'uniform', 'stationary', a vertex id or comma-separated probabilities"
        ) from None


def _L_range(text):
    try:
        lo, hi = (int(x) for x in str(text).split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LMIN:LMAX") from None
    return f"{lo}:{hi}"


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--graph", help="edge-list file: 'src dst [weight]' per line")
    common.add_argument("--directed", action="store_true", default=False, help="treat edges as arcs")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("json", "tsv"), default=None)
    common.add_argument("--threads", type=int, default=1, help="worker threads for corpus sampling")
    common.add_argument("--config", help="JSON file supplying default option values")

    parser = argparse.ArgumentParser(prog="walkconv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"walkconv {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    subs = {}

    def add(name, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        subs[name] = p
        return p

    p = add("walk", "sample a co-occurrence corpus")
    p.add_argument("--N", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--start", type=_start, default="uniform")

    p = add("limit", "exact expected frequencies (with --L) or the limit matrix omega")
    p.add_argument("--L", type=int)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--start", type=_start, default="uniform")
    p.add_argument("--coo", action="store_true", default=False, help="sparse i<TAB>j<TAB>value rows")

    add("spectrum", "normalized Laplacian spectrum, mixing factors and Doeblin constants")

    p = add("bounds", "concentration and walk-length bias bounds")
    p.add_argument("--N", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--start", type=_start, default="uniform")
    p.add_argument("--sweep", type=_L_range, help="LMIN:LMAX; emit per-pair error vs bound rows")

    p = add("plan", "choose N and L for a budget K = N (L - T)")
    p.add_argument("--K", type=int)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--g", type=float, default=1.0)
    p.add_argument("--T", type=int, default=10)

    p = add("embed", "train deterministic embeddings on a corpus")
    p.add_argument("--corpus", help="corpus TSV written by 'walk'; otherwise sampled from --graph")
    p.add_argument("--N", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--start", type=_start, default="uniform")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--iterations", type=int, default=200)
    p.add_argument("--reg", type=float, default=1e-3)

    p = add("e1", "convergence of the corpus as N or L grows")
    p.add_argument("--axis", choices=("N", "L"), default="N")
    p.add_argument("--grid", type=_int_list)
    p.add_argument("--fixed", type=int, help="L when varying N (default 40), N when varying L (default 80)")
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--seeds", type=int, default=5, help="number of seeds: seed, seed+1, ...")
    p.add_argument("--start", type=_start, default="uniform")
    p.add_argument("--timings", action="store_true", default=False)

    p = add("e2", "compare budget splits A (N=K), B (N=1) and C (heuristic)")
    p.add_argument("--K-grid", dest="K_grid", type=_int_list)
    p.add_argument("--T", type=int, default=10)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--strategy", action="append", choices=("A", "B", "C"))
    p.add_argument("--timings", action="store_true", default=False)
    return parser, subs


def _load_config(path):
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError(f"config file {path} must hold a JSON object")
    return cfg.get("config", cfg)


def parse_args(argv):
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        raise UsageError("a subcommand is required")
    if args.config:
        cfg = dict(_load_config(args.config))
        if cfg.pop("command", args.command) != args.command:
            raise UsageError(f"config was recorded for a different subcommand than {args.command!r}")
        known = {a.dest for a in subs[args.command]._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        subs[args.command].set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _recorded(args):
    return {k: v for k, v in vars(args).items() if k not in _NOT_RECORDED}


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s) " + ", ".join("--" + m for m in missing))


def _model(args):
    _need(args, "graph")
    return build_transition(read_edge_file(args.graph, directed=args.directed))


def _json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _cfg(args, N, L):
    return WalkConfig(N=N, L=L, T=args.T, start=args.start, seed=args.seed)


def cmd_walk(args):
    _need(args, "N", "L")
    corpus = generate_corpus(_model(args), _cfg(args, args.N, args.L), threads=args.threads)
    if (args.format or "tsv") == "tsv":
        buf = io.StringIO()
        write_corpus(corpus, buf)
        return buf.getvalue()
    coo = corpus.counts.tocoo()
    order = np.lexsort((coo.col, coo.row))
    return _json(
        {
            "config": _recorded(args),
            "total": corpus.total,
            "counts": [[int(i), int(j), int(m)] for i, j, m in zip(coo.row[order], coo.col[order], coo.data[order])],
        }
    )


def cmd_limit(args):
    tm = _model(args)
    if args.L is None:
        M, kind = omega_matrix(tm, args.T), "omega"
    else:
        M, kind = expected_frequency_matrix(tm, args.L, args.T, args.start), "expected"
    if (args.format or "tsv") == "tsv":
        buf = io.StringIO()
        (write_coo_matrix if args.coo else write_dense_matrix)(M, buf)
        return buf.getvalue()
    return _json({"config": _recorded(args), "kind": kind, "matrix": M.tolist()})


def cmd_spectrum(args):
    report = spectrum_report(_model(args))
    if (args.format or "json") == "tsv":
        if report["eigenvalues"] is None:
            raise WalkConvError("eigenvalue table needs an undirected graph")
        return "".join(f"{k}\t{lam:.17g}\n" for k, lam in enumerate(report["eigenvalues"], start=1))
    return _json(report)


def cmd_bounds(args):
    tm = _model(args)
    if args.sweep:
        lo, hi = (int(x) for x in args.sweep.split(":"))
        if lo <= args.T or hi < lo:
            raise UsageError("--sweep needs T < LMIN <= LMAX")
        if tm.directed and tm.period > 1:
            return _json({"config": _recorded(args), **periodic_rate(tm, args.T, range(lo, hi + 1), args.start)})
        buf = io.StringIO()
        write_bound_sweep(bound_sweep(tm, range(lo, hi + 1), args.T, args.start), buf)
        return buf.getvalue()
    _need(args, "N")
    eps = args.epsilon if args.epsilon is not None else epsilon_for_confidence(args.N, args.delta)
    rep = bound_report(tm, args.N, args.L, args.T, eps, args.start)
    out = {"config": _recorded(args), **rep.to_dict()}
    if math.isnan(out["U"]):
        out["U"] = None
    if (args.format or "json") == "tsv":
        return "\t".join(out_keys := [k for k in out if k != "config"]) + "\n" + "\t".join(str(out[k]) for k in out_keys) + "\n"
    return _json(out)


def cmd_plan(args):
    _need(args, "K")
    if args.K < 1:
        raise UsageError("--K must be >= 1")
    p = plan(args.K, args.delta, args.g, args.T).to_dict()
    if (args.format or "json") == "tsv":
        return "\t".join(p) + "\n" + "\t".join(str(v) for v in p.values()) + "\n"
    return _json(p)


def cmd_embed(args):
    if args.corpus:
        with open(args.corpus) as fh:
            corpus = read_corpus(fh)
    else:
        _need(args, "N", "L")
        corpus = generate_corpus(_model(args), _cfg(args, args.N, args.L), threads=args.threads)
    ocfg = ObjectiveConfig(dim=args.dim, reg=args.reg, learning_rate=args.lr, iterations=args.iterations, seed=args.seed)
    emb = train(corpus, ocfg)
    if (args.format or "tsv") == "tsv":
        buf = io.StringIO()
        write_embedding(emb, buf)
        return buf.getvalue()
    return _json(
        {
            "config": _recorded(args),
            "normalized_objective": normalized_objective_value(emb.Z, corpus, ocfg),
            "Z": emb.Z.tolist(),
        }
    )


def _loglog_slope(x, y):
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(x, y, 1)[0]) if len(x) > 1 else None


def _report(args, experiment, points, extra=None):
    rep = {"experiment": experiment, "version": __version__, "config": _recorded(args), "points": points}
    rep.update(extra or {})
    return rep


def run_e1(args):
    """Data behind ``e1``; returned as a report dict."""
    tm = _model(args)
    seeds = [args.seed + k for k in range(args.seeds)]
    if args.axis == "N":
        grid = [10, 100, 1000, 10000] if args.grid is None else args.grid
        L = args.fixed or 40
        reference = expected_frequency_matrix(tm, L, args.T, args.start)
    else:
        grid = [args.T + 1, 100, 1000] if args.grid is None else args.grid
        N = args.fixed or 80
        reference = omega_matrix(tm, args.T)
    if not grid or min(grid) < 1:
        raise UsageError("e1 grid must hold positive integers")
    points = []
    for x in grid:
        NL = (x, L) if args.axis == "N" else (N, x)
        t0 = time.perf_counter()
        errors, max_abs = [], []
        for s in seeds:
            cfg = WalkConfig(N=NL[0], L=NL[1], T=args.T, start=args.start, seed=s)
            freq = relative_frequencies(generate_corpus(tm, cfg, threads=args.threads))
            errors.append(corpus_error(freq, reference))
            max_abs.append(corpus_error(freq, reference, "max_abs"))
        point = {
            "x": x,
            "N": NL[0],
            "L": NL[1],
            "T": args.T,
            "seeds": seeds,
            "errors": errors,
            "mean_error": float(np.mean(errors)),
            "mean_max_abs_error": float(np.mean(max_abs)),
            "hoeffding_epsilon_95": epsilon_for_confidence(NL[0], 0.05),
        }
        if args.axis == "L" and not (tm.directed and tm.period > 1) and not (tm.bipartite and (NL[1] - args.T) % 2):
            try:
                point["U_max"] = float(bound_report(tm, NL[0], NL[1], args.T, 1.0, args.start).U)
            except WalkConvError:
                pass
        if args.timings:
            point["seconds"] = time.perf_counter() - t0
        points.append(point)
    slope = _loglog_slope([p["x"] for p in points], [p["mean_error"] for p in points])
    return _report(args, "e1_" + args.axis.lower(), points, {"loglog_slope": slope})


def cmd_e1(args):
    rep = run_e1(args)
    if (args.format or "json") == "tsv":
        lines = ["# " + json.dumps(rep["config"], sort_keys=True), "x\tN\tL\tmean_error\tmean_max_abs_error"]
        lines += [f"{p['x']}\t{p['N']}\t{p['L']}\t{p['mean_error']:.17g}\t{p['mean_max_abs_error']:.17g}" for p in rep["points"]]
        return "\n".join(lines) + "\n"
    return _json(rep)


def run_e2(args):
    tm = _model(args)
    grid = [2**10, 2**11, 2**12] if args.K_grid is None else args.K_grid
    if not grid or min(grid) < 1:
        raise UsageError("e2 K grid must hold integers >= 1")
    wanted = args.strategy or ["A", "B", "C"]
    seeds = [args.seed + k for k in range(args.seeds)]
    omega = omega_matrix(tm, args.T)
    points = []
    for K in grid:
        strategies = compare_strategies(K, args.T, args.delta)
        point = {"K": K, "strategies": {}}
        for name in wanted:
            N, L = strategies[name]
            t0 = time.perf_counter()
            errors = [
                corpus_error(
                    relative_frequencies(
                        generate_corpus(tm, WalkConfig(N=N, L=L, T=args.T, seed=s), threads=args.threads)
                    ),
                    omega,
                )
                for s in seeds
            ]
            entry = {"N": N, "L": L, "seeds": seeds, "errors": errors, "mean_error": float(np.mean(errors))}
            if args.timings:
                entry["seconds"] = time.perf_counter() - t0
            point["strategies"][name] = entry
        points.append(point)
    return _report(args, "e2", points)


def cmd_e2(args):
    rep = run_e2(args)
    if (args.format or "json") == "tsv":
        names = list(rep["points"][0]["strategies"]) if rep["points"] else []
        lines = ["# " + json.dumps(rep["config"], sort_keys=True), "\t".join(["K"] + names)]
        for p in rep["points"]:
            lines.append("\t".join([str(p["K"])] + [f"{p['strategies'][n]['mean_error']:.17g}" for n in names]))
        return "\n".join(lines) + "\n"
    return _json(rep)


COMMANDS = {
    "walk": cmd_walk,
    "limit": cmd_limit,
    "spectrum": cmd_spectrum,
    "bounds": cmd_bounds,
    "plan": cmd_plan,
    "embed": cmd_embed,
    "e1": cmd_e1,
    "e2": cmd_e2,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        text = COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else 2
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (WalkConvError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        with contextlib.suppress(BrokenPipeError):
            sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
