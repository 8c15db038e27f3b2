"""``runoff`` command-line entry point.

Exit status: 0 on success, 2 on invalid input (the message names the flag),
3 when a computation runs out of memory or another resource.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import analytics, general_x, lattice, montecarlo
from .core import BinaryParams, ParameterError, ResourceError, RngStream, XLaw
from .figures import figure_recipes, fmt, write_csv
from .trees import SampleCaps, bgw_size, sample_diamond_tree

EXIT_INVALID = 2
EXIT_RESOURCE = 3


class UsageError(Exception):
    def __init__(self, flag: str, message: str):
        super().__init__(f"--{flag.replace('_', '-')}: {message}")

    @classmethod
    def wrap(cls, exc: ParameterError) -> "UsageError":
        return cls(exc.field, str(exc).removeprefix(f"{exc.field}: "))


# ---------------------------------------------------------------- output

def _json_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "null"
        if math.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return format(v, ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialise {type(v).__name__}")


def dumps(obj) -> str:
    """JSON with 17 significant digits, infinity as "inf" and NaN as null."""
    return _json_value(obj) + "\n"


def _emit(path: str | None, text: str) -> None:
    if path is None:
        return
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _check_writable(*paths) -> None:
    for flag, path in paths:
        if path in (None, "-"):
            continue
        parent = Path(path).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise UsageError(flag, f"cannot write to directory {parent}")


def _tail_fields(tail: analytics.Tail) -> dict:
    return {"tail_exponent": tail.exponent, "tail_constant": tail.constant}


def exact_record(s: analytics.ExactSolution) -> dict:
    return {"regime": s.regime.value, "alpha_c": s.alpha_c, "p0": s.p0, "expected_w": s.expected_w,
            "t0": s.t0, **_tail_fields(s.tail)}


def general_record(s: general_x.GeneralSolution) -> dict:
    return {"regime": s.regime.value, "m": s.m, "var_x": s.var_x, "alpha": s.alpha, "p0": s.p0,
            "expected_w": s.expected_w, "t0": s.t0, "h_at_t0": s.h_at_t0, "hprime1": s.h_prime_1,
            **_tail_fields(s.tail)}


def _estimate_record(e: montecarlo.Estimate | None) -> dict | None:
    if e is None:
        return None
    return {"value": e.value, "stderr": e.stderr, "exact": e.exact, "z": e.z}


def report_record(r: montecarlo.McReport) -> dict:
    tail = None
    if r.tail is not None:
        tail = {"exponent": r.tail.exponent, "constant": r.tail.constant, "x_min": r.tail.x_min,
                "n_points": r.tail.n_points, "hill_exponent": r.tail.hill_exponent}
    return {
        "alpha": r.alpha, "beta": r.beta, "seed": r.seed, "replicates": r.replicates,
        "truncated_fraction": r.truncated_fraction,
        "exact": exact_record(r.exact),
        "p0": _estimate_record(r.p0),
        "mean_w": _estimate_record(r.mean_w), "mean_w_note": r.mean_w_note,
        "mean_y": _estimate_record(r.mean_y),
        "tail_fit": tail, "tail_note": r.tail_note,
        "notes": list(r.notes),
    }


# ---------------------------------------------------------------- commands

def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(name, "is required")


def _binary(args) -> BinaryParams:
    _require(args, "alpha", "beta")
    try:
        return BinaryParams(args.alpha, args.beta)
    except ParameterError as exc:
        raise UsageError.wrap(exc) from exc


def cmd_exact(args) -> None:
    _check_writable(("json", args.json))
    s = analytics.solve(_binary(args))
    rec = exact_record(s)
    if args.json is not None:
        _emit(args.json, dumps(rec))
    else:
        for k, v in rec.items():
            print(f"{k:14s} {v}")


def cmd_exact_general(args) -> None:
    _require(args, "x_pmf")
    _check_writable(("json", args.json))
    try:
        x = XLaw.from_json(args.x_pmf)
    except (ValueError, TypeError, AttributeError) as exc:
        raise UsageError("x_pmf", str(exc)) from exc
    try:
        s = general_x.solve_general(x)
    except ParameterError as exc:
        raise UsageError("x_pmf", str(exc)) from exc
    except (general_x.NotUnimodalError, general_x.InconsistentRegimeError) as exc:
        raise UsageError("x_pmf", str(exc)) from exc
    rec = general_record(s)
    if args.json is not None:
        _emit(args.json, dumps(rec))
    else:
        for k, v in rec.items():
            print(f"{k:14s} {v}")


def cmd_lattice(args) -> None:
    _require(args, "m", "n", "rho", "delta")
    _check_writable(("out", args.out), ("stats", args.stats), ("png", args.png))
    try:
        p = lattice.LatticeParams(args.m, args.n, args.rho, args.delta, RngStream(args.seed))
    except ParameterError as exc:
        raise UsageError.wrap(exc) from exc
    f = lattice.simulate_lattice(p)
    img = lattice.render_grayscale(f)
    if args.out == "-":
        sys.stdout.buffer.write(img)
    else:
        Path(args.out).write_bytes(img)
    if args.png:
        Path(args.png).write_bytes(lattice.render_png(f))
    if args.stats:
        s = lattice.bottom_row_stats(f)
        write_csv(Path(args.stats), "seed,m,n,rho,delta,wet_fraction,mean_bottom,max_runoff",
                  [(str(args.seed), str(p.m), str(p.n), p.rho, p.delta, s.wet_fraction, s.mean_runoff, s.max_runoff)])


def _caps(args) -> SampleCaps:
    try:
        return SampleCaps(args.max_nodes, args.max_height)
    except ParameterError as exc:
        raise UsageError.wrap(exc) from exc


def cmd_trees(args) -> None:
    _require(args, "beta")
    _check_writable(("out", args.out))
    if args.count < 1:
        raise UsageError("count", "must be >= 1")
    caps = _caps(args)
    beta = args.beta
    if args.sampler == "diamond":
        if not 0 < beta < 1:
            raise UsageError("beta", "diamond sampler needs beta in (0, 1)")
        rows = []
        for r in range(args.count):
            t = sample_diamond_tree(beta, RngStream(args.seed, r), caps)
            rows.append((r, t.n_nodes, t.height, int(t.truncated)))
    else:
        if not 0 <= beta <= 1:
            raise UsageError("beta", "must lie in [0, 1]")
        rows = []
        for r in range(args.count):
            n, height, truncated = bgw_size(beta, RngStream(args.seed, r), caps)
            rows.append((r, n, height, int(truncated)))
    lines = ["replicate,n_nodes,height,truncated"] + [",".join(map(str, row)) for row in rows]
    _emit(args.out, "\n".join(lines) + "\n")


def cmd_verify(args) -> None:
    p = _binary(args)
    _check_writable(("json", args.json), ("csv", args.csv))
    if args.replicates < montecarlo.MIN_REPLICATES:
        raise UsageError("replicates", f"need at least {montecarlo.MIN_REPLICATES}")
    caps = _caps(args)
    threads = montecarlo.resolve_threads(args.threads)
    table = montecarlo.run_replicates(p, args.replicates, args.seed, caps, track_contrib=True, threads=threads)
    rep = montecarlo.estimate(p, args.replicates, caps, args.seed, table=table)
    _emit(args.json if args.json is not None else "-", dumps(report_record(rep)))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("replicate,n_nodes,height,w0,contrib_height,truncated\n")
            for r in range(len(table)):
                fh.write(f"{r},{table.n_nodes[r]},{table.height[r]},{table.w0[r]},"
                         f"{table.contrib_height[r]},{int(table.truncated[r])}\n")


def cmd_phase(args) -> None:
    _check_writable(("out", args.out))
    try:
        grid = general_x.example1_phase_grid(args.step)
    except ParameterError as exc:
        raise UsageError("step", str(exc)) from exc
    lines = ["a,b,hprime1,regime"] + [f"{fmt(a)},{fmt(b)},{fmt(h)},{r}" for a, b, h, r in grid.rows()]
    _emit(args.out, "\n".join(lines) + "\n")


def cmd_figures(args) -> None:
    for path in figure_recipes(args.outdir, seed=args.seed):
        print(path)


COMMANDS = {
    "exact": cmd_exact, "exact-general": cmd_exact_general, "lattice": cmd_lattice,
    "trees": cmd_trees, "verify": cmd_verify, "phase": cmd_phase, "figures": cmd_figures,
}


# ---------------------------------------------------------------- parsing

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d if suppress else 0, help="master random seed")
    p.add_argument("--threads", type=int, default=d if suppress else 1, help="worker threads (0 = one per CPU)")
    p.add_argument("--manifest", default=d, help="write the resolved configuration as JSON to this path")
    p.add_argument("--config", default=d, help="JSON file whose keys mirror the command-line flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="runoff", description="Runoff on drainage trees and hill-slope lattices.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_):
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        return sp

    def caps_flags(sp, max_nodes=10**7):
        sp.add_argument("--max-nodes", type=int, default=max_nodes)
        sp.add_argument("--max-height", type=int, default=10**6)

    sp = command("exact", "closed-form solution for binary X")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--json", nargs="?", const="-", help="write JSON to this path ('-' or no value: stdout)")

    sp = command("exact-general", "closed-form solution for a general left-continuous X (beta = 1/2)")
    sp.add_argument("--x-pmf", help='JSON object, e.g. \'{"-1":0.6,"0":0.3,"1":0.1}\'')
    sp.add_argument("--json", nargs="?", const="-")

    sp = command("lattice", "simulate the hill-slope lattice")
    sp.add_argument("--m", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--rho", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--out", default="field.pgm", help="PGM image path ('-' for stdout)")
    sp.add_argument("--png", help="also write a PNG (needs Pillow)")
    sp.add_argument("--stats", help="bottom-row statistics CSV")

    sp = command("trees", "sample drainage trees and record their sizes")
    sp.add_argument("--beta", type=float)
    sp.add_argument("--count", type=int, default=1000)
    sp.add_argument("--sampler", choices=("bgw", "diamond"), default="bgw")
    caps_flags(sp)
    sp.add_argument("--out", default="-")

    sp = command("verify", "Monte Carlo check against the closed forms")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--replicates", type=int, default=100_000)
    caps_flags(sp)
    sp.add_argument("--json", nargs="?", const="-", help="report path (default stdout)")
    sp.add_argument("--csv", help="per-replicate samples")

    sp = command("phase", "phase diagram of X in {-1, 0, 1} at beta = 1/2")
    sp.add_argument("--step", type=float, default=0.005)
    sp.add_argument("--out", default="-")

    sp = command("figures", "write the inputs for every standard figure")
    sp.add_argument("--outdir", default="figures")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, ValueError) as exc:
        raise UsageError("config", str(exc)) from exc
    if not isinstance(cfg, dict):
        raise UsageError("config", "must hold a JSON object")
    explicit = vars(parser.parse_args(argv))
    defaults = vars(parser.parse_args([args.command]))
    for key, value in cfg.items():
        dest = key.lstrip("-").replace("-", "_")
        if dest == "command":
            continue
        if dest not in explicit:
            raise UsageError(dest, f"unknown key in {args.config}")
        if dest == "x_pmf" and isinstance(value, dict):
            value = json.dumps(value)
        # flags given on the command line win over the file
        if explicit[dest] == defaults.get(dest):
            setattr(args, dest, value)
    return args


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config(parser, argv)
        if args.seed < 0 or args.seed >= 2**64:
            raise UsageError("seed", "must be a 64-bit unsigned integer")
        if args.threads < 0:
            raise UsageError("threads", "must be >= 0")
        if args.manifest:
            _check_writable(("manifest", args.manifest))
        COMMANDS[args.command](args)
        if args.manifest:
            _emit(args.manifest, dumps({k: v for k, v in vars(args).items() if k != "manifest"}))
    except UsageError as exc:
        print(f"runoff: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ParameterError as exc:
        print(f"runoff: error: {UsageError.wrap(exc)}", file=sys.stderr)
        return EXIT_INVALID
    except (ResourceError, MemoryError) as exc:
        print(f"runoff: resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    return 0


if __name__ == "__main__":
    sys.exit(main())
