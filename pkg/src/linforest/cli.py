"""Command-line interface: ``linforest <subcommand> ...``.

Exit codes: 0 success, 1 invalid decomposition (or a failed nibble run),
2 I/O or parameter errors. Errors are also written to stderr as one JSON
object ``{"error": <kind>, "message": <text>}``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import gen
from .errors import LinforestError, NibbleFailure, RetryableError
from .graph import ForestDecomposition, format_edge_list, la_lower_bound, read_edge_list, verify_decomposition
from .nibble import CSV_HEADER, NibbleConfig, nibble_run
from .oracle import exact_la
from .partition import partition_vertices
from .pipeline import MODES, PipelineConfig, decompose

BENCH_HEADER = ["n", "d", "method", "seed", "count", "lower_bound", "ratio", "used", "wall_time"]

BENCH_HELP = """\
CSV columns: n, d, method, seed, count (forests), lower_bound (max(ceil(d/2),
ceil(m/(n-1)))), ratio (count / (d/2)), used (method that produced the
result after fallbacks), wall_time (seconds)."""

NIBBLE_HELP = """\
CSV columns, one row per round (row 0 is the initial state): round,
residual_edges, A_u_min/A_u_mean/A_u_max (vertex palette sizes), d_i
(predicted vertex palette size), A_e_min/A_e_mean/A_e_max (edge palette
sizes over uncolored edges), a_i (predicted edge palette size), max_delta_C
(largest per-vertex increase of the short-cycle count), retries (redraws
used for the round)."""


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _make_graph(args: argparse.Namespace):
    kind = args.kind
    if kind == "random-regular":
        return gen.random_regular(args.n, args.d, args.seed)
    if kind == "circulant":
        return gen.circulant(args.n, args.offsets)
    if kind == "complete":
        return gen.complete_graph(args.n)
    if kind == "complete-bipartite":
        return gen.complete_bipartite(args.a, args.b)
    if kind == "cycle":
        return gen.cycle_graph(args.n)
    if kind == "path":
        return gen.path_graph(args.n)
    if kind == "star":
        return gen.star_graph(args.n)
    return gen.petersen_graph()


def cmd_gen(args) -> int:
    _emit(format_edge_list(_make_graph(args)), args.out)
    return 0


def cmd_partition(args) -> int:
    g = read_edge_list(args.input)
    vp = partition_vertices(g, args.t, args.c_window, args.seed)
    _emit(vp.to_json() + "\n", args.out)
    return 0


def cmd_decompose(args) -> int:
    g = read_edge_list(args.input)
    cfg = PipelineConfig(mode=args.method, t_override=args.t, epsilon=args.epsilon, seed=args.seed,
                         lam=args.lam, gamma_coeff=args.gamma_coeff)
    dec, report = decompose(g, cfg)
    _emit(dec.to_json() + "\n", args.out)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_verify(args) -> int:
    g = read_edge_list(args.input)
    dec = ForestDecomposition.from_json(Path(args.forests).read_text())
    rep = verify_decomposition(g, dec)
    out = {"valid": rep.valid, "count": rep.count, "lower_bound": la_lower_bound(g)}
    if not rep.valid:
        out.update(reason=rep.reason, forest=rep.forest_index, edge=list(rep.edge) if rep.edge else None)
    print(json.dumps(out, sort_keys=True))
    return 0 if rep.valid else 1


def cmd_oracle(args) -> int:
    print(exact_la(read_edge_list(args.input), args.edge_cap))
    return 0


def cmd_nibble_stats(args) -> int:
    g = read_edge_list(args.input)
    cfg = NibbleConfig(seed=args.seed, retries=args.retries, palette_tol=args.palette_tol, rounding=args.rounding)
    try:
        out = nibble_run(g, args.epsilon, None, cfg)
        stats, code = out.stats, 0
    except NibbleFailure as exc:
        stats, code = exc.log or [], 1
        _error("nibble_failure", str(exc))
    _emit(_csv_text(CSV_HEADER, [s.row() for s in stats]), args.out)
    return code


def cmd_bench(args) -> int:
    rows = []
    for n in args.n:
        for d in args.d:
            for seed in args.seeds:
                g = gen.random_regular(n, d, seed)
                for method in args.methods:
                    t0 = time.perf_counter()
                    dec, rep = decompose(g, PipelineConfig(mode=method, seed=seed))
                    wall = time.perf_counter() - t0
                    rows.append([n, d, method, seed, dec.count, la_lower_bound(g),
                                 round(dec.count / (d / 2), 6), rep["used"], round(wall, 3)])
    _emit(_csv_text(BENCH_HEADER, rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="linforest", description="Linear forest decompositions of graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a graph as an edge list")
    g.add_argument("--kind", default="random-regular",
                   choices=["random-regular", "circulant", "complete", "complete-bipartite", "cycle", "path", "star", "petersen"])
    g.add_argument("--n", type=int, default=0, help="vertex count (leaf count for star)")
    g.add_argument("--d", type=int, default=0)
    g.add_argument("--offsets", type=_int_list, default=[], help="circulant offsets, e.g. 1,3")
    g.add_argument("--a", type=int, default=0)
    g.add_argument("--b", type=int, default=0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    pt = sub.add_parser("partition", help="balanced vertex partition of a regular graph")
    pt.add_argument("--in", dest="input", required=True)
    pt.add_argument("--t", type=int, required=True)
    pt.add_argument("--c-window", type=float, default=100.0)
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--out")
    pt.set_defaults(func=cmd_partition)

    dc = sub.add_parser("decompose", help="decompose a graph into linear forests")
    dc.add_argument("--method", choices=MODES, default="main")
    dc.add_argument("--t", type=int, help="even number of parts (default: chosen from d)")
    dc.add_argument("--epsilon", type=float)
    dc.add_argument("--lam", type=float, help="second eigenvalue (default: estimated)")
    dc.add_argument("--gamma-coeff", type=float, default=104.0)
    dc.add_argument("--seed", type=int, default=0)
    dc.add_argument("--in", dest="input", required=True)
    dc.add_argument("--out")
    dc.add_argument("--report")
    dc.set_defaults(func=cmd_decompose)

    vf = sub.add_parser("verify", help="check a decomposition; exit 0 iff valid")
    vf.add_argument("--in", dest="input", required=True)
    vf.add_argument("--forests", required=True)
    vf.set_defaults(func=cmd_verify)

    orc = sub.add_parser("oracle", help="exact linear arboricity of a tiny graph")
    orc.add_argument("--in", dest="input", required=True)
    orc.add_argument("--edge-cap", type=int, default=18)
    orc.set_defaults(func=cmd_oracle)

    nb = sub.add_parser("nibble-stats", help="per-round nibble statistics as CSV",
                        epilog=NIBBLE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    nb.add_argument("--in", dest="input", required=True)
    nb.add_argument("--epsilon", type=float, default=0.1)
    nb.add_argument("--seed", type=int, default=0)
    nb.add_argument("--retries", type=int, default=5)
    nb.add_argument("--palette-tol", type=float, default=0.25)
    nb.add_argument("--rounding", choices=["stochastic", "ceil"], default="stochastic")
    nb.add_argument("--out")
    nb.set_defaults(func=cmd_nibble_stats)

    bn = sub.add_parser("bench", help="sweep random regular graphs and methods",
                        epilog=BENCH_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    bn.add_argument("--n", type=_int_list, default=[2048])
    bn.add_argument("--d", type=_int_list, default=[8, 16, 32, 64])
    bn.add_argument("--methods", type=lambda s: [m for m in s.split(",") if m], default=["baseline", "main"])
    bn.add_argument("--seeds", type=_int_list, default=[0])
    bn.add_argument("--out")
    bn.set_defaults(func=cmd_bench)
    return p


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if getattr(args, "methods", None):
        bad = [m for m in args.methods if m not in MODES]
        if bad:
            _error("parameter", f"unknown methods {bad}")
            return 2
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        _error("io", str(exc))
        return 2
    except RetryableError as exc:
        _error("retry_budget", str(exc))
        return 2
    except (LinforestError, ValueError) as exc:
        _error("parameter", f"{type(exc).__name__}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
