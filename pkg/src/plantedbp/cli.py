"""Command-line front end.

Subcommands: ``gen`` (sample a planted instance), ``bp`` (run the solver on a
graph file), ``spectral`` (color without the planted classes), ``verify``
(regularity report), ``lab`` (true-vs-linear trajectory diagnostics), and
``sweep`` (Monte Carlo grid).

Exit codes: 0 success, 1 algorithmic failure (solver missed, regularity
violated, power iteration did not converge), 2 usage error (bad flags,
missing or malformed files).  All file output is written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .engine import (
    BpParams,
    default_delta,
    init_aligned,
    init_balanced,
    init_independent,
    is_proper_coloring,
    matches_up_to_permutation,
    run_bpcol,
)
from .generate import GenParams, generate
from .graphs import GraphFormatError, build_arc_table, read_graph, write_graph
from .records import records_to_csv, write_atomic
from .spectral import (
    SpectralColoringError,
    estimate_epsilon,
    spectral_color,
    verify_r1,
)
from .sweep import SweepConfig, render_sweep_output, run_sweep
from .trajectory import trajectory_diagnostics

__all__ = ["main", "build_parser"]

_R1_TOL = 1e-9


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomic(out, text)


def _emit_json(payload, out: str | None) -> None:
    _emit(json.dumps(payload, indent=2) + "\n", out)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, list):
        return ";".join(
            str(v) if isinstance(v, (int, bool)) else repr(float(v))
            for v in value
        )
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _flat_csv(payload: dict) -> str:
    """One-row CSV of a payload dict; list values joined with semicolons."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(payload.keys())
    writer.writerow([_csv_cell(v) for v in payload.values()])
    return buf.getvalue()


def _emit_payload(payload: dict, args: argparse.Namespace) -> None:
    if getattr(args, "format", None) == "csv":
        _emit(_flat_csv(payload), args.out)
    else:
        _emit_json(payload, args.out)


def _load(path: str):
    try:
        return read_graph(path)
    except OSError as exc:
        raise GraphFormatError(f"cannot read {path!r}: {exc.strerror}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace) -> int:
    if args.format is not None:
        print(
            "note: gen writes the fixed graph text format; --format has no effect",
            file=sys.stderr,
        )
    graph, coloring = generate(
        GenParams(per_class=args.per_class, d=args.d, seed=args.seed)
    )
    buf = io.StringIO()
    write_graph(graph, coloring, buf, d=args.d)
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_bp(args: argparse.Namespace) -> int:
    graph, coloring, d_header = _load(args.graph)
    arc_table = build_arc_table(graph)
    n = graph.num_vertices
    delta = default_delta(n) if args.delta == "default" else float(args.delta)
    overrides: dict = {"delta": delta, "early_stop": not args.no_early_stop,
                       "seed": args.seed}
    if args.iters is not None:
        overrides["l_star"] = args.iters
    params = BpParams.for_size(n, **overrides)
    rng = np.random.default_rng(args.seed)
    colors, record = run_bpcol(
        graph, arc_table, params, rng, init_mode=args.init, coloring=coloring
    )
    if d_header > 0:
        record.d = d_header
    if coloring is not None and coloring.is_balanced():
        record.per_class = n // 3
    record.validate()
    if args.format == "csv":
        _emit(records_to_csv([record]), args.out)
    else:
        _emit_json(record.to_json_dict(), args.out)
    return 0 if record.success else 1


def cmd_spectral(args: argparse.Namespace) -> int:
    graph, coloring, d_header = _load(args.graph)
    if d_header <= 0:
        raise ValueError(
            "spectral coloring needs the degree parameter; "
            f"{args.graph!r} has d={d_header} in its header"
        )
    rng = np.random.default_rng(args.seed)
    try:
        colors = spectral_color(
            graph, d_header, cluster_tol=args.cluster_tol, rng=rng
        )
    except SpectralColoringError as exc:
        _emit_payload(
            {"success": False, "num_groups": exc.num_groups, "error": str(exc)},
            args,
        )
        return 1
    proper = is_proper_coloring(graph, colors)
    matches = None
    if coloring is not None:
        matches = proper and matches_up_to_permutation(colors, coloring.class_of)
    payload = {
        "success": bool(proper),
        "matches_planted": matches,
        "class_sizes": [int(c) for c in np.bincount(colors, minlength=3)],
        "colors": [int(c) for c in colors],
    }
    _emit_payload(payload, args)
    return 0 if proper else 1


def cmd_verify(args: argparse.Namespace) -> int:
    graph, coloring, d_header = _load(args.graph)
    if coloring is None or d_header <= 0:
        raise ValueError(
            f"verify needs coloring lines and a degree parameter in {args.graph!r}"
        )
    residuals = verify_r1(graph, coloring, d_header)
    r1 = float(residuals.max())
    if r1 > _R1_TOL:
        payload = {
            "r1_residual": r1,
            "epsilon_hat": None,
            "power_iters": 0,
            "converged": False,
        }
        _emit_payload(payload, args)
        return 1
    report = estimate_epsilon(
        graph, coloring, d_header,
        rng=np.random.default_rng(args.seed),
    )
    _emit_payload(json.loads(report.to_json()), args)
    return 0 if report.converged else 1


def cmd_lab(args: argparse.Namespace) -> int:
    graph, coloring, d_header = _load(args.graph)
    if coloring is None:
        raise ValueError(
            f"lab diagnostics need the planted coloring lines in {args.graph!r}"
        )
    arc_table = build_arc_table(graph)
    if args.init == "aligned":
        state, _ = init_aligned(graph, arc_table, coloring, args.delta)
    else:
        rng = np.random.default_rng(args.seed)
        init = init_balanced if args.init == "balanced" else init_independent
        state, _ = init(graph, arc_table, args.delta, rng)
    record = trajectory_diagnostics(
        graph,
        arc_table,
        state.delta,
        epsilon=args.epsilon,
        coloring=coloring,
        d=d_header if d_header > 0 else None,
        relaxed_tau=args.relaxed_tau,
    )
    if args.dump_trajectory is not None:
        write_atomic(args.dump_trajectory, record.trajectory_csv())
    _emit_payload(record.to_json_dict(), args)
    return 0 if record.proper_at_L3 else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    config = SweepConfig.from_file(args.config)
    out = args.out if args.out is not None else config.out
    fmt = args.format if args.format is not None else config.format
    records, summaries = run_sweep(config)
    text = render_sweep_output(records, summaries, fmt)
    if out is None:
        sys.stdout.write(text)
        if fmt == "csv":  # json already embeds the summary
            sys.stdout.write(json.dumps(summaries, indent=2) + "\n")
    else:
        write_atomic(out, text)
        write_atomic(
            out + ".summary.json", json.dumps(summaries, indent=2) + "\n"
        )
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plantedbp",
        description="planted 3-coloring instances, message passing, and "
        "spectral diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, default=0, help="PRNG seed")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", default=None, choices=("json", "csv"),
                       help="structured output format (default json; gen "
                       "always writes the graph text format)")

    p = sub.add_parser("gen", help="sample a planted d-regular instance")
    p.add_argument("--per-class", type=int, required=True, dest="per_class",
                   help="vertices per color class")
    p.add_argument("--d", type=int, required=True,
                   help="cross-class degree (each vertex: d edges to each "
                   "other class)")
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bp", help="run the message-passing solver")
    p.add_argument("graph", help="graph file")
    p.add_argument("--init", default="independent",
                   choices=("independent", "balanced", "aligned"))
    p.add_argument("--delta", default="default",
                   help="initial bias (float, or 'default' for exp(-ln^3 n))")
    p.add_argument("--iters", type=int, default=None,
                   help="iteration cap (default ceil(ln^4 n))")
    p.add_argument("--no-early-stop", action="store_true")
    common(p)
    p.set_defaults(func=cmd_bp)

    p = sub.add_parser("spectral", help="3-color without the planted classes")
    p.add_argument("graph", help="graph file")
    p.add_argument("--cluster-tol", type=float, default=1e-6,
                   dest="cluster_tol",
                   help="eigenvector coordinate clustering tolerance")
    common(p)
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("verify", help="regularity report for a planted file")
    p.add_argument("graph", help="graph file (must carry coloring and d)")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lab", help="true-vs-linear trajectory diagnostics")
    p.add_argument("graph", help="graph file (must carry the coloring)")
    p.add_argument("--epsilon", type=float, default=0.05,
                   help="linear-regime norm threshold")
    p.add_argument("--relaxed-tau", type=float, default=0.2,
                   dest="relaxed_tau",
                   help="relaxed feasibility threshold")
    p.add_argument("--delta", type=float, default=1e-30,
                   help="initial bias (default 1e-30, the fp noise floor)")
    p.add_argument("--init", default="aligned",
                   choices=("aligned", "balanced", "independent"))
    p.add_argument("--dump-trajectory", default=None, dest="dump_trajectory",
                   help="write per-iteration norms as CSV to this path")
    common(p)
    p.set_defaults(func=cmd_lab)

    p = sub.add_parser("sweep", help="seeded Monte Carlo grid")
    p.add_argument("--config", required=True, help="INI file with a [sweep] section")
    p.add_argument("--out", default=None, help="override the config's output path")
    p.add_argument("--format", default=None, choices=("csv", "json"),
                   help="override the config's output format")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except GraphFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:  # contradiction, budget, no convergence
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
