"""Command line front end.

Verbs:
    solve        one direct solve, metrics printed (optionally written)
    convergence  a ladder of grids with observed orders
    scaling      a ladder of worker counts with phase timings

A plain key=value file can provide any flag via --config; explicit flags win.
Exit code 0 on success; on failure a single machine-readable JSON line goes to
stderr and the exit code is nonzero.
"""

import argparse
import json
import sys

import numpy as np

from .errors import SingularSystemError
from .harness import (emit_table, make_problem, measure, run_convergence,
                      run_scaling)
from .oracle import dense_solve
from .solver import (PER_LINE_BATCH, PER_PLANE, Partitioned, Sequential,
                     SharedWorkers, SolverConfig)
from .stencil import SchemeKind

_SCHEMES = {"2": SchemeKind.SECOND_ORDER, "4": SchemeKind.FOURTH_ORDER,
            "6": SchemeKind.SIXTH_ORDER, "cd4": SchemeKind.CONVECTION_DIFFUSION_4}


def parse_config_file(path):
    """Read key=value lines; blank lines and # comments are ignored."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def _build_parser():
    parser = argparse.ArgumentParser(prog="helmfft",
                                     description="FFT-diagonalization direct solver benchmarks")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--scheme", choices=sorted(_SCHEMES), default=None)
        p.add_argument("--problem", choices=["const-k", "variable-k", "convdiff"],
                       default=None)
        p.add_argument("--grid", default=None,
                       help="N for a cube or NX,NY,NZ (cube required here)")
        p.add_argument("--mode", choices=["seq", "shared", "partitioned"], default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--parts", type=int, default=None)
        p.add_argument("--transform", choices=[PER_PLANE, PER_LINE_BATCH], default=None)
        p.add_argument("--format", dest="fmt", choices=["csv", "md"], default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--config", default=None, help="key=value defaults file")

    p_solve = sub.add_parser("solve", help="single direct solve")
    common(p_solve)
    p_solve.add_argument("--oracle", action="store_true",
                         help="cross-check against the dense solver (grids <= 8^3)")

    p_conv = sub.add_parser("convergence", help="grid-refinement study")
    common(p_conv)
    p_conv.add_argument("--grids", default=None, help="comma list, e.g. 125,250")

    p_scale = sub.add_parser("scaling", help="worker-count study")
    common(p_scale)
    p_scale.add_argument("--worker-list", default=None, help="comma list, e.g. 1,2,4")
    return parser


def _apply_config_file(args):
    if args.config is None:
        return args
    file_values = parse_config_file(args.config)
    for key, value in file_values.items():
        if not hasattr(args, key):
            raise ValueError(f"unknown config key {key!r}")
        if getattr(args, key) in (None, False):
            current = getattr(args, key)
            if isinstance(current, bool):
                setattr(args, key, value.lower() in ("1", "true", "yes"))
            elif key in ("workers", "parts"):
                setattr(args, key, int(value))
            else:
                setattr(args, key, value)
    return args


def _defaults(args):
    if args.scheme is None:
        args.scheme = "cd4" if args.problem == "convdiff" else "4"
    if args.problem is None:
        args.problem = "convdiff" if args.scheme == "cd4" else "variable-k"
    if args.mode is None:
        args.mode = "seq"
    if args.workers is None:
        args.workers = 1
    if args.parts is None:
        args.parts = 1
    if args.transform is None:
        args.transform = PER_PLANE
    if args.fmt is None:
        args.fmt = "csv"
    return args


def _grid_size(args):
    if args.grid is None:
        return 16
    parts = [int(tok) for tok in str(args.grid).split(",")]
    if len(parts) == 1:
        return parts[0]
    if len(parts) == 3:
        if parts[0] == parts[1] == parts[2]:
            return parts[0]
        raise ValueError("catalog problems use cubic grids; pass a single N")
    raise ValueError(f"bad --grid value {args.grid!r}")


def _solver_config(args):
    if args.mode == "seq":
        mode = Sequential()
    elif args.mode == "shared":
        mode = SharedWorkers(args.workers)
    else:
        mode = Partitioned(args.parts, args.workers)
    return SolverConfig(mode=mode, transform_parallelism=args.transform)


def _print_rows(rows):
    header = "scheme grid max_err l2_err l2_res setup_s transform_s exchange_s tridiag_s total_s"
    print(header)
    for row in rows:
        print(f"{row.scheme} {row.grid} {row.max_err:.7e} {row.l2_err:.7e} "
              f"{row.l2_res:.7e} {row.setup_s:.4f} {row.transform_s:.4f} "
              f"{row.exchange_s:.4f} {row.tridiag_s:.4f} {row.total_s:.4f}")


def _cmd_solve(args):
    n = _grid_size(args)
    scheme = _SCHEMES[args.scheme]
    problem = make_problem(args.problem, scheme, n)
    config = _solver_config(args)
    row, solution = measure(problem, config)
    _print_rows([row])
    if args.oracle:
        if max(problem.grid.n_x, problem.grid.n_y, problem.grid.n_z) > 8:
            raise ValueError("--oracle is limited to grids of at most 8^3")
        from .assembly import build_rhs
        rhs = build_rhs(problem.scheme, problem.source, problem.profile, problem.grid)
        ext = problem.boundary.closed_box(problem.grid)
        dense = dense_solve(rhs.values, ext, problem.scheme, problem.profile,
                            problem.grid)
        diff = np.abs(solution.ravel() - dense)
        scale = max(float(np.abs(dense).max()), 1e-300)
        rel = float(diff.max()) / scale
        print(f"oracle max relative deviation: {rel:.3e}")
        if rel > 1e-12:
            raise AssertionError(f"oracle mismatch: {rel:.3e} > 1e-12")
    if args.out:
        emit_table([row], args.fmt, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_convergence(args):
    scheme = _SCHEMES[args.scheme]
    if args.grids:
        sizes = [int(tok) for tok in args.grids.split(",")]
    else:
        sizes = [_grid_size(args)]
    rows, orders = run_convergence(scheme, args.problem, sizes, _solver_config(args))
    _print_rows(rows)
    for (n0, n1), order in zip(zip(sizes, sizes[1:]), orders):
        print(f"observed order {n0}->{n1}: {order:.3f}")
    if args.out:
        emit_table(rows, args.fmt, args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_scaling(args):
    scheme = _SCHEMES[args.scheme]
    counts = ([int(tok) for tok in args.worker_list.split(",")]
              if args.worker_list else [1, args.workers])
    mode = "partitioned" if args.mode == "partitioned" else "shared"
    rows = run_scaling(scheme, args.problem, _grid_size(args), counts, mode=mode,
                       transform_parallelism=args.transform)
    _print_rows(rows)
    base = rows[0].total_s
    for count, row in zip(counts, rows):
        speedup = base / row.total_s if row.total_s > 0 else float("nan")
        print(f"workers {count}: speedup {speedup:.2f}")
    if args.out:
        emit_table(rows, args.fmt, args.out)
        print(f"wrote {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config_file(args)
        args = _defaults(args)
        if args.verb == "solve":
            return _cmd_solve(args)
        if args.verb == "convergence":
            return _cmd_convergence(args)
        return _cmd_scaling(args)
    except SingularSystemError as exc:
        print(json.dumps({"error": "singular-system", "n": exc.n, "m": exc.m,
                          "detail": str(exc)}), file=sys.stderr)
        return 2
    except (ValueError, AssertionError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
