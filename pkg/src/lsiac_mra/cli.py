"""Command-line interface: lsiac-mra <subcommand> ..."""

from __future__ import annotations

import argparse
import logging
import sys

from . import experiments as ex
from .io import FormatError, read_decomposition, read_field, write_decomposition, write_field
from .mesh_basis import NonFiniteError
from .mra import decompose, reconstruct
from .refine import enhance

EXIT_OK, EXIT_USAGE, EXIT_NONFINITE = 0, 2, 3

log = logging.getLogger("lsiac_mra")


def _degrees(text: str) -> list[int]:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lsiac-mra",
        description="Line-SIAC multi-resolution enhancement of modal fields.",
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", help="L2-project a test function onto a uniform mesh")
    p.add_argument("--func", required=True, choices=sorted(ex.TEST_FUNCTIONS))
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--degree", type=int, required=True)
    p.add_argument("--quadrature", type=int, default=None, help="Gauss points per axis")
    p.add_argument("--out", required=True)

    p = sub.add_parser("refine", help="filter and project onto 2x refined meshes")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--strategy", choices=("once", "each"), required=True)
    p.add_argument("--stencil", action="store_true", help="use the cached transition stencil")
    p.add_argument("--out", required=True)

    p = sub.add_parser("mra", help="multiwavelet decomposition")
    msub = p.add_subparsers(dest="mra_command", required=True)
    for name in ("decompose", "reconstruct"):
        q = msub.add_parser(name)
        q.add_argument("--in", dest="inp", required=True)
        q.add_argument("--out", required=True)

    p = sub.add_parser("errors", help="L2 / Linf errors against a test function")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--func", required=True, choices=sorted(ex.TEST_FUNCTIONS))
    p.add_argument("--eval-n", type=int, required=True)
    p.add_argument("--exclude-pollution", action="store_true")
    p.add_argument("--coarse-n", type=int)
    p.add_argument("--level", type=int, choices=(0, 1, 2))
    p.add_argument("--nodes", type=int, default=6)
    p.add_argument("--normalize", choices=("included", "domain"), default="included")

    p = sub.add_parser("experiment", help="reproduce an error table")
    p.add_argument("--case", required=True, choices=sorted(ex.CASES))
    p.add_argument("--degrees", type=_degrees, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--markdown")
    p.add_argument("--full-precision", action="store_true")

    p = sub.add_parser("contour", help="sample |f - u_h| on a grid (2D)")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--func", required=True, choices=sorted(ex.TEST_FUNCTIONS))
    p.add_argument("--grid", type=int, required=True)
    p.add_argument("--out", required=True)
    return ap


def _run(args, ap: argparse.ArgumentParser) -> int:
    if args.command == "project":
        f = ex.get_test_function(args.func)
        if f.d != args.dim:
            ap.error(f"function {f.name} is {f.d}-dimensional, not {args.dim}")
        field = ex.project_test_function(f, args.n, args.degree, q=args.quadrature)
        write_field(field, args.out)
    elif args.command == "refine":
        field = read_field(args.inp)
        mode = "stencil" if args.stencil else "direct"
        write_field(enhance(field, args.levels, args.strategy, mode=mode), args.out)
    elif args.command == "mra":
        if args.mra_command == "decompose":
            write_decomposition(decompose(read_field(args.inp)), args.out)
        else:
            write_field(reconstruct(read_decomposition(args.inp)), args.out)
    elif args.command == "errors":
        if args.exclude_pollution and (args.coarse_n is None or args.level is None):
            ap.error("--exclude-pollution needs --coarse-n and --level")
        field = read_field(args.inp)
        f = ex.get_test_function(args.func)
        mask = None
        if args.exclude_pollution:
            N0 = args.coarse_n
            mask = ex.pollution_mask(f, N0, args.level, N0 * 2**args.level, field.p)
        rep = ex.compute_errors(field, f, args.eval_n, mask, args.nodes, normalize=args.normalize)
        print(f"L2 {rep.L2:.6e}")
        print(f"Linf {rep.Linf:.6e}")
        print(f"excluded {rep.excluded} of {rep.total}")
    elif args.command == "experiment":
        rows = ex.run_experiment(
            args.case, args.degrees, args.out, args.markdown, full_precision=args.full_precision
        )
        sys.stdout.write(ex.table_markdown(rows))
    elif args.command == "contour":
        field = read_field(args.inp)
        ex.emit_contour(field, ex.get_test_function(args.func), args.grid, args.out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return _run(args, ap)
    except NonFiniteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONFINITE
    except (ValueError, FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
