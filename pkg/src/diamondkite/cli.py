"""Command-line interface: ``diamondkite <command> ...``.

Exit codes: 0 success, 1 invariant violation, 2 usage or format error,
3 patch boundary violation.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .adapt import DEFAULT_MAX_LEVEL, AdaptReport, adapt, refine_to_size
from .derived import stats
from .errors import BoundaryViolation, DiamondKiteError, FormatError, InconsistentRadius, NonTermination
from .io import LAYERS, parse, parse_size, render_svg, serialize
from .lattice import join, meet
from .mesh import initial_patch, replay
from .verify import verify_mesh

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE, EXIT_BOUNDARY = 0, 1, 2, 3


def _read(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _adapt_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--size", required=True, help="size field, e.g. circle:r=4,scale=0.2")
    p.add_argument("--order", choices=("fifo", "lifo"), default="fifo")
    p.add_argument("--sampling", choices=("exact", "vertices"), default="exact")
    p.add_argument("--max-level", type=int, default=DEFAULT_MAX_LEVEL)
    p.add_argument(
        "--boundary",
        choices=("raise", "skip"),
        default="raise",
        help="on refinement leaving the patch: fail (exit 3) or leave the face as is",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diamondkite", description="Diamond-kite adaptive quadrilateral meshes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="refine a fresh patch to a size field")
    p.add_argument("--radius", type=int, required=True)
    _adapt_options(p)
    p.add_argument("-o", "--output")
    p.add_argument("--report")

    p = sub.add_parser("adapt", help="refine and coarsen an existing mesh to a new size field")
    p.add_argument("-i", "--input", required=True)
    _adapt_options(p)
    p.add_argument("-o", "--output")
    p.add_argument("--report")

    p = sub.add_parser("render", help="draw a mesh as SVG")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--layers", default="faces", help=f"comma list of {','.join(LAYERS)}")
    p.add_argument("--precision", type=int, default=6)
    p.add_argument("-o", "--output")

    p = sub.add_parser("stats", help="mesh statistics and size ratios")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--size")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")

    p = sub.add_parser("lattice", help="meet or join of two meshes on the same patch")
    p.add_argument("op", choices=("meet", "join"))
    p.add_argument("-a", required=True)
    p.add_argument("-b", required=True)
    p.add_argument("-o", "--output")

    p = sub.add_parser("verify", help="run every invariant check")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--size")
    p.add_argument("-o", "--output")
    return parser


def _cmd_generate(args) -> int:
    field = parse_size(args.size)
    t0 = time.perf_counter()
    report = AdaptReport()
    mesh = refine_to_size(
        initial_patch(args.radius), field, args.order, args.sampling, args.max_level, report, args.boundary
    )
    report.seconds = time.perf_counter() - t0
    _write(args.output, serialize(mesh))
    if args.report:
        _write(args.report, _json({**report.as_dict(), "counts": list(mesh.counts()), "keys": len(mesh.applied)}))
    return EXIT_OK


def _cmd_adapt(args) -> int:
    mesh = parse(_read(args.input))
    before = set(mesh.applied)
    field = parse_size(args.size)
    mesh, report = adapt(mesh, field, args.order, args.sampling, args.max_level, args.boundary)
    _write(args.output, serialize(mesh))
    if args.report:
        out = report.as_dict()
        out["symmetric_difference"] = len(before ^ mesh.applied)
        out["counts"] = list(mesh.counts())
        _write(args.report, _json(out))
    return EXIT_OK


def _cmd_render(args) -> int:
    mesh = parse(_read(args.input))
    layers = [s.strip() for s in args.layers.split(",") if s.strip()]
    bad = set(layers) - set(LAYERS)
    if bad:
        raise FormatError(f"unknown layers {sorted(bad)}")
    _write(args.output, render_svg(mesh, layers, args.precision))
    return EXIT_OK


def _cmd_stats(args) -> int:
    mesh = parse(_read(args.input))
    field = parse_size(args.size) if args.size else None
    _write(args.output, _json(stats(mesh, field, args.samples, args.seed).as_dict()))
    return EXIT_OK


def _cmd_lattice(args) -> int:
    a, b = parse(_read(args.a)), parse(_read(args.b))
    if a.radius != b.radius:
        raise FormatError(f"patch radii differ: {a.radius} vs {b.radius}")
    op = meet if args.op == "meet" else join
    _write(args.output, serialize(replay(a.radius, op(a.lower_set(), b.lower_set()))))
    return EXIT_OK


def _cmd_verify(args) -> int:
    mesh = parse(_read(args.input))
    field = parse_size(args.size) if args.size else None
    report = verify_mesh(mesh, field)
    _write(args.output, _json(report))
    return EXIT_OK if report["ok"] else EXIT_INVARIANT


_COMMANDS = {
    "generate": _cmd_generate,
    "adapt": _cmd_adapt,
    "render": _cmd_render,
    "stats": _cmd_stats,
    "lattice": _cmd_lattice,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except BoundaryViolation as e:
        print(f"boundary violation: {e}", file=sys.stderr)
        return EXIT_BOUNDARY
    except (FormatError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InconsistentRadius, NonTermination, DiamondKiteError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
