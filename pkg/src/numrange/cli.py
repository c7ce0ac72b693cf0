"""Command line interface.

    numrange range    MATRIX [--samples N] [--seed S] [--out pts.csv] [--svg plot.svg]
    numrange boundary MATRIX [--angles M]
    numrange pnr      MATRIX --family rank:K|block|commuting [--samples N]
    numrange qnr      MATRIX [--partition n1,n2]
    numrange bnr      MATRIX [--partition n1,...,nk]
    numrange compress MATRIX (--basis FILE | --rank K) [--matrix-out FILE]
    numrange check    MATRIX (--all | --check NAME ...)

Point files are CSV (``re,im,provenance``); without ``--out`` they go to
stdout.  Every file written with ``--out`` gets a ``<out>.manifest.json``
next to it that records the argv needed to regenerate it.

Exit status: 0 success, 1 a check failed, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields, replace
from pathlib import Path

from .errors import NumRangeError
from .io import parse_frame_text, parse_matrix, points_csv, svg_plot, write_manifest, manifest, matrix_json
from .geometry import convex_hull
from .linalg import RngState, eigs_batch, haar_frame
from .projections import BlockPartition, FamilySpec, Projection, compress, projection_from_span
from .ranges import DEFAULT_ANGLES, bnr_sample, nr_boundary, nr_sample, pnr_sample
from .verify import CHECK_NAMES, DEFAULT_TOL, Tolerances, run_checks

COMMANDS = ("range", "boundary", "pnr", "qnr", "bnr", "compress", "check")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="numrange", description="Numerical ranges of complex matrices.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("matrix", help="matrix file (JSON)")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--samples", type=int, default=10_000)
        s.add_argument("--angles", type=int, default=DEFAULT_ANGLES)
        s.add_argument("--partition", help="block sizes n1,n2,... (overrides the file)")
        s.add_argument("--out", help="output file (CSV; JSON report for check)")
        s.add_argument("--svg", help="also render an SVG plot")
        for f in fields(Tolerances):
            s.add_argument(f"--tol-{f.name.replace('_', '-')}", dest=f"tol_{f.name}", type=float)
        if name == "pnr":
            s.add_argument("--family", required=True, help="rank:K, block or commuting")
        if name == "compress":
            g = s.add_mutually_exclusive_group(required=True)
            g.add_argument("--basis", help="JSON file with an n x k spanning set")
            g.add_argument("--rank", type=int, help="use a Haar random rank-K projection")
            s.add_argument("--matrix-out", help="write the k x k compression as a matrix file")
        if name == "check":
            s.add_argument("--all", action="store_true")
            s.add_argument("--check", action="append", choices=CHECK_NAMES, default=None)
    return p


def _tolerances(args) -> Tolerances:
    over = {f.name: getattr(args, f"tol_{f.name}") for f in fields(Tolerances)
            if getattr(args, f"tol_{f.name}") is not None}
    return replace(DEFAULT_TOL, **over)


def _partition(args, from_file, n):
    if args.partition:
        try:
            part = BlockPartition.parse(args.partition)
        except ValueError as exc:
            raise UsageError(f"bad --partition: {exc}") from None
        part.check(n)
        return part
    return from_file


def _family(text: str, partition, n, budget, seed) -> FamilySpec:
    if text.startswith("rank:"):
        try:
            k = int(text[5:])
        except ValueError:
            raise UsageError(f"bad family {text!r}") from None
        return FamilySpec.rank(k, budget, seed)
    if text == "block":
        return FamilySpec.block(partition or BlockPartition.halves(n), budget, seed)
    if text == "commuting":
        return FamilySpec.commuting(seed=seed)
    raise UsageError(f"unknown family {text!r}; use rank:K, block or commuting")


def _emit(args, argv, text: str, budgets: dict, tol: Tolerances, extra_outputs=()) -> None:
    if args.out is None:
        sys.stdout.write(text)
        return
    Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    outputs = [args.out, *extra_outputs]
    doc = manifest(args.command, argv, seed=args.seed, budgets=budgets, tolerances=asdict(tol),
                   input_path=args.matrix, outputs=outputs)
    write_manifest(args.out + ".manifest.json", doc)


def _svg(args, points, outline, title):
    if args.svg:
        Path(args.svg).write_text(svg_plot(points, outline, title), encoding="utf-8", newline="\n")
        return [args.svg]
    return []


def _outline(a, angles):
    hull = convex_hull(nr_boundary(a, angles).points())
    return hull.vertices


def run_command(argv) -> int:
    argv = list(argv)
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args, argv)
    except (NumRangeError, UsageError, ValueError, OSError) as exc:
        print(f"numrange: error: {exc}", file=sys.stderr)
        return 2


def _run(args, argv) -> int:
    a, file_partition, name = parse_matrix(args.matrix)
    n = a.shape[0]
    partition = _partition(args, file_partition, n)
    tol = _tolerances(args)
    budgets = {"samples": args.samples, "angles": args.angles}
    if args.samples < 1:
        raise UsageError("--samples must be positive")

    if args.command == "range":
        ps = nr_sample(a, args.samples, RngState(args.seed))
        extra = _svg(args, ps.values, _outline(a, args.angles), name or "W(A)")
        _emit(args, argv, points_csv(ps.values, ps.tags()), budgets, tol, extra)
    elif args.command == "boundary":
        b = nr_boundary(a, args.angles)
        vals, tags = [], []
        for i, (t, z0, z1) in enumerate(zip(b.angles, b.touch, b.touch_end)):
            vals.append(z0)
            tags.append(f"angle#{i}")
            if z1 != z0:
                vals.append(z1)
                tags.append(f"angle#{i}:end")
        budgets["angles_traced"] = len(b.angles)
        extra = _svg(args, vals, b.polyline(), name or "boundary of W(A)")
        _emit(args, argv, points_csv(vals, tags), budgets, tol, extra)
    elif args.command == "pnr":
        fam = _family(args.family, partition, n, args.samples, args.seed)
        ps = pnr_sample(a, fam)
        budgets["family"] = fam.describe()
        extra = _svg(args, ps.values, _outline(a, args.angles), fam.describe())
        _emit(args, argv, points_csv(ps.values, ps.tags()), budgets, tol, extra)
    elif args.command in ("qnr", "bnr"):
        part = partition or BlockPartition.halves(n)
        if args.command == "qnr" and part.k != 2:
            raise UsageError(f"qnr needs a 2-block partition, got ({part})")
        ps = bnr_sample(a, part, args.samples, RngState(args.seed))
        budgets["partition"] = str(part)
        extra = _svg(args, ps.values, _outline(a, args.angles), f"{args.command} ({part})")
        _emit(args, argv, points_csv(ps.values, ps.tags()), budgets, tol, extra)
    elif args.command == "compress":
        if args.basis:
            p = projection_from_span(parse_frame_text(Path(args.basis).read_text(encoding="utf-8"), args.basis))
        else:
            if not 1 <= args.rank <= n:
                raise UsageError(f"--rank must be between 1 and {n}")
            p = Projection(haar_frame(n, args.rank, RngState(args.seed)))
        c = compress(a, p)
        ev, _ = eigs_batch(c[None])
        extra = []
        if args.matrix_out:
            Path(args.matrix_out).write_text(matrix_json(c), encoding="utf-8")
            extra.append(args.matrix_out)
        budgets["rank"] = p.rank
        _emit(args, argv, points_csv(ev[0], [f"compress#{i}" for i in range(p.rank)]), budgets, tol, extra)
    elif args.command == "check":
        if not args.all and not args.check:
            raise UsageError("check needs --all or --check NAME")
        names = None if args.all else args.check
        reports = run_checks(a, names, partition=partition, seed=args.seed,
                             samples=args.samples, angles=args.angles, tol=tol)
        print(_table(reports))
        doc = json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"
        if args.out:
            _emit(args, argv, doc, budgets, tol)
        return 0 if all(r.passed for r in reports) else 1
    return 0


def _table(reports) -> str:
    rows = [("check", "result", "deviation", "tolerance")]
    for r in reports:
        rows.append((r.name, "pass" if r.passed else "FAIL", f"{r.deviation:.3e}", f"{r.tolerance:.3e}"))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
