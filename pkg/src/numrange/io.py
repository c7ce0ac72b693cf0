"""Matrix files, point CSVs, SVG plots and run manifests."""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DimensionMismatch, Malformed, NonFinite
from .projections import BlockPartition


def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise Malformed(f"expected a number, got {x!r}", where)
    v = float(x)
    if not math.isfinite(v):
        raise NonFinite(f"{where}: non-finite value {x!r}")
    return v


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise Malformed(f"expected an integer, got {x!r}", where)
    return x


def parse_matrix_text(text: str, source: str = "<string>"):
    """Parse matrix JSON; returns ``(matrix, partition or None, name or None)``."""
    try:
        doc = json.loads(text, parse_constant=float)
    except json.JSONDecodeError as exc:
        raise Malformed(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None
    if not isinstance(doc, dict):
        raise Malformed("top level must be an object", f"{source}:$")
    for key in ("n", "entries"):
        if key not in doc:
            raise Malformed(f"missing field {key!r}", f"{source}:$")
    n = _int(doc["n"], f"{source}:n")
    if n < 1:
        raise Malformed("n must be positive", f"{source}:n")
    entries = doc["entries"]
    if not isinstance(entries, list):
        raise Malformed("entries must be an array", f"{source}:entries")
    if len(entries) != n * n:
        raise DimensionMismatch(f"{source}: n={n} needs {n * n} entries, found {len(entries)}")
    vals = np.empty(n * n, dtype=np.complex128)
    for i, e in enumerate(entries):
        where = f"{source}:entries[{i}]"
        if not isinstance(e, list) or len(e) != 2:
            raise Malformed("entry must be a [re, im] pair", where)
        vals[i] = complex(_number(e[0], where + "[0]"), _number(e[1], where + "[1]"))
    partition = None
    if doc.get("partition") is not None:
        raw = doc["partition"]
        if not isinstance(raw, list) or not raw:
            raise Malformed("partition must be a nonempty array", f"{source}:partition")
        sizes = tuple(_int(s, f"{source}:partition[{i}]") for i, s in enumerate(raw))
        partition = BlockPartition(sizes)
        partition.check(n)
    name = doc.get("name")
    return vals.reshape(n, n), partition, name


def parse_matrix(path):
    path = Path(path)
    return parse_matrix_text(path.read_text(encoding="utf-8"), str(path))


def matrix_json(a, partition: BlockPartition | None = None, name: str | None = None) -> str:
    a = np.asarray(a, dtype=np.complex128)
    doc = {"n": int(a.shape[0])}
    if name is not None:
        doc["name"] = name
    if partition is not None:
        doc["partition"] = list(partition.sizes)
    doc["entries"] = [[float(z.real), float(z.imag)] for z in a.ravel()]
    return json.dumps(doc) + "\n"


def write_matrix(path, a, partition=None, name=None) -> None:
    Path(path).write_text(matrix_json(a, partition, name), encoding="utf-8")


def parse_frame_text(text: str, source: str = "<string>") -> np.ndarray:
    """An n x k basis: ``{"rows": n, "cols": k, "entries": [[re, im], ...]}`` row-major."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise Malformed(exc.msg, f"{source}:{exc.lineno}:{exc.colno}") from None
    if not isinstance(doc, dict) or not all(k in doc for k in ("rows", "cols", "entries")):
        raise Malformed("expected fields rows, cols, entries", f"{source}:$")
    rows, cols = _int(doc["rows"], f"{source}:rows"), _int(doc["cols"], f"{source}:cols")
    entries = doc["entries"]
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise DimensionMismatch(f"{source}: {rows}x{cols} basis needs {rows * cols} entries")
    vals = []
    for i, e in enumerate(entries):
        where = f"{source}:entries[{i}]"
        if not isinstance(e, list) or len(e) != 2:
            raise Malformed("entry must be a [re, im] pair", where)
        vals.append(complex(_number(e[0], where + "[0]"), _number(e[1], where + "[1]")))
    return np.array(vals, dtype=np.complex128).reshape(rows, cols)


# -- points -------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".16e")


def points_csv(values, tags) -> str:
    lines = ["re,im,provenance"]
    lines += [f"{_fmt(z.real)},{_fmt(z.imag)},{t}" for z, t in zip(values, tags)]
    return "\n".join(lines) + "\n"


def write_points(path, values, tags) -> None:
    Path(path).write_text(points_csv(values, tags), encoding="utf-8", newline="\n")


def read_points(path):
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "re,im,provenance":
        raise Malformed("missing header re,im,provenance", f"{path}:1")
    vals, tags = [], []
    for no, line in enumerate(lines[1:], start=2):
        parts = line.split(",", 2)
        if len(parts) != 3:
            raise Malformed("expected re,im,provenance", f"{path}:{no}")
        try:
            vals.append(complex(float(parts[0]), float(parts[1])))
        except ValueError:
            raise Malformed("bad number", f"{path}:{no}") from None
        tags.append(parts[2])
    return np.array(vals, dtype=np.complex128), tags


# -- svg ----------------------------------------------------------------------

SVG_SIZE = 640
SVG_PAD = 32


def svg_plot(points, outline=None, title: str = "") -> str:
    """Fixed-canvas scatter of ``points`` with an optional closed ``outline``."""
    pts = np.asarray(points, dtype=np.complex128).ravel()
    line = np.asarray(outline if outline is not None else [], dtype=np.complex128).ravel()
    every = np.concatenate([pts, line])
    if len(every) == 0:
        every = np.zeros(1, complex)
    x0, x1 = every.real.min(), every.real.max()
    y0, y1 = every.imag.min(), every.imag.max()
    span = max(x1 - x0, y1 - y0, 1e-12)
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    k = (SVG_SIZE - 2 * SVG_PAD) / span

    def xy(z):
        return (f"{SVG_SIZE / 2 + k * (z.real - cx):.3f}", f"{SVG_SIZE / 2 - k * (z.imag - cy):.3f}")

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_SIZE}" height="{SVG_SIZE}" '
           f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
           f'<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>']
    if title:
        out.append(f'<text x="{SVG_PAD}" y="{SVG_PAD - 10}" font-size="12">{title}</text>')
    if len(line):
        coords = " ".join(",".join(xy(z)) for z in line)
        out.append(f'<polygon points="{coords}" fill="none" stroke="black" stroke-width="1"/>')
    for z in pts:
        x, y = xy(z)
        out.append(f'<circle cx="{x}" cy="{y}" r="1" fill="steelblue"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- manifests ----------------------------------------------------------------

def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def manifest(command: str, argv, *, seed, budgets, tolerances, input_path, outputs) -> dict:
    return {
        "tool": "numrange",
        "version": __version__,
        "command": command,
        "argv": list(argv),
        "seed": seed,
        "budgets": budgets,
        "tolerances": tolerances,
        "input_sha256": sha256_file(input_path),
        "outputs": {str(p): sha256_file(p) for p in outputs},
    }


def write_manifest(path, doc: dict) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
