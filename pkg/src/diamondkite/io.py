"""Mesh files, size-field configuration strings and SVG output.

A mesh file stores the lower set of applied replacements, never geometry::

    DKM 1
    radius 8
    keys 3
    0 0 0 0
    0 1 -1 -1
    ...

Each key line is ``level a b k`` for the center ``(a + b zeta) / (1+zeta)**k``.
Lines are sorted canonically, so equal meshes give identical bytes.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .derived import build_packing, dual_meshes, three_color
from .errors import DiamondKiteError, FormatError
from .lattice import LatticeCoord, ReplacementKey, _first_unclosed, is_center
from .mesh import Mesh, replay
from .sizefield import CircleSize, ConstantSize, GridSize, PointSize, RampSize, SizeField

__all__ = [
    "FORMAT_NAME",
    "FORMAT_VERSION",
    "serialize",
    "parse",
    "read_mesh",
    "write_mesh",
    "parse_size",
    "format_size",
    "LAYERS",
    "render_svg",
]

FORMAT_NAME = "DKM"
FORMAT_VERSION = 1


def serialize(mesh: Mesh) -> str:
    keys = mesh.lower_set().canonical()
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION}", f"radius {mesh.radius}", f"keys {len(keys)}"]
    lines += [f"{k.level} {k.center.a} {k.center.b} {k.center.k}" for k in keys]
    return "\n".join(lines) + "\n"


def _ints(line: str, n: int, lineno: int, what: str) -> list[int]:
    parts = line.split()
    if len(parts) != n:
        raise FormatError(f"expected {what}, got {line!r}", lineno)
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise FormatError(f"non-integer field in {line!r}", lineno) from None


def parse(text: str) -> Mesh:
    """Rebuild a mesh from :func:`serialize` output.

    Raises
    ------
    FormatError
        On a bad header, malformed or invalid key lines, duplicates, a key
        list that is not downward closed, or keys outside the patch.
    """
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("empty file", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != FORMAT_NAME:
        raise FormatError(f"missing {FORMAT_NAME} header", 1)
    if head[1] != str(FORMAT_VERSION):
        raise FormatError(f"unsupported version {head[1]!r}", 1)
    if len(lines) < 3:
        raise FormatError("truncated header", len(lines) + 1)
    for i, word in ((1, "radius"), (2, "keys")):
        if not lines[i].startswith(word + " "):
            raise FormatError(f"expected '{word} N'", i + 1)
    (radius,) = _ints(lines[1][len("radius "):], 1, 2, "radius")
    (count,) = _ints(lines[2][len("keys "):], 1, 3, "key count")
    if radius < 1:
        raise FormatError("radius must be >= 1", 2)
    if len(lines) - 3 != count:
        raise FormatError(f"header announces {count} keys, found {len(lines) - 3}", 3)
    keys: dict = {}
    for n, line in enumerate(lines[3:], start=4):
        level, a, b, k = _ints(line, 4, n, "'level a b k'")
        p = LatticeCoord(a, b, k)
        if tuple(p) != (a, b, k):
            raise FormatError(f"center ({a}, {b}, {k}) is not normalized", n)
        if level < 0 or not is_center(p, level):
            raise FormatError(f"({a}, {b}, {k}) is not a replacement center at level {level}", n)
        key = ReplacementKey(p, level)
        if key in keys:
            raise FormatError(f"duplicate key {key!r}", n)
        keys[key] = n
    bad = _first_unclosed(keys)
    if bad is not None:
        raise FormatError(f"not downward closed: {bad[0]!r} needs {bad[1]!r}", keys[bad[0]])
    try:
        return replay(radius, keys)
    except DiamondKiteError as e:
        raise FormatError(f"keys do not fit the radius-{radius} patch: {e}") from None


def read_mesh(path) -> Mesh:
    return parse(Path(path).read_text())


def write_mesh(mesh: Mesh, path) -> None:
    Path(path).write_text(serialize(mesh))


# -- size field configuration -----------------------------------------------------

_KINDS = {
    "constant": ConstantSize,
    "point": PointSize,
    "circle": CircleSize,
    "ramp": RampSize,
}
_GRID_KEYS = {"path", "x0", "y0", "dx", "dy", "lipschitz", "floor"}


def parse_size(spec: str) -> SizeField:
    """Build a size field from ``kind:key=val,key=val``.

    Grid fields read their samples from ``path`` (``.npy`` or comma separated
    text) and require ``lipschitz``.
    """
    kind, _, rest = spec.partition(":")
    kind = kind.strip()
    params: dict = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, val = (s.strip() for s in item.partition("="))
        if not eq or not key:
            raise FormatError(f"size parameter {item!r} is not key=value")
        if key in params:
            raise FormatError(f"size parameter {key!r} given twice")
        params[key] = val
    if kind == "grid":
        unknown = set(params) - _GRID_KEYS
        if unknown:
            raise FormatError(f"unknown grid parameters {sorted(unknown)}")
        if "lipschitz" not in params:
            raise FormatError("grid size field requires lipschitz=")
        if "path" not in params:
            raise FormatError("grid size field requires path=")
        path = params.pop("path")
        try:
            values = np.load(path) if path.endswith(".npy") else np.loadtxt(path, delimiter=",", ndmin=2)
            nums = {k: float(v) for k, v in params.items()}
            nums.setdefault("x0", 0.0)
            nums.setdefault("y0", 0.0)
            nums.setdefault("dx", 1.0)
            nums.setdefault("dy", 1.0)
            return GridSize(values, path=path, **nums)
        except (OSError, ValueError) as e:
            raise FormatError(f"bad grid size field: {e}") from None
    cls = _KINDS.get(kind)
    if cls is None:
        raise FormatError(f"unknown size field kind {kind!r}")
    try:
        return cls(**{k: float(v) for k, v in params.items()})
    except (TypeError, ValueError) as e:
        raise FormatError(f"bad {kind} size field: {e}") from None


def format_size(field: SizeField) -> str:
    """Inverse of :func:`parse_size` for the analytic kinds."""
    if isinstance(field, GridSize):
        p = {k: v for k, v in field.params().items() if k != "values"}
        return "grid:" + ",".join([f"path={field.path}"] + [f"{k}={v!r}" for k, v in p.items()])
    return f"{field.kind}:" + ",".join(f"{k}={v!r}" for k, v in field.params().items())


# -- SVG ----------------------------------------------------------------------

LAYERS = ("faces", "coloring", "packing", "duals")
_FILLS = ("#f4c95d", "#7fb7be", "#d3a5c8")
_DUAL_STROKES = ("#c0392b", "#2e5eaa")


def _fmt(x: float, precision: int) -> str:
    s = f"{x:.{precision}f}"
    return "0." + "0" * precision if s.lstrip("-").strip("0.") == "" else s


def render_svg(mesh: Mesh, layers=("faces",), precision: int = 6) -> str:
    """Deterministic SVG drawing of ``mesh``.

    ``layers`` is any subset of :data:`LAYERS`.  ``coloring`` fills the faces
    by the diagonal 3-coloring and implies ``faces``.
    """
    layers = set(layers)
    unknown = layers - set(LAYERS)
    if unknown:
        raise ValueError(f"unknown layers {sorted(unknown)}")
    if "coloring" in layers:
        layers.add("faces")

    def xy(c: LatticeCoord) -> str:
        z = c.to_complex()
        return f"{_fmt(z.real, precision)},{_fmt(-z.imag, precision)}"

    zs = [v.to_complex() for v in mesh.vertex_faces]
    x0, x1 = min(z.real for z in zs), max(z.real for z in zs)
    y0, y1 = min(-z.imag for z in zs), max(-z.imag for z in zs)
    pad = 0.05 * max(x1 - x0, y1 - y0)
    w, h = x1 - x0 + 2 * pad, y1 - y0 + 2 * pad
    stroke = _fmt(max(w, h) / 1500, precision)
    f = lambda v: _fmt(v, precision)  # noqa: E731
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<!-- y axis flipped: SVG y = -mesh y -->",
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'viewBox="{f(x0 - pad)} {f(y0 - pad)} {f(w)} {f(h)}" width="800" height="{round(800 * h / w)}">',
    ]
    faces = sorted(mesh.faces.items(), key=lambda kv: [c.sort_key() for c in kv[1].corners])
    if "faces" in layers:
        colors = three_color(mesh) if "coloring" in layers else {}
        out.append(f'<g id="faces" stroke="#222222" stroke-width="{stroke}" stroke-linejoin="round">')
        for fid, face in faces:
            fill = _FILLS[colors[fid]] if colors else "#ffffff"
            pts = " ".join(xy(c) for c in face.corners)
            out.append(f'<polygon points="{pts}" fill="{fill}"/>')
        out.append("</g>")
    if "packing" in layers:
        packing = build_packing(mesh)
        out.append(f'<g id="packing" fill="none" stroke="#555555" stroke-width="{stroke}">')
        for v in sorted(packing.radius, key=LatticeCoord.sort_key):
            z = v.to_complex()
            out.append(f'<circle cx="{f(z.real)}" cy="{f(-z.imag)}" r="{f(packing.radius[v])}"/>')
        out.append("</g>")
    if "duals" in layers:
        for name, dual, color in zip(("red", "blue"), dual_meshes(mesh), _DUAL_STROKES):
            out.append(f'<g id="dual-{name}" stroke="{color}" stroke-width="{stroke}">')
            for u, v in sorted(dual.edges, key=lambda e: (e[0].sort_key(), e[1].sort_key())):
                a, b = xy(u).split(","), xy(v).split(",")
                out.append(f'<line x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}"/>')
            out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
