"""Structures carried by a diamond-kite mesh.

Every check here is exact: positions are lattice coordinates, so lengths,
angles and radii reduce to integer or rational identities.  Floats appear
only as mirrors for rendering and statistics.
"""
from __future__ import annotations

import math
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InconsistentRadius
from .lattice import ORIGIN, LatticeCoord, aligned, icross, idot2, inorm2
from .mesh import Mesh
from .sizefield import SizeField, side_length

__all__ = [
    "CirclePacking",
    "build_packing",
    "validate_packing",
    "three_color",
    "check_coloring",
    "DualMesh",
    "dual_meshes",
    "check_duals",
    "check_centroid",
    "MeshStats",
    "stats",
    "locate",
]


# -- circle packing -------------------------------------------------------------


@dataclass
class CirclePacking:
    """Per-vertex circle radii; ``r2`` is exact, ``radius`` its float mirror."""

    r2: dict
    radius: dict


def _face_radii(corners) -> list[Fraction]:
    """Squared distances from each corner to the crossing of the diagonals."""
    pts, K = aligned(corners)
    c0, c1, c2, c3 = pts
    D = (c2[0] - c0[0], c2[1] - c0[1])
    qn = 2 * inorm2(*D)
    out = []
    for side in (c1, c3):
        w = (side[0] - c0[0], side[1] - c0[1])
        # crossing point c0 + (p/q) D, found by projecting a side corner
        p = idot2(*w, *D)
        ref = (qn * c0[0] + p * D[0], qn * c0[1] + p * D[1])
        out.append(ref)
    if out[0] != out[1]:
        raise InconsistentRadius(f"diagonals of {corners!r} are not perpendicular")
    X = out[0]
    den = qn * qn * Fraction(3) ** K
    return [
        inorm2(qn * a - X[0], qn * b - X[1]) / den for a, b in pts
    ]


def build_packing(mesh: Mesh) -> CirclePacking:
    """Radii of the orthogonal circle packing centred at the mesh vertices.

    Raises
    ------
    InconsistentRadius
        If two faces at a vertex disagree on its radius.
    """
    r2: dict = {}
    for fid in sorted(mesh.faces):
        corners = mesh.faces[fid].corners
        for v, val in zip(corners, _face_radii(corners)):
            old = r2.setdefault(v, val)
            if old != val:
                raise InconsistentRadius(f"vertex {v!r}: radius^2 {old} vs {val}")
    return CirclePacking(r2, {v: math.sqrt(x) for v, x in r2.items()})


def _dist2(u: LatticeCoord, v: LatticeCoord) -> Fraction:
    (d,), K = aligned([u - v])
    return inorm2(*d) / Fraction(3) ** K


def _tangent(ru2, rv2, d2) -> bool:
    # r_u + r_v == d, squared twice
    s = d2 - ru2 - rv2
    return s >= 0 and s * s == 4 * ru2 * rv2


def _disjoint(ru2, rv2, d2) -> bool:
    # r_u + r_v <= d
    s = d2 - ru2 - rv2
    return s >= 0 and s * s >= 4 * ru2 * rv2


def validate_packing(packing: CirclePacking, mesh: Mesh, ring: int = 2, random_pairs: int = 200, seed: int = 0) -> dict:
    """Check the packing identities face by face; returns a violation report.

    Within each face adjacent circles must cross at right angles with radius
    ratio sqrt(3) and opposite circles must be tangent with ratio at most 3.
    Circles at vertices sharing no face must have disjoint interiors; this is
    checked for every pair within ``ring`` edges plus ``random_pairs`` random
    pairs.
    """
    r2 = packing.r2
    violations: list = []
    related: dict = {v: set() for v in mesh.vertex_faces}
    orthogonal = tangent = 0
    for fid in sorted(mesh.faces):
        c = mesh.faces[fid].corners
        for i in range(4):
            u, v, w = c[i], c[(i + 1) % 4], c[(i + 2) % 4]
            related[u].update((v, w))
            related[v].add(u)
            related[w].add(u)
            d2 = _dist2(u, v)
            ratio = max(r2[u], r2[v]) / min(r2[u], r2[v])
            if r2[u] + r2[v] != d2 or ratio != 3:
                violations.append(("orthogonal", fid, u, v))
            orthogonal += 1
            if i < 2:
                ratio = max(r2[u], r2[w]) / min(r2[u], r2[w])
                if not _tangent(r2[u], r2[w], _dist2(u, w)) or ratio > 9:
                    violations.append(("tangent", fid, u, w))
                tangent += 1
            rf = packing.radius
            for got, x, y in ((math.hypot(rf[u], rf[v]), u, v), (rf[u] + rf[w], u, w)):
                want = abs(x.to_complex() - y.to_complex())
                if abs(got - want) > 1e-9 * max(1.0, want):
                    violations.append(("float", fid, x, y))

    def check_pair(u, v):
        if v in related[u] or u == v:
            return 0
        ru, rv = packing.radius[u], packing.radius[v]
        gap = abs(u.to_complex() - v.to_complex()) - ru - rv
        # exact test only when the float gap is inconclusive
        if gap < 1e-9 * (ru + rv) and not _disjoint(r2[u], r2[v], _dist2(u, v)):
            violations.append(("overlap", None, u, v))
        return 1

    disjoint = 0
    verts = sorted(mesh.vertex_faces)
    for u in verts:
        seen = {u}
        frontier = {u}
        for _ in range(ring):
            frontier = {w for x in frontier for w in mesh.neighbors(x)} - seen
            seen |= frontier
        for v in seen:
            if u < v:
                disjoint += check_pair(u, v)
    rng = random.Random(seed)
    for _ in range(random_pairs if len(verts) > 1 else 0):
        u, v = rng.sample(verts, 2)
        disjoint += check_pair(u, v)
    return {
        "orthogonal_pairs": orthogonal,
        "tangent_pairs": tangent,
        "disjoint_pairs": disjoint,
        "violations": violations,
    }


# -- coloring -------------------------------------------------------------------

_DIRECTIONS = [LatticeCoord(1, 0, 0).rotate(m) for m in range(6)]
_DIRECTIONS = [d for m in range(6) for d in (_DIRECTIONS[m], LatticeCoord(1, 1, 0).rotate(m))]


def _diagonal_class(corners) -> int:
    """Direction of the c0-c2 diagonal in multiples of 30 degrees, modulo 3."""
    d = corners[2] - corners[0]
    z = d.to_complex()
    n = round(math.atan2(z.imag, z.real) / (math.pi / 6)) % 12
    (v, e), _ = aligned([d, _DIRECTIONS[n]])
    if icross(*v, *e) != 0 or idot2(*v, *e) <= 0:
        raise ValueError(f"diagonal of {corners!r} is not a multiple of 30 degrees")
    return n % 3


def three_color(mesh: Mesh) -> dict:
    """Face id -> color in {0, 1, 2}, by the orientation of the face diagonals.

    The two diagonals of a face are perpendicular, so parallel-diagonal classes
    are 30-degree directions modulo 90 degrees, three in all.
    """
    return {fid: _diagonal_class(f.corners) for fid, f in sorted(mesh.faces.items())}


def check_coloring(mesh: Mesh, colors: dict) -> list:
    """Edges whose two faces share a color."""
    bad = []
    for e, fids in sorted(mesh.edge_faces.items()):
        if len(fids) == 2:
            f, g = fids
            if colors[f] == colors[g]:
                bad.append(e)
    return bad


# -- dual meshes ----------------------------------------------------------------


@dataclass
class DualMesh:
    """One of the two diagonal meshes.

    ``vertices`` is one bipartition class, ``edges`` the face diagonals joining
    it, and ``faces`` the vertex cycles around interior vertices of the other
    class, keyed by that vertex.
    """

    vertices: frozenset
    edges: list
    faces: dict
    shapes: dict
    dropped: int = 0


def bipartition(mesh: Mesh) -> dict:
    """Two-color the vertex graph by breadth-first search."""
    side: dict = {}
    for root in sorted(mesh.vertex_faces):
        if root in side:
            continue
        side[root] = 0
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in mesh.neighbors(u):
                if w not in side:
                    side[w] = 1 - side[u]
                    queue.append(w)
                elif side[w] == side[u]:
                    raise ValueError("vertex graph is not bipartite")
    return side


def _cycle(mesh: Mesh, v: LatticeCoord) -> list:
    """Neighbours of an interior vertex in counterclockwise order."""
    succ = {prev_next[2]: prev_next[1] for prev_next in mesh._wedges(v)}
    start = min(succ)
    out = [start]
    while succ[out[-1]] != start:
        out.append(succ[out[-1]])
    return out


def classify_polygon(poly) -> str | None:
    """Name of a dual cell shape, decided in exact arithmetic, or None."""
    pts, _ = aligned(poly)
    n = len(pts)
    sides = [(pts[(i + 1) % n][0] - pts[i][0], pts[(i + 1) % n][1] - pts[i][1]) for i in range(n)]
    lens = [inorm2(*s) for s in sides]
    # exterior turn at each corner in multiples of 60 degrees
    turns = []
    for i in range(n):
        s, t = sides[i], sides[(i + 1) % n]
        c, d = icross(*s, *t), idot2(*s, *t)
        if c <= 0:
            return None
        if d * d == lens[i] * lens[(i + 1) % n]:
            turns.append(1 if d > 0 else 2)
        else:
            return None
    if n == 3 and len(set(lens)) == 1:
        return "triangle"
    if n == 6 and len(set(lens)) == 1 and set(turns) == {1}:
        return "hexagon"
    if n == 4 and sorted(turns) == [1, 1, 2, 2]:
        # two 60 degree base angles next to each other, equal legs
        i = next((i for i in range(4) if turns[i] == 2 and turns[(i + 1) % 4] == 2), None)
        if i is None:
            return None  # a rhombus
        return "trapezoid" if lens[i] == lens[(i + 2) % 4] else None
    if n == 5 and sorted(turns) == [1, 1, 1, 1, 2]:
        return "pentagon"
    return None


def dual_meshes(mesh: Mesh) -> tuple[DualMesh, DualMesh]:
    """The two meshes formed by the face diagonals, one per vertex class.

    Class 0 holds the vertex with the smallest coordinate.  A cell exists
    around each interior vertex of the opposite class; cells around boundary
    vertices are dropped and counted.
    """
    side = bipartition(mesh)
    out = []
    for cls in (0, 1):
        verts = frozenset(v for v, s in side.items() if s == cls)
        edges = set()
        for f in mesh.faces.values():
            c = f.corners
            i = 0 if side[c[0]] == cls else 1
            e = (c[i], c[i + 2]) if c[i] < c[i + 2] else (c[i + 2], c[i])
            edges.add(e)
        faces, shapes, dropped = {}, {}, 0
        for v in sorted(side):
            if side[v] == cls:
                continue
            if not mesh.is_interior(v):
                dropped += 1
                continue
            cyc = _cycle(mesh, v)
            faces[v] = cyc
            shapes[v] = classify_polygon(cyc)
        out.append(DualMesh(verts, sorted(edges), faces, shapes, dropped))
    return out[0], out[1]


def check_duals(mesh: Mesh, duals=None) -> dict:
    """Shape inventory, diagonal orthogonality and dual-vertex interiority."""
    duals = duals if duals is not None else dual_meshes(mesh)
    bad_shape, not_orthogonal, not_inside = [], [], []
    shapes: Counter = Counter()
    for d in duals:
        for v, s in d.shapes.items():
            shapes[s] += 1
            if s is None:
                bad_shape.append(v)
            pts, _ = aligned([v, *d.faces[v]])
            c, cyc = pts[0], pts[1:]
            n = len(cyc)
            for i in range(n):
                p, q = cyc[i], cyc[(i + 1) % n]
                if icross(p[0] - c[0], p[1] - c[1], q[0] - c[0], q[1] - c[1]) <= 0:
                    not_inside.append(v)
                    break
    for fid, f in sorted(mesh.faces.items()):
        a, b, c, e = f.corners
        (u, w), _ = aligned([c - a, e - b])
        if idot2(*u, *w) != 0:
            not_orthogonal.append(fid)
    return {
        "shapes": {str(k): v for k, v in sorted(shapes.items(), key=lambda kv: str(kv[0]))},
        "dropped": [d.dropped for d in duals],
        "bad_shape": bad_shape,
        "not_orthogonal": not_orthogonal,
        "not_inside": not_inside,
    }


# -- centroid -------------------------------------------------------------------


def check_centroid(mesh: Mesh, positions: dict | None = None) -> dict:
    """Exact Laplacian defect at interior vertices.

    ``positions`` optionally overrides vertex positions (a perturbation for
    negative controls); the graph is always the mesh's.
    """
    pos = positions or {}
    failing, interior, boundary = [], 0, 0
    for v in sorted(mesh.vertex_faces):
        if not mesh.is_interior(v):
            boundary += 1
            continue
        interior += 1
        p = pos.get(v, v)
        total = ORIGIN
        nbrs = mesh.neighbors(v)
        for w in nbrs:
            total = total + (pos.get(w, w) - p)
        if total != ORIGIN:
            failing.append(v)
    return {"interior": interior, "boundary": boundary, "failing": failing}


# -- statistics -----------------------------------------------------------------


@dataclass
class MeshStats:
    n_vertices: int
    n_edges: int
    n_faces: int
    total_edge_length: float
    areas: list
    perimeters: list
    level_histogram: dict
    min_angle: float
    max_angle: float
    ratios: list = field(default_factory=list)
    sigma_hats: list = field(default_factory=list)

    def as_dict(self) -> dict:
        r = np.asarray(self.ratios, dtype=float)
        ratio = {}
        if r.size:
            ratio = {
                "samples": int(r.size),
                "min": float(r.min()),
                "median": float(np.median(r)),
                "max": float(r.max()),
            }
        return {
            "n_vertices": self.n_vertices,
            "n_edges": self.n_edges,
            "n_faces": self.n_faces,
            "total_edge_length": self.total_edge_length,
            "total_area": float(sum(self.areas)),
            "total_perimeter": float(sum(self.perimeters)),
            "level_histogram": {str(k): v for k, v in sorted(self.level_histogram.items())},
            "min_angle": self.min_angle,
            "max_angle": self.max_angle,
            "ratio": ratio,
        }


def _xy(c):
    z = c.to_complex()
    return z.real, z.imag


class _Locator:
    """Point location over the mesh faces via a KD-tree on face centroids."""

    def __init__(self, mesh: Mesh):
        from scipy.spatial import cKDTree

        self.fids = sorted(mesh.faces)
        self.polys = np.array([[_xy(c) for c in mesh.faces[f].corners] for f in self.fids])
        self.levels = [mesh.faces[f].level for f in self.fids]
        self.tree = cKDTree(self.polys.mean(axis=1))
        self.reach = float(np.max(np.linalg.norm(self.polys - self.polys.mean(axis=1)[:, None], axis=2)))

    def __call__(self, x: float, y: float):
        for i in self.tree.query_ball_point((x, y), self.reach + 1e-12):
            p = self.polys[i]
            e = np.roll(p, -1, axis=0) - p
            if np.all(e[:, 0] * (y - p[:, 1]) - e[:, 1] * (x - p[:, 0]) >= -1e-12):
                return self.fids[i]
        return None


def locate(mesh: Mesh, x: float, y: float):
    """Id of a face containing ``(x, y)``, or None outside the mesh."""
    return _Locator(mesh)(x, y)


def sigma_hat(field: SizeField, x: float, y: float, vertices: np.ndarray | None = None, grid: int = 24) -> float:
    """Upper bound on ``inf_q distance(p, q) + field(q)``.

    The infimum is attained within distance ``field(p)`` of ``p``, so candidates
    are the given vertices in that disk plus a ``grid`` x ``grid`` lattice
    covering it.
    """
    s = field(x, y)
    best = s
    ts = np.linspace(-s, s, grid)
    gx, gy = np.meshgrid(ts, ts)
    keep = gx**2 + gy**2 <= s * s
    cand = [(x + a, y + b) for a, b in zip(gx[keep], gy[keep])]
    if vertices is not None and len(vertices):
        d = np.hypot(vertices[:, 0] - x, vertices[:, 1] - y)
        cand.extend(map(tuple, vertices[d <= s]))
    for qx, qy in cand:
        best = min(best, math.hypot(qx - x, qy - y) + field(qx, qy))
    return best


def _angles(corners) -> list:
    pts = [complex(*_xy(c)) for c in corners]
    out = []
    for i in range(4):
        a, b = pts[i - 1] - pts[i], pts[(i + 1) % 4] - pts[i]
        out.append(abs(math.degrees(math.atan2((a.conjugate() * b).imag, (a.conjugate() * b).real))))
    return out


def stats(
    mesh: Mesh,
    field: SizeField | None = None,
    samples: int = 0,
    seed: int = 0,
    exclude_oversized: bool = False,
) -> MeshStats:
    """Counts, geometry summaries and element-size / feature-size ratios.

    With a size field and ``samples > 0``, random points are drawn uniformly
    over the mesh and the side length of the element containing each is
    divided by the feature-size estimate there.  ``exclude_oversized`` drops
    faces that do not fit the field (left coarse at a patch boundary) from
    the sampling.
    """
    total = sum(abs(u.to_complex() - v.to_complex()) for u, v in mesh.edge_faces)
    areas, perims, angles = [], [], []
    hist: Counter = Counter()
    for fid in sorted(mesh.faces):
        f = mesh.faces[fid]
        pts = [_xy(c) for c in f.corners]
        areas.append(0.5 * sum(pts[i][0] * pts[(i + 1) % 4][1] - pts[(i + 1) % 4][0] * pts[i][1] for i in range(4)))
        perims.append(sum(math.dist(pts[i], pts[(i + 1) % 4]) for i in range(4)))
        angles.extend(_angles(f.corners))
        hist[f.level] += 1
    out = MeshStats(
        mesh.n_vertices,
        mesh.n_edges,
        mesh.n_faces,
        float(total),
        areas,
        perims,
        dict(hist),
        min(angles),
        max(angles),
    )
    if field is None or samples <= 0:
        return out
    loc = _Locator(mesh)
    verts = np.array([_xy(v) for v in sorted(mesh.vertex_faces)])
    rng = np.random.default_rng(seed)
    weights = np.asarray(areas)
    if exclude_oversized:
        from .sizefield import oversized

        fit = [not oversized(field, list(map(tuple, p)), lev) for p, lev in zip(loc.polys, loc.levels)]
        weights = weights * np.asarray(fit, dtype=float)
    weights = weights / weights.sum()
    picks = rng.choice(len(loc.fids), size=samples, p=weights)
    for i in picks:
        # uniform point in the face: split along the c0-c2 diagonal
        p = loc.polys[i]
        tri = p[[0, 1, 2]] if rng.random() < _tri_share(p) else p[[0, 2, 3]]
        u, v = rng.random(2)
        if u + v > 1:
            u, v = 1 - u, 1 - v
        x, y = tri[0] + u * (tri[1] - tri[0]) + v * (tri[2] - tri[0])
        est = sigma_hat(field, x, y, verts)
        out.sigma_hats.append(est)
        out.ratios.append(side_length(loc.levels[i]) / est)
    return out


def _tri_share(p) -> float:
    def area(a, b, c):
        return abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))

    a1, a2 = area(p[0], p[1], p[2]), area(p[0], p[2], p[3])
    return a1 / (a1 + a2)
