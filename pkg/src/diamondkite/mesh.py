"""Explicit diamond-kite quadrilateral meshes.

Vertices are identified by their exact :class:`~diamondkite.lattice.LatticeCoord`
positions, faces by integer ids that are never reused.  Each face stores its
four corners counterclockwise, starting at the 60 degree corner of a kite or
at the lexicographically smaller acute corner of a diamond, so two meshes with
the same geometry have identical face tuples.
"""
from __future__ import annotations

import random
from typing import Iterable, NamedTuple

from .errors import BoundaryViolation, PreconditionViolation
from .lattice import (
    ORIGIN,
    _mul_omega,
    LatticeCoord,
    LowerSet,
    ReplacementKey,
    aligned,
    close_down,
    dependents,
    exact_int,
    icross,
    idot2,
    inorm2,
    is_center,
    linearize,
    prerequisites,
    unit,
)

DIAMOND = "diamond"
KITE = "kite"

# the central hexagon of every patch is centered on this degree-3 vertex;
# the origin is one of its degree-6 corners
PATCH_CENTER = LatticeCoord(1, 0, 0)
_OMEGA = LatticeCoord(1, 1, 0)


class Face(NamedTuple):
    corners: tuple
    shape: str
    level: int


def _diamond(corners, level: int) -> Face:
    # corners CCW with an acute corner at index 0 or 2
    c = tuple(corners)
    if c[2] < c[0]:
        c = c[2:] + c[:2]
    return Face(c, DIAMOND, level)


def _kite(corners, start: int, level: int) -> Face:
    c = tuple(corners)
    return Face(c[start:] + c[:start], KITE, level)


def hex_distance(d: LatticeCoord) -> int:
    """Step distance of an Eisenstein integer in the triangular lattice."""
    if d[2] > 0:
        raise ValueError(f"{d!r} is not an Eisenstein integer")
    a, b = _mul_omega(d[0], d[1], -d[2])
    return (abs(a) + abs(b) + abs(a + b)) // 2


class Mesh:
    """Mutable diamond-kite mesh over a finite rhombille patch.

    Parameters
    ----------
    radius : int
        Patch radius; the patch holds every hexagon of the underlying hexagonal
        tiling within ``radius`` steps of the central hexagon.
    """

    def __init__(self, radius: int):
        if radius < 1:
            raise ValueError("patch radius must be >= 1")
        self.radius = int(radius)
        self.faces: dict[int, Face] = {}
        self.vertex_faces: dict[LatticeCoord, set] = {}
        self.edge_faces: dict[tuple, set] = {}
        self.applied: set = set()
        self.replacements = 0
        self.coarsenings = 0
        self._next_id = 0
        self.hexagons = frozenset(_patch_hexagons(self.radius))
        self._inside: dict = {}

    # -- bookkeeping ----------------------------------------------------------

    def _add(self, face: Face) -> int:
        fid = self._next_id
        self._next_id += 1
        self.faces[fid] = face
        c = face.corners
        for i in range(4):
            self.vertex_faces.setdefault(c[i], set()).add(fid)
            u, v = c[i], c[(i + 1) % 4]
            e = (u, v) if u < v else (v, u)
            self.edge_faces.setdefault(e, set()).add(fid)
        return fid

    def _remove(self, fid: int) -> Face:
        face = self.faces.pop(fid)
        c = face.corners
        for i in range(4):
            s = self.vertex_faces[c[i]]
            s.discard(fid)
            if not s:
                del self.vertex_faces[c[i]]
            u, v = c[i], c[(i + 1) % 4]
            e = (u, v) if u < v else (v, u)
            s = self.edge_faces[e]
            s.discard(fid)
            if not s:
                del self.edge_faces[e]
        return face

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_faces)

    @property
    def n_edges(self) -> int:
        return len(self.edge_faces)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def counts(self) -> tuple[int, int, int]:
        return self.n_vertices, self.n_edges, self.n_faces

    def lower_set(self) -> LowerSet:
        return frozenset.__new__(LowerSet, self.applied)

    def signature(self) -> frozenset:
        """Hashable geometric identity of the mesh (face tuples)."""
        return frozenset(self.faces.values())

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            self.radius == other.radius
            and self.applied == other.applied
            and self.signature() == other.signature()
        )

    __hash__ = None

    def copy(self) -> "Mesh":
        m = Mesh.__new__(Mesh)
        m.radius = self.radius
        m.faces = dict(self.faces)
        m.vertex_faces = {v: set(s) for v, s in self.vertex_faces.items()}
        m.edge_faces = {e: set(s) for e, s in self.edge_faces.items()}
        m.applied = set(self.applied)
        m.replacements = self.replacements
        m.coarsenings = self.coarsenings
        m._next_id = self._next_id
        m.hexagons = self.hexagons
        m._inside = self._inside
        return m

    def __repr__(self) -> str:
        v, e, f = self.counts()
        return f"<Mesh radius={self.radius} V={v} E={e} F={f} applied={len(self.applied)}>"

    # -- local queries --------------------------------------------------------

    def neighbors(self, v: LatticeCoord) -> set:
        out = set()
        for fid in self.vertex_faces.get(v, ()):
            c = self.faces[fid].corners
            i = c.index(v)
            out.add(c[i - 1])
            out.add(c[(i + 1) % 4])
        return out

    def _wedges(self, v):
        # (fid, previous corner, next corner) for each face at v, CCW faces
        out = []
        for fid in self.vertex_faces.get(v, ()):
            c = self.faces[fid].corners
            i = c.index(v)
            out.append((fid, c[i - 1], c[(i + 1) % 4]))
        return out

    def is_interior(self, v: LatticeCoord) -> bool:
        """True iff the faces around ``v`` close up into a full disk."""
        wedges = self._wedges(v)
        if not wedges:
            return False
        prevs = sorted(w[1] for w in wedges)
        nexts = sorted(w[2] for w in wedges)
        return prevs == nexts

    def faces_around(self, v: LatticeCoord) -> list:
        """Face ids incident to ``v`` in counterclockwise cyclic order.

        For a boundary vertex the list starts at the face after the gap.
        """
        wedges = self._wedges(v)
        if not wedges:
            return []
        by_next = {w[2]: w for w in wedges}
        prevs = {w[1] for w in wedges}
        # a face whose 'next' edge is unshared starts the CCW run
        start = next((w for w in wedges if w[2] not in prevs), None)
        if start is None:
            start = min(wedges, key=lambda w: w[2])
        order = [start[0]]
        cur = start
        # CCW successor shares the edge towards cur's previous corner
        while True:
            nxt = by_next.get(cur[1])
            if nxt is None or nxt[0] == order[0]:
                break
            order.append(nxt[0])
            cur = nxt
        return order

    def sixty_level(self, v: LatticeCoord):
        """Level of the edges flanking a 60 degree angle at ``v``, else None."""
        for fid in self.vertex_faces.get(v, ()):
            f = self.faces[fid]
            i = f.corners.index(v)
            if f.shape == DIAMOND and i in (0, 2):
                return f.level
            if f.shape == KITE and i == 0:
                return f.level
        return None

    def contains_point(self, x: LatticeCoord, strict: bool = True) -> bool:
        """Whether ``x`` lies in the (open or closed) patch region."""
        if not strict:
            return patch_contains(self.hexagons, x, strict=False)
        got = self._inside.get(x)
        if got is None:
            got = self._inside[x] = patch_contains(self.hexagons, x, strict=True)
        return got

    def admissible(self, key) -> bool:
        """Whether ``key`` and all its prerequisites are centered inside the patch.

        A replacement centered strictly inside the patch always finds its six
        surrounding quadrilaterals once its prerequisites are done.
        """
        return all(self.contains_point(k.center) for k in missing_prerequisites(self, key))


# -- exact shape checks -------------------------------------------------------


def _angle(v, w):
    d = idot2(*v, *w)
    if d == 0:
        return 90
    if d * d != inorm2(*v) * inorm2(*w):
        return None
    return 60 if d > 0 else 120


def corner_angle(prev: LatticeCoord, at: LatticeCoord, nxt: LatticeCoord):
    """Exact interior angle class (60, 90, 120) at ``at``, or None."""
    (p, a, n), _ = aligned((prev, at, nxt))
    return _angle((p[0] - a[0], p[1] - a[1]), (n[0] - a[0], n[1] - a[1]))


def _level_of(n: int, K: int) -> int | None:
    # squared length n * 3**(-K) must be 3**(-level)
    t = 0
    while n % 3 == 0:
        n //= 3
        t += 1
    return K - t if n == 1 else None


def classify(corners) -> tuple | None:
    """Exact ``(shape, level)`` of a quadrilateral, or None if neither shape.

    Corners must be counterclockwise; diamonds are 60/120 rhombi and kites
    have angles 60, 90, 120, 90 with the sides at the 60 degree corner
    ``sqrt(3)`` times the sides at the 120 degree corner.
    """
    c = tuple(corners)
    if len(c) != 4 or len(set(c)) != 4:
        return None
    pts, K = aligned(c)
    e = [(pts[(i + 1) % 4][0] - pts[i][0], pts[(i + 1) % 4][1] - pts[i][1]) for i in range(4)]
    for i in range(4):
        if icross(*e[i], *e[(i + 1) % 4]) <= 0:
            return None
    angles = [_angle((-e[i - 1][0], -e[i - 1][1]), e[i]) for i in range(4)]
    sides = [inorm2(*v) for v in e]
    if angles in ([60, 120, 60, 120], [120, 60, 120, 60]):
        if len(set(sides)) != 1:
            return None
        lev = _level_of(sides[0], K)
        return None if lev is None else (DIAMOND, lev)
    if angles.count(60) != 1:
        return None
    i = angles.index(60)
    if [angles[(i + k) % 4] for k in range(4)] != [60, 90, 120, 90]:
        return None
    # sides c[i]c[i+1] and c[i-1]c[i] are long; the other two short
    long1, short1, short2, long2 = (sides[(i + k) % 4] for k in range(4))
    if long1 != long2 or short1 != short2 or long1 != 3 * short1:
        return None
    lev = _level_of(long1, K)
    return None if lev is None else (KITE, lev)


def check_face(face: Face) -> bool:
    """Exact check that ``face`` really has the stored shape, level and start."""
    got = classify(face.corners)
    if got != (face.shape, face.level):
        return False
    c = face.corners
    first = corner_angle(c[3], c[0], c[1])
    if first != 60:
        return False
    if face.shape == DIAMOND and not c[0] < c[2]:
        return False
    return True


# -- the patch -----------------------------------------------------------------


def _patch_hexagons(radius: int):
    for al in range(-radius, radius + 1):
        for be in range(-radius, radius + 1):
            if (abs(al) + abs(be) + abs(al + be)) // 2 <= radius:
                # (al + be zeta) * (1 + zeta)
                yield PATCH_CENTER + LatticeCoord(al, be, -1)


_HEX_NORMALS = [exact_int(_OMEGA.rotate(m))[:2] for m in range(6)]


def _in_closed_hexagon(center: LatticeCoord, x: LatticeCoord) -> bool:
    # dot(x - center, (1+zeta) zeta**m) <= 3/2 for all m, scaled by 2*den
    a, b, den = exact_int(x - center)
    for c, d in _HEX_NORMALS:
        if idot2(a, b, c, d) > 3 * den:
            return False
    return True


def patch_contains(hexagons, x: LatticeCoord, strict: bool = True) -> bool:
    z = x.to_complex()
    # nearby degree-3 hexagon centers by rounding in the unit lattice
    b0 = round(z.imag / 0.8660254037844386)
    a0 = round(z.real - 0.5 * b0)
    touching = []
    for da in range(-2, 3):
        for db in range(-2, 3):
            c = LatticeCoord(a0 + da, b0 + db, 0)
            if (c[0] - c[1] - 1) % 3 != 0 or c[2] != 0:
                continue
            if _in_closed_hexagon(c, x):
                touching.append(c)
    if not touching:
        return False
    if strict:
        return all(c in hexagons for c in touching)
    return any(c in hexagons for c in touching)


def initial_patch(radius: int) -> Mesh:
    """Rhombille patch: three level-0 diamonds per hexagon within ``radius``."""
    mesh = Mesh(radius)
    for hc in sorted(mesh.hexagons):
        for m in (0, 2, 4):
            a1 = hc + unit(m - 1)
            b = hc + unit(m)
            a2 = hc + unit(m + 1)
            mesh._add(_diamond((a1, b, a2, hc), 0))
    return mesh


# -- replacement ---------------------------------------------------------------


def _key(key) -> ReplacementKey:
    key = ReplacementKey(*key)
    if not isinstance(key.center, LatticeCoord):
        key = ReplacementKey(LatticeCoord(*key.center), key.level)
    return key


def _missing_vertex_error(mesh: Mesh, p: LatticeCoord, what: str):
    if mesh.contains_point(p, strict=True):
        return PreconditionViolation(f"{what}: no vertex at {p!r}")
    return BoundaryViolation(f"{what}: {p!r} is not interior to the patch")


def apply_replacement(mesh: Mesh, key) -> list:
    """Perform one replacement step in place; return the ids of new faces."""
    key = _key(key)
    p, j = key
    if key in mesh.applied:
        raise PreconditionViolation(f"{key!r} already performed")
    if j < 0 or not is_center(p, j):
        raise PreconditionViolation(f"{key!r} is not a valid replacement key")
    if p not in mesh.vertex_faces:
        raise _missing_vertex_error(mesh, p, "replacement")
    if not mesh.is_interior(p):
        raise BoundaryViolation(f"{key!r}: hexagon not interior to the patch")
    wedges = mesh._wedges(p)
    if len(wedges) != 6:
        raise PreconditionViolation(f"{key!r}: center has degree {len(wedges)}")
    spokes = {p + unit(m, j) for m in range(6)}
    for fid, u, w in wedges:
        f = mesh.faces[fid]
        i = f.corners.index(p)
        sixty = (f.shape == DIAMOND and i in (0, 2)) or (f.shape == KITE and i == 0)
        if not sixty or u not in spokes or w not in spokes:
            raise PreconditionViolation(f"{key!r}: six level-{j} edges do not meet at center")

    third = {}
    new_faces = []
    for fid, u, w in wedges:
        f = mesh._remove(fid)
        c = (p + u + w).third()
        third[u, w] = c
        i = f.corners.index(p)
        corners = list(f.corners)
        corners[i] = c
        if f.shape == DIAMOND:
            new_faces.append(_kite(corners, (i + 2) % 4, j))
        else:
            new_faces.append(_diamond(corners[1:] + corners[:1], j + 1))
    after = {u: c for (u, w), c in third.items()}
    for (u, w), c in third.items():
        # inner diamond around spoke w: c lies CCW of w, after[w] CW of it
        new_faces.append(_diamond((p, after[w], w, c), j + 1))
    mesh.applied.add(key)
    mesh.replacements += 1
    return [mesh._add(f) for f in new_faces]


def refine(mesh: Mesh, p: LatticeCoord) -> list:
    """Replace at ``p`` after performing every missing prerequisite.

    Returns the keys performed, in order.  The boundary is checked before any
    mutation, so a BoundaryViolation leaves the mesh untouched.
    """
    j = mesh.sixty_level(p)
    if j is None:
        raise PreconditionViolation(f"{p!r} is not a 60 degree corner of any face")
    for k in missing_prerequisites(mesh, (p, j)):
        if not mesh.contains_point(k.center):
            raise BoundaryViolation(f"refine at {p!r} needs {k!r} outside the patch")
    return _refine(mesh, p, j)


def missing_prerequisites(mesh: Mesh, key) -> set:
    """``key`` and its transitive prerequisites not yet applied to ``mesh``."""
    out = set()
    stack = [_key(key)]
    while stack:
        k = stack.pop()
        if k in out or k in mesh.applied:
            continue
        out.add(k)
        stack.extend(prerequisites(k))
    return out


def _refine(mesh: Mesh, p: LatticeCoord, j: int) -> list:
    done = []
    while True:
        q = None
        for fid in sorted(mesh.vertex_faces[p]):
            f = mesh.faces[fid]
            if f.shape == KITE and f.corners.index(p) in (1, 3):
                q = f.corners[0]
                break
        if q is None:
            break
        done.extend(_refine(mesh, q, mesh.sixty_level(q)))
    apply_replacement(mesh, (p, j))
    done.append(ReplacementKey(p, j))
    return done


def coarsening_key(mesh: Mesh, v: LatticeCoord):
    """The key a coarsening at ``v`` would undo, or None if not coarsenable."""
    fids = mesh.vertex_faces.get(v)
    if not fids or len(fids) != 6:
        return None
    levels = set()
    for fid in fids:
        f = mesh.faces[fid]
        if f.shape != DIAMOND or f.corners.index(v) not in (0, 2):
            return None
        levels.add(f.level)
    if len(levels) != 1:
        return None
    (lev,) = levels
    if lev < 1:
        return None
    key = ReplacementKey(v, lev - 1)
    if key not in mesh.applied:
        return None
    if any(d in mesh.applied for d in dependents(key)):
        return None
    if not mesh.is_interior(v):
        return None
    for fid, u, w in mesh._wedges(v):
        if len(mesh.vertex_faces[w]) != 3:
            return None
    return key


def is_coarsenable_topology(mesh: Mesh, v: LatticeCoord) -> bool:
    return coarsening_key(mesh, v) is not None


def coarsen_step(mesh: Mesh, v: LatticeCoord) -> list:
    """Undo the replacement centered at ``v``; return the ids of restored faces."""
    key = coarsening_key(mesh, v)
    if key is None:
        raise PreconditionViolation(f"{v!r} is not coarsenable")
    j = key.level
    inner = list(mesh.vertex_faces[v])
    new_vertices = set()
    for fid in inner:
        c = mesh.faces[fid].corners
        i = c.index(v)
        new_vertices.add(c[(i + 1) % 4])
        new_vertices.add(c[(i + 3) % 4])
    outer = set()
    for c in new_vertices:
        outer |= mesh.vertex_faces[c]
    outer -= set(inner)
    if len(new_vertices) != 6 or len(outer) != 6:
        raise PreconditionViolation(f"{v!r}: unexpected neighborhood")
    for fid in inner:
        mesh._remove(fid)
    restored = []
    for fid in sorted(outer):
        f = mesh._remove(fid)
        corners = list(f.corners)
        (i,) = [k for k, x in enumerate(corners) if x in new_vertices]
        corners[i] = v
        if f.shape == KITE:
            # kite (X, u', c, u) becomes the level-j diamond (v, u, X, u')
            restored.append(_diamond(corners[i:] + corners[:i], j))
        else:
            restored.append(_kite(corners, i, j))
    mesh.applied.discard(key)
    mesh.coarsenings += 1
    return [mesh._add(f) for f in restored]


def replay(radius: int, lower: Iterable, rng: random.Random | None = None) -> Mesh:
    """Initial patch followed by every key of ``lower`` in a valid order."""
    mesh = initial_patch(radius)
    for key in linearize(lower, rng=rng):
        apply_replacement(mesh, key)
    return mesh


__all__ = [
    "DIAMOND",
    "KITE",
    "ORIGIN",
    "PATCH_CENTER",
    "Face",
    "Mesh",
    "initial_patch",
    "apply_replacement",
    "refine",
    "coarsening_key",
    "is_coarsenable_topology",
    "coarsen_step",
    "replay",
    "missing_prerequisites",
    "patch_contains",
    "hex_distance",
    "classify",
    "check_face",
    "corner_angle",
]
