"""Fitting a diamond-kite mesh to a size field, statically and dynamically."""
from __future__ import annotations

import time
from collections import deque
from dataclasses import asdict, dataclass

from .errors import NonTermination
from .lattice import LatticeCoord, prerequisites, unit
from .mesh import KITE, Mesh, coarsen_step, coarsening_key, refine
from .sizefield import SizeField, oversized

__all__ = [
    "DEFAULT_MAX_LEVEL",
    "AdaptReport",
    "face_polygon",
    "face_oversized",
    "diamond_kites",
    "refine_to_size",
    "is_coarsenable",
    "coarsen_to_size",
    "adapt",
]

DEFAULT_MAX_LEVEL = 36


def _xy(c: LatticeCoord):
    z = c.to_complex()
    return (z.real, z.imag)


def face_polygon(corners):
    return [_xy(c) for c in corners]


def _kite_at(a: LatticeCoord, o1: LatticeCoord, a2: LatticeCoord, o2: LatticeCoord):
    # kite inside diamond (a, o1, a2, o2) with its 60 degree corner at a
    d = a2 - a
    return (a, o1, a + (d + d).third(), o2)


def diamond_kites(corners):
    """The two kites with the diamond's side length that cover the diamond."""
    a1, o1, a2, o2 = corners
    return _kite_at(a1, o1, a2, o2), _kite_at(a2, o2, a1, o1)


def face_oversized(mesh: Mesh, fid: int, field: SizeField, sampling: str = "exact") -> bool:
    f = mesh.faces[fid]
    return oversized(field, face_polygon(f.corners), f.level, sampling)


@dataclass
class AdaptReport:
    refine_steps: int = 0
    coarsen_steps: int = 0
    queue_pushes: int = 0
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def _check_cap(level: int, max_level: int):
    if level + 1 > max_level:
        raise NonTermination(
            f"size field requires level {level + 1} elements, cap is {max_level}"
        )


def refine_to_size(
    mesh: Mesh,
    field: SizeField,
    order: str = "fifo",
    sampling: str = "exact",
    max_level: int = DEFAULT_MAX_LEVEL,
    report: AdaptReport | None = None,
    boundary: str = "raise",
) -> Mesh:
    """Refine ``mesh`` in place until no face is oversized.

    The result is the coarsest mesh refining the input that satisfies
    ``field``; it does not depend on ``order`` (``"fifo"`` or ``"lifo"``).
    With ``boundary="skip"`` oversized faces whose refinement would leave the
    patch are kept instead of raising :class:`BoundaryViolation`.
    """
    if order not in ("fifo", "lifo"):
        raise ValueError(f"unknown queue order {order!r}")
    if boundary not in ("raise", "skip"):
        raise ValueError(f"unknown boundary policy {boundary!r}")
    report = report if report is not None else AdaptReport()
    queue = deque(sorted(mesh.faces))
    report.queue_pushes += len(queue)
    pop = queue.popleft if order == "fifo" else queue.pop
    start_steps = mesh.replacements

    def run_refine(p, level):
        if boundary == "skip" and not mesh.admissible((p, level)):
            return
        _check_cap(level, max_level)
        mark = mesh._next_id
        refine(mesh, p)
        new = [i for i in range(mark, mesh._next_id) if i in mesh.faces]
        queue.extend(new)
        report.queue_pushes += len(new)

    while queue:
        fid = pop()
        f = mesh.faces.get(fid)
        if f is None:
            continue
        if f.shape == KITE:
            if oversized(field, face_polygon(f.corners), f.level, sampling):
                run_refine(f.corners[0], f.level)
            continue
        for kite in diamond_kites(f.corners):
            if fid not in mesh.faces:
                break
            if oversized(field, face_polygon(kite), f.level, sampling):
                run_refine(kite[0], f.level)
    report.refine_steps += mesh.replacements - start_steps
    return mesh


def _coarse_kites(v: LatticeCoord, level: int):
    spokes = [v + unit(m, level) for m in range(6)]
    for m in range(6):
        u, w = spokes[m], spokes[(m + 1) % 6]
        d = (u - v) + (w - v)
        yield (v, u, v + (d + d).third(), w)


def is_coarsenable(mesh: Mesh, v: LatticeCoord, field: SizeField, sampling: str = "exact") -> bool:
    """True iff undoing the replacement at ``v`` leaves no kite oversized.

    The six kites of the coarser level around ``v`` do not exist yet, so they
    are built from the hexagon geometry rather than by mutating the mesh.
    """
    key = coarsening_key(mesh, v)
    if key is None:
        return False
    for kite in _coarse_kites(v, key.level):
        if oversized(field, face_polygon(kite), key.level, sampling):
            return False
    return True


def coarsen_to_size(
    mesh: Mesh,
    field: SizeField,
    order: str = "fifo",
    sampling: str = "exact",
    report: AdaptReport | None = None,
) -> Mesh:
    """Coarsen ``mesh`` in place until no vertex is coarsenable."""
    report = report if report is not None else AdaptReport()
    queue = deque(sorted(v for v in mesh.vertex_faces if is_coarsenable(mesh, v, field, sampling)))
    queued = set(queue)
    report.queue_pushes += len(queue)
    pop = queue.popleft if order == "fifo" else queue.pop
    while queue:
        v = pop()
        queued.discard(v)
        if not is_coarsenable(mesh, v, field, sampling):
            continue
        key = coarsening_key(mesh, v)
        coarsen_step(mesh, v)
        report.coarsen_steps += 1
        # keys that may have just become maximal are centered at v's
        # neighbours or at the prerequisites of the removed key
        cand = mesh.neighbors(v) | {v} | {k.center for k in prerequisites(key)}
        for u in sorted(cand):
            if u not in queued and is_coarsenable(mesh, u, field, sampling):
                queue.append(u)
                queued.add(u)
                report.queue_pushes += 1
    return mesh


def adapt(
    mesh: Mesh,
    field: SizeField,
    order: str = "fifo",
    sampling: str = "exact",
    max_level: int = DEFAULT_MAX_LEVEL,
    boundary: str = "raise",
) -> tuple[Mesh, AdaptReport]:
    """Refine then coarsen ``mesh`` in place to fit a new size field."""
    report = AdaptReport()
    t0 = time.perf_counter()
    refine_to_size(mesh, field, order, sampling, max_level, report, boundary)
    coarsen_to_size(mesh, field, order, sampling, report)
    report.seconds = time.perf_counter() - t0
    return mesh, report
