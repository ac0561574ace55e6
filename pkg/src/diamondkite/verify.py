"""Run every invariant check on one mesh and collect the results."""
from __future__ import annotations

from .adapt import diamond_kites, face_oversized, face_polygon, is_coarsenable
from .derived import (
    build_packing,
    check_centroid,
    check_coloring,
    check_duals,
    three_color,
    validate_packing,
)
from .errors import InconsistentRadius
from .lattice import is_lower_set
from .mesh import KITE, Mesh, check_face, initial_patch
from .sizefield import SizeField, oversized

__all__ = ["verify_mesh"]


def _oversized_faces(mesh: Mesh, field: SizeField) -> list:
    out = []
    for fid, f in sorted(mesh.faces.items()):
        if f.shape == KITE:
            bad = face_oversized(mesh, fid, field)
        else:
            bad = any(oversized(field, face_polygon(k), f.level) for k in diamond_kites(f.corners))
        if bad:
            out.append(fid)
    return out


def verify_mesh(mesh: Mesh, field: SizeField | None = None) -> dict:
    """Every invariant suite; ``report["ok"]`` is False on any violation.

    With ``field`` the mesh must also be the coarsest one fitting it: no face
    oversized and no vertex coarsenable.  Faces the patch boundary kept from
    refining count as oversized here.
    """
    checks: dict = {}
    checks["lower_set"] = {"closed": is_lower_set(mesh.applied)}
    bad_faces = [fid for fid, f in sorted(mesh.faces.items()) if not check_face(f)]
    checks["shapes"] = {"faces": mesh.n_faces, "bad": len(bad_faces)}
    V0, E0, F0 = initial_patch(mesh.radius).counts()
    n = len(mesh.applied)
    want = (V0 + 6 * n, E0 + 12 * n, F0 + 6 * n)
    checks["euler"] = {"counts": list(mesh.counts()), "expected": list(want)}
    try:
        packing = build_packing(mesh)
        rep = validate_packing(packing, mesh)
        checks["packing"] = {k: v if k != "violations" else len(v) for k, v in rep.items()}
    except InconsistentRadius as e:
        checks["packing"] = {"error": str(e), "violations": 1}
    colors = three_color(mesh)
    checks["coloring"] = {
        "classes": len(set(colors.values())),
        "conflicts": len(check_coloring(mesh, colors)),
    }
    d = check_duals(mesh)
    checks["duals"] = {
        "shapes": d["shapes"],
        "dropped": d["dropped"],
        "bad_shape": len(d["bad_shape"]),
        "not_orthogonal": len(d["not_orthogonal"]),
        "not_inside": len(d["not_inside"]),
    }
    c = check_centroid(mesh)
    checks["centroid"] = {"interior": c["interior"], "boundary": c["boundary"], "failing": len(c["failing"])}
    ok = (
        checks["lower_set"]["closed"]
        and not bad_faces
        and tuple(mesh.counts()) == want
        and checks["packing"]["violations"] == 0
        and checks["coloring"]["conflicts"] == 0
        and (n == 0 or checks["coloring"]["classes"] == 3)
        and not (d["bad_shape"] or d["not_orthogonal"] or d["not_inside"])
        and not c["failing"]
    )
    if field is not None:
        over = _oversized_faces(mesh, field)
        coarse = [v for v in sorted(mesh.vertex_faces) if is_coarsenable(mesh, v, field)]
        checks["size"] = {"oversized": len(over), "coarsenable": len(coarse)}
        ok = ok and not over and not coarse
    return {"ok": bool(ok), "checks": checks}
