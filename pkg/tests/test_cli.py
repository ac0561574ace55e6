import json
import subprocess
import sys

import pytest

from diamondkite.cli import EXIT_BOUNDARY, EXIT_INVARIANT, EXIT_OK, EXIT_USAGE, main
from diamondkite.io import parse

CIRCLE = "circle:cx=0,cy=0,r=4,scale=0.2"


@pytest.fixture(scope="module")
def generated(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    out = d / "mesh.dkm"
    assert main(["generate", "--radius", "8", "--size", CIRCLE, "-o", str(out), "--report", str(d / "gen.json")]) == 0
    return d, out


def test_generate_then_verify(generated):
    d, mesh = generated
    report = json.loads((d / "gen.json").read_text())
    assert report["refine_steps"] == report["keys"] > 0
    assert main(["verify", "-i", str(mesh), "--size", CIRCLE, "-o", str(d / "v.json")]) == EXIT_OK
    v = json.loads((d / "v.json").read_text())
    assert v["ok"] and list(v["checks"]) == [
        "lower_set",
        "shapes",
        "euler",
        "packing",
        "coloring",
        "duals",
        "centroid",
        "size",
    ]


def test_meet_with_self_is_identity(generated):
    d, mesh = generated
    out = d / "meet.dkm"
    assert main(["lattice", "meet", "-a", str(mesh), "-b", str(mesh), "-o", str(out)]) == 0
    assert out.read_bytes() == mesh.read_bytes()


def test_join_and_meet_of_two_meshes(tmp_path):
    a, b = tmp_path / "a.dkm", tmp_path / "b.dkm"
    main(["generate", "--radius", "6", "--size", "point:cx=1,cy=0,scale=0.5,min=0.1", "-o", str(a)])
    main(["generate", "--radius", "6", "--size", "point:cx=-1,cy=0,scale=0.5,min=0.1", "-o", str(b)])
    for op, combine in (("meet", set.__and__), ("join", set.__or__)):
        out = tmp_path / f"{op}.dkm"
        assert main(["lattice", op, "-a", str(a), "-b", str(b), "-o", str(out)]) == 0
        ma, mb = parse(a.read_text()), parse(b.read_text())
        assert parse(out.read_text()).applied == combine(set(ma.applied), set(mb.applied))


def test_adapt_unchanged_is_no_op(generated):
    d, mesh = generated
    out, rep = d / "again.dkm", d / "adapt.json"
    assert main(["adapt", "-i", str(mesh), "--size", CIRCLE, "-o", str(out), "--report", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["refine_steps"] == report["coarsen_steps"] == report["symmetric_difference"] == 0
    assert out.read_bytes() == mesh.read_bytes()


def test_adapt_report_counts_steps(generated):
    d, mesh = generated
    out, rep = d / "moved.dkm", d / "moved.json"
    assert main(["adapt", "-i", str(mesh), "--size", "circle:cx=0.5,cy=0,r=3.5,scale=0.2", "-o", str(out), "--report", str(rep)]) == 0
    report = json.loads(rep.read_text())
    assert report["refine_steps"] + report["coarsen_steps"] == report["symmetric_difference"] > 0


def test_render_and_stats(generated):
    d, mesh = generated
    svg = d / "m.svg"
    assert main(["render", "-i", str(mesh), "--layers", "faces,coloring", "-o", str(svg)]) == 0
    assert svg.read_text().startswith("<?xml")
    st = d / "s.json"
    assert main(["stats", "-i", str(mesh), "--size", CIRCLE, "--samples", "30", "-o", str(st)]) == 0
    data = json.loads(st.read_text())
    assert data["n_faces"] == parse(mesh.read_text()).n_faces
    assert data["ratio"]["samples"] == 30


def test_verify_fails_on_wrong_field(generated):
    d, mesh = generated
    # a finer field leaves faces oversized
    assert main(["verify", "-i", str(mesh), "--size", "circle:cx=0,cy=0,r=4,scale=0.1", "-o", str(d / "x.json")]) == EXIT_INVARIANT


def test_exit_codes(tmp_path):
    assert main(["generate", "--radius", "2", "--size", "constant:value=0.5", "-o", str(tmp_path / "x")]) == EXIT_BOUNDARY
    assert main(["generate", "--radius", "2", "--size", "nope:x=1"]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE
    assert main(["verify", "-i", str(tmp_path / "missing.dkm")]) == EXIT_USAGE
    bad = tmp_path / "bad.dkm"
    bad.write_text("DKM 1\nradius 1\nkeys 1\n1 0 0 0\n")
    assert main(["verify", "-i", str(bad)]) == EXIT_USAGE
    assert main(["render", "-i", str(bad)]) == EXIT_USAGE


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.dkm"
    res = subprocess.run(
        [sys.executable, "-m", "diamondkite", "generate", "--radius", "2", "--size", "constant:value=1", "-o", str(out)],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0, res.stderr
    assert out.read_text() == "DKM 1\nradius 2\nkeys 0\n"
