import math
import random

import numpy as np
import pytest

from diamondkite.adapt import (
    adapt,
    coarsen_to_size,
    diamond_kites,
    face_polygon,
    is_coarsenable,
    refine_to_size,
)
from diamondkite.errors import BoundaryViolation, NonTermination
from diamondkite.mesh import KITE, coarsen_step, coarsening_key, initial_patch, refine
from diamondkite.sizefield import (
    CircleSize,
    ConstantSize,
    GridSize,
    PointSize,
    RampSize,
    oversized,
    side_length,
)

from conftest import random_field


def dense_min(field, poly, n=40):
    """Field minimum over a convex polygon by brute-force sampling."""
    p = np.asarray(poly)
    best = math.inf
    c = p.mean(axis=0)
    for i in range(len(p)):
        a, b = p[i], p[(i + 1) % len(p)]
        for s in np.linspace(0, 1, n):
            for t in np.linspace(0, 1, n):
                if s + t <= 1:
                    x, y = c + s * (a - c) + t * (b - c)
                    best = min(best, field(x, y))
    return best


def pieces(face):
    return [face.corners] if face.shape == KITE else list(diamond_kites(face.corners))


def any_oversized(mesh, field):
    for f in mesh.faces.values():
        if any(oversized(field, face_polygon(k), f.level) for k in pieces(f)):
            return True
    return False


def naive_refine(mesh, field):
    """Reference: rescan every face and refine the first oversized one."""
    while True:
        for fid in sorted(mesh.faces):
            f = mesh.faces[fid]
            hit = next((k for k in pieces(f) if oversized(field, face_polygon(k), f.level)), None)
            if hit is not None:
                refine(mesh, hit[0])
                break
        else:
            return mesh


FIELDS = [
    ConstantSize(0.7),
    PointSize(0.3, -0.2, 0.5, 0.1),
    CircleSize(0.5, 0.0, 2.0, 0.4, 0.1),
    RampSize(0.5, 0.3, -0.1, 0.1),
    GridSize(np.array([[0.3, 0.5, 0.9], [0.4, 0.6, 1.0], [0.8, 1.0, 1.2]]), -2, -2, 2, 2, lipschitz=0.3),
]


class TestSizeFields:
    @pytest.mark.parametrize("field", FIELDS, ids=lambda f: f.kind)
    def test_min_over_quad_is_lower_bound(self, field):
        rng = random.Random(0)
        for _ in range(30):
            cx, cy, r = rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(0.05, 1.5)
            t0 = rng.uniform(0, math.pi)
            poly = [(cx + r * math.cos(t0 + k * math.pi / 2), cy + r * 0.6 * math.sin(t0 + k * math.pi / 2)) for k in range(4)]
            assert field.min_over_quad(poly) <= dense_min(field, poly) + 1e-12

    @pytest.mark.parametrize("field", FIELDS[:4], ids=lambda f: f.kind)
    def test_analytic_minimum_is_tight(self, field):
        rng = random.Random(1)
        for _ in range(20):
            cx, cy = rng.uniform(-3, 3), rng.uniform(-3, 3)
            poly = [(cx, cy), (cx + 0.5, cy), (cx + 0.5, cy + 0.4), (cx, cy + 0.4)]
            assert field.min_over_quad(poly) == pytest.approx(dense_min(field, poly, 80), abs=5e-3)

    def test_circle_interior_minimum_missed_by_vertices(self):
        field = CircleSize(0, 0, 1.0, 0.5, 0.05)
        poly = [(0.8, -0.1), (1.2, -0.1), (1.2, 0.1), (0.8, 0.1)]
        assert field.min_over_quad(poly) == pytest.approx(0.05)
        assert field.min_at_vertices(poly) > 0.05
        assert oversized(field, poly, 5)
        assert not oversized(field, poly, 5, sampling="vertices")

    def test_grid_rejects_small_lipschitz(self):
        vals = np.array([[0.0, 1.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="lipschitz"):
            GridSize(vals, 0, 0, 1, 1, lipschitz=0.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            ConstantSize(0)
        with pytest.raises(ValueError):
            PointSize(min=-1)

    def test_side_length(self):
        assert side_length(0) == 1
        assert side_length(2) == pytest.approx(1 / 3)

    def test_equality_by_parameters(self):
        assert CircleSize(r=2) == CircleSize(r=2.0)
        assert CircleSize(r=2) != CircleSize(r=3)
        assert len({PointSize(), PointSize()}) == 1


class TestRefineToSize:
    @pytest.mark.parametrize("seed", range(6))
    def test_matches_naive_reference(self, seed):
        field = random_field(random.Random(seed), spread=1.0)
        fast = refine_to_size(initial_patch(6), field)
        slow = naive_refine(initial_patch(6), field)
        assert fast == slow

    def test_constant_field_inside_hexagons(self):
        m = refine_to_size(initial_patch(3), ConstantSize(0.8), boundary="skip")
        levels = {f.level for f in m.faces.values()}
        assert levels == {0, 1}
        with pytest.raises(BoundaryViolation):
            refine_to_size(initial_patch(3), ConstantSize(0.8))

    def test_large_constant_changes_nothing(self):
        m = refine_to_size(initial_patch(3), ConstantSize(1.0))
        assert m == initial_patch(3)

    def test_orders_agree(self):
        field = CircleSize(0, 0, 1.5, 0.3, 0.08)
        assert refine_to_size(initial_patch(6), field, "fifo") == refine_to_size(initial_patch(6), field, "lifo")

    def test_vertex_sampling_is_coarser(self):
        field = CircleSize(0, 0, 1.5, 0.3, 0.08)
        exact = refine_to_size(initial_patch(6), field)
        fast = refine_to_size(initial_patch(6), field, sampling="vertices")
        assert fast.applied <= exact.applied

    def test_level_cap(self):
        with pytest.raises(NonTermination):
            refine_to_size(initial_patch(6), PointSize(0, 0, 0.5, 0.01), max_level=3)

    def test_no_oversized_no_coarsenable(self):
        field = PointSize(0.2, 0.1, 0.6, 0.05)
        m = refine_to_size(initial_patch(6), field)
        assert not any_oversized(m, field)
        assert not any(is_coarsenable(m, v, field) for v in m.vertex_faces)

    def test_unknown_order(self):
        with pytest.raises(ValueError):
            refine_to_size(initial_patch(1), ConstantSize(1), order="random")


class TestCoarsen:
    def test_is_coarsenable_predicts_actual_coarsening(self):
        field_fine = PointSize(0.2, 0.1, 0.5, 0.05)
        rng = random.Random(2)
        for _ in range(5):
            field = random_field(rng, spread=1.0)
            m = refine_to_size(initial_patch(6), field_fine)
            for v in sorted(m.vertex_faces):
                key = coarsening_key(m, v)
                if key is None:
                    continue
                trial = m.copy()
                restored = coarsen_step(trial, v)
                # only pieces that did not exist before the coarsening count
                old = {frozenset(k) for f in m.faces.values() for k in pieces(f)}
                bad = False
                for fid in restored:
                    f = trial.faces[fid]
                    new = [k for k in pieces(f) if frozenset(k) not in old]
                    bad |= any(oversized(field, face_polygon(k), f.level) for k in new)
                assert is_coarsenable(m, v, field) == (not bad)

    def test_coarsen_to_size_reaches_static_mesh(self):
        rng = random.Random(3)
        for _ in range(5):
            fine, coarse = random_field(rng, 1.0), random_field(rng, 1.0)
            m = refine_to_size(initial_patch(6), fine)
            refine_to_size(m, coarse)
            coarsen_to_size(m, coarse)
            assert m == refine_to_size(initial_patch(6), coarse)


class TestAdapt:
    def test_steps_equal_symmetric_difference(self):
        rng = random.Random(4)
        for _ in range(5):
            old, new = random_field(rng, 1.0), random_field(rng, 1.0)
            m = refine_to_size(initial_patch(7), old)
            before = set(m.applied)
            m, report = adapt(m, new)
            target = refine_to_size(initial_patch(7), new)
            assert m == target
            assert report.refine_steps + report.coarsen_steps == len(before ^ target.applied)

    def test_unchanged_field_is_a_no_op(self):
        field = CircleSize(0, 0, 2, 0.3, 0.1)
        m = refine_to_size(initial_patch(6), field)
        same, report = adapt(m.copy(), field)
        assert same == m
        assert report.refine_steps == report.coarsen_steps == 0
