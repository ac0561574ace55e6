import cmath
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diamondkite.lattice import (
    ORIGIN,
    LatticeCoord,
    LowerSet,
    ReplacementKey,
    close_down,
    dependents,
    exact,
    is_center,
    is_lower_set,
    join,
    linearize,
    meet,
    normalize,
    prerequisites,
    to_cartesian,
    unit,
)

from conftest import random_center, random_lower_set

ZETA = cmath.exp(1j * math.pi / 3)
OMEGA = 1 + ZETA

coords = st.builds(
    LatticeCoord,
    st.integers(-60, 60),
    st.integers(-60, 60),
    st.integers(-6, 6),
)


def oracle_complex(a, b, k):
    return (a + b * ZETA) / OMEGA**k


def eisenstein_integer(z, tol=1e-7):
    """Whether the complex number z lies in Z[zeta]."""
    y = z.imag / (math.sqrt(3) / 2)
    x = z.real - y / 2
    return abs(x - round(x)) < tol and abs(y - round(y)) < tol


def oracle_is_center(p, j):
    # level-j centers form the lattice (1+zeta)**(1-j) Z[zeta]
    return eisenstein_integer(p.to_complex() * OMEGA ** (j - 1))


def oracle_prerequisites(p, j):
    """Brute force: nearest centers of the previous level, as complex numbers."""
    if j == 0:
        return []
    if oracle_is_center(p, j - 1):
        return [p.to_complex()]
    side = 3 ** (-(j - 1) / 2)
    scale = OMEGA ** (-(j - 1))
    z = p.to_complex() / scale
    y0 = round(z.imag / (math.sqrt(3) / 2))
    x0 = round(z.real - y0 / 2)
    out = []
    for x in range(x0 - 3, x0 + 4):
        for y in range(y0 - 3, y0 + 4):
            q = (x + y * ZETA) * scale
            if abs(abs(q - p.to_complex()) - side) < 1e-9 and oracle_is_center_complex(q, j - 1):
                out.append(q)
    return out


def oracle_is_center_complex(z, j):
    return eisenstein_integer(z * OMEGA ** (j - 1))


class TestCoordinates:
    def test_normalize_collapses_origin(self):
        assert normalize(0, 0, 5) == ORIGIN == LatticeCoord(0, 0, -3)

    def test_normalize_three_over_omega(self):
        # 3 / (1+zeta) = 2 - zeta
        c = normalize(3, 0, 1)
        assert c == normalize(2, -1, 0)
        assert tuple(c) == (1, -1, -1)
        assert abs(c.to_complex() - oracle_complex(3, 0, 1)) < 1e-12

    def test_to_cartesian_zeta(self):
        x, y = to_cartesian(LatticeCoord(0, 1, 0))
        assert x == pytest.approx(0.5)
        assert y == pytest.approx(math.sqrt(3) / 2)

    def test_units(self):
        for m in range(6):
            for j in range(4):
                z = unit(m, j).to_complex()
                assert z == pytest.approx(ZETA**m / OMEGA**j)

    @given(st.integers(-200, 200), st.integers(-200, 200), st.integers(-8, 8))
    def test_normal_form_value_and_invariant(self, a, b, k):
        c = normalize(a, b, k)
        assert c.to_complex() == pytest.approx(oracle_complex(a, b, k), abs=1e-9)
        if c != ORIGIN:
            assert (c.a - c.b) % 3 != 0

    @given(coords, coords)
    def test_arithmetic_matches_complex(self, p, q):
        assert (p + q).to_complex() == pytest.approx(p.to_complex() + q.to_complex(), abs=1e-6)
        assert (p - q).to_complex() == pytest.approx(p.to_complex() - q.to_complex(), abs=1e-6)
        assert p + q - q == p

    @given(coords, st.integers(0, 11))
    def test_rotation(self, p, m):
        assert p.rotate(m).to_complex() == pytest.approx(p.to_complex() * ZETA**m, abs=1e-6)
        assert p.rotate(6) == p

    @given(coords)
    def test_third_and_exact(self, p):
        t = p.third()
        assert t + t + t == p
        A, B = exact(p)
        assert float(A) + float(B) * ZETA == pytest.approx(p.to_complex(), abs=1e-6)

    @given(coords, coords)
    def test_equality_iff_same_point(self, p, q):
        assert (p == q) == (abs(p.to_complex() - q.to_complex()) < 1e-9)


class TestCenters:
    def test_is_center_against_lattice_oracle(self):
        rng = random.Random(3)
        for _ in range(3000):
            p = LatticeCoord(rng.randint(-20, 20), rng.randint(-20, 20), rng.randint(-3, 5))
            j = rng.randint(0, 6)
            assert is_center(p, j) == oracle_is_center(p, j), (p, j)

    def test_level_one_prerequisites(self):
        pre = prerequisites(ReplacementKey(LatticeCoord(1, 0, 0), 1))
        assert pre == {
            ReplacementKey(ORIGIN, 0),
            ReplacementKey(LatticeCoord(1, -1, -1), 0),
            ReplacementKey(LatticeCoord(1, 0, -1), 0),
        }

    def test_prerequisites_against_search(self):
        rng = random.Random(4)
        for _ in range(400):
            j = rng.randint(0, 5)
            p = random_center(rng, j)
            got = prerequisites(ReplacementKey(p, j))
            want = oracle_prerequisites(p, j)
            assert len(got) == len(want)
            for k in got:
                assert k.level == j - 1
                assert any(abs(k.center.to_complex() - z) < 1e-9 for z in want)

    def test_dependents_invert_prerequisites(self):
        rng = random.Random(5)
        for _ in range(300):
            j = rng.randint(0, 5)
            key = ReplacementKey(random_center(rng, j), j)
            for d in dependents(key):
                assert key in prerequisites(d)
            for pre in prerequisites(key):
                assert key in dependents(pre)

    def test_non_center_rejected(self):
        with pytest.raises(ValueError):
            prerequisites(ReplacementKey(LatticeCoord(1, 0, 0), 0))


class TestLowerSets:
    def test_constructor_checks_closure(self):
        with pytest.raises(ValueError, match="not downward closed"):
            LowerSet([ReplacementKey(ORIGIN, 1)])
        assert LowerSet([(ORIGIN, 0), (ORIGIN, 1)]) == close_down([ReplacementKey(ORIGIN, 1)])

    def test_close_down_is_minimal(self):
        rng = random.Random(6)
        for _ in range(50):
            j = rng.randint(0, 4)
            key = ReplacementKey(random_center(rng, j), j)
            closed = close_down([key])
            assert is_lower_set(closed)
            # every other key is an ancestor of the top one
            for k in closed:
                if k != key:
                    assert not is_lower_set(closed - {k})

    def test_linearize_is_topological(self):
        rng = random.Random(7)
        for _ in range(30):
            lower = random_lower_set(rng)
            for r in (None, random.Random(rng.random())):
                order = linearize(lower, r)
                assert sorted(order, key=ReplacementKey.sort_key) == lower.canonical()
                pos = {k: i for i, k in enumerate(order)}
                for k in order:
                    assert all(pos[p] < pos[k] for p in prerequisites(k))

    def test_canonical_order(self):
        lower = close_down([ReplacementKey(LatticeCoord(1, 0, 0), 2)])
        keys = lower.canonical()
        assert keys == sorted(keys, key=lambda k: (k.level, *k.center))

    @settings(max_examples=60, deadline=None)
    @given(st.randoms(use_true_random=False))
    def test_distributive_lattice_laws(self, r):
        a, b, c = (random_lower_set(r) for _ in range(3))
        assert meet(a, a) == a and join(a, a) == a
        assert meet(a, b) == meet(b, a) and join(a, b) == join(b, a)
        assert meet(a, join(a, b)) == a and join(a, meet(a, b)) == a
        assert meet(a, join(b, c)) == join(meet(a, b), meet(a, c))
        assert join(a, meet(b, c)) == meet(join(a, b), join(a, c))
        assert isinstance(meet(a, b), LowerSet) and isinstance(join(a, b), LowerSet)
