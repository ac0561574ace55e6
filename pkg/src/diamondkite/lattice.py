"""Exact subdivision-lattice arithmetic and the lattice of replacement sets.

Every vertex that can ever appear in a diamond-kite mesh is a point of the
ring ``Z[zeta, 1/(1+zeta)]`` with ``zeta = exp(i pi / 3)``.  A point is stored
as three integers ``(a, b, k)`` denoting ``(a + b zeta) / (1 + zeta)**k``.
Multiplying by ``1/(1+zeta)`` scales by ``1/sqrt(3)`` and rotates by -30
degrees, which is precisely one subdivision level, so all refinement levels
share one exact coordinate system.

Replacement steps are keyed by ``(center, level)``.  The prerequisite graph
between keys is acyclic and finite lower sets of keys form a distributive
lattice under intersection and union.
"""
from __future__ import annotations

import heapq
import math
import random
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

__all__ = [
    "LatticeCoord",
    "ReplacementKey",
    "LowerSet",
    "ORIGIN",
    "normalize",
    "to_cartesian",
    "unit",
    "is_center",
    "prerequisites",
    "dependents",
    "close_down",
    "is_lower_set",
    "meet",
    "join",
    "linearize",
    "exact",
    "norm2",
    "dot",
    "cross",
    "aligned",
    "exact_int",
]

_SQRT3_2 = math.sqrt(3.0) / 2.0
_OMEGA = complex(1.5, _SQRT3_2)  # 1 + zeta

# zeta**m as (a, b) pairs
_UNITS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def _reduce(a: int, b: int, k: int) -> tuple[int, int, int]:
    if a == 0 and b == 0:
        return 0, 0, 0
    while (a - b) % 3 == 0:
        a, b, k = (2 * a + b) // 3, (b - a) // 3, k - 1
    return a, b, k


def _mul_omega(a: int, b: int, n: int) -> tuple[int, int]:
    # (a + b zeta) * (1 + zeta)**n, n >= 0
    for _ in range(n):
        a, b = a - b, a + 2 * b
    return a, b


class LatticeCoord(tuple):
    """Normalized exact point ``(a + b zeta) / (1 + zeta)**k``.

    Construction always normalizes, so equal points compare and hash equal.
    """

    __slots__ = ()

    def __new__(cls, a: int = 0, b: int = 0, k: int = 0):
        return tuple.__new__(cls, _reduce(int(a), int(b), int(k)))

    @property
    def a(self) -> int:
        return self[0]

    @property
    def b(self) -> int:
        return self[1]

    @property
    def k(self) -> int:
        return self[2]

    def __repr__(self) -> str:
        return f"LatticeCoord({self[0]}, {self[1]}, {self[2]})"

    def _aligned(self, other: "LatticeCoord"):
        k = max(self[2], other[2])
        a1, b1 = _mul_omega(self[0], self[1], k - self[2])
        a2, b2 = _mul_omega(other[0], other[1], k - other[2])
        return a1, b1, a2, b2, k

    def __add__(self, other):
        if not isinstance(other, LatticeCoord):
            return NotImplemented
        a1, b1, a2, b2, k = self._aligned(other)
        return LatticeCoord(a1 + a2, b1 + b2, k)

    def __sub__(self, other):
        if not isinstance(other, LatticeCoord):
            return NotImplemented
        a1, b1, a2, b2, k = self._aligned(other)
        return LatticeCoord(a1 - a2, b1 - b2, k)

    def __neg__(self):
        return LatticeCoord(-self[0], -self[1], self[2])

    def rotate(self, m: int = 1) -> "LatticeCoord":
        """Multiply by ``zeta**m`` (rotation by ``60 m`` degrees)."""
        a, b = self[0], self[1]
        for _ in range(m % 6):
            a, b = -b, a + b
        return LatticeCoord(a, b, self[2])

    def shrink(self, n: int = 1) -> "LatticeCoord":
        """Multiply by ``(1 + zeta)**(-n)``: scale ``3**(-n/2)``, rotate ``-30 n``."""
        return LatticeCoord(self[0], self[1], self[2] + n)

    def third(self) -> "LatticeCoord":
        """Divide by three exactly (``1/3 = zeta / (1+zeta)**2``)."""
        return self.rotate(1).shrink(2)

    def to_complex(self) -> complex:
        return _to_complex(self[0], self[1], self[2])

    def sort_key(self) -> tuple[int, int, int]:
        return (self[0], self[1], self[2])


ORIGIN = LatticeCoord(0, 0, 0)


@lru_cache(maxsize=None)
def _to_complex(a: int, b: int, k: int) -> complex:
    return complex(a + 0.5 * b, _SQRT3_2 * b) * _OMEGA ** (-k)


def normalize(a: int, b: int, k: int) -> LatticeCoord:
    """Return the normalized coordinate denoting ``(a + b zeta)/(1+zeta)**k``."""
    return LatticeCoord(a, b, k)


def to_cartesian(c: LatticeCoord) -> tuple[float, float]:
    z = c.to_complex()
    return z.real, z.imag


def unit(m: int, level: int = 0) -> LatticeCoord:
    """The level-``level`` edge vector ``zeta**m * (1+zeta)**(-level)``."""
    a, b = _UNITS[m % 6]
    return LatticeCoord(a, b, level)


# -- exact Euclidean geometry -------------------------------------------------
#
# Points map to (A, B) with A, B rational and value A + B zeta.  Squared norms,
# dot products and (scaled) cross products are then rational.


@lru_cache(maxsize=1 << 18)
def exact_int(c: LatticeCoord) -> tuple[int, int, int]:
    """Integers ``(A, B, d)`` with ``c == (A + B zeta) / d`` and ``d = 3**k``."""
    a, b, k = c
    if k <= 0:
        a, b = _mul_omega(a, b, -k)
        return a, b, 1
    # 1/(1+zeta) = conj(1+zeta)/3 = (2 - zeta)/3
    for _ in range(k):
        a, b = 2 * a + b, b - a
    return a, b, 3**k


@lru_cache(maxsize=1 << 18)
def exact(c: LatticeCoord) -> tuple[Fraction, Fraction]:
    """Rational Eisenstein components ``(A, B)`` with ``c == A + B zeta``."""
    a, b, d = exact_int(c)
    return Fraction(a, d), Fraction(b, d)


def _pair(v) -> tuple[Fraction, Fraction]:
    return exact(v) if isinstance(v, LatticeCoord) else v


def aligned(points) -> tuple[list, int]:
    """Integer pairs ``(a, b)`` for ``points`` on the common scale ``(1+zeta)**-K``.

    The shared factor is a similarity, so angles, orientation and length
    ratios computed from the integer pairs equal those of the real points.
    """
    K = max(p[2] for p in points)
    return [_mul_omega(p[0], p[1], K - p[2]) for p in points], K


def inorm2(a: int, b: int) -> int:
    return a * a + a * b + b * b


def idot2(a: int, b: int, c: int, d: int) -> int:
    """Twice the dot product of two integer Eisenstein vectors."""
    return 2 * (a * c + b * d) + a * d + b * c


def icross(a: int, b: int, c: int, d: int) -> int:
    return a * d - b * c


def norm2(v) -> Fraction:
    """Exact squared length of a vector (LatticeCoord or rational pair)."""
    a, b = _pair(v)
    return a * a + a * b + b * b


def dot(v, w) -> Fraction:
    a, b = _pair(v)
    c, d = _pair(w)
    return a * c + b * d + (a * d + b * c) / 2


def cross(v, w) -> Fraction:
    """Cross product divided by ``sqrt(3)/2`` (sign and zero are exact)."""
    a, b = _pair(v)
    c, d = _pair(w)
    return a * d - b * c


# -- replacement keys ---------------------------------------------------------


class ReplacementKey(NamedTuple):
    """One replacement step: hexagon ``center`` at subdivision ``level``.

    The replaced edges have length ``3**(-level/2)`` initial edge lengths.
    """

    center: LatticeCoord
    level: int

    def sort_key(self) -> tuple[int, int, int, int]:
        c = self.center
        return (self.level, c[0], c[1], c[2])


def is_center(p: LatticeCoord, j: int) -> bool:
    """True iff ``p`` can be the center of a level-``j`` replacement."""
    if j < 0:
        raise ValueError(f"negative level {j}")
    if p == ORIGIN:
        return True
    return p[2] <= j - 1


def _check_key(key: ReplacementKey) -> None:
    if not isinstance(key.center, LatticeCoord) or not is_center(key.center, key.level):
        raise ValueError(f"invalid replacement key {key!r}")


@lru_cache(maxsize=1 << 16)
def _prereqs(key: ReplacementKey) -> frozenset:
    p, j = key
    if j == 0:
        return frozenset()
    if is_center(p, j - 1):
        return frozenset({ReplacementKey(p, j - 1)})
    found = []
    for m in range(6):
        q = p + unit(m, j - 1)
        if is_center(q, j - 1):
            found.append(ReplacementKey(q, j - 1))
    if len(found) != 3:
        raise AssertionError(f"{key!r} has {len(found)} prerequisite centers")
    return frozenset(found)


def prerequisites(key: ReplacementKey) -> frozenset:
    """Immediate prerequisites of ``key``: zero, one or three keys one level up."""
    _check_key(key)
    return _prereqs(ReplacementKey(*key))


def dependents(key: ReplacementKey) -> frozenset:
    """Keys one level finer that list ``key`` among their prerequisites."""
    _check_key(key)
    p, j = key
    out = {ReplacementKey(p, j + 1)}
    for m in range(6):
        q = p + unit(m, j)
        cand = ReplacementKey(q, j + 1)
        if is_center(q, j + 1) and key in _prereqs(cand):
            out.add(cand)
    return frozenset(out)


class LowerSet(frozenset):
    """A finite downward-closed set of :class:`ReplacementKey`.

    ``LowerSet(keys)`` raises ``ValueError`` when ``keys`` is not closed; use
    :func:`close_down` to build the closure instead.
    """

    def __new__(cls, keys: Iterable = ()):
        self = frozenset.__new__(cls, (ReplacementKey(*k) for k in keys))
        missing = _first_unclosed(self)
        if missing is not None:
            raise ValueError(f"not downward closed: {missing[0]!r} needs {missing[1]!r}")
        return self

    def canonical(self) -> list:
        return sorted(self, key=ReplacementKey.sort_key)

    def __repr__(self) -> str:
        return f"LowerSet({self.canonical()!r})"


def _first_unclosed(keys):
    for key in keys:
        for pre in prerequisites(key):
            if pre not in keys:
                return key, pre
    return None


def is_lower_set(keys: Iterable) -> bool:
    keys = set(keys)
    try:
        return _first_unclosed(keys) is None
    except ValueError:
        return False


def close_down(keys: Iterable) -> LowerSet:
    """Smallest lower set containing ``keys``."""
    seen = set()
    stack = [ReplacementKey(*k) for k in keys]
    while stack:
        key = stack.pop()
        if key in seen:
            continue
        seen.add(key)
        stack.extend(prerequisites(key))
    return LowerSet(seen)


def meet(l1: LowerSet, l2: LowerSet) -> LowerSet:
    """Finest common coarsening: set intersection."""
    out = frozenset(l1) & frozenset(l2)
    assert _first_unclosed(out) is None
    return frozenset.__new__(LowerSet, out)


def join(l1: LowerSet, l2: LowerSet) -> LowerSet:
    """Coarsest common refinement: set union."""
    out = frozenset(l1) | frozenset(l2)
    assert _first_unclosed(out) is None
    return frozenset.__new__(LowerSet, out)


def linearize(lower: Iterable, rng: random.Random | None = None) -> list:
    """Topological order of ``lower`` under the prerequisite relation.

    Without ``rng`` ties are broken by the canonical ``(level, a, b, k)``
    order, so the result is reproducible.  With ``rng`` a uniformly random
    ready key is taken at each step, giving an arbitrary valid linearization.
    """
    keys = set(lower)
    indeg = {}
    children: dict = {}
    for key in keys:
        pres = [p for p in prerequisites(key) if p in keys]
        if len(pres) != len(prerequisites(key)):
            raise ValueError(f"not downward closed at {key!r}")
        indeg[key] = len(pres)
        for p in pres:
            children.setdefault(p, []).append(key)
    order = []
    if rng is None:
        heap = [(k.sort_key(), k) for k, d in indeg.items() if d == 0]
        heapq.heapify(heap)
        while heap:
            _, key = heapq.heappop(heap)
            order.append(key)
            for ch in children.get(key, ()):
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    heapq.heappush(heap, (ch.sort_key(), ch))
    else:
        ready = sorted((k for k, d in indeg.items() if d == 0), key=ReplacementKey.sort_key)
        while ready:
            i = rng.randrange(len(ready))
            ready[i], ready[-1] = ready[-1], ready[i]
            key = ready.pop()
            order.append(key)
            for ch in sorted(children.get(key, ()), key=ReplacementKey.sort_key):
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    ready.append(ch)
    return order
