"""Exact lattice arithmetic on Z^2 and complete fans in the plane.

Vectors are plain tuples of Python ints and 2x2 integer matrices are
tuples of rows, so everything here is exact and hashable.  A ``Fan``
stores its primitive rays in strict counterclockwise order starting
from the first ray at angle >= 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cmp_to_key
from math import gcd
from typing import Iterable, Sequence

Vec = tuple[int, int]
Mat = tuple[tuple[int, int], tuple[int, int]]

P2_RAYS: tuple[Vec, ...] = ((1, 0), (0, 1), (-1, -1))
P1P1_RAYS: tuple[Vec, ...] = ((1, 0), (0, 1), (-1, 0), (0, -1))
IDENTITY: Mat = ((1, 0), (0, 1))


class FanError(ValueError):
    pass


# -- vectors and matrices ---------------------------------------------------

def det(u: Sequence, w: Sequence):
    return u[0] * w[1] - u[1] * w[0]


def dot(u: Sequence, w: Sequence):
    return u[0] * w[0] + u[1] * w[1]


def primitive(v: Sequence[int]) -> Vec:
    a, b = int(v[0]), int(v[1])
    if a == 0 and b == 0:
        raise ValueError("zero vector has no primitive ray")
    g = gcd(a, b)
    return (a // g, b // g)


def content(v: Sequence[int]) -> int:
    """Lattice length of v, i.e. the k with v = k * primitive(v)."""
    return gcd(int(v[0]), int(v[1]))


def as_matrix(m) -> Mat:
    """Coerce nested sequences (or a flat 4-sequence) to an integer matrix."""
    if len(m) == 4:
        m = (m[:2], m[2:])
    rows = tuple(tuple(int(x) for x in row) for row in m)
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise ValueError(f"expected a 2x2 matrix, got {m!r}")
    for row, orig in zip(rows, m):
        for x, y in zip(row, orig):
            if x != y:
                raise ValueError(f"matrix entries must be integers, got {m!r}")
    return rows  # type: ignore[return-value]


def mdet(A: Mat) -> int:
    return A[0][0] * A[1][1] - A[0][1] * A[1][0]


def matvec(A: Mat, v: Sequence):
    return (A[0][0] * v[0] + A[0][1] * v[1], A[1][0] * v[0] + A[1][1] * v[1])


def matmul(A: Mat, B: Mat) -> Mat:
    return (
        (A[0][0] * B[0][0] + A[0][1] * B[1][0], A[0][0] * B[0][1] + A[0][1] * B[1][1]),
        (A[1][0] * B[0][0] + A[1][1] * B[1][0], A[1][0] * B[0][1] + A[1][1] * B[1][1]),
    )


def matpow(A: Mat, n: int) -> Mat:
    if n < 0:
        raise ValueError("negative matrix power")
    R, P = IDENTITY, A
    while n:
        if n & 1:
            R = matmul(R, P)
        P = matmul(P, P)
        n >>= 1
    return R


def adjugate(A: Mat) -> Mat:
    return ((A[1][1], -A[0][1]), (-A[1][0], A[0][0]))


def transpose(A: Mat) -> Mat:
    return ((A[0][0], A[1][0]), (A[0][1], A[1][1]))


def preimage_ray(A: Mat, v: Sequence[int]) -> Vec:
    """Primitive generator of the ray A^{-1}(R_+ v)."""
    d = mdet(A)
    if d == 0:
        raise ValueError("singular matrix")
    w = matvec(adjugate(A), v)
    if d < 0:
        w = (-w[0], -w[1])
    return primitive(w)


# -- angular order ------------------------------------------------------------

def _half(v: Sequence) -> int:
    # 0 for angles in [0, pi), 1 for [pi, 2 pi)
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def angle_cmp(u: Sequence, w: Sequence) -> int:
    hu, hw = _half(u), _half(w)
    if hu != hw:
        return -1 if hu < hw else 1
    c = det(u, w)
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


angle_key = cmp_to_key(angle_cmp)


def sort_ccw(vs: Iterable[Sequence]) -> list:
    return sorted(vs, key=angle_key)


# -- fans -------------------------------------------------------------------

@dataclass(frozen=True)
class Fan:
    rays: tuple[Vec, ...]

    def __post_init__(self):
        rays = self.rays
        n = len(rays)
        if n < 3:
            raise FanError("incomplete fan")
        for i in range(n):
            if det(rays[i], rays[(i + 1) % n]) <= 0:
                raise FanError("incomplete fan")
        if sort_ccw(rays) != list(rays):
            raise FanError("rays not in counterclockwise order from angle 0")

    def __len__(self) -> int:
        return len(self.rays)

    def __iter__(self):
        return iter(self.rays)

    def __contains__(self, v) -> bool:
        return tuple(v) in self._index

    @property
    def _index(self) -> dict:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {r: i for i, r in enumerate(self.rays)}
            object.__setattr__(self, "_idx", idx)
        return idx

    def index(self, v) -> int:
        return self._index[tuple(v)]

    def sectors(self) -> list[tuple[Vec, Vec]]:
        n = len(self.rays)
        return [(self.rays[i], self.rays[(i + 1) % n]) for i in range(n)]

    def sector_dets(self) -> list[int]:
        return [det(u, w) for u, w in self.sectors()]

    def neighbors(self, i: int) -> tuple[Vec, Vec]:
        n = len(self.rays)
        return self.rays[(i - 1) % n], self.rays[(i + 1) % n]

    def sector_of(self, v: Sequence) -> int:
        """Index i such that v lies in the closed cone (rays[i], rays[i+1])
        and not on the ray rays[i+1].  Works for ints, Fractions and floats."""
        n = len(self.rays)
        if v[0] == 0 and v[1] == 0:
            return 0
        # binary search on the angular order would do, but fans are small
        for i in range(n):
            u, w = self.rays[i], self.rays[(i + 1) % n]
            if det(u, v) >= 0 and det(v, w) > 0:
                return i
        # floating point round-off near a ray: pick the closest sector
        best, arg = None, 0
        for i in range(n):
            u, w = self.rays[i], self.rays[(i + 1) % n]
            m = min(det(u, v), det(v, w))
            if best is None or m > best:
                best, arg = m, i
        return arg

    def to_json(self) -> dict:
        return {"rays": [[_jint(a), _jint(b)] for a, b in self.rays]}

    @classmethod
    def from_json(cls, obj) -> "Fan":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return fan_from_rays([(int(a), int(b)) for a, b in obj["rays"]])

    def __repr__(self) -> str:
        return f"Fan({list(self.rays)})"


def _jint(x: int):
    return x if -(2**63) <= x < 2**63 else str(x)


def fan_from_rays(rays: Iterable[Sequence[int]]) -> Fan:
    prim = {primitive(r) for r in rays}
    return Fan(tuple(sort_ccw(prim)))


def p2_fan() -> Fan:
    return fan_from_rays(P2_RAYS)


def p1p1_fan() -> Fan:
    return fan_from_rays(P1P1_RAYS)


def is_smooth(fan: Fan) -> bool:
    return all(d == 1 for d in fan.sector_dets())


def _solve_det_one(u: Vec) -> Vec:
    """Some r with det(u, r) = 1 (u primitive)."""
    a, b = u
    # extended Euclid: x*a + y*b = 1, then det(u, (-y, x)) = a*x + b*y
    x0, y0, r0, x1, y1, r1 = 1, 0, a, 0, 1, b
    while r1:
        q = r0 // r1
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
        r0, r1 = r1, r0 - q * r1
    if r0 < 0:
        x0, y0 = -x0, -y0
    return (-y0, x0)


def resolve_sector(u: Vec, w: Vec) -> list[Vec]:
    """Rays to insert strictly between u and w (Hirzebruch-Jung)."""
    out = []
    d = det(u, w)
    if d <= 0:
        raise FanError("sector must have positive determinant")
    while d > 1:
        r = _solve_det_one(u)
        # move along u so that 1 <= det(r, w) <= d - 1
        t = -((det(r, w) - 1) // d)
        r = (r[0] + t * u[0], r[1] + t * u[1])
        out.append(r)
        u = r
        d = det(u, w)
    return out


def smooth_resolution(fan: Fan) -> Fan:
    if is_smooth(fan):
        return fan
    new = list(fan.rays)
    for u, w in fan.sectors():
        new.extend(resolve_sector(u, w))
    return fan_from_rays(new)


def refine(f1: Fan, f2: Fan) -> Fan:
    return fan_from_rays(set(f1.rays) | set(f2.rays))


def dominates(f1: Fan, f2: Fan) -> bool:
    return set(f2.rays) <= set(f1.rays)
