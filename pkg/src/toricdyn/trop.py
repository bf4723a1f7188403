"""Tropicalizations: continuous, integral, positively homogeneous PL
self-maps of the plane, linear on the sectors of a fan."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .lattice_fan import (
    IDENTITY,
    P2_RAYS,
    Fan,
    Mat,
    as_matrix,
    content,
    det,
    fan_from_rays,
    matmul,
    matpow,
    matvec,
    mdet,
    primitive,
)


class TropError(ValueError):
    pass


@dataclass(frozen=True)
class TropMap:
    lin_fan: Fan
    matrices: tuple

    def __post_init__(self):
        mats = tuple(as_matrix(m) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        n = len(self.lin_fan)
        if len(mats) != n:
            raise TropError("one matrix per sector is required")
        dets = {abs(mdet(M)) for M in mats}
        if 0 in dets:
            raise TropError("sector matrices must be invertible")
        if len(dets) != 1:
            raise TropError("|det| must agree on all sectors")
        for i, v in enumerate(self.lin_fan.rays):
            if matvec(mats[i - 1], v) != matvec(mats[i], v):
                raise TropError(f"matrices disagree on the shared ray {v}")

    @classmethod
    def linear(cls, A) -> "TropMap":
        A = as_matrix(A)
        fan = fan_from_rays(P2_RAYS)
        return cls(fan, (A,) * len(fan))

    @property
    def abs_det(self) -> int:
        return abs(mdet(self.matrices[0]))

    @property
    def is_linear(self) -> bool:
        return len(set(self.matrices)) == 1

    @property
    def matrix(self) -> Mat:
        if not self.is_linear:
            raise TropError("tropicalization is not linear")
        return self.matrices[0]

    def apply(self, v):
        return matvec(self.matrices[self.lin_fan.sector_of(v)], v)

    def apply_ray(self, v):
        return primitive(self.apply(v))

    def __call__(self, v):
        return self.apply(v)

    def simplify(self) -> "TropMap":
        """Drop rays across which the map is linear (keeping P2 rays)."""
        keep = set(P2_RAYS)
        n = len(self.lin_fan)
        for i, v in enumerate(self.lin_fan.rays):
            if self.matrices[i - 1] != self.matrices[i]:
                keep.add(v)
        if len(keep) == n:
            return self
        fan = fan_from_rays(keep)
        mats = []
        for u, w in fan.sectors():
            mid = (u[0] + w[0], u[1] + w[1])
            mats.append(self.matrices[self.lin_fan.sector_of(mid)])
        return TropMap(fan, tuple(mats))

    def to_json(self) -> dict:
        return {"lin_fan": self.lin_fan.to_json(), "matrices": [[list(r) for r in M] for M in self.matrices]}

    @classmethod
    def from_json(cls, obj) -> "TropMap":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(Fan.from_json(obj["lin_fan"]), tuple(as_matrix(M) for M in obj["matrices"]))


def identity() -> TropMap:
    return TropMap.linear(IDENTITY)


def _preimages(T: TropMap, r) -> list:
    out = []
    for i, (u, w) in enumerate(T.lin_fan.sectors()):
        M = T.matrices[i]
        d = mdet(M)
        # M^{-1} r up to a positive factor
        x = (M[1][1] * r[0] - M[0][1] * r[1], -M[1][0] * r[0] + M[0][0] * r[1])
        if d < 0:
            x = (-x[0], -x[1])
        if det(u, x) >= 0 and det(x, w) >= 0:
            out.append(primitive(x))
    return out


def compose(T1: TropMap, T2: TropMap) -> TropMap:
    """T1 o T2."""
    rays = set(T2.lin_fan.rays)
    for r in T1.lin_fan.rays:
        rays.update(_preimages(T2, r))
    fan = fan_from_rays(rays)
    mats = []
    for u, w in fan.sectors():
        mid = (u[0] + w[0], u[1] + w[1])
        M2 = T2.matrices[T2.lin_fan.sector_of(mid)]
        M1 = T1.matrices[T1.lin_fan.sector_of(matvec(M2, mid))]
        mats.append(matmul(M1, M2))
    try:
        return TropMap(fan, tuple(mats)).simplify()
    except TropError as e:  # pragma: no cover - would indicate a bug
        raise RuntimeError(f"composition broke continuity: {e}") from e


def power(T: TropMap, n: int) -> TropMap:
    if T.is_linear:
        return TropMap.linear(matpow(T.matrix, n))
    R = identity()
    for _ in range(n):
        R = compose(T, R)
    return R


def _angle(u, w) -> float:
    return math.atan2(det(u, w), u[0] * w[0] + u[1] * w[1])


def winding(T: TropMap) -> int:
    total = 0.0
    for i, (u, w) in enumerate(T.lin_fan.sectors()):
        M = T.matrices[i]
        total += _angle(matvec(M, u), matvec(M, w))
    return round(total / (2 * math.pi))


def covering_degree(T: TropMap) -> int:
    return abs(winding(T))


def orientation(T: TropMap) -> int:
    """+1 or -1 when all sectors agree, 0 for a folded map."""
    signs = {1 if mdet(M) > 0 else -1 for M in T.matrices}
    return signs.pop() if len(signs) == 1 else 0


def is_homeomorphism(T: TropMap) -> bool:
    return orientation(T) != 0 and covering_degree(T) == 1


def dtop(T: TropMap) -> int:
    return T.abs_det * covering_degree(T)


def ramification(T: TropMap, v) -> int:
    return content(T.apply(tuple(v)))


# -- rotation numbers -----------------------------------------------------------

@dataclass(frozen=True)
class RotationVerdict:
    kind: str  # "rational", "irrational_certified" or "real_eigenvalues"
    value: Fraction | None = None

    @property
    def is_rational(self) -> bool:
        return self.kind != "irrational_certified"

    def __str__(self) -> str:
        if self.kind == "irrational_certified":
            return "irrational_certified"
        return f"{self.kind}({self.value})"


def rotation_is_rational_linear(A) -> RotationVerdict:
    A = as_matrix(A)
    tr, d = A[0][0] + A[1][1], mdet(A)
    if d == 0:
        raise TropError("singular matrix")
    disc = tr * tr - 4 * d
    if disc >= 0:
        # some real eigenvalue is positive iff a ray is fixed
        if d < 0 or tr > 0:
            return RotationVerdict("real_eigenvalues", Fraction(0))
        return RotationVerdict("real_eigenvalues", Fraction(1, 2))
    # complex pair xi, conj(xi): xi/conj(xi) lies in a quadratic field, so it
    # is a root of unity iff xi^n is real for some n in {1, 2, 3, 4, 6}
    for n in (1, 2, 3, 4, 6):
        M = matpow(A, n)
        if M[0][1] == 0 and M[1][0] == 0 and M[0][0] == M[1][1]:
            break
    else:
        return RotationVerdict("irrational_certified")
    q = 2 * n
    c = tr / (2 * math.sqrt(d))
    k = min(range(1, q), key=lambda k: abs(math.cos(2 * math.pi * k / q) - c) + (k > q / 2))
    frac = Fraction(k, q)
    if A[1][0] < 0:  # clockwise
        frac = 1 - frac
    return RotationVerdict("rational", frac)


def _lift_table(T: TropMap) -> list:
    """Lifted image angle at each ray, accumulated around the circle."""
    cached = T.__dict__.get("_lift_tab")
    if cached is None:
        fan = T.lin_fan
        w0 = matvec(T.matrices[0], fan.rays[0])
        cached = [math.atan2(w0[1], w0[0])]
        for i, (u, w) in enumerate(fan.sectors()[:-1]):
            M = T.matrices[i]
            cached.append(cached[-1] + _angle(matvec(M, u), matvec(M, w)))
        object.__setattr__(T, "_lift_tab", cached)
    return cached


def _lift(T: TropMap, x: float) -> float:
    """A continuous lift of the induced circle map (degree one)."""
    fan = T.lin_fan
    a0 = math.atan2(fan.rays[0][1], fan.rays[0][0])
    k = math.floor((x - a0) / (2 * math.pi))
    phi = x - 2 * math.pi * k
    # keep phi and k on the same branch despite rounding at the wrap
    if phi < a0:
        phi += 2 * math.pi
        k -= 1
    v = (math.cos(phi), math.sin(phi))
    i = fan.sector_of(v)
    M = T.matrices[i]
    return _lift_table(T)[i] + _angle(matvec(M, fan.rays[i]), matvec(M, v)) + 2 * math.pi * k


def rotation_number(T: TropMap, n: int = 10000, x0: float = 0.0) -> tuple[float, float]:
    """(estimate in [0,1), a-priori error bound 1/n) for an orientation
    preserving homeomorphism."""
    if not is_homeomorphism(T):
        raise TropError("rotation number needs a homeomorphism")
    if orientation(T) < 0:
        raise TropError("rotation number needs an orientation preserving map")
    x = x0
    for _ in range(n):
        x = _lift(T, x)
    est = ((x - x0) / (2 * math.pi * n)) % 1.0
    return est, 1.0 / n


# -- growth --------------------------------------------------------------------

@dataclass
class GrowthReport:
    n: int
    target: float
    exponents: list = field(repr=False)
    min: float = 0.0
    max: float = 0.0
    max_deviation: float = 0.0


def growth_exponent(T: TropMap, n: int, directions: int = 360, dtop_value: int | None = None) -> GrowthReport:
    """|T^n v|^{1/n} over unit directions, against sqrt(dtop)."""
    if not is_homeomorphism(T):
        raise TropError("growth exponents are computed for homeomorphisms")
    dt = dtop(T) if dtop_value is None else dtop_value
    target = math.sqrt(dt)
    exps = []
    for j in range(directions):
        t = 2 * math.pi * j / directions
        v = (math.cos(t), math.sin(t))
        logsum = 0.0
        for _ in range(n):
            w = T.apply(v)
            r = math.hypot(w[0], w[1])
            logsum += math.log(r)
            v = (w[0] / r, w[1] / r)
        exps.append(math.exp(logsum / n))
    dev = max(abs(e - target) for e in exps)
    return GrowthReport(n, target, exps, min(exps), max(exps), dev)


def ram_decay(T: TropMap, v, mu: float, n: int) -> list[tuple[int, int, float]]:
    """(k, Ram(T^k, v), Ram/mu^k) for k = 1..n, with exact lattice iterates."""
    out = []
    w = tuple(v)
    for k in range(1, n + 1):
        w = T.apply(w)
        ram = content(w)
        out.append((k, ram, float(Fraction(ram) / Fraction(mu) ** k) if isinstance(mu, int) else ram / mu**k))
    return out
