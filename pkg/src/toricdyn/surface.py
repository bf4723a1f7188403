"""Intersection theory of external divisors on smooth complete toric
surfaces, and the toric morphisms between them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .lattice_fan import (
    P2_RAYS,
    Fan,
    dominates,
    dot,
    fan_from_rays,
    is_smooth,
    refine,
    smooth_resolution,
)
from .support import (
    LaurentPolynomial,
    PLFunction,
    as_scalar,
    is_exact,
    newton_polygon,
    polygon_edges,
    scalar_str,
)


class SurfaceError(ValueError):
    pass


@dataclass(frozen=True)
class ToricSurface:
    fan: Fan

    def __post_init__(self):
        if not is_smooth(self.fan):
            raise SurfaceError("toric surfaces here must have smooth fans")

    @property
    def self_int(self) -> tuple[int, ...]:
        """a_i with v_{i-1} + v_{i+1} = a_i v_i, so that C_i^2 = -a_i."""
        got = self.__dict__.get("_a")
        if got is None:
            out = []
            for i, v in enumerate(self.fan.rays):
                u, w = self.fan.neighbors(i)
                s = (u[0] + w[0], u[1] + w[1])
                a = dot(s, v) // dot(v, v)
                if (a * v[0], a * v[1]) != s:
                    raise SurfaceError("neighbour relation failed; fan is not smooth")
                out.append(a)
            got = tuple(out)
            object.__setattr__(self, "_a", got)
        return got

    @property
    def rays(self):
        return self.fan.rays

    def __len__(self) -> int:
        return len(self.fan)

    def pairing(self, i: int, j: int) -> int:
        n = len(self.fan)
        if i == j:
            return -self.self_int[i]
        if (i - j) % n in (1, n - 1):
            return 1
        return 0


def surface(rays_or_fan) -> ToricSurface:
    fan = rays_or_fan if isinstance(rays_or_fan, Fan) else fan_from_rays(rays_or_fan)
    return ToricSurface(fan)


def p2() -> ToricSurface:
    return surface(P2_RAYS)


@dataclass(frozen=True)
class ExternalDivisor:
    surface: ToricSurface
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != len(self.surface.fan):
            raise ValueError("one coefficient per pole is required")
        object.__setattr__(self, "coeffs", tuple(as_scalar(c) for c in self.coeffs))

    @classmethod
    def from_map(cls, X: ToricSurface, coeffs: Mapping) -> "ExternalDivisor":
        c = [Fraction(0)] * len(X.fan)
        for v, x in coeffs.items():
            try:
                c[X.fan.index(tuple(v))] = as_scalar(x)
            except KeyError:
                raise SurfaceError(f"{v} is not a ray of the surface") from None
        return cls(X, tuple(c))

    @classmethod
    def pole(cls, X: ToricSurface, v) -> "ExternalDivisor":
        return cls.from_map(X, {tuple(v): 1})

    def coeff(self, v):
        return self.coeffs[self.surface.fan.index(tuple(v))]

    def is_effective(self) -> bool:
        return all(c >= 0 for c in self.coeffs)

    def __add__(self, other: "ExternalDivisor") -> "ExternalDivisor":
        _same(self, other)
        return ExternalDivisor(self.surface, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "ExternalDivisor") -> "ExternalDivisor":
        _same(self, other)
        return ExternalDivisor(self.surface, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c) -> "ExternalDivisor":
        c = as_scalar(c)
        return ExternalDivisor(self.surface, tuple(c * x for x in self.coeffs))

    def to_json(self) -> dict:
        return {"fan": self.surface.fan.to_json(), "coeffs": [scalar_str(c) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj) -> "ExternalDivisor":
        return cls(ToricSurface(Fan.from_json(obj["fan"])), tuple(as_scalar(c) for c in obj["coeffs"]))


def _same(D1: ExternalDivisor, D2: ExternalDivisor) -> None:
    if D1.surface.fan != D2.surface.fan:
        raise SurfaceError("divisors live on different surfaces")


def intersect(D1: ExternalDivisor, D2: ExternalDivisor):
    _same(D1, D2)
    X = D1.surface
    n = len(X)
    a = X.self_int
    c, d = D1.coeffs, D2.coeffs
    total = 0
    for i in range(n):
        j = (i + 1) % n
        total += -a[i] * c[i] * d[i] + c[i] * d[j] + c[j] * d[i]
    return total


def support_function(D: ExternalDivisor) -> PLFunction:
    return PLFunction(D.surface.fan, D.coeffs)


def divisor_from_support(psi: PLFunction, X: ToricSurface) -> ExternalDivisor:
    """Divisor on X with support function psi; psi must be linear on the
    sectors of X."""
    D = ExternalDivisor(X, tuple(psi(v) for v in X.fan.rays))
    for v in set(psi.fan.rays) - set(X.fan.rays):
        if not _close(support_function(D)(v), psi(v)):
            raise SurfaceError("support function is not PL on the fan of X")
    return D


def _close(x, y) -> bool:
    if is_exact(x) and is_exact(y):
        return x == y
    return abs(float(x) - float(y)) <= 1e-9


def degree(D) -> object:
    """psi(1,0) + psi(0,1) + psi(-1,-1), i.e. three times the common
    coefficient of the normalized representative."""
    psi = D if isinstance(D, PLFunction) else support_function(D)
    return sum((psi(v) for v in P2_RAYS), Fraction(0) if psi.exact else 0.0)


def is_principal(D: ExternalDivisor) -> bool:
    return support_function(D).is_linear()


def is_nef(D: ExternalDivisor) -> bool:
    return support_function(D).is_convex()


class SurfaceClass(ExternalDivisor):
    """Normalized external representative: equal coefficients on the three
    rays of the projective plane."""

    def __post_init__(self):
        super().__post_init__()
        fan = self.surface.fan
        if not all(v in fan for v in P2_RAYS):
            raise SurfaceError("class representatives need the three P2 rays")
        vals = {self.coeffs[fan.index(v)] for v in P2_RAYS}
        if len(vals) != 1 and not all(abs(float(x) - float(next(iter(vals)))) < 1e-9 for x in vals):
            raise SurfaceError("representative is not normalized")

    @property
    def degree(self):
        return 3 * self.coeffs[self.surface.fan.index(P2_RAYS[0])]


def normalization_form(a, b, c):
    """Linear form m with a + <m,(1,0)> = b + <m,(0,1)> = c + <m,(-1,-1)>."""
    # m1 = (b + c - 2a)/3, m2 = (a + c - 2b)/3
    if all(is_exact(x) for x in (a, b, c)):
        return (Fraction(b + c - 2 * a, 3), Fraction(a + c - 2 * b, 3))
    return ((b + c - 2 * a) / 3, (a + c - 2 * b) / 3)


def normalize(D: ExternalDivisor) -> SurfaceClass:
    fan = D.surface.fan
    if not all(v in fan for v in P2_RAYS):
        raise SurfaceError("normalize needs a fan containing the three P2 rays")
    a, b, c = (D.coeff(v) for v in P2_RAYS)
    m = normalization_form(a, b, c)
    return SurfaceClass(D.surface, tuple(x + dot(m, v) for x, v in zip(D.coeffs, fan.rays)))


def line_class(X: ToricSurface | None = None) -> SurfaceClass:
    X = X or p2()
    third = Fraction(1, 3)
    psi = PLFunction(fan_from_rays(P2_RAYS), (third, third, third))
    return SurfaceClass(X, tuple(psi(v) for v in X.fan.rays))


def pushforward_pi(D: ExternalDivisor, Y: ToricSurface) -> ExternalDivisor:
    if not dominates(D.surface.fan, Y.fan):
        raise SurfaceError("source surface does not dominate the target")
    return ExternalDivisor(Y, tuple(D.coeff(v) for v in Y.fan.rays))


def pullback_pi(D: ExternalDivisor, X: ToricSurface) -> ExternalDivisor:
    if not dominates(X.fan, D.surface.fan):
        raise SurfaceError("target surface does not dominate the source")
    psi = support_function(D)
    return ExternalDivisor(X, tuple(psi(v) for v in X.fan.rays))


def curve_class_from_newton(polygon: Sequence) -> tuple[SurfaceClass, dict]:
    """Class of a generic curve with the given Newton polygon, together
    with its intersection numbers against the poles of the normal fan."""
    if isinstance(polygon, (str, LaurentPolynomial)):
        P = polygon if isinstance(polygon, LaurentPolynomial) else LaurentPolynomial.parse(polygon)
        points = P.support
    else:
        points = [tuple(p) for p in polygon]
    verts = newton_polygon(points)
    if len(verts) < 3:
        raise SurfaceError("degenerate Newton polygon (point or segment)")
    edges = polygon_edges(verts)
    numbers = {n: k for n, k in edges}
    fan = smooth_resolution(refine(fan_from_rays(P2_RAYS), fan_from_rays(numbers)))
    X = ToricSurface(fan)
    D = ExternalDivisor(X, tuple(Fraction(max(-dot(m, v) for m in verts)) for v in fan.rays))
    return normalize(D), numbers


def balance(numbers: Mapping) -> tuple:
    return (sum(k * v[0] for v, k in numbers.items()), sum(k * v[1] for v, k in numbers.items()))
