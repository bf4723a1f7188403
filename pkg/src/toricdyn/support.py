"""Support functions: PL data on fans, numeric convex functions, Ronkin
quadrature and Newton polygons.

Sign convention: Trop(x) = (-log|x1|, -log|x2|), so a Laurent polynomial
P has homogenized Ronkin function v -> max_{m in supp P} <m, -v>.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .lattice_fan import (
    P2_RAYS,
    Fan,
    det,
    dot,
    fan_from_rays,
    primitive,
    refine,
    smooth_resolution,
)

NUMERIC_TOL = 1e-9


def as_scalar(x):
    """Exact rational for ints/Fractions/'p/q' strings, float otherwise."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except ValueError:
            return float(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    raise TypeError(f"unsupported scalar {x!r}")


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def scalar_str(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def scalar_eq(x, y, tol: float = NUMERIC_TOL) -> bool:
    if is_exact(x) and is_exact(y):
        return x == y
    return abs(float(x) - float(y)) <= tol


def scalar_ge(x, y, tol: float = NUMERIC_TOL) -> bool:
    if is_exact(x) and is_exact(y):
        return x >= y
    return float(x) >= float(y) - tol


# -- PL functions -------------------------------------------------------------

@dataclass(frozen=True)
class PLFunction:
    """Positively homogeneous function, linear on each sector of ``fan``,
    given by its values at the primitive generators."""

    fan: Fan
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.fan):
            raise ValueError("one value per ray is required")
        object.__setattr__(self, "values", tuple(as_scalar(x) for x in self.values))

    @classmethod
    def from_function(cls, fan: Fan, f: Callable) -> "PLFunction":
        return cls(fan, tuple(f(v) for v in fan.rays))

    @property
    def exact(self) -> bool:
        return all(is_exact(x) for x in self.values)

    def value_at_ray(self, v) -> object:
        return self.values[self.fan.index(v)]

    def __call__(self, v):
        fan = self.fan
        if v[0] == 0 and v[1] == 0:
            return Fraction(0) if self.exact else 0.0
        i = fan.sector_of(v)
        u, w = fan.rays[i], fan.rays[(i + 1) % len(fan)]
        a, b = self.values[i], self.values[(i + 1) % len(fan)]
        d = det(u, w)
        cu, cw = det(v, w), det(u, v)
        if d == 1:
            return cu * a + cw * b
        if isinstance(cu, int) and isinstance(cw, int) and self.exact:
            return Fraction(cu * a + cw * b, d)
        return (cu * a + cw * b) / d

    def gradient(self, i: int):
        """Linear form (as a vector m with psi = <m, .>) on sector i."""
        fan = self.fan
        u, w = fan.rays[i], fan.rays[(i + 1) % len(fan)]
        a, b = self.values[i], self.values[(i + 1) % len(fan)]
        d = det(u, w)
        # solve <m,u> = a, <m,w> = b
        m1 = a * w[1] - b * u[1]
        m2 = b * u[0] - a * w[0]
        if self.exact:
            return (Fraction(m1) / d, Fraction(m2) / d)
        return (m1 / d, m2 / d)

    def deltas(self) -> list:
        """Convexity defect across every ray; all >= 0 iff convex."""
        fan = self.fan
        n = len(fan)
        out = []
        for i in range(n):
            u, w = fan.neighbors(i)
            v = fan.rays[i]
            pu, pv, pw = self.values[(i - 1) % n], self.values[i], self.values[(i + 1) % n]
            duv = det(u, v)
            # value at w of the linear extension of psi from the sector (u, v)
            num = det(w, v) * pu + det(u, w) * pv
            if self.exact:
                out.append(pw - Fraction(num) / duv)
            else:
                out.append(pw - num / duv)
        return out

    def is_convex(self, tol: float = NUMERIC_TOL) -> bool:
        return all(scalar_ge(x, 0, tol) for x in self.deltas())

    def is_linear(self, tol: float = NUMERIC_TOL) -> bool:
        return all(scalar_eq(x, 0, tol) for x in self.deltas())

    def breakpoints(self, tol: float = NUMERIC_TOL) -> list:
        """Rays across which the function is not linear."""
        return [v for v, x in zip(self.fan.rays, self.deltas()) if not scalar_eq(x, 0, tol)]

    def on_fan(self, fan: Fan) -> "PLFunction":
        """Same function re-expressed on another fan (exact when the target
        refines the linearity domains)."""
        return PLFunction(fan, tuple(self(v) for v in fan.rays))

    def coarsen(self, keep: Iterable = P2_RAYS) -> "PLFunction":
        """Drop rays where the function is linear, keeping ``keep``."""
        keep = {tuple(k) for k in keep}
        rays = set(self.breakpoints()) | keep
        fan = fan_from_rays(rays)
        return PLFunction(fan, tuple(self(v) for v in fan.rays))

    def __add__(self, other: "PLFunction") -> "PLFunction":
        fan = refine(self.fan, other.fan)
        return PLFunction(fan, tuple(self(v) + other(v) for v in fan.rays))

    def __sub__(self, other: "PLFunction") -> "PLFunction":
        fan = refine(self.fan, other.fan)
        return PLFunction(fan, tuple(self(v) - other(v) for v in fan.rays))

    def scale(self, c) -> "PLFunction":
        c = as_scalar(c)
        return PLFunction(self.fan, tuple(c * x for x in self.values))

    def add_linear(self, m: Sequence) -> "PLFunction":
        return PLFunction(self.fan, tuple(x + dot(m, v) for x, v in zip(self.values, self.fan.rays)))

    def to_float(self) -> "PLFunction":
        return PLFunction(self.fan, tuple(float(x) for x in self.values))

    def to_json(self) -> dict:
        return {"fan": self.fan.to_json(), "values": [scalar_str(x) for x in self.values]}

    @classmethod
    def from_json(cls, obj) -> "PLFunction":
        return cls(Fan.from_json(obj["fan"]), tuple(as_scalar(x) for x in obj["values"]))


def linear_function(m: Sequence, fan: Fan | None = None) -> PLFunction:
    fan = fan or fan_from_rays(P2_RAYS)
    return PLFunction(fan, tuple(Fraction(dot(m, v)) for v in fan.rays))


# -- numeric convex functions ---------------------------------------------------

class NumericConvexFunction:
    """Caller-supplied convex function v -> R with a thread-safe cache."""

    def __init__(self, f: Callable[[tuple], float], name: str = ""):
        self._f = f
        self.name = name
        self._cache: dict = {}
        self._lock = threading.Lock()

    def __call__(self, v) -> float:
        key = (float(v[0]), float(v[1]))
        got = self._cache.get(key)
        if got is not None:
            return got
        val = float(self._f(key))
        with self._lock:
            self._cache[key] = val
        return val

    def midpoint_violations(self, triples: Iterable, tol: float = 1e-7) -> int:
        """Count pairs (u, w) violating f((u+w)/2) <= (f(u)+f(w))/2."""
        bad = 0
        for u, w in triples:
            mid = ((u[0] + w[0]) / 2, (u[1] + w[1]) / 2)
            if self(mid) > (self(u) + self(w)) / 2 + tol:
                bad += 1
        return bad

    def __repr__(self) -> str:
        return f"NumericConvexFunction({self.name or self._f!r})"


class HomogeneousFunction(NumericConvexFunction):
    """v -> |v| h(v/|v|) for a function h on the unit circle."""

    def __init__(self, h: Callable[[tuple], float], name: str = ""):
        self._h = h
        super().__init__(self._eval, name)

    def _eval(self, v) -> float:
        r = math.hypot(v[0], v[1])
        if r == 0.0:
            return 0.0
        return r * self._h((v[0] / r, v[1] / r))


def unit_directions(k: int = 360, offset: float = 0.0) -> list[tuple[float, float]]:
    return [(math.cos(2 * math.pi * (j + offset) / k), math.sin(2 * math.pi * (j + offset) / k)) for j in range(k)]


def euclidean_norm() -> HomogeneousFunction:
    return HomogeneousFunction(lambda u: 1.0, "norm")


# -- growth, homogenization, restriction ------------------------------------------

def growth(psi, directions: int = 360, tol: float = NUMERIC_TOL, budget: int = 64,
           threshold: float = 1e12) -> float:
    """sup (psi(v) - psi(0)) / |v|; math.inf when numerically unbounded."""
    if isinstance(psi, PLFunction):
        return _pl_growth(psi)
    dirs = unit_directions(directions)
    p0 = psi((0.0, 0.0))
    prev = None
    R = 1.0
    for _ in range(budget):
        g = max((psi((R * u[0], R * u[1])) - p0) / R for u in dirs)
        if g > threshold:
            return math.inf
        if prev is not None and abs(g - prev) < tol * max(1.0, abs(g)):
            return g
        prev = g
        R *= 2.0
    return math.inf


def _pl_growth(psi: PLFunction):
    fan = psi.fan
    best = max(float(x) / math.hypot(*v) for v, x in zip(fan.rays, psi.values))
    # a linear piece can peak inside its sector when psi is not convex
    for i, (u, w) in enumerate(fan.sectors()):
        m = psi.gradient(i)
        if det(u, m) > 0 and det(m, w) > 0:
            best = max(best, math.hypot(float(m[0]), float(m[1])))
    return best


class HomogenizationError(RuntimeError):
    def __init__(self, direction, last, prev):
        super().__init__(f"homogenization did not converge at {direction}: {prev!r} -> {last!r}")
        self.direction = direction
        self.last = last
        self.prev = prev


def homogenize(psi: Callable, tol: float = NUMERIC_TOL, budget: int = 64) -> HomogeneousFunction:
    """lim_{t -> inf} (psi(t v) - psi(0)) / t along a doubling sequence."""
    p0 = float(psi((0.0, 0.0)))

    def h(u):
        t = 1.0
        prev = (float(psi(u)) - p0) / t
        for _ in range(budget):
            t *= 2.0
            est = (float(psi((t * u[0], t * u[1]))) - p0) / t
            if abs(est - prev) < tol:
                return est
            prev, last = est, prev
        raise HomogenizationError(u, est, last)

    return HomogeneousFunction(h, f"homogenize({getattr(psi, 'name', '') or psi!r})")


def restrict_to_fan(psi, X) -> PLFunction:
    fan = X if isinstance(X, Fan) else X.fan
    vals = []
    for v in fan.rays:
        x = psi(v)
        vals.append(x if is_exact(x) else float(x))
    return PLFunction(fan, tuple(vals))


def max_sector_angle(X) -> float:
    fan = X if isinstance(X, Fan) else X.fan
    return max(math.atan2(det(u, w), dot(u, w)) for u, w in fan.sectors())


def sandwich_constant(X) -> float:
    """1/cos(theta/2) with theta the widest sector angle of X."""
    return 1.0 / math.cos(max_sector_angle(X) / 2)


def sandwich_ratios(psi, X, directions: int = 64) -> tuple[float, float]:
    """(min, max) of restrict_to_fan(psi, X)(u) / psi(u) over unit directions."""
    r = restrict_to_fan(psi, X)
    ratios = [float(r(u)) / float(psi(u)) for u in unit_directions(directions, 0.5)]
    return min(ratios), max(ratios)


# -- Laurent polynomials ------------------------------------------------------------

class LaurentPolynomial:
    """Sparse Laurent polynomial in x1, x2 with rational coefficients."""

    def __init__(self, terms: Mapping[tuple[int, int], object]):
        t = {}
        for m, c in terms.items():
            c = as_scalar(c)
            if c != 0:
                t[(int(m[0]), int(m[1]))] = c
        if not t:
            raise ValueError("zero polynomial")
        self.terms: dict[tuple[int, int], Fraction] = dict(sorted(t.items()))

    def __eq__(self, other) -> bool:
        return isinstance(other, LaurentPolynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(self.terms.items()))

    def __repr__(self) -> str:
        return f"LaurentPolynomial({self})"

    @property
    def support(self) -> list[tuple[int, int]]:
        return list(self.terms)

    @classmethod
    def parse(cls, text: str) -> "LaurentPolynomial":
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty polynomial")
        terms: dict = {}
        pos = 0
        pieces = []
        # split on +/- that are not part of an exponent
        buf, sign = "", 1
        i = 0
        while i < len(s):
            ch = s[i]
            if ch in "+-" and not (i > 0 and s[i - 1] == "^"):
                if buf:
                    pieces.append((sign, buf, pos))
                sign = -1 if ch == "-" else 1
                buf, pos = "", i + 1
            else:
                buf += ch
            i += 1
        if buf:
            pieces.append((sign, buf, pos))
        elif s[-1] in "+-":
            raise ValueError(f"dangling sign at position {len(s)}")
        for sign, body, at in pieces:
            coeff = Fraction(sign)
            exps = [0, 0]
            for factor in body.split("*"):
                if not factor:
                    raise ValueError(f"empty factor at position {at}")
                m = re.fullmatch(r"x([12])(?:\^(-?\d+))?", factor)
                if m:
                    exps[int(m.group(1)) - 1] += int(m.group(2) or 1)
                    continue
                try:
                    coeff *= Fraction(factor)
                except (ValueError, ZeroDivisionError):
                    raise ValueError(f"bad factor {factor!r} at position {at}") from None
            key = (exps[0], exps[1])
            terms[key] = terms.get(key, 0) + coeff
        return cls(terms)

    def __str__(self) -> str:
        parts = []
        for (a, b), c in self.terms.items():
            mono = []
            if a:
                mono.append("x1" if a == 1 else f"x1^{a}")
            if b:
                mono.append("x2" if b == 1 else f"x2^{b}")
            mag = abs(c)
            if mono and mag == 1:
                body = "*".join(mono)
            else:
                body = "*".join([str(mag)] + mono)
            sign = "-" if c < 0 else "+"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def evaluate(self, x1, x2):
        return sum(c * x1**a * x2**b for (a, b), c in self.terms.items())

    def log_abs_on_fiber(self, v: Sequence[float], theta1, theta2):
        """log|P(e^{-v1 + i th1}, e^{-v2 + i th2})| evaluated stably, together
        with the modulus of the rescaled sum (used to detect zeros)."""
        ms = np.array(self.support, dtype=float)
        cs = np.array([float(c) for c in self.terms.values()])
        s = np.log(np.abs(cs)) - ms @ np.asarray(v, dtype=float)
        smax = s.max()
        w = np.sign(cs) * np.exp(s - smax)
        phase = np.multiply.outer(theta1, ms[:, 0]) + np.multiply.outer(theta2, ms[:, 1])
        z = (w * np.exp(1j * phase)).sum(axis=-1)
        return np.log(np.abs(z)) + smax, np.abs(z)


def newton_polygon(points: Iterable[Sequence[int]]) -> list[tuple[int, int]]:
    """Vertices of the convex hull, counterclockwise (monotone chain)."""
    pts = sorted({(int(p[0]), int(p[1])) for p in points})
    if len(pts) <= 2:
        return pts

    def half(seq):
        out: list = []
        for p in seq:
            while len(out) >= 2 and det((out[-1][0] - out[-2][0], out[-1][1] - out[-2][1]),
                                        (p[0] - out[-2][0], p[1] - out[-2][1])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower, upper = half(pts), half(reversed(pts))
    return lower[:-1] + upper[:-1]


def polygon_edges(vertices: Sequence) -> list[tuple[tuple[int, int], int]]:
    """(inner normal, lattice length) for each edge of a ccw polygon."""
    out = []
    n = len(vertices)
    for i in range(n):
        p, q = vertices[i], vertices[(i + 1) % n]
        e = (q[0] - p[0], q[1] - p[1])
        normal = primitive((-e[1], e[0]))
        out.append((normal, math.gcd(e[0], e[1])))
    return out


def newton_support(P: LaurentPolynomial | str) -> PLFunction:
    """v -> max_{m in supp P} <m, -v>, exact on the smoothed normal fan."""
    if isinstance(P, str):
        P = LaurentPolynomial.parse(P)
    verts = newton_polygon(P.support)
    rays = set(P2_RAYS)
    if len(verts) >= 3:
        rays |= {n for n, _ in polygon_edges(verts)}
    elif len(verts) == 2:
        e = (verts[1][0] - verts[0][0], verts[1][1] - verts[0][1])
        n = primitive((-e[1], e[0]))
        rays |= {n, (-n[0], -n[1])}
    fan = smooth_resolution(fan_from_rays(rays))

    def f(v):
        return Fraction(max(-dot(m, v) for m in verts))

    return PLFunction.from_function(fan, f)


# -- Ronkin quadrature ----------------------------------------------------------------

@dataclass(frozen=True)
class RonkinValue:
    value: float
    perturbed: int


def ronkin_report(P: LaurentPolynomial | str, v: Sequence[float], n: int = 64) -> RonkinValue:
    if isinstance(P, str):
        P = LaurentPolynomial.parse(P)
    if n < 16:
        raise ValueError("quadrature size must be at least 16")
    h = 2 * math.pi / n
    th = (np.arange(n) + 0.5) * h
    T1, T2 = np.meshgrid(th, th, indexing="ij")
    vals, mod = P.log_abs_on_fiber(v, T1, T2)
    scale = sum(abs(float(c)) for c in P.terms.values())
    hit = ~np.isfinite(vals) | (mod < 1e-13 * scale)
    k = int(hit.sum())
    if k:
        # deterministic rule: shift the offending node by half a step in theta1
        v2, _ = P.log_abs_on_fiber(v, T1[hit] + h / 2, T2[hit])
        vals = vals.copy()
        vals[hit] = v2
    return RonkinValue(float(vals.mean()), k)


def ronkin(P: LaurentPolynomial | str, v: Sequence[float], n: int = 64) -> float:
    return ronkin_report(P, v, n).value


def ronkin_function(P: LaurentPolynomial | str, n: int = 64) -> NumericConvexFunction:
    if isinstance(P, str):
        P = LaurentPolynomial.parse(P)
    return NumericConvexFunction(lambda v: ronkin(P, v, n), f"ronkin({P})")
