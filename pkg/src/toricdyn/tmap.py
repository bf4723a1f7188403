"""Toric maps as composition words in generators.

A word ``L1 . L2 . ... . Lr`` denotes L1 o L2 o ... o Lr, so the rightmost
letter acts first.  Letters are monomial maps h_A, torus translations,
the standard quadratic involution g and user supplied birational maps.

Points on poles are written (tau, z) with z = x^{m(tau)}, m(tau) = (-tau2,
tau1), the distinguished coordinate of the pole C_tau.  All pole
arithmetic is exact over the Gaussian rationals.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from sympy.polys.domains import QQ, QQ_I

from . import oracle, trop
from .lattice_fan import (
    P2_RAYS,
    as_matrix,
    dot,
    fan_from_rays,
    matvec,
    mdet,
    primitive,
    transpose,
)
from .trop import RotationVerdict, TropMap

GQ = type(QQ_I.one)


def gq(re_, im=0) -> GQ:
    re_, im = Fraction(re_), Fraction(im)
    return QQ_I(QQ(re_.numerator, re_.denominator), QQ(im.numerator, im.denominator))


def gq_str(z: GQ) -> str:
    re_, im = Fraction(int(z.x.p), int(z.x.q)), Fraction(int(z.y.p), int(z.y.q))
    if im == 0:
        return str(re_)
    mag = "" if abs(im) == 1 else str(abs(im))
    if re_ == 0:
        return f"{'-' if im < 0 else ''}{mag}i"
    return f"{re_}{'+' if im > 0 else '-'}{mag}i"


def gq_complex(z: GQ) -> complex:
    return complex(float(z.x), float(z.y))


def _bits(z: GQ) -> int:
    return max(int(c.p).bit_length() + int(c.q).bit_length() for c in (z.x, z.y))


def pole_form(tau) -> tuple[int, int]:
    return (-tau[1], tau[0])


class WordError(ValueError):
    pass


class WordParseError(WordError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class CollisionError(WordError):
    """An intermediate image hit the indeterminacy of a later letter."""


# -- generators --------------------------------------------------------------------

@dataclass(frozen=True)
class Monomial:
    A: tuple
    kind: str = field(default="monomial", init=False)

    def __post_init__(self):
        A = as_matrix(self.A)
        if mdet(A) == 0:
            raise WordError("monomial matrix must be invertible")
        object.__setattr__(self, "A", A)

    @property
    def rho(self) -> int:
        return mdet(self.A)

    def trop(self) -> TropMap:
        return TropMap.linear(self.A)

    def __str__(self) -> str:
        (a, b), (c, d) = self.A
        return f"m[{a},{b};{c},{d}]"


@dataclass(frozen=True)
class Translation:
    y1: GQ
    y2: GQ
    kind: str = field(default="translation", init=False)

    def __post_init__(self):
        for name in ("y1", "y2"):
            v = getattr(self, name)
            if not isinstance(v, GQ):
                v = gq(v)
                object.__setattr__(self, name, v)
            if v == QQ_I.zero:
                raise WordError("translation coordinates must be nonzero")

    rho = 1

    def trop(self) -> TropMap:
        return trop.identity()

    def rational_coords(self) -> tuple[Fraction, Fraction]:
        out = []
        for y in (self.y1, self.y2):
            if y.y != 0:
                raise oracle.OracleError("oracle mode needs rational translations")
            out.append(Fraction(int(y.x.p), int(y.x.q)))
        return tuple(out)

    def scalar(self, m) -> GQ:
        return self.y1 ** m[0] * self.y2 ** m[1]

    def __str__(self) -> str:
        return f"t[{gq_str(self.y1)},{gq_str(self.y2)}]"


@dataclass(frozen=True)
class StdInvolution:
    kind: str = field(default="involution", init=False)
    rho = 1

    def trop(self) -> TropMap:
        return trop.identity()

    def __str__(self) -> str:
        return "g"


@dataclass(frozen=True)
class UserBirational:
    """A user supplied toric map; rho is checked against the polynomials."""

    P: oracle.PolyMap
    declared_rho: int
    source: str = ""
    kind: str = field(default="user", init=False)

    def __post_init__(self):
        got = oracle.toric_determinant(self.P)
        if got != self.declared_rho:
            raise WordError(f"declared rho {self.declared_rho} but the map has rho {got}")

    @property
    def rho(self) -> int:
        return self.declared_rho

    def trop(self) -> TropMap:
        return user_trop(self.P)

    def __str__(self) -> str:
        return f"user:{self.source}" if self.source else "user"


def user_trop(P: oracle.PolyMap) -> TropMap:
    """Tropicalization from Newton polygons of the affine components."""
    supps = []
    for c in P.components:
        d = c.to_dict()
        if not d:
            raise WordError("a toric map has no vanishing component")
        supps.append([(int(m[1]), int(m[2])) for m in d])
    from .support import newton_polygon, polygon_edges

    rays = set(P2_RAYS)
    for s in supps:
        verts = newton_polygon(s)
        if len(verts) >= 3:
            rays.update(n for n, _ in polygon_edges(verts))
        elif len(verts) == 2:
            e = (verts[1][0] - verts[0][0], verts[1][1] - verts[0][1])
            n = primitive((-e[1], e[0]))
            rays.update({n, (-n[0], -n[1])})
    fan = fan_from_rays(rays)

    def argmin(s, v):
        return min(s, key=lambda m: dot(m, v))

    mats = []
    for u, w in fan.sectors():
        mid = (u[0] + w[0], u[1] + w[1])
        m0, m1, m2 = (argmin(s, mid) for s in supps)
        mats.append(((m1[0] - m0[0], m1[1] - m0[1]), (m2[0] - m0[0], m2[1] - m0[1])))
    try:
        return TropMap(fan, tuple(mats)).simplify()
    except trop.TropError as e:
        raise WordError(f"not a toric map: {e}") from None


# -- words -------------------------------------------------------------------------

@dataclass(frozen=True)
class ToricWord:
    letters: tuple

    def __post_init__(self):
        if not self.letters:
            raise WordError("a word needs at least one letter")
        object.__setattr__(self, "letters", tuple(self.letters))

    def __str__(self) -> str:
        return ".".join(str(x) for x in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def power(self, n: int) -> "ToricWord":
        return ToricWord(self.letters * n)

    @property
    def is_monomial(self) -> bool:
        return all(x.kind in ("monomial", "translation") for x in self.letters)


def word(*letters) -> ToricWord:
    return ToricWord(tuple(letters))


def reduce_word(w: ToricWord) -> ToricWord:
    """Cancel g.g, merge adjacent monomial letters and drop identities."""
    from .lattice_fan import IDENTITY, matmul

    out: list = []
    for x in w.letters:
        if out and x.kind == "involution" and out[-1].kind == "involution":
            out.pop()
            continue
        if out and x.kind == "monomial" and out[-1].kind == "monomial":
            x = Monomial(matmul(out.pop().A, x.A))
        if x.kind == "monomial" and x.A == IDENTITY:
            continue
        out.append(x)
    return ToricWord(tuple(out) or (Monomial(IDENTITY),))


_NUM = r"[+-]?(?:\d+(?:/\d+|\.\d*)?|\.\d+)"


def _parse_gq(text: str, pos: int) -> GQ:
    s = text.replace(" ", "")
    # a lone imaginary part first, so that "-1i" is not read as -1 + i
    m = re.fullmatch(rf"()({_NUM}|[+-])?i", s) or re.fullmatch(rf"({_NUM})?(?:({_NUM}|[+-])?i)?", s)
    if not s or not m or (m.group(1) is None and "i" not in s):
        raise WordParseError(f"bad complex number {text.strip()!r}", pos)
    re_ = Fraction(m.group(1)) if m.group(1) else Fraction(0)
    im = Fraction(0)
    if s.endswith("i"):
        g = m.group(2)
        im = Fraction(1) if g in (None, "+") else Fraction(-1) if g == "-" else Fraction(g)
    return gq(re_, im)


def _split_top(body: str, sep: str) -> list[tuple[str, int]]:
    parts, start = [], 0
    for i, ch in enumerate(body):
        if ch == sep:
            parts.append((body[start:i], start))
            start = i + 1
    parts.append((body[start:], start))
    return parts


def parse_word(text: str, base: Path | None = None) -> ToricWord:
    """Parse ``g``, ``m[a,b;c,d]``, ``t[y1,y2]`` and ``user:<file>`` letters
    joined by ``.`` or the composition sign."""
    letters = []
    i, n = 0, len(text)
    expect_letter = True
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if not expect_letter:
            if ch in ".∘":
                expect_letter = True
                i += 1
                continue
            raise WordParseError(f"expected '.' or '∘', found {ch!r}", i)
        if ch == "g" and not text.startswith("g[", i):
            letters.append(StdInvolution())
            i += 1
        elif ch in "mt":
            if i + 1 >= n or text[i + 1] != "[":
                raise WordParseError(f"expected '[' after {ch!r}", i + 1)
            j = text.find("]", i)
            if j < 0:
                raise WordParseError("unclosed '['", i + 1)
            body = text[i + 2:j]
            if ch == "m":
                rows = _split_top(body, ";")
                if len(rows) != 2:
                    raise WordParseError("monomial letter needs two rows 'a,b;c,d'", i + 2)
                A = []
                for row, off in rows:
                    ents = _split_top(row, ",")
                    if len(ents) != 2:
                        raise WordParseError("each row needs two entries", i + 2 + off)
                    try:
                        A.append(tuple(int(e) for e, _ in ents))
                    except ValueError:
                        raise WordParseError("matrix entries must be integers", i + 2 + off) from None
                try:
                    letters.append(Monomial(tuple(A)))
                except WordError as e:
                    raise WordParseError(str(e), i) from None
            else:
                ents = _split_top(body, ",")
                if len(ents) != 2:
                    raise WordParseError("translation letter needs two coordinates", i + 2)
                ys = [_parse_gq(e, i + 2 + off) for e, off in ents]
                try:
                    letters.append(Translation(*ys))
                except WordError as e:
                    raise WordParseError(str(e), i) from None
            i = j + 1
        elif text.startswith("user:", i):
            j = i + 5
            # the path ends at the composition sign, or at a '.' that starts a new letter
            while j < n and text[j] != "∘":
                if text[j] == "." and re.match(r"\.\s*(g\s*($|[.∘])|[mt]\[|user:)", text[j:]):
                    break
                j += 1
            path = text[i + 5:j].strip()
            if not path:
                raise WordParseError("missing file after 'user:'", i + 5)
            letters.append(load_user_letter(Path(base or ".") / path, i))
            i = j
        else:
            raise WordParseError(f"unexpected character {ch!r}", i)
        expect_letter = False
    if expect_letter:
        raise WordParseError("expected a letter", n)
    return ToricWord(tuple(letters))


def load_user_letter(path: Path, pos: int = 0) -> UserBirational:
    try:
        text = path.read_text()
    except OSError as e:
        raise WordParseError(f"cannot read {path}: {e.strerror}", pos) from None
    rho = None
    for ln in text.splitlines():
        m = re.fullmatch(r"\s*rho\s+(-?\d+)\s*", ln)
        if m:
            rho = int(m.group(1))
    if rho is None:
        raise WordParseError(f"{path}: missing 'rho <int>' line", pos)
    try:
        return UserBirational(oracle.PolyMap.from_text(text), rho, str(path))
    except (oracle.OracleError, WordError) as e:
        raise WordParseError(f"{path}: {e}", pos) from None


# -- pole points ---------------------------------------------------------------------

@dataclass(frozen=True)
class PolePoint:
    ray: tuple
    z: GQ

    def to_json(self) -> dict:
        return {"ray": list(self.ray), "z": gq_str(self.z)}


@dataclass(frozen=True)
class PoleLocus:
    """The points z^k = w of the pole C_ray (a single point when k = 1)."""

    ray: tuple
    k: int
    w: GQ

    def contains(self, p: PolePoint) -> bool:
        return p.ray == self.ray and p.z**self.k == self.w

    @property
    def count(self) -> int:
        return self.k

    def to_json(self) -> dict:
        return {"ray": list(self.ray), "k": self.k, "w": gq_str(self.w)}

    def __str__(self) -> str:
        if self.k == 1:
            return f"C{self.ray}: z = {gq_str(self.w)}"
        return f"C{self.ray}: z^{self.k} = {gq_str(self.w)}"


ONE = QQ_I.one
MINUS_ONE = -QQ_I.one

# pole action of g off the P2 rays: x -> y x near the poles of each P2 sector
_G_SECTOR_SIGNS = (((1, 0), (0, 1), (-1, -1)), ((0, 1), (-1, -1), (-1, 1)), ((-1, -1), (1, 0), (1, -1)))


def _g_sign(tau) -> tuple[int, int]:
    fan = fan_from_rays(P2_RAYS)
    i = fan.sector_of(tau)
    u, _ = fan.sectors()[i]
    for a, _, y in _G_SECTOR_SIGNS:
        if a == u:
            return y
    raise AssertionError("unreachable")


def _sign_power(y, m) -> GQ:
    # y has entries +-1, so y^m only depends on m mod 2
    s = y[0] ** (m[0] % 2) * y[1] ** (m[1] % 2)
    return ONE if s == 1 else MINUS_ONE


# exceptional lines of g (as Laurent coefficient maps) and their images
G_EXC = (
    ({(1, 0): 1, (0, 1): 1, (0, 0): -1}, PolePoint((-1, -1), ONE)),
    ({(0, 0): 1, (1, 0): -1, (0, 1): 1}, PolePoint((1, 0), ONE)),
    ({(0, 0): 1, (1, 0): 1, (0, 1): -1}, PolePoint((0, 1), ONE)),
)
G_IND = tuple(PoleLocus(tau, 1, ONE) for tau in P2_RAYS)


def in_g_indeterminacy(p: PolePoint) -> bool:
    return p.ray in P2_RAYS and p.z == ONE


def _monomial_exponent(A, sigma, tau) -> int:
    """k with A^T m(tau) = k m(sigma)."""
    v = matvec(transpose(A), pole_form(tau))
    m = pole_form(sigma)
    k = v[0] // m[0] if m[0] else v[1] // m[1]
    assert (k * m[0], k * m[1]) == v
    return k


def push_point(letter, p: PolePoint) -> PolePoint:
    """Image of a pole point under one letter; raises CollisionError on Ind."""
    if letter.kind == "monomial":
        tau = primitive(matvec(letter.A, p.ray))
        return PolePoint(tau, p.z ** _monomial_exponent(letter.A, p.ray, tau))
    if letter.kind == "translation":
        return PolePoint(p.ray, letter.scalar(pole_form(p.ray)) * p.z)
    if letter.kind == "involution":
        if p.ray in P2_RAYS:
            if p.z == ONE:
                raise CollisionError(f"point {p} is indeterminate for g")
            return PolePoint(p.ray, -p.z)
        return PolePoint(p.ray, _sign_power(_g_sign(p.ray), pole_form(p.ray)) * p.z)
    raise WordError("pole transport is not available for user letters")


def pull_locus(letter, L: PoleLocus) -> PoleLocus:
    """Preimage of a pole locus under one letter."""
    if letter.kind == "monomial":
        from .lattice_fan import preimage_ray

        sigma = preimage_ray(letter.A, L.ray)
        k = _monomial_exponent(letter.A, sigma, L.ray) * L.k
        w = L.w
        if k < 0:
            k, w = -k, ONE / w
        return PoleLocus(sigma, k, w)
    if letter.kind == "translation":
        # (c z)^k = w  <=>  z^k = w / c^k
        c = letter.scalar(pole_form(L.ray))
        return PoleLocus(L.ray, L.k, L.w / c**L.k)
    if letter.kind == "involution":
        if L.ray in P2_RAYS:
            w = L.w * (MINUS_ONE**L.k)
            if w == ONE:
                raise CollisionError(f"locus {L} meets the indeterminacy of g")
            return PoleLocus(L.ray, L.k, w)
        c = _sign_power(_g_sign(L.ray), pole_form(L.ray))
        return PoleLocus(L.ray, L.k, L.w / c**L.k)
    raise WordError("pole transport is not available for user letters")


# -- Laurent curves with Gaussian coefficients --------------------------------------

def _laurent_pullback(letter, poly: dict) -> dict:
    out: dict = {}
    for m, c in poly.items():
        if letter.kind == "monomial":
            m2 = (m[0] * letter.A[0][0] + m[1] * letter.A[1][0], m[0] * letter.A[0][1] + m[1] * letter.A[1][1])
            c2 = c
        else:
            m2, c2 = m, c * letter.scalar(m)
        out[m2] = out.get(m2, QQ_I.zero) + c2
    return {k: v for k, v in out.items() if v != QQ_I.zero}


def _laurent_str(poly: dict) -> str:
    parts = []
    for (a, b), c in sorted(poly.items(), key=lambda t: (-(t[0][0] + t[0][1]), t[0])):
        mono = "*".join(x for x in (("x1" if a == 1 else f"x1^{a}") if a else "",
                                    ("x2" if b == 1 else f"x2^{b}") if b else "") if x)
        cs = gq_str(c)
        if c.y != 0:
            cs = f"({cs})"
        if mono:
            body = mono if cs == "1" else f"-{mono}" if cs == "-1" else f"{cs}*{mono}"
        else:
            body = cs
        parts.append(body)
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


# -- profiles ---------------------------------------------------------------------

@dataclass(frozen=True)
class ExcCurve:
    equation: str | None  # Laurent polynomial when available
    image: PolePoint
    letter: int  # index of the g letter that contracts it

    def to_json(self) -> dict:
        return {"equation": self.equation, "image": self.image.to_json(), "letter": self.letter}


@dataclass(frozen=True)
class MapProfile:
    word: ToricWord
    rho: int
    dtop: int
    trop: TropMap
    exc: tuple
    ind: tuple
    verified: bool
    notes: tuple = ()

    @property
    def is_shifted_monomial(self) -> bool:
        return self.verified and not self.exc

    def to_json(self) -> dict:
        T = self.trop
        return {
            "word": str(self.word),
            "rho": self.rho,
            "dtop": self.dtop,
            "trop": T.to_json(),
            "trop_linear": [list(r) for r in T.matrix] if T.is_linear else None,
            "exc": [e.to_json() for e in self.exc],
            "ind": [p.to_json() for p in self.ind],
            "verified": self.verified,
            "notes": list(self.notes),
        }


def word_trop(w: ToricWord) -> TropMap:
    T = w.letters[-1].trop()
    for x in reversed(w.letters[:-1]):
        T = trop.compose(x.trop(), T)
    return T


def profile(w: ToricWord) -> MapProfile:
    rho = 1
    for x in w.letters:
        rho *= x.rho
    T = word_trop(w)
    dtop = abs(rho) * trop.covering_degree(T)
    notes = []
    verified = True
    exc, ind = [], []
    if any(x.kind == "user" for x in w.letters):
        verified = False
        notes.append("user letters present: exc/ind unverified")
        return MapProfile(w, rho, dtop, T, (), (), verified, tuple(notes))
    letters = w.letters
    for j, x in enumerate(letters):
        if x.kind != "involution":
            continue
        right = letters[j + 1:]
        left = letters[:j]
        for line, target in G_EXC:
            poly = {m: gq(c) for m, c in line.items()}
            if all(y.kind != "involution" for y in right):
                for y in reversed(right):
                    poly = _laurent_pullback(y, poly)
                eq = _laurent_str(poly)
            else:
                eq = None
            p = target
            try:
                for y in reversed(left):
                    p = push_point(y, p)
            except CollisionError as e:
                verified = False
                notes.append(f"non-generic word: exc/ind unverified ({e})")
            exc.append(ExcCurve(eq, p, j))
        for L in G_IND:
            try:
                for y in right:
                    L = pull_locus(y, L)
            except CollisionError as e:
                verified = False
                notes.append(f"non-generic word: exc/ind unverified ({e})")
                continue
            ind.append(L)
    return MapProfile(w, rho, dtop, T, tuple(exc), tuple(ind), verified, tuple(dict.fromkeys(notes)))


# -- internal stability -------------------------------------------------------------

@dataclass(frozen=True)
class StabilityVerdict:
    kind: str  # "certified_stable", "unstable" or "bounded_ok"
    n: int | None = None
    reason: str = ""

    def __str__(self) -> str:
        if self.kind == "certified_stable":
            return "certified_stable"
        return f"{self.kind}({self.n})"

    def to_json(self) -> dict:
        return {"verdict": self.kind, "n": self.n, "reason": self.reason}


def _is_gaussian(A) -> bool:
    return A[0][0] == A[1][1] and A[0][1] == -A[1][0]


SIZE_GUARD_BITS = 4096


def is_internally_stable(w: ToricWord, N: int = 50, prof: MapProfile | None = None) -> StabilityVerdict:
    prof = prof or profile(w)
    if not prof.verified:
        raise WordError("stability needs verified exc/ind data: " + "; ".join(prof.notes))
    letters = w.letters
    gs = [j for j, x in enumerate(letters) if x.kind == "involution"]
    if not gs:
        return StabilityVerdict("certified_stable", reason="no exceptional curves")
    monos = [x for x in letters if x.kind == "monomial"]
    if len(gs) == 1 and all(_is_gaussian(x.A) for x in monos) and prof.trop.is_linear:
        verdict = trop.rotation_is_rational_linear(prof.trop.matrix)
        if verdict.kind == "irrational_certified":
            # commuting Gaussian matrices: a P2 ray returns to a P2 ray only
            # if some power of A_f fixes a ray, impossible for irrational rotation
            return StabilityVerdict("certified_stable",
                                    reason="Gaussian monomial letters with irrational rotation")
    # exact orbit simulation of the exceptional images
    for e in prof.exc:
        p = e.image
        for n in range(1, N + 1):
            for y in reversed(letters):
                if y.kind == "involution" and in_g_indeterminacy(p):
                    return StabilityVerdict("unstable", n, reason=f"orbit of {e.image.to_json()} hits Ind")
                p = push_point(y, p)
            if _bits(p.z) > SIZE_GUARD_BITS:
                return StabilityVerdict("bounded_ok", n, reason="coordinate size guard")
    return StabilityVerdict("bounded_ok", N, reason="no collision within the budget")


# -- numerical evaluation -------------------------------------------------------------

def evaluate_letter(letter, x: tuple[complex, complex]) -> tuple[complex, complex]:
    x1, x2 = x
    if letter.kind == "monomial":
        (a, b), (c, d) = letter.A
        return (x1**a * x2**b, x1**c * x2**d)
    if letter.kind == "translation":
        return (gq_complex(letter.y1) * x1, gq_complex(letter.y2) * x2)
    if letter.kind == "involution":
        den = x1 + x2 - 1
        return (x1 * (1 - x1 + x2) / den, x2 * (1 + x1 - x2) / den)
    vals = [complex(0)] * 3
    pt = (1, x1, x2)
    for k, comp in enumerate(letter.P.components):
        for (i, j, l), c in comp.to_dict().items():
            vals[k] += int(c) * pt[0] ** int(i) * pt[1] ** int(j) * pt[2] ** int(l)
    return (vals[1] / vals[0], vals[2] / vals[0])


def evaluate(w: ToricWord, x) -> tuple[complex, complex]:
    p = (complex(x[0]), complex(x[1]))
    for y in reversed(w.letters):
        p = evaluate_letter(y, p)
    return p


def trop_point(x) -> tuple[float, float]:
    return (-math.log(abs(x[0])), -math.log(abs(x[1])))


def torus_point(v: Sequence[float], theta: Sequence[float] = (0.0, 0.0)) -> tuple[complex, complex]:
    """A point with Trop = v and the given arguments."""
    return tuple(cmath.exp(complex(-vi, ti)) for vi, ti in zip(v, theta))


@dataclass
class DefectReport:
    max: float
    mean: float
    count: int
    flagged: list
    values: list = field(repr=False)


def trop_defect(w: ToricWord, samples: Iterable, prof: MapProfile | None = None) -> DefectReport:
    """Statistics of |Trop(f(p)) - A_f(Trop p)| over torus points."""
    T = (prof or profile(w)).trop
    vals, flagged = [], []
    for p in samples:
        p = (complex(p[0]), complex(p[1]))
        try:
            q = evaluate(w, p)
            tq = trop_point(q)
        except (ZeroDivisionError, ValueError, OverflowError):
            flagged.append(p)
            continue
        tp = trop_point(p)
        a = T.apply(tp)
        vals.append(math.hypot(tq[0] - a[0], tq[1] - a[1]))
    if not vals:
        return DefectReport(math.nan, math.nan, 0, flagged, vals)
    return DefectReport(max(vals), sum(vals) / len(vals), len(vals), flagged, vals)


# -- regimes ------------------------------------------------------------------------

def spectral_radius(A) -> float:
    A = as_matrix(A)
    tr, d = A[0][0] + A[1][1], mdet(A)
    disc = tr * tr - 4 * d
    if disc >= 0:
        return max(abs((tr + math.sqrt(disc)) / 2), abs((tr - math.sqrt(disc)) / 2))
    return math.sqrt(d)


@dataclass
class RegimeReport:
    shifted_monomial: bool
    homeomorphism: bool
    rotation: str
    rotation_exact: bool
    dtop: int
    lambda1: float | None
    lambda1_exact: bool
    stability: str
    regime: str
    degrees: list = field(default_factory=list)

    def to_json(self) -> dict:
        return dict(self.__dict__)


def classify_regime(w: ToricWord, n_degrees: int = 6, budget_rays: int = 512,
                    prof: MapProfile | None = None) -> RegimeReport:
    prof = prof or profile(w)
    T = prof.trop
    homeo = trop.is_homeomorphism(T)
    if T.is_linear:
        rot: RotationVerdict | str = trop.rotation_is_rational_linear(T.matrix)
        rot_str, rot_exact = str(rot), True
        irrational = rot.kind == "irrational_certified"
    elif homeo and trop.orientation(T) > 0:
        est, _ = trop.rotation_number(T, 10000)
        rot_str, rot_exact, irrational = f"numeric({est:.12g})", False, False
    else:
        rot_str, rot_exact, irrational = "undefined", True, False
    try:
        stab = str(is_internally_stable(w, prof=prof))
    except WordError:
        stab = "unverified"
    degrees: list = []
    if prof.is_shifted_monomial:
        lam = spectral_radius(T.matrix) if T.is_linear else None
        lam_exact = T.is_linear
    else:
        from . import act

        lam_exact = False
        try:
            seq = act.degree_sequence(w, n_degrees, budget_rays=budget_rays)
            degrees = [int(d) for d in seq.degrees]
            lam = float(seq.degrees[-1] / seq.degrees[-2]) if len(seq.degrees) > 1 else None
        except (act.ActError, WordError):
            lam = None
    if prof.is_shifted_monomial:
        regime = "shifted_monomial"
    elif not homeo:
        regime = "non_homeomorphic_trop"
    elif irrational and stab in ("certified_stable",) or (irrational and stab.startswith("bounded_ok")):
        regime = "irrational_rotation_stable"
    elif rot_exact and not irrational and rot_str != "undefined":
        regime = "rational_rotation"
    else:
        regime = "undetermined"
    return RegimeReport(prof.is_shifted_monomial, homeo, rot_str, rot_exact, prof.dtop, lam, lam_exact,
                        stab, regime, degrees)


def oracle_maps(w: ToricWord) -> list:
    return [oracle.from_generator(x) for x in w.letters]
