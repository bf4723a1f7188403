"""Exact symbolic rational self-maps of the projective plane.

A ``PolyMap`` is a triple of homogeneous integer polynomials in X0, X1, X2
with no common factor; affine coordinates are x1 = X1/X0, x2 = X2/X0.
Multivariate arithmetic (composition, gcd, factorization, resultants) is
delegated to FLINT.

Degree sequences of long iterates are out of reach for full trivariate
composition, so ``restricted_degrees`` computes them by composing along a
pseudo-random line: for a line L avoiding the (finitely many) base points
of f^n, the reduced parametrization f^n o L has degree exactly deg(f^n).
The line can be taken over Z (exact, for moderate degrees) or over a
prime field; reduction mod p can only lower the degree, so agreement
between several primes and lines is a strong certificate.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import flint

CTX = flint.fmpz_mpoly_ctx.get(("X0", "X1", "X2"), "lex")
X0, X1, X2 = CTX.gens()
DEFAULT_DEGREE_BUDGET = 200
DEFAULT_PRIMES = (2**61 - 1, 2**62 - 57)


class OracleError(ValueError):
    pass


class OracleBudgetError(OracleError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


def _homog_degree(p) -> int | None:
    degs = {sum(int(e) for e in m) for m in p.to_dict()}
    if len(degs) > 1:
        raise OracleError("component is not homogeneous")
    return degs.pop() if degs else None


@dataclass(frozen=True, eq=False)
class PolyMap:
    components: tuple

    def __post_init__(self):
        comps = tuple(self.components)
        if len(comps) != 3:
            raise OracleError("a plane map has three components")
        if all(c.is_zero() for c in comps):
            raise OracleError("all components vanish")
        degs = {_homog_degree(c) for c in comps if not c.is_zero()}
        if len(degs) != 1:
            raise OracleError("components must have a common degree")
        g = comps[0].gcd(comps[1]).gcd(comps[2])
        if not g.is_one():
            comps = tuple(c / g for c in comps)
        # fix the overall sign by the leading coefficient of the first nonzero component
        lead = next(c for c in comps if not c.is_zero())
        if lead.leading_coefficient() < 0:
            comps = tuple(-c for c in comps)
        object.__setattr__(self, "components", comps)

    @property
    def degree(self) -> int:
        return next(_homog_degree(c) for c in self.components if not c.is_zero())

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyMap) and self.components == other.components

    def __hash__(self) -> int:
        return hash(tuple(str(c) for c in self.components))

    def __call__(self, point: Sequence):
        pt = [Fraction(x) for x in point]
        return tuple(_eval(c, pt) for c in self.components)

    def jacobian(self):
        rows = [[c.derivative(v) for v in ("X0", "X1", "X2")] for c in self.components]
        (a, b, c), (d, e, f), (g, h, i) = rows
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)

    def to_text(self) -> str:
        return "\n".join(_poly_to_text(c) for c in self.components)

    @classmethod
    def from_text(cls, text: str) -> "PolyMap":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#") and not ln.lower().startswith("rho")]
        if len(lines) != 3:
            raise OracleError("expected three component lines")
        return cls(tuple(_poly_from_text(ln) for ln in lines))

    def __repr__(self) -> str:
        return f"PolyMap[{', '.join(str(c) for c in self.components)}]"


def _eval(p, pt):
    total = Fraction(0)
    for (i, j, k), c in p.to_dict().items():
        total += int(c) * pt[0] ** int(i) * pt[1] ** int(j) * pt[2] ** int(k)
    return total


def _poly_to_text(p) -> str:
    terms = sorted(p.to_dict().items(), reverse=True)
    if not terms:
        return "0"
    return ", ".join(f"{int(c)} X0^{i} X1^{j} X2^{k}" for (i, j, k), c in terms)


_TERM = re.compile(r"^\s*([+-]?\d+)\s*X0\^(\d+)\s*X1\^(\d+)\s*X2\^(\d+)\s*$")


def _poly_from_text(line: str):
    d = {}
    if line.strip() == "0":
        return CTX.from_dict({})
    for part in line.split(","):
        m = _TERM.match(part)
        if not m:
            raise OracleError(f"cannot parse term {part.strip()!r}")
        c, i, j, k = (int(x) for x in m.groups())
        d[(i, j, k)] = d.get((i, j, k), 0) + c
    return CTX.from_dict({k: v for k, v in d.items() if v})


# -- generators ------------------------------------------------------------------

def monomial_map(A) -> PolyMap:
    (a, b), (c, d) = A
    if a * d - b * c == 0:
        raise OracleError("singular monomial map")
    es = [(0, 0, 0), (-a - b, a, b), (-c - d, c, d)]
    mn = [min(e[k] for e in es) for k in range(3)]
    return PolyMap(tuple(CTX.from_dict({tuple(e[k] - mn[k] for k in range(3)): 1}) for e in es))


def translation_map(y1, y2) -> PolyMap:
    y1, y2 = Fraction(y1), Fraction(y2)
    if y1 == 0 or y2 == 0:
        raise OracleError("translation coordinates must be nonzero")
    den = y1.denominator * y2.denominator
    return PolyMap((den * X0, int(y1 * den) * X1, int(y2 * den) * X2))


def involution_map() -> PolyMap:
    """Homogenized x -> (x1 (1-x1+x2), x2 (1+x1-x2)) / (x1+x2-1)."""
    return PolyMap((X0 * (X1 + X2 - X0), X1 * (X0 - X1 + X2), X2 * (X0 + X1 - X2)))


def identity_map() -> PolyMap:
    return PolyMap((X0, X1, X2))


def from_generator(gen) -> PolyMap:
    kind = getattr(gen, "kind", None)
    if kind == "monomial":
        return monomial_map(gen.A)
    if kind == "involution":
        return involution_map()
    if kind == "translation":
        return translation_map(*gen.rational_coords())
    if kind == "user":
        return gen.P
    raise OracleError(f"unknown generator {gen!r}")


# -- composition -------------------------------------------------------------------

def compose(p: PolyMap, q: PolyMap, budget: int = DEFAULT_DEGREE_BUDGET) -> PolyMap:
    """p o q with the common factor removed."""
    if p.degree * q.degree > budget:
        raise OracleBudgetError(f"degree {p.degree}*{q.degree} exceeds budget {budget}")
    return PolyMap(tuple(c.compose(*q.components) for c in p.components))


def compose_word(maps: Sequence[PolyMap], budget: int = DEFAULT_DEGREE_BUDGET) -> PolyMap:
    """maps[0] o maps[1] o ... o maps[-1]."""
    out = maps[-1]
    for m in reversed(maps[:-1]):
        out = compose(m, out, budget)
    return out


def iterate_degrees(maps: Sequence[PolyMap], n_max: int, budget: int = DEFAULT_DEGREE_BUDGET) -> list[int]:
    """deg(f^n), n = 1..n_max, by full composition; stops at the budget."""
    f = compose_word(maps, budget)
    out, cur = [f.degree], f
    for _ in range(n_max - 1):
        try:
            cur = compose(f, cur, budget)
        except OracleBudgetError as e:
            raise OracleBudgetError(str(e), partial=out) from None
        out.append(cur.degree)
    return out


# -- restriction to a line ------------------------------------------------------------

def _apply_to_curve(p: PolyMap, triple, one):
    """Evaluate the three components at a parametrized curve."""
    deg = p.degree
    pows = []
    for t in triple:
        row = [one]
        for _ in range(deg):
            row.append(row[-1] * t)
        pows.append(row)
    out = []
    for c in p.components:
        acc = one * 0
        for (i, j, k), coef in c.to_dict().items():
            acc += int(coef) * pows[0][int(i)] * pows[1][int(j)] * pows[2][int(k)]
        out.append(acc)
    return out


def _reduce(triple):
    g = triple[0].gcd(triple[1]).gcd(triple[2])
    if g.degree() > 0:
        triple = [t // g for t in triple]
    return triple


def restricted_degrees(maps: Sequence[PolyMap], n_max: int, modulus: int | None = None,
                       seed: int = 0, max_degree: int | None = None) -> list[int]:
    """deg(f^n) for n = 1..n_max via composition along a random line.

    ``modulus=None`` works over Z; otherwise over GF(modulus)."""
    rng = random.Random(seed)
    if modulus is None:
        mk = lambda cs: flint.fmpz_poly(cs)  # noqa: E731
        lo, hi = -50, 50
    else:
        mk = lambda cs: flint.nmod_poly(cs, modulus)  # noqa: E731
        lo, hi = 1, modulus - 1
    triple = [mk([rng.randint(lo, hi), rng.randint(lo, hi)]) for _ in range(3)]
    one = mk([1])
    out = []
    bound = 1
    for m in maps:
        bound *= m.degree
    for _ in range(n_max):
        if max_degree is not None and out and out[-1] * bound > max_degree:
            raise OracleBudgetError(f"next degree may exceed {max_degree}", partial=out)
        for m in reversed(maps):
            triple = _reduce(_apply_to_curve(m, triple, one))
        d = max(t.degree() for t in triple)
        out.append(d)
    return out


@dataclass(frozen=True)
class DegreeCertificate:
    degrees: tuple
    runs: tuple  # one degree list per (modulus, seed) pair
    agree: bool


def oracle_degrees(maps: Sequence[PolyMap], n_max: int, primes: Iterable[int] = DEFAULT_PRIMES,
                   seeds: Iterable[int] = (1, 2), exact_upto: int = 800) -> DegreeCertificate:
    """Degrees of f^n from several independent line restrictions.

    Runs over Z while degrees stay below ``exact_upto``, then over each prime
    with each seed.  Every run is a lower bound for the true degree; the
    reported value is the maximum and ``agree`` says whether all runs match."""
    runs = []
    try:
        runs.append(("Z", 0, restricted_degrees(maps, n_max, None, seed=0, max_degree=exact_upto)))
    except OracleBudgetError as e:
        runs.append(("Z", 0, list(e.partial)))
    for p in primes:
        for s in seeds:
            runs.append((p, s, restricted_degrees(maps, n_max, p, seed=s)))
    degs = []
    agree = True
    for n in range(n_max):
        vals = [r[2][n] for r in runs if len(r[2]) > n]
        degs.append(max(vals))
        agree = agree and len(set(vals)) == 1
    return DegreeCertificate(tuple(degs), tuple(runs), agree)


# -- algebraic points ---------------------------------------------------------------

@dataclass(frozen=True)
class AlgebraicPoint:
    """Projective point with coordinates in Q[s]/(minpoly)."""

    minpoly: object  # fmpq_poly, irreducible
    coords: tuple  # three fmpq_poly reduced mod minpoly

    @property
    def is_rational(self) -> bool:
        return self.minpoly.degree() == 1

    def rational(self) -> tuple:
        if not self.is_rational:
            raise OracleError("point is not rational")
        r = self.minpoly
        root = -Fraction(int(r.coeffs()[0].p), int(r.coeffs()[0].q)) / Fraction(int(r.coeffs()[1].p), int(r.coeffs()[1].q))
        vals = [_fmpq_poly_at(c, root) for c in self.coords]
        return normalize_point(vals)

    def to_json(self):
        if self.is_rational:
            return [str(x) for x in self.rational()]
        return {"minpoly": str(self.minpoly), "coords": [str(c) for c in self.coords]}


def _fmpq_poly_at(p, x: Fraction) -> Fraction:
    total = Fraction(0)
    for c in reversed(p.coeffs()):
        total = total * x + Fraction(int(c.p), int(c.q))
    return total


def normalize_point(vals: Sequence) -> tuple:
    vals = [Fraction(v) for v in vals]
    piv = next(v for v in vals if v != 0)
    return tuple(v / piv for v in vals)


def _to_fmpq_poly(p, var: int):
    """Univariate fmpz_mpoly (in variable ``var``) -> fmpq_poly."""
    d = p.to_dict()
    n = max((m[var] for m in d), default=0)
    cs = [0] * (n + 1)
    for m, c in d.items():
        cs[m[var]] += int(c)
    return flint.fmpq_poly(cs)


def _inv_mod(a, r):
    g, s, _ = a.xgcd(r)
    if g.degree() != 0:
        raise ZeroDivisionError
    return s / g.coeffs()[0]


def _nf_poly_gcd(f: list, g: list, r) -> list:
    """gcd of polynomials with coefficients in Q[s]/r (lists, low degree first)."""

    def trim(p):
        p = [c % r for c in p]
        while p and p[-1].is_zero():
            p.pop()
        return p

    f, g = trim(f), trim(g)
    while g:
        inv = _inv_mod(g[-1], r)
        while len(f) >= len(g):
            c = (f[-1] * inv) % r
            shift = len(f) - len(g)
            for i, gc in enumerate(g):
                f[i + shift] = (f[i + shift] - c * gc) % r
            f = trim(f)
            if not f:
                break
        f, g = g, f
    if f:
        inv = _inv_mod(f[-1], r)
        f = [(c * inv) % r for c in f]
    return f


def _coeffs_in_var(p, var: int, alpha_var: int, r) -> list:
    """Coefficients (as fmpq_poly in s mod r) of p viewed in ``var``,
    after substituting s for variable ``alpha_var``."""
    d = p.to_dict()
    n = max((m[var] for m in d), default=0)
    out = [flint.fmpq_poly([0]) for _ in range(n + 1)]
    for m, c in d.items():
        mono = flint.fmpq_poly([0] * m[alpha_var] + [int(c)])
        out[m[var]] += mono
    return [c % r for c in out]


def indeterminacy_points(p: PolyMap) -> list[AlgebraicPoint]:
    comps = p.components
    pts: list[AlgebraicPoint] = []
    # affine chart X0 = 1
    aff = [c.subs({"X0": 1}) for c in comps]
    nz = [a for a in aff if not a.is_zero()]
    if len(nz) >= 2:
        res = None
        for i in range(len(nz)):
            for j in range(i + 1, len(nz)):
                r = _to_fmpq_poly(nz[i].resultant(nz[j], "X2"), 1)
                res = r if res is None else res.gcd(r)
        if res is not None and res.degree() > 0:
            _, facs = res.factor()
            for r, _ in facs:
                cols = [_coeffs_in_var(a, 2, 1, r) for a in aff]
                g = cols[0]
                for c in cols[1:]:
                    g = _nf_poly_gcd(list(g), list(c), r) if g else c
                    if not g:
                        continue
                if len(g) == 2:
                    beta = (-g[0] * _inv_mod(g[1], r)) % r
                    s = flint.fmpq_poly([0, 1]) % r
                    pts.append(AlgebraicPoint(r, (flint.fmpq_poly([1]), s, beta)))
                elif len(g) > 2:
                    pts.append(AlgebraicPoint(r, (flint.fmpq_poly([1]), flint.fmpq_poly([0, 1]) % r,
                                                  flint.fmpq_poly([0]))))
    # line at infinity X0 = 0, chart X1 = 1
    inf = [_to_fmpq_poly(c.subs({"X0": 0, "X1": 1}), 2) for c in comps]
    g = inf[0].gcd(inf[1]).gcd(inf[2])
    if all(x.is_zero() for x in inf):
        raise OracleError("the line at infinity is a common component")
    if g.degree() > 0:
        _, facs = g.factor()
        for r, _ in facs:
            s = flint.fmpq_poly([0, 1]) % r
            pts.append(AlgebraicPoint(r, (flint.fmpq_poly([0]), flint.fmpq_poly([1]), s)))
    if all(_eval(c, [0, 0, 1]) == 0 for c in comps):
        pts.append(AlgebraicPoint(flint.fmpq_poly([0, 1]), (flint.fmpq_poly([0]),) * 2 + (flint.fmpq_poly([1]),)))
    return pts


def rational_indeterminacy(p: PolyMap) -> set:
    return {pt.rational() for pt in indeterminacy_points(p) if pt.is_rational}


# -- contracted curves -------------------------------------------------------------

def _restrict_to_line(poly, a, b):
    """poly(a + s b) as an fmpq_poly in s."""
    s = flint.fmpq_poly([0, 1])
    line = [flint.fmpq_poly([a[k]]) + b[k] * s for k in range(3)]
    acc = flint.fmpq_poly([0])
    for (i, j, k), c in poly.to_dict().items():
        acc += int(c) * line[0] ** i * line[1] ** j * line[2] ** k
    return acc


def _image_on_factor(p: PolyMap, h, rng: random.Random, tries: int = 6):
    """Image point of the curve {h = 0} if p contracts it, else None."""
    image = None
    good = 0
    for _ in range(tries * 3):
        a = [rng.randint(-20, 20) for _ in range(3)]
        b = [rng.randint(-20, 20) for _ in range(3)]
        rh = _restrict_to_line(h, a, b)
        if rh.degree() < 1 or rh.degree() < _homog_degree(h):
            continue
        _, facs = rh.factor()
        ok = True
        for r, _ in facs:
            vals = [_restrict_to_line(c, a, b) % r for c in p.components]
            j = next((k for k, v in enumerate(vals) if not v.is_zero()), None)
            if j is None:
                ok = False
                break
            inv = _inv_mod(vals[j], r)
            ratios = [(v * inv) % r for v in vals]
            if any(x.degree() > 0 for x in ratios):
                return None
            pt = normalize_point([Fraction(int(x.coeffs()[0].p), int(x.coeffs()[0].q)) if not x.is_zero() else 0
                                  for x in ratios])
            if image is None:
                image = pt
            elif image != pt:
                return None
        if ok:
            good += 1
            if good >= 3:
                return image
    return image


@dataclass(frozen=True)
class ContractedCurve:
    factor: object  # fmpz_mpoly
    multiplicity: int
    image: tuple

    def affine(self) -> str:
        return str(self.factor.subs({"X0": 1}))


def contracted_curves(p: PolyMap, seed: int = 7, budget: int = DEFAULT_DEGREE_BUDGET) -> list[ContractedCurve]:
    if p.degree > budget:
        raise OracleBudgetError(f"degree {p.degree} exceeds budget {budget}")
    J = p.jacobian()
    if J.is_zero():
        raise OracleError("Jacobian vanishes identically; the map is not dominant")
    _, facs = J.factor()
    rng = random.Random(seed)
    out = []
    for h, mult in facs:
        img = _image_on_factor(p, h, rng)
        if img is not None:
            out.append(ContractedCurve(h, int(mult), img))
    return out


# -- topological degree -----------------------------------------------------------

def generic_fiber_count(p: PolyMap, seed: int = 3) -> int:
    """Number of preimages of a generic point, by elimination."""
    rng = random.Random(seed)
    while True:
        S = [[rng.randint(-9, 9) for _ in range(3)] for _ in range(3)]
        dS = (S[0][0] * (S[1][1] * S[2][2] - S[1][2] * S[2][1]) - S[0][1] * (S[1][0] * S[2][2] - S[1][2] * S[2][0])
              + S[0][2] * (S[1][0] * S[2][1] - S[1][1] * S[2][0]))
        if dS != 0:
            break
    lin = [S[i][0] * X0 + S[i][1] * X1 + S[i][2] * X2 for i in range(3)]
    comps = [c.compose(*lin) for c in p.components]

    def res_for(q):
        g1 = q[0] * comps[1] - q[1] * comps[0]
        g2 = q[0] * comps[2] - q[2] * comps[0]
        g1, g2 = g1.subs({"X0": 1}), g2.subs({"X0": 1})
        r = g1.resultant(g2, "X2")
        if r.is_zero():
            raise OracleError("degenerate elimination")
        return _to_fmpq_poly(r, 1)

    def sqf_degree(r):
        if r.degree() <= 0:
            return 0
        return (r / r.gcd(r.derivative())).degree()

    qa = [rng.randint(1, 97) for _ in range(3)]
    qb = [rng.randint(1, 97) for _ in range(3)]
    ra, rb = res_for(qa), res_for(qb)
    return sqf_degree(ra) - sqf_degree(ra.gcd(rb))


# -- toric determinant ----------------------------------------------------------

def toric_determinant(p: PolyMap, samples: int = 5, seed: int = 11) -> Fraction:
    """rho with f^*(dx1 dx2 / x1 x2) = rho dx1 dx2 / x1 x2, checked on random
    rational points; raises if the ratio is not constant."""
    rng = random.Random(seed)
    P0, P1, P2 = (c.subs({"X0": 1}) for c in p.components)
    d = {name: [c.derivative(name) for c in (P0, P1, P2)] for name in ("X1", "X2")}
    vals = set()
    tries = 0
    while len(vals) < 1 or tries < samples:
        tries += 1
        if tries > 10 * samples:
            raise OracleError("could not find regular sample points")
        x = (1, Fraction(rng.randint(-40, 40), rng.randint(1, 13)), Fraction(rng.randint(-40, 40), rng.randint(1, 13)))
        v = [_eval(c, x) for c in (P0, P1, P2)]
        if any(t == 0 for t in v) or x[1] == 0 or x[2] == 0:
            continue
        da = [[_eval(c, x) for c in d[name]] for name in ("X1", "X2")]
        # f_k = P_k / P0, df_k/dx_j = (dP_k P0 - P_k dP0) / P0^2
        J = [[(da[j][k] * v[0] - v[k] * da[j][0]) / v[0] ** 2 for j in range(2)] for k in (1, 2)]
        jac = J[0][0] * J[1][1] - J[0][1] * J[1][0]
        f1, f2 = v[1] / v[0], v[2] / v[0]
        vals.add(jac * x[1] * x[2] / (f1 * f2))
    if len(vals) != 1:
        raise OracleError(f"map is not toric: f^*eta/eta takes values {sorted(vals)[:3]}")
    return vals.pop()
