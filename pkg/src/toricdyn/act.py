"""Action of toric maps on toric classes.

Classes are stored as normalized Cartier data: an exact PL function on a
complete fan containing the three rays of the projective plane, with equal
values on those three rays.  The degree of a class is the sum of these
values.  Fans are kept at the breakpoints of the data; smoothing happens
only where an intersection number is needed, so the ray count tracks the
actual refinement cost.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .lattice_fan import (
    P2_RAYS,
    Fan,
    as_matrix,
    content,
    fan_from_rays,
    matvec,
    mdet,
    preimage_ray,
    primitive,
    smooth_resolution,
)
from .support import PLFunction, unit_directions
from .surface import ExternalDivisor, ToricSurface, intersect, normalization_form
from .tmap import (
    MapProfile,
    ToricWord,
    WordError,
    is_internally_stable,
    profile,
    reduce_word,
)

log = logging.getLogger(__name__)

DEFAULT_RAY_BUDGET = 512


class ActError(ValueError):
    pass


class RayBudgetError(ActError):
    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class WeilClassRep:
    psi: PLFunction
    normalized: bool = True

    def __post_init__(self):
        fan = self.psi.fan
        if not self.psi.exact:
            raise ActError("class data must be exact")
        if not all(v in fan for v in P2_RAYS):
            raise ActError("class fans must contain the three P2 rays")
        if self.normalized and len({self.psi.value_at_ray(v) for v in P2_RAYS}) != 1:
            raise ActError("representative is not normalized")

    @property
    def fan(self) -> Fan:
        return self.psi.fan

    @property
    def degree(self) -> Fraction:
        return sum((self.psi(v) for v in P2_RAYS), Fraction(0))

    def __call__(self, v):
        return self.psi(v)

    def is_nef(self) -> bool:
        return self.psi.is_convex()

    def is_principal(self) -> bool:
        return self.psi.is_linear()

    def __add__(self, other: "WeilClassRep") -> "WeilClassRep":
        return make_class(self.psi + other.psi)

    def __sub__(self, other: "WeilClassRep") -> "WeilClassRep":
        return make_class(self.psi - other.psi)

    def scale(self, c) -> "WeilClassRep":
        return WeilClassRep(self.psi.scale(c), self.normalized)

    def to_json(self) -> dict:
        return {"psi": self.psi.to_json(), "degree": str(self.degree)}


def make_class(psi: PLFunction, coarsen: bool = True) -> WeilClassRep:
    """Normalize and, unless told otherwise, drop rays where psi is linear."""
    a, b, c = (psi(v) for v in P2_RAYS)
    psi = psi.add_linear(normalization_form(a, b, c))
    if coarsen:
        psi = psi.coarsen(P2_RAYS)
    if not all(v in psi.fan for v in P2_RAYS):
        psi = psi.on_fan(fan_from_rays(set(psi.fan.rays) | set(P2_RAYS)))
    return WeilClassRep(psi)


def line_class() -> WeilClassRep:
    third = Fraction(1, 3)
    return WeilClassRep(PLFunction(fan_from_rays(P2_RAYS), (third,) * 3))


def pole_class(tau) -> WeilClassRep:
    """Normalized class of the pole C_tau."""
    tau = primitive(tau)
    fan = smooth_resolution(fan_from_rays(set(P2_RAYS) | {tau}))
    return make_class(PLFunction(fan, tuple(Fraction(int(v == tau)) for v in fan.rays)), coarsen=False)


def class_from_values(rays, values) -> WeilClassRep:
    fan = fan_from_rays(rays)
    idx = {primitive(r): Fraction(v) for r, v in zip(rays, values)}
    return make_class(PLFunction(fan, tuple(idx[r] for r in fan.rays)))


def pairing(c1: WeilClassRep, c2: WeilClassRep, extra_rays=()) -> Fraction:
    """Intersection number on a common smooth refinement."""
    rays = set(c1.fan.rays) | set(c2.fan.rays) | {primitive(r) for r in extra_rays}
    X = ToricSurface(smooth_resolution(fan_from_rays(rays)))
    D1 = ExternalDivisor(X, tuple(c1.psi(v) for v in X.fan.rays))
    D2 = ExternalDivisor(X, tuple(c2.psi(v) for v in X.fan.rays))
    return intersect(D1, D2)


def _check_budget(c: WeilClassRep, budget: int) -> WeilClassRep:
    if len(c.fan) > budget:
        raise RayBudgetError(f"working fan has {len(c.fan)} rays, budget {budget}")
    return c


def pullback_monomial(c: WeilClassRep, A) -> WeilClassRep:
    A = as_matrix(A)
    if mdet(A) == 0:
        raise ActError("singular matrix")
    rays = {preimage_ray(A, r) for r in c.psi.breakpoints()} | {preimage_ray(A, r) for r in P2_RAYS}
    fan = fan_from_rays(rays | set(P2_RAYS))
    psi = PLFunction(fan, tuple(c.psi(matvec(A, v)) for v in fan.rays))
    return make_class(psi)


def pushforward_monomial(c: WeilClassRep, A) -> WeilClassRep:
    """|det A| psi o A^{-1}: each pole C_tau goes to C_{A tau} with degree |det A| / Ram."""
    A = as_matrix(A)
    d = mdet(A)
    if d == 0:
        raise ActError("singular matrix")
    rays = {primitive(matvec(A, r)) for r in c.psi.breakpoints()} | {primitive(matvec(A, r)) for r in P2_RAYS}
    fan = fan_from_rays(rays | set(P2_RAYS))
    vals = []
    for v in fan.rays:
        sigma = preimage_ray(A, v)
        ram = content(matvec(A, sigma))
        vals.append(Fraction(abs(d), ram) * c.psi(sigma))
    return make_class(PLFunction(fan, tuple(vals)))


def pullback_involution(c: WeilClassRep) -> WeilClassRep:
    """External part unchanged plus psi(tau) times each exceptional line,
    one line per pole tau of the plane carrying an indeterminate point."""
    if not c.normalized:
        log.info("normalizing input class before the involution pullback")
        c = make_class(c.psi)
    return make_class(c.psi + line_class().psi.scale(c.degree))


pushforward_involution = pullback_involution


def _letter_pullback(c: WeilClassRep, x) -> WeilClassRep:
    if x.kind == "monomial":
        return pullback_monomial(c, x.A)
    if x.kind == "translation":
        return c
    if x.kind == "involution":
        return pullback_involution(c)
    raise ActError("class action is not available for user letters")


def _letter_pushforward(c: WeilClassRep, x) -> WeilClassRep:
    if x.kind == "monomial":
        return pushforward_monomial(c, x.A)
    if x.kind == "translation":
        return c
    if x.kind == "involution":
        return pushforward_involution(c)
    raise ActError("class action is not available for user letters")


def pullback_word(c: WeilClassRep, w: ToricWord, budget_rays: int = DEFAULT_RAY_BUDGET) -> WeilClassRep:
    # (L1 o ... o Lr)^* = Lr^* ... L1^*, so L1 acts first
    for x in w.letters:
        c = _check_budget(_letter_pullback(c, x), budget_rays)
    return c


def pushforward_word(c: WeilClassRep, w: ToricWord, budget_rays: int = DEFAULT_RAY_BUDGET) -> WeilClassRep:
    for x in reversed(w.letters):
        c = _check_budget(_letter_pushforward(c, x), budget_rays)
    return c


def eminus(c: WeilClassRep, w: ToricWord, prof: MapProfile | None = None,
           budget_rays: int = DEFAULT_RAY_BUDGET) -> WeilClassRep:
    dt = (prof or profile(w)).dtop
    return pushforward_word(pullback_word(c, w, budget_rays), w, budget_rays) - c.scale(dt)


@dataclass
class DegreeSequence:
    word: str
    degrees: list
    stability: str
    verified: bool
    flags: list = field(default_factory=list)
    classes: list = field(default_factory=list, repr=False)


def degree_sequence(w: ToricWord, n_max: int, budget_rays: int = DEFAULT_RAY_BUDGET,
                    keep_classes: bool = False) -> DegreeSequence:
    """deg(f^n), n = 1..n_max, from the class action.

    For internally stable words the pullback is iterated; otherwise each
    iterate f^n is reduced as a word and pulled back from scratch, and the
    result is flagged."""
    prof = profile(w)
    if any(x.kind == "user" for x in w.letters):
        raise ActError("class action is not available for user letters")
    try:
        stab = is_internally_stable(w, N=max(n_max, 1), prof=prof)
        stab_str = str(stab)
        stable = stab.kind == "certified_stable" or (stab.kind == "bounded_ok" and stab.n >= n_max)
    except WordError:
        stab_str, stable = "unverified", False
    flags = [] if stable else ["unstable: degrees unverified"]
    degs, classes = [], []
    c = line_class()
    try:
        for n in range(1, n_max + 1):
            if stable:
                c = pullback_word(c, w, budget_rays)
            else:
                c = pullback_word(line_class(), reduce_word(w.power(n)), budget_rays)
            degs.append(c.degree)
            if keep_classes:
                classes.append(c)
    except RayBudgetError as e:
        e.partial = DegreeSequence(str(w), degs, stab_str, stable, flags + ["ray budget exceeded"], classes)
        raise
    return DegreeSequence(str(w), degs, stab_str, stable, flags, classes)


@dataclass
class DegreeEstimate:
    ratios: list
    roots: list
    lower: float
    upper: float
    within_bounds: bool


def dyn_degree_estimate(degrees, dtop: int | None = None, deg1: int | None = None,
                        slack: float = 1e-9) -> DegreeEstimate:
    """Ratio and root estimates of the dynamical degree, checked against
    sqrt(dtop) <= lambda_1 <= deg f."""
    seq = [Fraction(d) for d in degrees]
    if len(seq) < 3:
        raise ActError("need at least three terms")
    ratios = [float(seq[i + 1] / seq[i]) for i in range(len(seq) - 1)]
    roots = [float(seq[i]) ** (1.0 / (i + 1)) for i in range(len(seq))]
    lo = math.sqrt(dtop) if dtop else 0.0
    hi = float(deg1 if deg1 is not None else seq[0])
    # deg(f^n)^(1/n) >= lambda_1 always; the ratio trend is only checked loosely
    ok = all(r >= lo - slack for r in roots) and all(r <= hi + slack for r in roots)
    return DegreeEstimate(ratios, roots, lo, hi, ok)


@dataclass
class InvariantIteration:
    classes: list = field(repr=False)
    diagnostics: list = field(default_factory=list)
    regime_ok: bool = True


def _sup_diff(c1: WeilClassRep, c2: WeilClassRep, directions: int = 360) -> float:
    best = 0.0
    f1, f2 = c1.psi.to_float(), c2.psi.to_float()
    for v in unit_directions(directions):
        best = max(best, abs(f1(v) - f2(v)))
    return best


def invariant_class_iterate(w: ToricWord, n: int, budget_rays: int = DEFAULT_RAY_BUDGET,
                            directions: int = 360) -> InvariantIteration:
    """alpha_k = f^{k*}[line] / deg(f^k) with the sup-distance between
    consecutive normalized representatives over unit directions."""
    prof = profile(w)
    seq = degree_sequence(w, n, budget_rays, keep_classes=True)
    alphas = [line_class()] + [c.scale(1 / c.degree) for c in seq.classes]
    diags = [_sup_diff(alphas[k], alphas[k + 1], directions) for k in range(len(alphas) - 1)]
    regime_ok = True
    if len(seq.degrees) >= 2:
        lam = float(seq.degrees[-1] / seq.degrees[-2])
        regime_ok = lam * lam > prof.dtop
        if not regime_ok:
            log.warning("lambda_1^2 > dtop is not visible in the computed range")
    return InvariantIteration(alphas, diags, regime_ok)
