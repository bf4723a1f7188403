import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricdyn.lattice_fan import P2_RAYS, fan_from_rays, p1p1_fan, p2_fan, refine, smooth_resolution
from toricdyn.surface import ToricSurface
from toricdyn.support import (
    HomogenizationError,
    LaurentPolynomial,
    NumericConvexFunction,
    PLFunction,
    euclidean_norm,
    growth,
    homogenize,
    linear_function,
    newton_polygon,
    newton_support,
    restrict_to_fan,
    ronkin,
    ronkin_function,
    ronkin_report,
    sandwich_constant,
    sandwich_ratios,
    unit_directions,
)

fracs = st.fractions(min_value=-5, max_value=5, max_denominator=7)
rays = st.tuples(st.integers(-6, 6), st.integers(-6, 6)).filter(lambda v: v != (0, 0))


@st.composite
def pl_functions(draw):
    extra = draw(st.lists(rays, max_size=5))
    fan = fan_from_rays(list(extra) + list(P2_RAYS))
    return PLFunction(fan, tuple(draw(fracs) for _ in fan.rays))


@st.composite
def convex_pl(draw):
    # max of a few linear forms is convex; record it on a fan of its breaks
    forms = draw(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=4))
    fan = smooth_resolution(fan_from_rays(list(P2_RAYS) + [(1, 1), (-1, 0), (0, -1), (1, -1), (-1, 1),
                                                            (2, 1), (1, 2), (-2, -1), (-1, -2)]))
    f = lambda v: max(m[0] * v[0] + m[1] * v[1] for m in forms)
    # breaks of max of forms are along normals of differences; refine to include them
    extra = {(-(a[1] - b[1]), a[0] - b[0]) for a in forms for b in forms if a != b}
    extra |= {(-x, -y) for x, y in extra}
    fan = smooth_resolution(refine(fan, fan_from_rays(list(extra) + list(P2_RAYS)))) if extra else fan
    return PLFunction.from_function(fan, lambda v: Fraction(f(v))), f


def test_pl_evaluation_is_homogeneous_and_linear_on_sectors():
    psi = PLFunction(p2_fan(), (1, 0, 0))
    assert psi((1, 0)) == 1 and psi((0, 1)) == 0 and psi((-1, -1)) == 0
    assert psi((3, 2)) == 3
    assert psi((-2, 0)) == 0  # in the cone of (0,1), (-1,-1)
    assert psi((1, -1)) == 2  # 2(1,0) + (-1,-1)
    assert psi((0, 0)) == 0


def test_convexity_matches_per_ray_delta():
    psi = PLFunction(p2_fan(), (1, 1, 1))
    assert psi.is_convex() and not psi.is_linear()
    assert PLFunction(p2_fan(), (-1, -1, -1)).is_convex() is False
    assert linear_function((2, -3)).is_linear()


@given(pl_functions())
def test_delta_condition_is_the_self_intersection_relation(psi):
    psi = psi.on_fan(smooth_resolution(psi.fan))
    X = ToricSurface(psi.fan)
    n = len(psi.fan)
    rel = [psi.values[(i - 1) % n] + psi.values[(i + 1) % n] - X.self_int[i] * psi.values[i] for i in range(n)]
    assert rel == psi.deltas()
    if psi.is_convex():
        pts = [(a, b) for a in range(-4, 5) for b in range(-4, 5)]
        assert all(psi((u[0] + w[0], u[1] + w[1])) <= psi(u) + psi(w) for u in pts for w in pts[::5])


@given(pl_functions(), st.tuples(st.integers(-9, 9), st.integers(-9, 9)), st.integers(1, 20))
def test_positive_homogeneity(psi, v, t):
    assert psi((t * v[0], t * v[1])) == t * psi(v)


def test_growth_examples():
    assert growth(euclidean_norm()) == pytest.approx(1.0, abs=1e-9)
    # the piece -2 v1 + v2 peaks inside its own sector, so the sup is not at a ray
    assert growth(PLFunction(p2_fan(), (1, 1, 1))) == pytest.approx(math.sqrt(5), abs=1e-12)
    assert growth(NumericConvexFunction(lambda v: v[0] ** 2)) == math.inf


@given(pl_functions())
def test_pl_growth_is_sup_on_the_circle(psi):
    dirs = unit_directions(4000) + [(r[0] / math.hypot(*r), r[1] / math.hypot(*r)) for r in psi.fan.rays]
    dense = max(float(psi(u)) for u in dirs)
    lip = max(math.hypot(*map(float, psi.gradient(i))) for i in range(len(psi.fan)))
    assert growth(psi) >= dense - 1e-12
    assert growth(psi) <= dense + lip * math.pi / 4000 + 1e-12


def test_homogenize_examples():
    h = homogenize(NumericConvexFunction(lambda v: math.sqrt(1 + v[0] ** 2 + v[1] ** 2)))
    for u in unit_directions(16):
        assert h(u) == pytest.approx(1.0, abs=1e-8)
    lse = NumericConvexFunction(lambda v: float(np.logaddexp.reduce([0.0, -v[0], -v[1]])))
    h = homogenize(lse)
    target = newton_support("1+x1+x2")
    for u in unit_directions(36):
        assert h(u) == pytest.approx(max(0, -u[0], -u[1]), abs=1e-8)
        assert h(u) == pytest.approx(float(target(u)), abs=1e-8)
    hh = homogenize(h)
    for u in unit_directions(36, 0.3):
        assert hh(u) == pytest.approx(h(u), abs=1e-12)
    assert h((3.0, 4.0)) == pytest.approx(5 * h((0.6, 0.8)), rel=1e-12)


def test_homogenize_failure_carries_estimates():
    h = homogenize(NumericConvexFunction(lambda v: v[0] ** 2), budget=8)
    with pytest.raises(HomogenizationError) as e:
        h((1.0, 0.0))
    assert e.value.last > e.value.prev


def test_restrict_to_fan_examples():
    n = euclidean_norm()
    r = restrict_to_fan(n, p2_fan())
    assert r.values[:2] == (1.0, 1.0)
    assert r.values[2] == pytest.approx(math.sqrt(2), abs=1e-12)
    assert restrict_to_fan(n, p1p1_fan()).values == (1.0, 1.0, 1.0, 1.0)
    psi = PLFunction(p2_fan(), (Fraction(1), Fraction(2), Fraction(-1)))
    again = restrict_to_fan(psi, p1p1_fan().__class__(tuple(refine(p2_fan(), p1p1_fan()).rays)))
    for v in [(1, 3), (-5, 2), (-1, -7), (4, -1)]:
        assert again(v) == psi(v)


def _refinement_sequence():
    rays = set(P2_RAYS) | {(-1, 0), (0, -1)}
    fans = []
    for k in range(1, 6):
        rays |= {(a, b) for a in range(-2 * k, 2 * k + 1) for b in (-k, k)} - {(0, 0)}
        rays |= {(b, a) for a, b in rays}
        fans.append(fan_from_rays(rays))
    return fans


def test_sandwich_for_norm_and_constant_tends_to_one():
    n = euclidean_norm()
    prev = math.inf
    for fan in _refinement_sequence():
        C = sandwich_constant(fan)
        lo, hi = sandwich_ratios(n, fan, 64)
        assert lo >= 1 - 1e-12
        assert hi <= C + 1e-12
        assert growth(restrict_to_fan(n, fan)) <= C * growth(n) + 1e-12
        assert C <= prev
        prev = C
    assert prev < 1.01


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_sandwich_lower_bound_for_convex(data):
    psi, f = data.draw(convex_pl())
    fan = data.draw(st.sampled_from(_refinement_sequence()[:3] + [p2_fan(), p1p1_fan()]))
    r = restrict_to_fan(psi, fan)
    for u in unit_directions(64, 0.5):
        assert float(r(u)) >= f(u) - 1e-9


def test_sandwich_ratio_tends_to_one_under_refinement():
    # nonnegative convex but not rotation invariant
    psi = NumericConvexFunction(lambda v: max(0.0, v[0]) + 0.5 * math.hypot(*v))
    his = [sandwich_ratios(psi, f, 64)[1] for f in _refinement_sequence()]
    assert his[-1] < his[0]
    assert his[-1] < 1.01


def test_ronkin_examples():
    for v in [(0.0, 0.0), (1.5, -2.0), (-3.0, 0.25)]:
        assert ronkin("x1", v) == pytest.approx(-v[0], abs=1e-12)
    f = ronkin_function("1+x1+x2")
    assert f((0.0, 0.0)) > 0
    # Mahler measure of 1+x+y
    assert f((0.0, 0.0)) == pytest.approx(0.3230659472, abs=1e-3)
    assert f((0.0, 0.0)) <= (f((1.0, 0.0)) + f((-1.0, 0.0))) / 2 + 1e-9
    # Jensen: log|1 + x1| averages to 0 on the unit circle
    assert ronkin_report("1+x1", (0.0, 0.0), 512).value == pytest.approx(0.0, abs=1e-2)


def test_ronkin_rejects_tiny_grids():
    with pytest.raises(ValueError):
        ronkin("1+x1", (0, 0), 8)


def test_ronkin_zero_hit_is_perturbed_deterministically():
    # with n odd the node theta1 = pi lands on the zero of 1 + x1, once per theta2
    r1 = ronkin_report("1+x1", (0.0, 0.0), 17)
    assert r1.perturbed == 17
    assert math.isfinite(r1.value)
    assert ronkin_report("1+x1", (0.0, 0.0), 17) == r1
    assert ronkin_report("1+x1", (0.0, 0.0), 16).perturbed == 0


@pytest.mark.parametrize("P", ["1+x1+x2", "1+x1+x2+x1*x2", "1+x1^3+x2"])
def test_homogenized_ronkin_is_newton_support(P):
    h = homogenize(ronkin_function(P), tol=1e-5)
    N = newton_support(P)
    for u in unit_directions(64):
        assert h(u) == pytest.approx(float(N(u)), abs=1e-3)


def test_newton_support_examples():
    N = newton_support("1+x1+x2")
    assert {(1, 0), (0, 1), (-1, -1)} <= set(N.breakpoints())
    for v in [(1, 2), (-3, 1), (-2, -5)]:
        assert N(v) == max(0, -v[0], -v[1])
    assert newton_support("x1^2*x2^-3").is_linear()
    sq = newton_support("1+x1+x2+x1*x2")
    assert set(sq.breakpoints()) == {(1, 0), (0, 1), (-1, 0), (0, -1)}


def test_laurent_parse_and_print():
    P = LaurentPolynomial.parse("3*x1^2*x2^-1 - x2 + 1/2")
    assert P.terms == {(2, -1): 3, (0, 1): -1, (0, 0): Fraction(1, 2)}
    assert LaurentPolynomial.parse(str(P)) == P
    for bad in ["", "1+", "x3", "2**x1"]:
        with pytest.raises(ValueError):
            LaurentPolynomial.parse(bad)


@given(st.dictionaries(st.tuples(st.integers(-3, 3), st.integers(-3, 3)),
                       st.fractions(min_value=-9, max_value=9, max_denominator=5).filter(lambda x: x != 0),
                       min_size=1, max_size=6))
def test_laurent_round_trip(terms):
    P = LaurentPolynomial(terms)
    assert LaurentPolynomial.parse(str(P)) == P


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5)), min_size=3, max_size=12))
def test_newton_polygon_contains_points(pts):
    V = newton_polygon(pts)
    if len(V) < 3:
        return
    for p in pts:
        for a, b in zip(V, V[1:] + V[:1]):
            assert (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0


def test_json_round_trip():
    psi = PLFunction(p2_fan(), (Fraction(1, 3), Fraction(-2), Fraction(7, 5)))
    assert PLFunction.from_json(psi.to_json()) == psi
