import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toricdyn.equidist import (
    EquidistError,
    a_norm,
    cesaro_average,
    cesaro_table,
    convergence_report,
    cstar,
    log_grid,
    orbit_average_gap,
    smooth,
    symcase_check,
)
from toricdyn.lattice_fan import matvec, p2_fan
from toricdyn.support import NumericConvexFunction, PLFunction, euclidean_norm, newton_support

A = ((1, -2), (2, 1))
QUARTER = ((0, -1), (1, 0))
LINE = PLFunction(p2_fan(), (0, 0, 1))  # max(0, -v1, -v2)
# mean of max(0, -cos t, -sin t) over the circle: two arcs each contributing 1 + 1/sqrt2
CSTAR_LINE = (2 + math.sqrt(2)) / (2 * math.pi)

complex_mats = st.tuples(*[st.integers(-6, 6)] * 4).map(lambda e: ((e[0], e[1]), (e[2], e[3]))).filter(
    lambda M: (M[0][0] + M[1][1]) ** 2 < 4 * (M[0][0] * M[1][1] - M[0][1] * M[1][0]))


def test_line_psi_is_the_expected_function():
    for v in [(1, 0), (0, 1), (-1, -1), (-3, 2), (2, -5)]:
        assert LINE(v) == max(0, -v[0], -v[1])


def test_a_norm_examples():
    N = a_norm(QUARTER)
    assert np.allclose(N.P, np.eye(2))
    assert N(( 3, 4)) == pytest.approx(5)
    N = a_norm(A)
    assert N.modulus == pytest.approx(math.sqrt(5))
    # multiplication by 1+2i is already a scaled rotation
    assert np.allclose(N.P, np.eye(2))
    with pytest.raises(EquidistError, match="no rotation norm"):
        a_norm(((2, 1), (1, 1)))


@settings(deadline=None)
@given(complex_mats)
def test_a_norm_invariance(M):
    N = a_norm(M)
    V = np.array([(math.cos(t), math.sin(t)) for t in np.linspace(0, 2 * math.pi, 360, endpoint=False)])
    lhs = N.many(V @ np.array(M, dtype=float).T)
    rhs = N.modulus * N.many(V)
    assert np.max(np.abs(lhs - rhs) / rhs) < 1e-12
    P = N.P
    R = np.linalg.solve(P, np.array(M, dtype=float) @ P) / N.modulus
    assert np.allclose(R, [[math.cos(N.angle), -math.sin(N.angle)], [math.sin(N.angle), math.cos(N.angle)]])


def test_cesaro_examples():
    N = a_norm(A)
    for n in [1, 7, 50, 400]:
        assert cesaro_average(N, A, (2, -1), n) == pytest.approx(N((2, -1)), rel=1e-12)
    for v in [(1, 0), (-3, 2)]:
        assert cesaro_average(LINE, A, v, 1) == LINE(v)
    S = cesaro_average(LINE, A, (1, 0), 10**4)
    assert abs(S - CSTAR_LINE) < 1e-2


def test_exact_and_table_paths_agree():
    vs = [(1, 0), (3, -2), (-1, -4)]
    tab = cesaro_table(LINE, A, vs, 300)
    for i, v in enumerate(vs):
        for n in (1, 2, 17, 300):
            assert tab[n - 1, i] == pytest.approx(cesaro_average(LINE, A, v, n), rel=1e-10, abs=1e-12)


def test_cesaro_large_n_does_not_overflow():
    # |A^j v| exceeds the float range near j = 880
    S = cesaro_average(LINE, A, (1, 0), 2000)
    assert math.isfinite(S) and abs(S - CSTAR_LINE) < 0.05


@given(st.integers(1, 9), st.tuples(st.integers(-20, 20), st.integers(-20, 20)), st.integers(1, 60))
def test_cesaro_homogeneity(t, v, n):
    lhs = cesaro_average(LINE, A, (t * v[0], t * v[1]), n)
    assert lhs == pytest.approx(t * cesaro_average(LINE, A, v, n), rel=1e-12, abs=1e-12)


def test_cstar_examples():
    assert cstar(euclidean_norm(), A) == pytest.approx(1, abs=1e-12)
    c14, c15 = cstar(LINE, A, 2**14), cstar(LINE, A, 2**15)
    assert abs(c14 - c15) < 1e-8
    assert c15 == pytest.approx(CSTAR_LINE, abs=1e-8)
    assert cstar(PLFunction(p2_fan(), (0, 0, 0)).add_linear((3, -7)), A) == pytest.approx(0, abs=1e-12)


@settings(deadline=None)
@given(complex_mats, st.tuples(st.integers(-5, 5), st.integers(-5, 5)), st.fractions(0, 5, max_denominator=4))
def test_cstar_class_invariance_and_scaling(M, m, c):
    base = cstar(LINE, M, 2**12)
    assert cstar(LINE.add_linear(m), M, 2**12) == pytest.approx(base, abs=1e-9)
    assert cstar(LINE.scale(c), M, 2**12) == pytest.approx(float(c) * base, abs=1e-9)
    assert base > 0


def test_convergence_report_line_class():
    rep = convergence_report(LINE, A, directions=360, n_max=10**4)
    assert rep.cstar == pytest.approx(CSTAR_LINE, abs=1e-8)
    assert rep.n_grid[-1] == 10**4
    assert rep.final < 1e-2
    assert rep.decreasing and rep.passes(1e-2)
    norm = convergence_report(a_norm(A), A, directions=36, n_grid=[1, 10, 100])
    assert max(norm.errors) < 1e-12


def test_rational_rotation_negative_control():
    gap = orbit_average_gap(LINE, QUARTER, n=1200)
    # at v = (1,0) the orbit average is (0 + 0 + 1 + 1)/4
    assert gap >= CSTAR_LINE - 0.5 - 1e-9
    rep = convergence_report(LINE, QUARTER, directions=360, n_max=2000)
    assert not rep.passes(1e-2)
    assert orbit_average_gap(LINE, ((1, -1), (1, 0)), n=1200) > 1e-3


def test_symcase_examples():
    psi = NumericConvexFunction(lambda v: math.sqrt(1 + v[0] ** 2 + v[1] ** 2), "smooth-norm")
    terms = symcase_check(psi, euclidean_norm(), A, (1, 0), 20)
    w = (1, 0)
    for k, t in enumerate(terms, start=1):
        w = matvec(A, w)
        r = math.hypot(*w)
        # |A^k v| = 5^(k/2) here, so the bound is nearly attained; the
        # difference of two floats of size r carries an error of a few r eps
        assert 0 <= t <= (1 / (2 * r) + 4 * r * 2.0**-52) / 5 ** (k / 2)
    assert all(b < a for a, b in zip(terms, terms[1:]))
    assert symcase_check(LINE, LINE, A, (3, 1), 10) == [0.0] * 10
    ron = NumericConvexFunction(lambda v: float(np.logaddexp.reduce([0.0, -v[0], -v[1]])), "log-sum-exp")
    terms = symcase_check(ron, newton_support("1+x1+x2"), A, (1, 1), 30)
    assert all(0 <= t <= math.log(3) / 5 ** (k / 2) for k, t in enumerate(terms, start=1))
    assert terms[-1] < 1e-9


def test_grid_helpers():
    g = log_grid(10**4)
    assert g[0] == 10 and g[-1] == 10**4 and len(g) == 31
    assert smooth([1, 2, 3, 4], 2) == [1.5, 2.5, 3.5]
