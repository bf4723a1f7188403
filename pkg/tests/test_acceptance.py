"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line in ``RESULTS``; the lines are printed
at the end of the pytest run (see conftest.py) and also when this file is
run as a script.
"""

import contextlib
import io
import json
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from toricdyn import act, equidist, oracle, support, surface, tmap, trop
from toricdyn.cli import main as cli_main
from toricdyn.lattice_fan import P2_RAYS, fan_from_rays, matpow, smooth_resolution

A = ((1, -2), (2, 1))
LINE = support.PLFunction(fan_from_rays(P2_RAYS), (0, 0, 1))
RESULTS: dict[int, str] = {}


def record(k: int, ok: bool, detail: str) -> None:
    RESULTS[k] = f"ACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} - {detail}"


def _cli_json(*args):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        rc = cli_main(list(args))
    return rc, json.loads(buf.getvalue())


def test_1_flagship_invariants():
    t = time.perf_counter()
    rc, rep = _cli_json("analyze", "g.m[1,-2;2,1]")
    elapsed = time.perf_counter() - t
    prof = rep["profile"]
    # poles C_{A^-1 tau}, tau a ray of the plane
    poles = {(1, -2), (2, 1), (-3, 1)}
    ind = prof["ind"]
    checks = {
        "rho": prof["rho"] == 5,
        "dtop": prof["dtop"] == 5,
        "A_f": prof["trop_linear"] == [list(r) for r in A],
        "stability": rep["stability"]["verdict"] == "certified_stable",
        "exc": len(prof["exc"]) == 3,
        "ind": {tuple(p["ray"]) for p in ind} == poles and all(p["k"] == 1 and p["w"] == "1" for p in ind),
        "time": elapsed < 1.0,
    }
    bad = [k for k, v in checks.items() if not v]
    record(1, rc == 0 and not bad, f"analyze g.m[1,-2;2,1] in {elapsed:.3f}s; failing: {bad or 'none'}")
    assert rc == 0 and not bad


def test_2_degrees_match_oracle():
    t = time.perf_counter()
    words = ["m[1,-2;2,1]", "g", "g.m[1,-2;2,1]", "m[1,-2;2,1].g"]
    rows = []
    for text in words:
        w = tmap.parse_word(text)
        ours = [int(d) for d in act.degree_sequence(w, 5).degrees]
        cert = oracle.oracle_degrees(tmap.oracle_maps(w), 5)
        rows.append((text, ours, list(cert.degrees), cert.agree))
    elapsed = time.perf_counter() - t
    ok = all(o == s and agree for _, o, s, agree in rows) and elapsed < 300
    record(2, ok, "; ".join(f"{t}: {o}" for t, o, _, _ in rows) + f" ({elapsed:.1f}s)")
    assert ok, rows


def _random_matrix(rng):
    while True:
        M = tuple(tuple(int(x) for x in r) for r in rng.integers(-4, 5, size=(2, 2)))
        d = M[0][0] * M[1][1] - M[0][1] * M[1][0]
        if 1 <= abs(d) <= 10:
            return M


def _criterion_3_matrices():
    rng = np.random.default_rng(0)
    return [_random_matrix(rng) for _ in range(5)]


@pytest.mark.xfail(strict=True, reason="deg(h^8)^(1/8) carries the factor C^(1/8) of deg(h^n) ~ C rho^n; "
                                       "for [[0,1],[4,2]] the exact degree 19456 is 6.2% above rho^8")
def test_3_monomial_dynamical_degree():
    rows, ok = [], True
    for M in _criterion_3_matrices():
        w = tmap.word(tmap.Monomial(M))
        deg8 = act.degree_sequence(w, 8).degrees[-1]
        rho = max(abs(np.linalg.eigvals(np.array(M, dtype=float))))
        err = abs(float(deg8) ** (1 / 8) / rho - 1)
        dt = tmap.profile(w).dtop
        good = err < 0.05 and dt == abs(M[0][0] * M[1][1] - M[0][1] * M[1][0])
        ok &= good
        rows.append(f"{M}: {err:.3f}{'' if good else ' (over)'}")
    record(3, ok, "relative error of deg(h^8)^(1/8): " + ", ".join(rows))
    assert ok


def test_3_supplement_degrees_are_exact_and_converge():
    # the same five matrices: class degrees equal the symbolic degrees,
    # and the n-th root does approach the spectral radius
    for M in _criterion_3_matrices():
        w = tmap.word(tmap.Monomial(M))
        degs = act.degree_sequence(w, 32).degrees
        assert [int(d) for d in degs[:8]] == [oracle.monomial_map(matpow(M, n)).degree for n in range(1, 9)]
        rho = max(abs(np.linalg.eigvals(np.array(M, dtype=float))))
        assert abs(float(degs[-1]) ** (1 / 32) / rho - 1) < 0.05
        assert abs(float(degs[-1]) ** (1 / 32) / rho - 1) < abs(float(degs[7]) ** (1 / 8) / rho - 1) + 1e-12


def test_4_rotation_dichotomy():
    n = 10**4
    cases = [(((0, -1), (1, 0)), "rational(1/4)"), (((1, -1), (1, 0)), "rational(1/6)"),
             (A, "irrational_certified")]
    out, ok = [], True
    for M, want in cases:
        v = trop.rotation_is_rational_linear(M)
        est, err = trop.rotation_number(trop.TropMap.linear(M), n)
        exact = float(v.value) if v.value is not None else math.atan2(2, 1) / (2 * math.pi)
        gap = min(abs(est - exact), 1 - abs(est - exact))
        good = str(v) == want and gap <= 1 / n and err == 1 / n
        ok &= good
        out.append(f"{str(v)} est {est:.6f}")
    record(4, ok, "; ".join(out))
    assert ok


def test_5_growth_exponent():
    rep = trop.growth_exponent(trop.TropMap.linear(A), 50, directions=360)
    decay = trop.ram_decay(trop.TropMap.linear(A), (1, 0), 2.3, 40)
    ok = rep.max_deviation < 0.02 and decay[-1][2] < 1e-3
    record(5, ok, f"max deviation {rep.max_deviation:.4f}; Ram/2.3^40 = {decay[-1][2]:.2e}")
    assert ok


def test_6_equidistribution():
    conv = equidist.convergence_report(LINE, A, directions=360, n_max=10**4)
    c14, c15 = equidist.cstar(LINE, A, 2**14), equidist.cstar(LINE, A, 2**15)
    psi = support.NumericConvexFunction(lambda v: math.sqrt(1 + v[0] ** 2 + v[1] ** 2))
    terms = equidist.symcase_check(psi, support.euclidean_norm(), A, (1, 0), 20)
    gap = equidist.orbit_average_gap(LINE, ((0, -1), (1, 0)), n=1200)
    checks = {
        "e_n": conv.passes(1e-2),
        "cstar": abs(c14 - c15) < 1e-8,
        "symcase": abs(terms[-1]) < 1e-8 and all(abs(b) < abs(a) for a, b in zip(terms, terms[1:])),
        "negative control": gap > 1e-2,
    }
    bad = [k for k, v in checks.items() if not v]
    record(6, not bad, f"e_10^4 = {conv.final:.2e}, |dc*| = {abs(c14 - c15):.1e}, term_20 = {terms[-1]:.1e}, "
                       f"quarter-rotation gap {gap:.4f}; failing: {bad or 'none'}")
    assert not bad


def test_7_support_function_suite():
    worst = 0.0
    for P in ["1+x1+x2", "1+x1+x2+x1*x2", "1+x1^3+x2"]:
        h = support.homogenize(support.ronkin_function(P), tol=1e-5)
        N = support.newton_support(P)
        worst = max(worst, max(abs(h(u) - float(N(u))) for u in support.unit_directions(64)))
    X = surface.p2()
    d1 = surface.degree(surface.ExternalDivisor(X, (1.0, 1.0, 1.0)))
    d2 = surface.degree(surface.ExternalDivisor(X, (1.0, 1.0, math.sqrt(2))))
    ok = worst < 1e-3 and abs(d1 - 3) < 1e-9 and abs(d2 - (2 + math.sqrt(2))) < 1e-9
    record(7, ok, f"max |homogenized Ronkin - Newton| = {worst:.1e}; degrees {d1:.12g}, {d2:.12g}")
    assert ok


def test_8_intersection_properties(monkeypatch):
    built = []
    orig = surface.ToricSurface.__post_init__

    def spy(self):
        orig(self)
        built.append(self)

    monkeypatch.setattr(surface.ToricSurface, "__post_init__", spy)
    rng = random.Random(8)

    # balance on random Newton polygons
    n_bal = 0
    while n_bal < 20:
        pts = [(rng.randint(-4, 4), rng.randint(-4, 4)) for _ in range(rng.randint(3, 8))]
        try:
            _, numbers = surface.curve_class_from_newton(pts)
        except surface.SurfaceError:
            continue
        assert surface.balance(numbers) == (0, 0)
        n_bal += 1

    def rand_ray():
        while True:
            v = (rng.randint(-6, 6), rng.randint(-6, 6))
            if v != (0, 0):
                return v

    def rand_class():
        rays = list(dict.fromkeys(list(P2_RAYS) + [rand_ray() for _ in range(rng.randint(0, 3))]))
        fan = fan_from_rays(rays)
        vals = tuple(Fraction(rng.randint(-12, 12), rng.randint(1, 4)) for _ in fan.rays)
        return act.make_class(support.PLFunction(fan, vals))

    def rand_mat():
        while True:
            M = tuple(tuple(rng.randint(-3, 3) for _ in range(2)) for _ in range(2))
            if M[0][0] * M[1][1] - M[0][1] * M[1][0] != 0:
                return M

    # projection formula under five monomial words
    words = [tmap.word(*[tmap.Monomial(rand_mat()) for _ in range(rng.randint(1, 3))]) for _ in range(5)]
    proj = 0
    for w in words:
        for _ in range(10):
            c1, c2 = rand_class(), rand_class()
            lhs = act.pairing(act.pullback_word(c1, w, 10**6), c2)
            rhs = act.pairing(c1, act.pushforward_word(c2, w, 10**6))
            assert lhs == rhs
            proj += 1

    # pi_* pi^* = id and isometry under fan dominations
    dom = 0
    for _ in range(10):
        Y = surface.ToricSurface(smooth_resolution(fan_from_rays(list(P2_RAYS) + [rand_ray() for _ in range(2)])))
        X = surface.ToricSurface(smooth_resolution(fan_from_rays(list(Y.rays) + [rand_ray() for _ in range(3)])))
        D1 = surface.ExternalDivisor(Y, tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in Y.rays))
        D2 = surface.ExternalDivisor(Y, tuple(Fraction(rng.randint(-9, 9), rng.randint(1, 3)) for _ in Y.rays))
        assert surface.pushforward_pi(surface.pullback_pi(D1, X), Y) == D1
        assert surface.intersect(surface.pullback_pi(D1, X), surface.pullback_pi(D2, X)) == surface.intersect(D1, D2)
        dom += 1

    # fans met along the way in class iteration
    for c in act.degree_sequence(tmap.parse_word("g.m[1,-2;2,1]"), 4, keep_classes=True).classes:
        act.pairing(c, c)

    bad_sum = [X for X in built if sum(X.self_int) != 3 * len(X) - 12]
    ok = not bad_sum and n_bal == 20 and proj == 50 and dom == 10
    record(8, ok, f"sum a_i = 3d-12 on {len(built)} surfaces; {n_bal} balance, {proj} projection, "
                  f"{dom} domination checks")
    assert ok


def test_9_unstable_word_detected():
    w = tmap.parse_word("g.m[2,0;0,2]")
    verdict = tmap.is_internally_stable(w, 20, tmap.profile(w))
    # (f^2)^*[line] from the oracle against (f^*)^2[line] from the class action
    f_star_sq = act.pullback_word(act.pullback_word(act.line_class(), w), w).degree
    oracle_deg2 = oracle.oracle_degrees(tmap.oracle_maps(w), 2).degrees[1]
    ok = verdict.kind == "unstable" and verdict.n is not None and f_star_sq != oracle_deg2
    record(9, ok, f"verdict {verdict}; (f*)^2[line] degree {f_star_sq} vs deg(f^2) = {oracle_deg2}")
    assert ok


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
