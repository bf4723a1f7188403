"""Cesaro averages of support functions under monomial maps with complex
eigenvalues, and the constant they converge to.

For A with eigenvalues xi, conj(xi), the iterates A^j / |xi|^j are
P R(j theta) P^{-1}, so averaging psi(A^j v) / |xi|^j samples psi along an
ellipse by a rotation.  When theta / 2 pi is irrational these averages
converge to c* ||v||_A, c* being the mean of psi over the unit ellipse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .lattice_fan import as_matrix, matmul, matvec, mdet
from .support import PLFunction, unit_directions


class EquidistError(ValueError):
    pass


@dataclass(frozen=True)
class ANorm:
    A: tuple
    P: np.ndarray = field(repr=False)
    modulus: float
    angle: float

    def __call__(self, v) -> float:
        w = np.linalg.solve(self.P, np.asarray(v, dtype=float))
        return float(np.hypot(w[0], w[1]))

    def many(self, vs: np.ndarray) -> np.ndarray:
        w = np.linalg.solve(self.P, vs.T)
        return np.hypot(w[0], w[1])


def a_norm(A) -> ANorm:
    A = as_matrix(A)
    tr, d = A[0][0] + A[1][1], mdet(A)
    disc = tr * tr - 4 * d
    if disc >= 0:
        raise EquidistError("no rotation norm: A has real eigenvalues")
    a, b = tr / 2, math.sqrt(-disc) / 2  # xi = a + i b, b > 0
    # eigenvector v = p + i q for xi; then A [p | -q] = [p | -q] [[a, -b], [b, a]]
    if A[0][1] != 0:
        p, q = (A[0][1], a - A[0][0]), (0.0, b)
    else:
        p, q = (a - A[1][1], A[1][0]), (b, 0.0)
    P = np.array([[p[0], -q[0]], [p[1], -q[1]]], dtype=float)
    # normalize to |det P| = 1; the sign of P is irrelevant
    s = math.sqrt(abs(np.linalg.det(P)))
    P = P / s
    if P[0][0] < 0 or (P[0][0] == 0 and P[1][0] < 0):
        P = -P
    return ANorm(A, P, math.sqrt(d), math.atan2(b, a))


def _vectorized(psi) -> Callable[[np.ndarray], np.ndarray]:
    """Evaluate a PL function (or a scalar callable) at rows of an array."""
    if isinstance(psi, PLFunction):
        fan = psi.fan
        angles = np.array([math.atan2(r[1], r[0]) % (2 * math.pi) for r in fan.rays])
        grads = np.array([[float(x) for x in psi.gradient(i)] for i in range(len(fan))])

        def f(vs):
            th = np.arctan2(vs[:, 1], vs[:, 0]) % (2 * math.pi)
            idx = (np.searchsorted(angles, th, side="right") - 1) % len(fan)
            return np.einsum("ij,ij->i", grads[idx], vs)

        return f
    if hasattr(psi, "many"):
        return psi.many
    return lambda vs: np.array([psi(tuple(v)) for v in vs])


def _scaled_powers(A, n: int):
    """A^j / |xi|^j for j < n, each correctly rounded from exact integers."""
    d = mdet(A)
    sq = math.sqrt(d)
    M = ((1, 0), (0, 1))
    out = np.empty((n, 2, 2))
    for j in range(n):
        den = d ** (j // 2)
        extra = sq if j % 2 else 1.0
        out[j] = [[float(Fraction(M[r][c], den)) / extra for c in range(2)] for r in range(2)]
        M = matmul(M, A)
    return out


def cesaro_average(psi, A, v, n: int) -> float:
    """S_n(v) = (1/n) sum_{j<n} psi(A^j v) / |xi|^j."""
    A = as_matrix(A)
    if n < 1:
        raise EquidistError("n must be positive")
    mod = math.sqrt(mdet(A))
    if all(isinstance(x, int) for x in v) and isinstance(psi, PLFunction) and psi.exact:
        # exact lattice iterates, one correctly rounded division per term
        d = mdet(A)
        total, w = 0.0, tuple(v)
        for j in range(n):
            val = Fraction(psi(w)) / d ** (j // 2)
            total += float(val) / (mod if j % 2 else 1.0)
            w = matvec(A, w)
        return total / n
    return float(cesaro_table(psi, A, [v], n)[-1, 0])


def cesaro_table(psi, A, vs: Sequence, n: int) -> np.ndarray:
    """Array S[k, i] = S_{k+1}(vs[i]) for k < n."""
    A = as_matrix(A)
    f = _vectorized(psi)
    V = np.asarray(vs, dtype=float)
    powers = _scaled_powers(A, n)
    acc = np.zeros(len(V))
    out = np.empty((n, len(V)))
    for j in range(n):
        acc += f(V @ powers[j].T)
        out[j] = acc / (j + 1)
    return out


def cstar(psi, A, quad_n: int = 2**14) -> float:
    """Mean of psi over the unit ellipse {P u : |u| = 1} by the midpoint rule."""
    N = a_norm(A)
    th = (np.arange(quad_n) + 0.5) * (2 * math.pi / quad_n)
    U = np.stack([np.cos(th), np.sin(th)], axis=1)
    return float(np.mean(_vectorized(psi)(U @ N.P.T)))


def smooth(values: Sequence[float], window: int = 10) -> list[float]:
    out = []
    for i in range(len(values) - window + 1):
        out.append(sum(values[i:i + window]) / window)
    return out


@dataclass
class ConvergenceReport:
    cstar: float
    n_grid: list
    errors: list
    final: float
    decreasing: bool
    smoothed: list = field(repr=False)

    def passes(self, tol: float) -> bool:
        return self.final < tol and self.decreasing


def log_grid(n_max: int, per_decade: int = 10, start: int = 10) -> list[int]:
    k = math.log10(n_max / start) * per_decade
    pts = np.logspace(math.log10(start), math.log10(n_max), int(round(k)) + 1)
    return sorted({int(round(x)) for x in pts} | {n_max})


def convergence_report(psi, A, directions: int = 360, n_grid: Sequence[int] | None = None,
                       quad_n: int = 2**14, window: int = 10, n_max: int = 10**4) -> ConvergenceReport:
    """e_n = max over unit directions of |S_n(v) - c* ||v||_A|.

    The default grid has ten log-spaced points per decade up to ``n_max``.
    The trend test averages e_n over ``window`` consecutive grid points
    and asks the smoothed sequence to be nonincreasing."""
    n_grid = sorted(n_grid or log_grid(n_max))
    N = a_norm(A)
    c = cstar(psi, A, quad_n)
    V = np.array(unit_directions(directions))
    table = cesaro_table(psi, A, V, n_grid[-1])
    target = c * N.many(V)
    errs = [float(np.max(np.abs(table[n - 1] - target))) for n in n_grid]
    sm = smooth(errs, window) if len(errs) >= window else list(errs)
    dec = all(b <= a for a, b in zip(sm, sm[1:]))
    return ConvergenceReport(c, list(n_grid), errs, errs[-1], dec, sm)


def orbit_average_gap(psi, A, directions: int = 360, n: int = 1200, quad_n: int = 2**14) -> float:
    """max |S_n(v) - c* ||v||_A| for a matrix of finite order up to scale
    (the negative control): the averages settle on finite orbit means."""
    A = as_matrix(A)
    d = mdet(A)
    tr = A[0][0] + A[1][1]
    if tr * tr - 4 * d >= 0:
        raise EquidistError("no rotation norm: A has real eigenvalues")
    V = np.array(unit_directions(directions))
    N = a_norm(A)
    c = cstar(psi, A, quad_n)
    table = cesaro_table(psi, A, V, n)
    return float(np.max(np.abs(table[-1] - c * N.many(V))))


def symcase_check(psi, psi_bar, A, v, n: int) -> list[float]:
    """(psi - psi_bar)(A^k v) / |xi|^k for k = 1..n, with exact A^k v."""
    A = as_matrix(A)
    mod = math.sqrt(mdet(A))
    w = tuple(v)
    out = []
    for k in range(1, n + 1):
        w = matvec(A, w)
        x = (float(w[0]), float(w[1]))
        out.append((psi(x) - psi_bar(x)) / mod**k)
    return out
