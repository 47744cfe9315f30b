"""Numerical kernels shared by the rest of the package.

Bessel functions of the first kind (integer order, real argument), a
Gauss-Kronrod adaptive integrator, bracketed root refinement and a real
cubic solver.  Everything here is pure and reentrant.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special
from scipy.optimize import brentq


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(RuntimeError):
    """An iterative method exhausted its budget before meeting tolerance."""


class BracketError(ValueError):
    """The supplied bracket does not enclose a sign change."""


# ---------------------------------------------------------------------------
# Bessel functions
# ---------------------------------------------------------------------------

def _check_order(m) -> int:
    if int(m) != m or m < 0:
        raise DomainError(f"Bessel order must be a nonnegative integer, got {m!r}")
    return int(m)


def bessel_j(m: int, x):
    """J_m(x) for integer m >= 0 and x >= 0 (scalar or array)."""
    m = _check_order(m)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(np.isnan(xa)):
        raise DomainError("bessel_j requires x >= 0")
    out = special.jv(m, xa)
    return float(out) if np.ndim(out) == 0 else out


def bessel_jp(m: int, x):
    """Derivative J_m'(x) = (J_{m-1}(x) - J_{m+1}(x)) / 2."""
    m = _check_order(m)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("bessel_jp requires x >= 0")
    out = 0.5 * (special.jv(m - 1, xa) - special.jv(m + 1, xa))
    return float(out) if np.ndim(out) == 0 else out


def bessel_derivs(m: int, x, order: int = 3) -> list[np.ndarray]:
    """[J_m, J_m', ..., J_m^(order)] at x via the binomial recurrence.

    d^p/dx^p J_m = 2^-p sum_j (-1)^j C(p, j) J_{m-p+2j}; negative orders are
    handled by J_{-n} = (-1)^n J_n, which ``scipy.special.jv`` already obeys.
    """
    xa = np.asarray(x, dtype=float)
    J = _bessel_block(m, xa, order)
    out = []
    for p in range(order + 1):
        acc = np.zeros_like(xa)
        for j in range(p + 1):
            acc = acc + (-1) ** j * math.comb(p, j) * J[m - p + 2 * j]
        out.append(acc / 2.0**p)
    return out


def _bessel_block(m: int, x: np.ndarray, width: int) -> dict[int, np.ndarray]:
    """J_n(x) for n = m - width .. m + width.

    The two highest orders come from ``scipy.special.jv``; the rest follow by
    downward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, which is stable in n.
    Points with x = 0 are filled directly.
    """
    top = m + width
    out = {top: special.jv(top, x), top - 1: special.jv(top - 1, x)}
    zero = x == 0
    safe = np.where(zero, 1.0, x)
    for n in range(top - 1, m - width, -1):
        out[n - 1] = (2.0 * n / safe) * out[n] - out[n + 1]
    if np.any(zero):
        for n in out:
            out[n] = np.where(zero, 1.0 if n == 0 else 0.0, out[n])
    return out


def bessel_ratio(m: int, x, depth: int | None = None):
    """J_{m+1}(x) / J_m(x) by backward evaluation of the continued fraction.

    Only meant for 0 < x < m, where J_m has no zeros and the fraction
    converges quickly; used when J_m itself underflows.
    """
    xa = np.asarray(x, dtype=float)
    if depth is None:
        depth = 40 + int(8 * math.sqrt(m + 1))
    t = np.zeros_like(xa)
    for j in range(depth, 0, -1):
        t = 1.0 / (2.0 * (m + j) / xa - t)
    return t


def bessel_pair_scaled(m: int, k) -> tuple[np.ndarray, np.ndarray]:
    """Return (J_m(k), k J_m'(k)) divided by E = sqrt(J_m^2 + J_m'^2).

    E is the positive, non-oscillating Bessel envelope, so the scaled pair is
    O(1) everywhere and keeps the sign structure of the raw pair.  In the deep
    evanescent region (k < m with J_m below 1e-200) the pair is computed from
    the continued-fraction ratio instead of raw values, which would underflow.
    """
    k = np.asarray(k, dtype=float)
    J = special.jv(m, k)
    J1 = special.jv(m + 1, k)
    # J_m' = (m/k) J_m - J_{m+1}; at k = 0 only m = 1 has a nonzero slope
    Jp = np.where(k > 0, m / np.where(k > 0, k, 1.0) * J - J1, 0.5 if m == 1 else 0.0)
    E = np.hypot(J, Jp)
    P = J / np.where(E > 0, E, 1.0)
    Q = k * Jp / np.where(E > 0, E, 1.0)
    tiny = (k < m) & (np.abs(J) < 1e-200)
    if np.any(tiny):
        kk = k[tiny]
        # J'/J = m/k - J_{m+1}/J_m
        lp = m / kk - bessel_ratio(m, kk)
        s = np.hypot(1.0, lp)
        P = P.copy()
        Q = Q.copy()
        P[tiny] = 1.0 / s
        Q[tiny] = kk * lp / s
    return P, Q


# ---------------------------------------------------------------------------
# Adaptive quadrature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KW = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])[[0, 1, 2, 3, 4, 5, 6]]


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.asarray(f(c + h * _NODES), dtype=float)
    if y.shape != (15,):
        y = np.broadcast_to(y, (15,)).astype(float)
    if not np.all(np.isfinite(y)):
        raise ConvergenceError(f"non-finite integrand value on [{a}, {b}]")
    k = h * float(_KW @ y)
    g = h * float(_GW @ y)
    return k, abs(k - g)


def integrate_adaptive(f: Callable, a: float, b: float, abs_tol: float = 1e-10,
                       breakpoints: Sequence[float] = (),
                       max_evals: int = 200_000) -> QuadratureResult:
    """Globally adaptive 7/15-point Gauss-Kronrod integration of ``f`` on [a, b].

    ``f`` must accept a numpy array of nodes.  Interior ``breakpoints`` (kinks,
    jumps, integrable endpoint behaviour) seed the initial partition.  The
    interval with the largest error estimate is bisected until the summed
    estimate drops below ``abs_tol``.
    """
    if b < a:
        raise DomainError("integrate_adaptive requires a <= b")
    if abs_tol <= 0:
        raise DomainError("abs_tol must be positive")
    pts = sorted({a, b, *[p for p in breakpoints if a < p < b]})
    heap: list[tuple[float, float, float, float]] = []
    total = 0.0
    err = 0.0
    evals = 0
    for lo, hi in zip(pts[:-1], pts[1:]):
        v, e = _gk15(f, lo, hi)
        evals += 15
        total += v
        err += e
        heapq.heappush(heap, (-e, lo, hi, v))
    if a == b:
        v, e = _gk15(f, a, b)
        return QuadratureResult(v, e, 15)
    while err > abs_tol:
        if evals + 30 > max_evals:
            raise ConvergenceError(
                f"tolerance {abs_tol:g} not met after {evals} evaluations (estimate {err:g})")
        ne, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            raise ConvergenceError("interval cannot be subdivided further")
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        evals += 30
        total += v1 + v2 - v
        err += e1 + e2 + ne
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
    # re-sum to shed accumulated cancellation in the running total
    total = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return QuadratureResult(total, err, evals)


# ---------------------------------------------------------------------------
# Root refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise BracketError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")


def refine_root(f: Callable[[float], float], bracket: Bracket, tol: float = 1e-12) -> float:
    """Refine a sign-change bracket to a root with Brent's method."""
    flo = f(bracket.lo)
    fhi = f(bracket.hi)
    if flo == 0.0:
        return bracket.lo
    if fhi == 0.0:
        return bracket.hi
    if flo * fhi > 0:
        raise BracketError(f"no sign change on [{bracket.lo}, {bracket.hi}]")
    return brentq(f, bracket.lo, bracket.hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)


# ---------------------------------------------------------------------------
# Cubic
# ---------------------------------------------------------------------------

def solve_cubic_real(p: float, q: float, r: float,
                     cluster_tol: float = 1e-8) -> list[tuple[float, int]]:
    """Real roots of s^3 + p s^2 + q s + r with multiplicities, ascending.

    The critical points split the line into monotone pieces; each piece with a
    sign change is refined by Brent's method.  A critical value that vanishes
    to round-off marks a double (or, at an inflection, triple) root.  Roots
    closer than ``cluster_tol`` (relative) are merged.
    """
    coeffs = (float(p), float(q), float(r))
    if not all(math.isfinite(c) for c in coeffs):
        raise DomainError("cubic coefficients must be finite")

    def c(s):
        return ((s + p) * s + q) * s + r

    def scale(s):
        return max(1.0, abs(s) ** 3, abs(p * s * s), abs(q * s), abs(r))

    bound = 1.0 + max(abs(p), abs(q), abs(r))
    disc = p * p - 3.0 * q
    crit: list[float] = []
    if disc > 0:
        sq = math.sqrt(disc)
        # numerically stable pair of roots of 3 s^2 + 2 p s + q
        t = -(p + math.copysign(sq, p)) / 3.0
        crit = sorted([t, q / (3.0 * t)] if t != 0 else [0.0, -2.0 * p / 3.0])
    elif disc == 0:
        crit = [-p / 3.0]

    roots: list[tuple[float, int]] = []
    zero_crit = set()
    for i, s in enumerate(crit):
        if abs(c(s)) <= 64 * np.finfo(float).eps * scale(s):
            mult = 3 if (len(crit) == 1) else 2
            roots.append((s, mult))
            zero_crit.add(i)

    knots = [-bound, *crit, bound]
    for i in range(len(knots) - 1):
        # a monotone piece ending on a recorded multiple root has no other zero
        if (i - 1) in zero_crit or i in zero_crit:
            continue
        lo, hi = knots[i], knots[i + 1]
        if c(lo) * c(hi) < 0:
            roots.append((brentq(c, lo, hi, xtol=1e-300,
                                 rtol=4 * np.finfo(float).eps, maxiter=4000), 1))

    roots.sort()
    merged: list[tuple[float, int]] = []
    for s, mlt in roots:
        if merged and abs(s - merged[-1][0]) <= cluster_tol * max(1.0, abs(s)):
            s0, m0 = merged[-1]
            merged[-1] = ((s0 * m0 + s * mlt) / (m0 + mlt), m0 + mlt)
        else:
            merged.append((s, mlt))
    return merged


def gamma_fn(x: float) -> float:
    """Euler Gamma function (libm tgamma)."""
    return math.gamma(x)
