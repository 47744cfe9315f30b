import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from elastweyl.numerics import (Bracket, BracketError, ConvergenceError, DomainError,
                                bessel_derivs, bessel_j, bessel_jp, bessel_pair_scaled,
                                bessel_ratio, integrate_adaptive, refine_root, solve_cubic_real)


def series_j(m, x, terms=80):
    """Power series of J_m, used as an independent oracle for moderate x."""
    with mpmath.workdps(50):
        return float(mpmath.nsum(lambda k: (-1) ** k * (x / 2) ** (2 * k + m)
                                 / (mpmath.factorial(k) * mpmath.factorial(k + m)), [0, terms]))


@pytest.mark.parametrize("m", [0, 1, 2, 5, 12])
@pytest.mark.parametrize("x", [0.0, 0.3, 1.0, 4.2, 9.9, 17.5])
def test_bessel_j_matches_power_series(m, x):
    assert bessel_j(m, x) == pytest.approx(series_j(m, x), abs=1e-13)


def test_bessel_j_rejects_negative_argument_and_order():
    with pytest.raises(DomainError):
        bessel_j(0, -1.0)
    with pytest.raises(DomainError):
        bessel_jp(1, np.array([1.0, -0.5]))


def test_first_zero_of_j0_by_series_bisection():
    lo, hi = 2.0, 3.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if series_j(0, lo) * series_j(0, mid) <= 0:
            hi = mid
        else:
            lo = mid
    assert bessel_j(0, lo) == pytest.approx(0.0, abs=1e-14)
    assert lo == pytest.approx(2.404825557695773, abs=1e-14)


@pytest.mark.parametrize("m", [0, 1, 3, 40])
def test_bessel_derivs_against_mpmath(m):
    x = np.array([0.7, 3.3, 11.0, 55.0])
    got = bessel_derivs(m, x, 3)
    for p in range(4):
        ref = [float(mpmath.besselj(m, xx, derivative=p)) for xx in x]
        np.testing.assert_allclose(got[p], ref, atol=1e-13)


def test_bessel_derivs_at_origin():
    d = bessel_derivs(1, np.array([0.0]), 3)
    assert d[0][0] == 0.0 and d[1][0] == pytest.approx(0.5)


def test_bessel_ratio_deep_evanescent():
    m, x = 300, np.array([20.0, 100.0])
    ref = [float(mpmath.besselj(m + 1, xx) / mpmath.besselj(m, xx)) for xx in x]
    np.testing.assert_allclose(bessel_ratio(m, x), ref, rtol=1e-13)


def test_bessel_pair_scaled_is_unit_and_survives_underflow():
    k = np.array([1e-3, 0.5, 30.0, 1000.0])
    P, Q = bessel_pair_scaled(400, k)
    assert np.all(np.isfinite(P)) and np.all(np.isfinite(Q))
    # P = J/E with E = sqrt(J^2 + J'^2); Q = k J'/E, so P^2 + (Q/k)^2 = 1
    np.testing.assert_allclose(P**2 + (Q / k) ** 2, 1.0, rtol=1e-12)


def test_integrate_adaptive_closed_forms():
    assert integrate_adaptive(lambda x: x, 0, 1).value == pytest.approx(0.5, abs=1e-15)
    r = integrate_adaptive(lambda x: 2 * x / (1 + x * x), 0, 1)
    assert r.value == pytest.approx(math.log(2), abs=1e-14)
    r = integrate_adaptive(np.sqrt, 0, 1, abs_tol=1e-12)
    assert abs(r.value - 2 / 3) <= 1e-12
    assert r.error_estimate >= 0 and r.evaluations % 15 == 0


def test_integrate_adaptive_breakpoint_and_empty_interval():
    f = lambda x: np.abs(x - 0.3)
    r = integrate_adaptive(f, 0, 1, breakpoints=(0.3,))
    assert r.value == pytest.approx(0.5 * (0.09 + 0.49), abs=1e-15)
    e = integrate_adaptive(f, 0.4, 0.4)
    assert e.value == 0.0


def test_integrate_adaptive_budget():
    with pytest.raises(ConvergenceError):
        integrate_adaptive(lambda x: np.sin(1 / np.maximum(x, 1e-300)), 0, 1, abs_tol=1e-15,
                           max_evals=300)


def test_midpoint_rule_oracle_for_smooth_integrand():
    f = lambda x: np.exp(-x) * np.cos(3 * x)
    n = 200000
    xs = (np.arange(n) + 0.5) / n * 2.0
    mid = f(xs).sum() * 2.0 / n
    assert integrate_adaptive(f, 0, 2).value == pytest.approx(mid, abs=1e-9)


def test_refine_root_and_bracket_errors():
    r = refine_root(lambda x: x * x - 2, Bracket(1, 2), 1e-14)
    assert r == pytest.approx(math.sqrt(2), abs=1e-14)
    with pytest.raises(BracketError):
        refine_root(lambda x: x * x + 1, Bracket(-1, 1), 1e-12)
    with pytest.raises(ValueError):
        Bracket(2, 1)


def test_solve_cubic_known_cases():
    assert solve_cubic_real(0, 0, 0) == [(0.0, 3)]
    roots = solve_cubic_real(-6, 11, -6)
    assert [mu for _, mu in roots] == [1, 1, 1]
    np.testing.assert_allclose([r for r, _ in roots], [1, 2, 3], atol=1e-14)
    roots = solve_cubic_real(-2, 1, 0)
    assert roots[0] == (0.0, 1) and roots[1][1] == 2
    assert roots[1][0] == pytest.approx(1.0, abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3))
def test_solve_cubic_matches_numpy_roots(rts):
    r1, r2, r3 = sorted(rts)
    if min(r2 - r1, r3 - r2) < 1e-3:
        return
    p, q, r = -(r1 + r2 + r3), r1 * r2 + r1 * r3 + r2 * r3, -r1 * r2 * r3
    got = [x for x, mu in solve_cubic_real(p, q, r) for _ in range(mu)]
    ref = np.sort(np.roots([1, p, q, r]).real)
    np.testing.assert_allclose(got, ref, atol=1e-9)


def test_solve_cubic_tiny_root():
    roots = solve_cubic_real(-4.0, 3.0, -3.0 * 2.7e-288)
    assert roots[0][0] == pytest.approx(2.7e-288, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(0.1, 10))
def test_solve_cubic_single_real_root(a, b):
    # (s - a)(s^2 + b) has exactly one real root
    p, q, r = -a, b, -a * b
    roots = solve_cubic_real(p, q, r)
    assert len(roots) == 1 and roots[0][0] == pytest.approx(a, abs=1e-9)
