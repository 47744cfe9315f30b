import math

import pytest
from hypothesis import given, settings, strategies as st

from elastweyl.material import (InvalidMaterialError, make_material, rayleigh_roots, sextic)


def test_make_material_validation():
    for bad in [(0, 1), (1, -1), (math.inf, 1), (math.nan, 1)]:
        with pytest.raises(InvalidMaterialError):
            make_material(*bad)


def test_material_properties():
    m = make_material(1.0, 3.0)
    assert m.alpha == pytest.approx(1 / 3)
    assert m.ct == 1.0 and m.cl == pytest.approx(math.sqrt(3))
    assert m.sv_range and m.cflv_range
    assert not make_material(1.0, 1.0).sv_range
    assert make_material(2.0, 6.0).alpha == m.alpha


def test_rayleigh_alpha_one_exact():
    rr = rayleigh_roots(1.0)
    exact = sorted([0.0] + [s * math.sqrt(4 + t * 2 * math.sqrt(2)) for s in (1, -1) for t in (1, -1)])
    assert [g for g, _ in rr.roots] == pytest.approx(exact, abs=1e-12)
    assert dict(rr.roots)[0.0] == 2
    assert rr.unit_interval_root is None


def _bisect(f, lo, hi, it=200):
    for _ in range(it):
        mid = 0.5 * (lo + hi)
        if f(lo) * f(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_rayleigh_unit_root_one_third_by_bisection():
    g = rayleigh_roots(0.333333).unit_interval_root
    ref = _bisect(lambda x: sextic(x, 0.333333), 0.5, 0.999)
    assert g == pytest.approx(ref, abs=1e-12)
    assert 0.9194 < g < 0.9195


def test_rayleigh_rejects_nonpositive_alpha():
    with pytest.raises(InvalidMaterialError):
        rayleigh_roots(-1.0)


@settings(max_examples=150, deadline=None)
@given(st.floats(1e-3, 3.0))
def test_rayleigh_roots_are_roots_and_symmetric(alpha):
    rr = rayleigh_roots(alpha)
    assert max(rr.residuals()) <= 1e-9
    gs = sorted(g for g, _ in rr.roots)
    assert gs == pytest.approx(sorted(-g for g in gs), abs=1e-12)
    total = sum(mu for _, mu in rr.roots)
    assert total in (2, 4, 6)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 0.999))
def test_unit_root_exists_below_one(alpha):
    # sextic(0) = -16(1 - alpha) < 0 and sextic(1) = 1 > 0
    g = rayleigh_roots(alpha).unit_interval_root
    assert g is not None and 0 < g < 1
