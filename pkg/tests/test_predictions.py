import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from elastweyl.material import make_material, rayleigh_roots
from elastweyl.numerics import DomainError
from elastweyl.predictions import (Absent, NoUnitRootError, WeylCoefficients, a26_as_printed,
                                   assemble_predictions, beta_dirichlet, beta_free,
                                   ms_limit_heat_coeffs, sv_counting_coeffs, tauberian,
                                   thm31_heat_coeffs)
from elastweyl.spectrum import rectangle, unit_disk

SQRT_PI = math.sqrt(math.pi)


def mp_beta_dir(alpha):
    with mpmath.workdps(30):
        a = mpmath.mpf(alpha)
        sa = mpmath.sqrt(a)
        f = lambda x: mpmath.atan(mpmath.sqrt((1 - a / x**2) * (1 / x**2 - 1)))
        return float(mpmath.re(-1 - sa - 4 / mpmath.pi * mpmath.quad(f, [sa, 1])))


def mp_beta_free(alpha, gamma):
    with mpmath.workdps(30):
        a = mpmath.mpf(alpha)
        sa = mpmath.sqrt(a)
        f = lambda x: mpmath.atan((2 - 1 / x**2) ** 2
                                  / (4 * mpmath.sqrt((1 - a / x**2) * (1 / x**2 - 1))))
        knee = 1 / mpmath.sqrt(2)
        pts = [sa, knee, 1] if sa < knee else [sa, 1]
        return float(mpmath.re(4 / mpmath.mpf(gamma) - 3 + sa + 4 / mpmath.pi * mpmath.quad(f, pts)))


@pytest.mark.parametrize("alpha", [0.05, 1 / 3, 0.5, 0.9, 0.999])
def test_beta_dirichlet_against_mpmath(alpha):
    assert beta_dirichlet(alpha) == pytest.approx(mp_beta_dir(alpha), abs=1e-9)


@pytest.mark.parametrize("alpha", [0.1, 1 / 3, 0.6, 0.9])
def test_beta_free_against_mpmath(alpha):
    g = rayleigh_roots(alpha).unit_interval_root
    assert beta_free(alpha, g) == pytest.approx(mp_beta_free(alpha, g), abs=1e-9)


def test_beta_reference_values():
    assert beta_dirichlet(1.0) == -2.0
    assert beta_dirichlet(1 / 3) == pytest.approx(-1.7942167790, abs=1e-9)
    assert beta_free(0.9, rayleigh_roots(0.9).unit_interval_root) == pytest.approx(7.011152537, abs=1e-8)


def test_beta_domain_errors():
    for a in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            beta_dirichlet(a)
    assert beta_free(1.0, 0.0) == math.inf


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-4, 1.0))
def test_beta_dirichlet_bounds(alpha):
    # integrand lies in [0, pi/2], so -3 + sqrt(a) <= beta <= -1 - sqrt(a)
    b = beta_dirichlet(alpha)
    sa = math.sqrt(alpha)
    assert -3 + sa - 1e-12 <= b <= -1 - sa + 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.99))
def test_beta_free_exceeds_rayleigh_term(alpha):
    g = rayleigh_roots(alpha).unit_interval_root
    assert beta_free(alpha, g) >= 4 / g - 3 + math.sqrt(alpha) - 1e-12


def test_tauberian_map():
    c, d = tauberian(2.0, -1.0, 2)
    assert c == 2.0 and d == pytest.approx(-SQRT_PI / 2)
    c3, d3 = tauberian(1.0, 1.0, 3)
    assert c3 == pytest.approx(math.gamma(2.5)) and d3 == 1.0


def test_thm31_reduces_to_ms_limit_at_alpha_one():
    mat = make_material(2.0, 2.0)
    for bc in ("dir", "free"):
        t = thm31_heat_coeffs(mat, math.pi, 2 * math.pi, 2, bc)
        m = ms_limit_heat_coeffs(2.0, math.pi, 2 * math.pi, 2, bc)
        assert t.c == pytest.approx(m.c) and t.d == pytest.approx(m.d)
    t = thm31_heat_coeffs(make_material(1, 1), math.pi, 2 * math.pi, 2, "dir")
    assert t.d == pytest.approx(-SQRT_PI / 2)


def test_sv_leading_coefficient_and_dirichlet_alpha_one():
    w = sv_counting_coeffs(make_material(1, 1), math.pi, 2 * math.pi, "dir")
    assert w.a == pytest.approx(0.5) and w.b == pytest.approx(-1.0)


def test_sv_free_needs_unit_root():
    with pytest.raises(NoUnitRootError):
        sv_counting_coeffs(make_material(1, 1), math.pi, 2 * math.pi, "free")


def test_a26_is_twice_tauberian_image_at_alpha_one():
    g = math.sqrt(4 - 2 * math.sqrt(2))
    mat = make_material(1, 1)
    a26 = a26_as_printed(mat, math.pi, 2 * math.pi, g)
    sv = sv_counting_coeffs(mat, math.pi, 2 * math.pi, "free", gamma=g)
    assert a26.d == pytest.approx(2 * math.gamma(1.5) * sv.b, rel=1e-12)


def test_assemble_dirichlet_alpha_one_all_equal():
    ps = assemble_predictions(make_material(1, 1), unit_disk(), "dir")
    d = ps.d_values()
    assert set(d) == {"SV", "Thm3_1", "MS_limit"}
    for v in d.values():
        assert v == pytest.approx(-SQRT_PI / 2, abs=1e-12)
    assert isinstance(ps.entries["SV_A26_as_printed"], Absent)


def test_assemble_free_alpha_one_family():
    ps = assemble_predictions(make_material(1, 1), unit_disk(), "free", "family")
    d = ps.d_values()
    assert d["SV[gamma=+1.082392]"] == pytest.approx(0.7513, abs=1e-4)
    assert d["Thm3_1"] == pytest.approx(SQRT_PI / 2)
    assert any("half of the printed value" in n for n in ps.notes)
    assert isinstance(ps.entries["SV[gamma=+0.000000]"], Absent)


def test_assemble_free_missing_unit_root_is_absent():
    ps = assemble_predictions(make_material(1, 1), unit_disk(), "free", "unit")
    assert isinstance(ps.entries["SV"], Absent)
    assert "no Rayleigh root" in ps.entries["SV"].reason
    assert "Thm3_1" in ps.d_values()


def test_assemble_alpha_above_one():
    ps = assemble_predictions(make_material(1, 0.5), unit_disk(), "dir")
    assert isinstance(ps.entries["SV"], Absent)
    assert isinstance(ps.entries["Thm3_1"], WeylCoefficients)


def test_assemble_explicit_gamma_and_domain_volumes():
    dom = rectangle(2.0, 3.0)
    ps = assemble_predictions(make_material(1, 3), dom, "free", 0.9)
    assert ps.entries["SV"].a == pytest.approx((1 / 3 + 1) * 6 / (4 * math.pi))
    assert ps.to_dict()["config"]["domain"]["vol_bdry"] == 10.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.0), st.floats(0.2, 5.0))
def test_predictions_scale_with_material(alpha, sigma):
    # c scales as 1/sigma and d as 1/sqrt(sigma) under (ct2, cl2) -> sigma (ct2, cl2)
    m1 = make_material(1.0, 1.0 / alpha)
    p1 = assemble_predictions(m1, unit_disk(), "dir").d_values()
    p2 = assemble_predictions(m1.scaled(sigma), unit_disk(), "dir").d_values()
    for k in p1:
        assert p2[k] == pytest.approx(p1[k] / math.sqrt(sigma), rel=1e-9)
