import math

import numpy as np
import pytest
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

from smagdamp import damping as dm
from smagdamp.core import make_domain
from smagdamp.exceptions import DomainError, OverlapError, ParameterError, ValidityError


def domain_for_gamma(gamma, delta=0.1):
    # gamma = 1 / (5.1 Re) at kappa = 1
    return make_domain(1.0, 1.0, 5.1 * gamma, delta, 0.1)


# ----------------------------------------------------------------------------
# profile construction and evaluation
# ----------------------------------------------------------------------------

def test_aliases_resolve():
    assert dm.DampingProfile("beta_w", alpha=2).kind == "algebraic"
    assert dm.DampingProfile("beta_d", alpha=2).kind == "hermite"
    assert dm.DampingProfile("constant-one").kind == "constant"


@pytest.mark.parametrize("kw", [dict(kind="nope"), dict(kind="hermite", alpha=-1),
                                dict(kind="hermite", alpha=1.5), dict(kind="constant", value=-1.0),
                                dict(kind="tabulated")])
def test_invalid_profiles(kw):
    with pytest.raises(ParameterError):
        dm.DampingProfile(**kw)


def test_outside_domain_raises(unit_domain):
    with pytest.raises(DomainError):
        dm.eval_beta(dm.hermite(2), 1.1, unit_domain)
    with pytest.raises(DomainError):
        dm.eval_beta(dm.constant(), -0.01, unit_domain)


def test_face_roundoff_is_tolerated(unit_domain):
    assert dm.eval_beta(dm.hermite(2), 1.0 + 1e-15, unit_domain) == 0.0


def test_algebraic_at_lid_and_strip_foot(unit_domain):
    p = dm.algebraic(2)
    assert dm.eval_beta(p, 1.0, unit_domain) == 0.0
    foot = 1.0 - unit_domain.strip_width
    assert dm.eval_beta(p, foot, unit_domain) == pytest.approx((1 / 5.1) ** 2, rel=1e-12)
    assert dm.eval_beta(p, foot, unit_domain) == pytest.approx(0.0384468, abs=5e-8)


def test_hermite_plateau_and_walls(unit_domain):
    z = np.linspace(0, 1, 1001)
    b = dm.eval_beta(dm.hermite(2), z, unit_domain)
    assert b[0] == 0.0 and b[-1] == 0.0
    core = (z >= 2 * unit_domain.gamma) & (z <= 1 - 2 * unit_domain.gamma)
    assert np.all(b[core] == 1.0)
    assert np.all((b >= 0) & (b <= 1))


def test_hermite_overlap_rejected():
    with pytest.raises(OverlapError):
        dm.hermite_coefficients(domain_for_gamma(0.1), 2, gamma=0.3)


def test_tabulated_interpolates(unit_domain, tmp_path):
    path = tmp_path / "beta.txt"
    dm.save_table(path, [0.0, 0.5, 1.0], [0.0, 1.0, 0.0])
    p = dm.load_table(path, unit_domain)
    assert dm.eval_beta(p, 0.25, unit_domain) == pytest.approx(0.5)


def test_table_must_increase():
    with pytest.raises(ParameterError):
        dm.tabulated([0.0, 0.5, 0.5], [1, 1, 1])


# ----------------------------------------------------------------------------
# blend coefficients
# ----------------------------------------------------------------------------

def test_closed_form_coefficients_arithmetic():
    pc = dm.printed_hermite_coefficients(0.1, 2, 1.0)
    assert pc["d1"] == pytest.approx(0.0081, rel=1e-12)
    assert pc["c1"] == pytest.approx(2 * 0.1 * 0.9 * 0.8, rel=1e-12)
    assert pc["a2"] == -pc["a1"]


@pytest.mark.parametrize("alpha", [1, 2, 3, 4])
@pytest.mark.parametrize("gamma", [0.01, 0.05, 0.1, 0.2])
def test_solved_and_closed_forms_agree(alpha, gamma):
    co = dm.hermite_coefficients(domain_for_gamma(gamma), alpha)
    assert co.discrepancy < 1e-10
    assert co.a2 == pytest.approx(-co.a1, rel=1e-10)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_blends_match_independent_hermite_spline(alpha):
    d = domain_for_gamma(0.08)
    h = d.strip_width
    d1 = (0.08 * 0.92) ** alpha
    c1 = alpha * (0.08 * 0.92) ** (alpha - 1) * (1 - 0.16)
    left = CubicHermiteSpline([h, 2 * h], [d1, 1.0], [c1, 0.0])
    right = CubicHermiteSpline([1 - 2 * h, 1 - h], [1.0, d1], [0.0, -c1])
    z1 = np.linspace(h, 2 * h, 33)
    z2 = np.linspace(1 - 2 * h, 1 - h, 33)
    p = dm.hermite(alpha)
    np.testing.assert_allclose(dm.eval_beta(p, z1, d), left(z1), rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(dm.eval_beta(p, z2, d), right(z2), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_junctions_are_c1(alpha):
    for _, dv, ds in dm.junction_mismatch(domain_for_gamma(0.1), alpha):
        assert dv < 1e-12 and ds < 1e-12


def test_derivative_matches_finite_difference(unit_domain):
    z = np.linspace(0.01, 0.99, 57)
    for p in (dm.hermite(2), dm.algebraic(2), dm.van_driest()):
        eps = 1e-6
        fd = (dm.eval_beta(p, z + eps, unit_domain) - dm.eval_beta(p, z - eps, unit_domain)) / (2 * eps)
        np.testing.assert_allclose(dm.eval_beta_derivative(p, z, unit_domain), fd, rtol=1e-5, atol=1e-5)


# ----------------------------------------------------------------------------
# van Driest
# ----------------------------------------------------------------------------

def test_wall_scales(unit_domain):
    ws = dm.wall_scales(unit_domain)
    assert ws.u_tau == pytest.approx(2 ** -0.25)
    assert ws.z_plus(0.9) == pytest.approx(8.409, abs=5e-4)


def test_van_driest_value(unit_domain):
    zp = 0.1 * 2 ** -0.25 / 0.01
    assert dm.van_driest_exact(0.9, unit_domain) == pytest.approx(1 - math.exp(-zp / 26), rel=1e-14)
    # rounded reference value
    assert dm.van_driest_exact(0.9, unit_domain) == pytest.approx(0.27636, abs=5e-5)
    assert dm.van_driest_exact(1.0, unit_domain) == 0.0


def test_van_driest_monotone_to_one():
    d = make_domain(1.0, 1.0, 1e-4, 0.1, 0.1)
    z = np.linspace(0, 1, 500)
    f = dm.van_driest_exact(z, d)
    assert np.all(np.diff(f) <= 0)
    assert f[0] == pytest.approx(1.0, abs=1e-12)


def test_taylor_first_term(unit_domain):
    x = 0.1 / (26 * 2 ** 0.25)
    assert dm.taylor_approx_f_w(0.999, unit_domain, 1) == pytest.approx(x, rel=1e-12)
    assert dm.taylor_approx_f_w(0.999, unit_domain, 1) == pytest.approx(0.0032343, abs=1e-7)


def test_taylor_vanishes_at_lid(unit_domain):
    for k in (1, 4, 8):
        assert dm.taylor_approx_f_w(1.0, unit_domain, k) == 0.0


def test_taylor_k8_inside_strip(unit_domain):
    z = 1 - unit_domain.strip_width / 2
    err = abs(dm.taylor_approx_f_w(z, unit_domain, 8) - dm.van_driest_exact(z, unit_domain))
    assert err < 1e-6


def test_taylor_validity_region(unit_domain):
    with pytest.raises(ValidityError):
        dm.taylor_approx_f_w(0.5, unit_domain, 8)
    with pytest.raises(ParameterError):
        dm.taylor_approx_f_w(0.999, unit_domain, 0)


# ----------------------------------------------------------------------------
# strip integrals
# ----------------------------------------------------------------------------

def test_constant_strip_integral(unit_domain):
    assert float(dm.strip_integral(dm.constant(), unit_domain)) == pytest.approx(unit_domain.strip_width)


def test_algebraic_strip_integral_value(unit_domain):
    si = dm.strip_integral(dm.algebraic(2), unit_domain)
    assert float(si) == pytest.approx((1 / 510) * (1 / 5.1) ** 2 / 3, rel=1e-13)
    assert float(si) == pytest.approx(2.5128e-5, abs=1e-9)


@pytest.mark.parametrize("alpha", [1, 2, 3, 5])
def test_hermite_strip_integral_vs_independent_quadrature(alpha, unit_domain):
    g = unit_domain.gamma
    ref, _ = integrate.quad(lambda t: t ** alpha * (1 - t) ** alpha, 0, g, epsabs=0, epsrel=1e-13)
    si = dm.strip_integral(dm.hermite(alpha), unit_domain)
    assert float(si) == pytest.approx(ref, rel=1e-12)
    assert float(si) <= dm.c_alpha(alpha) * g ** (alpha + 1)


def test_c_alpha_values():
    assert dm.c_alpha(1) == pytest.approx(0.5)
    assert dm.c_alpha(2) == pytest.approx(1 / 3 + 1 / 5)
    assert dm.c_alpha(3) == pytest.approx(1 / 4 + 3 / 6)


def test_van_driest_strip_integral(unit_domain):
    c = 2 ** -0.25 / (0.01 * 26)
    h = unit_domain.strip_width
    ref = h - (1 - math.exp(-c * h)) / c
    assert float(dm.strip_integral(dm.van_driest(), unit_domain)) == pytest.approx(ref, rel=1e-12)


def test_all_kinds_closed_form_vs_quadrature(unit_domain):
    z = np.linspace(0, 1, 301)
    kinds = [dm.constant(0.7), dm.van_driest(), dm.algebraic(1), dm.algebraic(3), dm.hermite(1),
             dm.hermite(2), dm.tabulated(z, np.sin(np.pi * z) ** 2)]
    for p in kinds:
        assert dm.strip_integral(p, unit_domain).relative_difference < 1e-10, p.label


def test_damping_table_columns(unit_domain):
    z, b = dm.damping_table(dm.hermite(2), unit_domain, 1001)
    assert z.shape == b.shape == (1001,)
    assert b[0] == b[-1] == 0.0 and b[500] == 1.0


def test_leading_exponents():
    assert dm.leading_re_exponent(dm.algebraic(2)) == 2
    assert dm.leading_re_exponent(dm.hermite(2)) == 0
    assert dm.leading_re_exponent(dm.hermite(1)) == 1
    assert dm.leading_re_exponent(dm.constant(0.0)) is None
