import math

import numpy as np
import pytest

from yamabekit.geometry import CurvatureFields, DimensionError
from yamabekit.sampling import sample_points
from yamabekit.warped import (
    WarpedProfileError,
    WarpedProfilePoint,
    build_product_soliton,
    closed_form_curvature,
    cross_check,
    default_fiber_point,
    radial_cotton_c,
    radial_laplacian_R,
    ric_radial,
    warped_metric,
)

PROFILES = ["cosh(r)", "1 + r^2", "exp(r/2)"]


@pytest.mark.parametrize("n", [3, 4, 5])
@pytest.mark.parametrize("fprime", PROFILES)
@pytest.mark.parametrize("sign", [1, -1, 0])
def test_closed_form_matches_generic_engine(n, fprime, sign):
    rbar = sign * (n - 1) * (n - 2) * 0.8
    rep = cross_check(fprime, n, rbar, resolution=4)
    assert rep.worst() < 1e-10, rep.as_dict()


def test_hand_values_cosh():
    r = 0.7
    w = WarpedProfilePoint.from_expression("cosh(r)", 3, 2.0, r)
    assert (w.d1, w.d2, w.d3) == pytest.approx((math.cosh(r), math.sinh(r), math.cosh(r)))
    cf = closed_form_curvature(w)
    assert cf.ricci_radial == pytest.approx(-2.0)
    assert cf.radial_sectional == pytest.approx(-math.cosh(r) ** 2)  # R_1a1b = -F'F''' gbar_ab
    expected = 2 / math.cosh(r) ** 2 - 2 * math.tanh(r) ** 2 - 4
    assert cf.scalar == pytest.approx(expected)


def test_profile_must_be_positive():
    with pytest.raises(WarpedProfileError):
        WarpedProfilePoint(3, 2.0, 0.0, 0.0, 1.0, 0.0)
    with pytest.raises(DimensionError):
        WarpedProfilePoint(2, 0.0, 0.0, 1.0, 0.0, 0.0)


@pytest.mark.parametrize("fprime", PROFILES)
def test_radial_cotton_against_generic(fprime):
    metric = warped_metric(fprime, 3, 2.0)
    fp = default_fiber_point(2, 2.0)
    for r in (0.3, 0.9, 1.6):
        w = WarpedProfilePoint.from_expression(fprime, 3, 2.0, r)
        rc = radial_cotton_c(w)
        generic = CurvatureFields(metric, (r, *fp), 4).cotton.value
        # fiber of constant curvature: locally conformally flat, Cotton vanishes
        assert abs(rc.cotton_component) < 1e-12
        assert np.abs(generic).max() < 1e-12
        # c = Rbar/4 - F''^2/2 for n = 3 and dc/dr by finite differences
        assert rc.c == pytest.approx(0.5 - 0.5 * w.d2**2, abs=1e-12)
        h = 1e-4
        cp = radial_cotton_c(WarpedProfilePoint.from_expression(fprime, 3, 2.0, r + h)).c
        cm = radial_cotton_c(WarpedProfilePoint.from_expression(fprime, 3, 2.0, r - h)).c
        assert rc.dc_dr == pytest.approx((cp - cm) / (2 * h), rel=1e-6, abs=1e-8)


def test_radial_cotton_needs_three_dimensions():
    with pytest.raises(DimensionError):
        radial_cotton_c(WarpedProfilePoint.from_expression("cosh(r)", 4, 6.0, 0.5))


@pytest.mark.parametrize("n", [3, 4])
def test_radial_laplacian_and_ricci_term(n):
    fprime, rbar = "1 + r^2", (n - 1) * (n - 2) * 1.0
    metric = warped_metric(fprime, n, rbar)
    fp = default_fiber_point(n - 1, rbar)
    r = 0.8
    f = CurvatureFields(metric, (r, *fp), 5)
    scal = lambda s: closed_form_curvature(WarpedProfilePoint.from_expression(fprime, n, rbar, s)).scalar
    h = 1e-3
    dR = (scal(r + h) - scal(r - h)) / (2 * h)
    ddR = (scal(r + h) - 2 * scal(r) + scal(r - h)) / h**2
    w = WarpedProfilePoint.from_expression(fprime, n, rbar, r)
    assert radial_laplacian_R(w, dR, ddR) == pytest.approx(f.laplacian_of(f.scalar).value, rel=1e-5)
    assert ric_radial(w) == pytest.approx(f.ricci.value[0, 0] * w.d1**2, rel=1e-12)


@pytest.mark.parametrize("kind, a, rho", [("shrinking", 1.0, 2.0), ("expanding", 1.0, -2.0), ("shrinking", 1.7, 0.6)])
def test_product_soliton_construction(kind, a, rho):
    spec = build_product_soliton(kind, a, rho)
    assert spec.info["fiber_scalar_curvature"] == pytest.approx(rho * a * a)
    assert spec.info["fiber_gaussian_curvature_scaled"] == pytest.approx(rho / 2)
    for p in sample_points(spec.box, 8, seed=1):
        assert CurvatureFields(spec.metric, p, 2).scalar.value == pytest.approx(rho, abs=1e-12)


def test_product_soliton_rejects_bad_input():
    with pytest.raises(ValueError):
        build_product_soliton("shrinking", 1.0, -1.0)
    with pytest.raises(ValueError):
        build_product_soliton("steady", 1.0, 0.0)
    with pytest.raises(ValueError):
        build_product_soliton("expanding", 0.0, -1.0)
