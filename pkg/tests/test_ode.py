import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from yamabekit.ode import (
    CSV_COLUMNS,
    LABELS,
    ODEState,
    ProfileError,
    SingularStateError,
    StepUnderflowError,
    TrajectoryTooShortError,
    classify,
    dopri5,
    integrate,
    origin_series_start,
    profile_rhs,
    ricci_gradient,
    scalar_from_state,
    shoot_from_origin,
    track_invariants,
)
from yamabekit.warped import WarpedProfilePoint, closed_form_curvature, radial_cotton_c

FLAT_IC = ODEState(0.1, 0.1, 1.0)


def flat():
    return integrate(3, 2.0, -1.0, FLAT_IC, 5.0)


def product(rho, a=1.0):
    return integrate(3, rho * a * a, rho, ODEState(0.0, a, 0.0), 5.0)


# ---------------------------------------------------------------- integrator


def lotka(t, y):
    return np.array([1.5 * y[0] - y[0] * y[1], -3.0 * y[1] + y[0] * y[1]])


def test_dopri5_matches_scipy_reference():
    sol = dopri5(lotka, 0.0, [10.0, 5.0], 10.0, rtol=1e-10, atol=1e-12)
    ref = solve_ivp(lotka, (0, 10), [10.0, 5.0], method="DOP853", rtol=1e-13, atol=1e-13)
    assert sol.status == "completed" and sol.t[-1] == 10.0
    assert np.allclose(sol.y[-1], ref.y[:, -1], rtol=1e-8)


def test_dopri5_harmonic_oscillator_and_dense_output():
    sol = dopri5(lambda t, y: np.array([y[1], -y[0]]), 0.0, [0.0, 1.0], 2 * math.pi, rtol=1e-11, atol=1e-13)
    assert abs(sol.y[-1, 0]) < 1e-8 and abs(sol.y[-1, 1] - 1) < 1e-8
    ts = np.linspace(0, 2 * math.pi, 97)
    assert np.max(np.abs(sol.dense(ts)[:, 0] - np.sin(ts))) < 1e-6
    assert sol.dense(1.0).shape == (2,)
    with pytest.raises(ValueError):
        sol.dense(7.0)


def test_dopri5_tolerance_controls_error():
    errs = []
    for rtol in (1e-6, 1e-9):
        sol = dopri5(lambda t, y: -y, 0.0, [1.0], 3.0, rtol=rtol, atol=rtol * 1e-2)
        errs.append(abs(sol.y[-1, 0] - math.exp(-3)))
    assert errs[1] < errs[0] and errs[1] < 1e-8


def test_dopri5_step_underflow_reports_last_state():
    with pytest.raises(StepUnderflowError) as info:
        dopri5(lambda t, y: y**2, 0.0, [1.0], 2.0)
    err = info.value
    assert 0.99 < err.t < 1.0 and err.y[0] > 1e3


@pytest.mark.parametrize("rtol, atol", [(0.0, 1e-12), (1e-10, -1.0), (float("nan"), 1e-12)])
def test_dopri5_invalid_tolerances(rtol, atol):
    with pytest.raises(ValueError):
        dopri5(lambda t, y: y, 0.0, [1.0], 1.0, rtol=rtol, atol=atol)


def test_dopri5_halt_and_max_steps():
    sol = dopri5(lambda t, y: np.ones(1), 0.0, [0.0], 10.0, halt=lambda t, y: "stop" if y[0] > 1 else None)
    assert sol.status == "stop" and 1 < sol.t[-1] < 10
    sol = dopri5(lambda t, y: -50 * y, 0.0, [1.0], 10.0, max_steps=3)
    assert sol.status == "max_steps" and sol.n_steps == 3


# ---------------------------------------------------------------- right-hand side


def test_profile_rhs_examples():
    for r in (0.1, 1.0, 3.7):
        assert profile_rhs(3, 2.0, -1.0, r, 1.0) == pytest.approx(0.0, abs=1e-14)
    assert profile_rhs(3, 2.0, 0.0, 1.0, 0.0) == 0.5


@given(
    n=st.integers(3, 7),
    rho=st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3),
    a=st.floats(0.1, 10),
)
def test_product_states_are_fixed_points(n, rho, a):
    assert abs(profile_rhs(n, rho * a * a, rho, a, 0.0)) <= 1e-14 * max(1.0, abs(rho) * a)


@settings(max_examples=60)
@given(
    n=st.integers(3, 6),
    rbar=st.floats(-6, 6),
    rho=st.floats(-3, 3),
    phi=st.floats(0.05, 5),
    dphi=st.floats(-3, 3),
)
def test_rhs_makes_both_scalar_formulas_agree(n, rbar, rho, phi, dphi):
    dd = profile_rhs(n, rbar, rho, phi, dphi)
    R_state = scalar_from_state(n, rbar, phi, dphi, dd)
    # independent oracle: the closed-form warped curvature engine
    R_closed = closed_form_curvature(WarpedProfilePoint(n, rbar, 1.0, phi, dphi, dd)).scalar
    assert R_state == pytest.approx(rho + dphi, rel=1e-9, abs=1e-9)
    assert R_closed == pytest.approx(rho + dphi, rel=1e-9, abs=1e-9)


def test_profile_rhs_vectorized_and_guarded():
    out = profile_rhs(4, 6.0, 1.0, np.array([0.5, 1.0, 2.0]), np.array([0.1, 0.0, -0.2]))
    assert out.shape == (3,)
    assert out[1] == profile_rhs(4, 6.0, 1.0, 1.0, 0.0)
    for bad in (0.0, -1.0):
        with pytest.raises(SingularStateError):
            profile_rhs(3, 2.0, 0.0, bad, 0.0)
    with pytest.raises(ProfileError):
        profile_rhs(2, 0.0, 0.0, 1.0, 0.0)


# ---------------------------------------------------------------- integrate


def test_flat_gaussian_trajectory():
    t = flat()
    assert t.status == "completed" and t.r[0] == 0.1 and t.r[-1] == 5.0
    assert np.max(np.abs(t.phi - t.r)) <= 1e-7
    assert np.max(np.abs(t.R)) <= 1e-7
    assert np.max(np.abs(t.c)) <= 1e-8
    assert np.allclose(t.F - t.F[0], (t.r**2 - t.r[0] ** 2) / 2, atol=1e-7)


@pytest.mark.parametrize("rho", [2.0, -2.0, 0.7])
def test_product_trajectory_is_constant(rho):
    t = product(rho, 1.3)
    assert np.max(np.abs(t.dphi)) <= 1e-9
    assert np.max(np.abs(t.R - rho)) <= 1e-10
    assert track_invariants(t).key3_residual <= 1e-9


def test_self_convergence():
    ic = ODEState(0.0, 1.0, 0.3)
    a = integrate(3, 2.0, 0.0, ic, 3.0, rtol=1e-10, atol=1e-12).final_state
    b = integrate(3, 2.0, 0.0, ic, 3.0, rtol=5e-11, atol=5e-13).final_state
    diff = max(abs(a.phi - b.phi), abs(a.dphi - b.dphi), abs(a.F - b.F))
    assert diff < 10 * 1e-10


def test_integrate_argument_errors():
    with pytest.raises(SingularStateError):
        integrate(3, 2.0, 0.0, ODEState(0.0, 0.0, 1.0), 1.0)
    with pytest.raises(ProfileError):
        integrate(3, 2.0, 0.0, ODEState(1.0, 1.0, 0.0), 0.5)
    with pytest.raises(ProfileError):
        integrate(3, 2.0, 0.0, ODEState(0.0, 1.0, 0.0), 1.0, rtol=0.0)


def test_collapse_reports_singularity_status():
    # negative fiber curvature with steady rho drives phi to zero
    t = integrate(3, -2.0, 0.0, ODEState(0.0, 1.0, -1.0), 50.0)
    assert t.status == "singularity"
    assert t.phi[-1] < 1e-6 and t.r[-1] < 50.0
    assert classify(t).evidence["status"] == "singularity"


def test_blowup_status():
    t = integrate(3, 2.0, -1.0, ODEState(0.0, 1.0, 5.0), 100.0, blowup=1e3)
    assert t.status == "blowup"


# ---------------------------------------------------------------- origin series


def test_origin_series_rejects_wrong_fiber():
    with pytest.raises(ProfileError):
        origin_series_start(3, 6.0, 0.0)
    with pytest.raises(ProfileError):
        origin_series_start(3, 2.0, 0.0, eps=0.0)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_origin_series_closes_smoothly(n):
    s = origin_series_start(n, (n - 1) * (n - 2), 0.3, 1e-3)
    assert s.phi == pytest.approx(1e-3, rel=1e-5)
    assert s.dphi == pytest.approx(1.0, abs=1e-5)
    assert s.ddphi == pytest.approx(0.0, abs=1e-3)
    # R(0) = rho + 1
    assert scalar_from_state(n, (n - 1) * (n - 2), s.phi, s.dphi, s.ddphi) == pytest.approx(1.3, abs=1e-5)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_origin_series_solves_the_ode(n):
    # the series itself must satisfy phi'' = rhs(phi, phi') to high order
    rbar = (n - 1) * (n - 2)
    for eps in (0.05, 0.025):
        s = origin_series_start(n, rbar, -0.4, eps)
        assert abs(s.ddphi - profile_rhs(n, rbar, -0.4, s.phi, s.dphi)) < 2e-3 * eps**5 / 0.05**5


def test_origin_series_flat_case_reproduces_identity():
    t = shoot_from_origin(3, -1.0, 3.0)
    assert np.max(np.abs(t.phi - t.r)) <= 1e-6
    assert classify(t, tol=1e-6).label == "flat"


def test_origin_series_truncation_order():
    # cubic-only start: successive eps-halving differences shrink at least like eps^3
    diffs = []
    for eps in (0.08, 0.04, 0.02):
        s3 = origin_series_start(3, 2.0, 0.0, eps, terms=2)
        t = integrate(3, 2.0, 0.0, s3, 1.0, rtol=1e-12, atol=1e-14)
        diffs.append(t.final_state.phi)
    d1, d2 = abs(diffs[0] - diffs[1]), abs(diffs[1] - diffs[2])
    assert d1 / d2 > 2**3 * 0.9


@pytest.mark.parametrize("n", [3, 4, 5])
def test_steady_origin_trajectory(n):
    t = shoot_from_origin(n, 0.0, 5.0)
    assert t.status == "completed"
    assert np.all(np.isfinite(t.R)) and np.all(t.phi > 0)
    assert np.allclose(t.R, t.dphi, atol=1e-9)
    inv = track_invariants(t)
    assert inv.r2_residual <= 1e-5 and inv.scalar_two_way <= 1e-9
    assert classify(t).label == "rotationally_symmetric_candidate"


# ---------------------------------------------------------------- invariants


def test_invariants_flat_and_generic():
    inv = track_invariants(flat())
    assert inv.c_drift <= 1e-8 and inv.r2_residual <= 1e-5 and inv.sign_lemma_holds
    for n, rbar, rho, ic in [(3, 2.0, 0.0, (0.0, 1.0, 0.3)), (4, 6.0, 1.0, (0.0, 1.0, -0.2)), (5, -3.0, -1.0, (0.0, 2.0, 0.5))]:
        t = integrate(n, rbar, rho, ODEState(*ic), 2.0)
        inv = track_invariants(t)
        assert inv.r2_residual <= 1e-5
        assert inv.scalar_two_way <= 1e-9
        assert inv.sign_lemma_holds
        if n != 3:
            assert inv.c_drift is None and np.all(np.isnan(t.c))


def test_c_growth_matches_warped_module():
    t = integrate(3, 2.0, 0.0, ODEState(0.0, 1.0, 0.3), 2.0)
    assert track_invariants(t).c_drift > 1e-3
    h = 1e-4
    for r in (0.5, 1.0, 1.5):
        lo, mid, hi = t.solution.dense([r - h, r, r + h])
        def c_of(y, r_):
            w = WarpedProfilePoint(3, 2.0, r_, y[1], y[2], profile_rhs(3, 2.0, 0.0, y[1], y[2]))
            return radial_cotton_c(w)
        fd = (c_of(hi, r + h).c - c_of(lo, r - h).c) / (2 * h)
        assert fd == pytest.approx(c_of(mid, r).dc_dr, abs=1e-6)


def test_invariants_need_three_samples():
    t = integrate(3, 2.0, 0.0, ODEState(0.0, 1.0, 0.0), 1e-6)
    assert len(t) == 2
    with pytest.raises(TrajectoryTooShortError):
        track_invariants(t)


@settings(max_examples=200)
@given(
    n=st.integers(3, 8),
    phi=st.floats(1e-6, 1e6),
    # keep phi * F''' representable; an underflowed product loses its sign
    dd=st.floats(-1e6, 1e6).filter(lambda x: x == 0 or abs(x) > 1e-290),
)
def test_sign_lemma_pointwise(n, phi, dd):
    ric = ricci_gradient(n, phi, dd)
    assert (ric <= 0) == (dd >= 0)


# ---------------------------------------------------------------- classify and output


def test_classify_labels():
    assert classify(flat()).label == "flat"
    assert classify(product(2.0)).label == "shrinking_product"
    assert classify(product(-2.0)).label == "expanding_product"
    steady = integrate(3, 2.0, 0.0, ODEState(0.0, 1.0, 0.0), 1e-6)
    c = classify(steady)
    assert c.label == "steady_contradiction" and "rho == 0" in c.evidence["fired"]
    generic = integrate(3, 2.0, 0.0, ODEState(0.0, 1.0, 0.3), 2.0)
    assert classify(generic).label == "unclassified"
    assert {classify(x).label for x in (flat(), generic)} <= set(LABELS)


def test_trajectory_serialization():
    t = flat()
    lines = t.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == len(t) + 1
    payload = json.loads(t.to_json())
    assert payload["status"] == "completed"
    assert payload["columns"]["Fp"][0] == 0.1
    assert t.to_csv() == flat().to_csv()
    n4 = integrate(4, 6.0, 1.0, ODEState(0.0, 1.0, 0.0), 1.0)
    assert json.loads(n4.to_json())["columns"]["c"][0] is None
