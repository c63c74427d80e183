import csv
import io
import json

import numpy as np
import pytest

from yamabekit.geometry import CurvatureFields, DimensionError, MetricField
from yamabekit.geometry.random import random_metric
from yamabekit.sampling import sample_points
from yamabekit.soliton import (
    COTTON_KEYS,
    SOLITON_KEYS,
    IdentityReport,
    SolitonSpec,
    cotton_identities,
    describe,
    fd_scalar_derivatives,
    identity_report,
    kind_of,
    soliton_residual,
)
from yamabekit.warped import build_product_soliton

FLAT = MetricField.diagonal(["x", "y", "z"], ["1", "1", "1"])
FLAT_SPH = MetricField.diagonal(["r", "th", "ph"], ["1", "r^2", "r^2*sin(th)^2"])
S3 = MetricField.diagonal(["chi", "th", "ph"], ["1", "sin(chi)^2", "sin(chi)^2*sin(th)^2"])
BOX3 = ((-1.0, 1.0),) * 3


def test_kind_of():
    assert [kind_of(x) for x in (1.0, 0.0, -0.5)] == ["shrinking", "steady", "expanding"]


def test_gaussian_soliton_cartesian():
    s = SolitonSpec(FLAT, "(x^2 + y^2 + z^2)/2", -1.0)
    assert s.kind == "expanding"
    rep = identity_report(s, sample_points(BOX3, 8))
    assert not rep.gate_violated
    assert set(rep.residuals) == set(SOLITON_KEYS)
    assert max(rep.max_residual(k) for k in SOLITON_KEYS) <= 1e-8
    assert rep.failures() == []


def test_gaussian_soliton_spherical_chart():
    s = SolitonSpec(FLAT_SPH, "r^2/2", -1.0)
    pts = sample_points(((0.5, 2.0), (0.4, 2.7), (0.0, 6.0)), 6)
    rep = identity_report(s, pts)
    assert max(rep.max_residual(k) for k in SOLITON_KEYS) <= 1e-8


def test_wrong_constant_fails_gate():
    s = SolitonSpec(FLAT, "(x^2 + y^2 + z^2)/2", -2.0)
    res, worst = soliton_residual(s, (0.1, 0.2, 0.3))
    assert worst == pytest.approx(1.0)
    assert np.allclose(res, -np.eye(3))
    rep = identity_report(s, sample_points(BOX3, 4))
    assert rep.gate_violated and "YS" in rep.failures()


def test_sphere_negative_control():
    s = SolitonSpec(S3, "1", 0.0)
    rep = identity_report(s, [(1.0, 1.2, 0.3)], fd_check=False)
    assert rep.max_residual("YS") == pytest.approx(6.0)
    assert rep.gate_violated
    assert any("gate" in n for n in rep.notes)


@pytest.mark.parametrize("kind, rho", [("shrinking", 2.0), ("expanding", -2.0), ("expanding", -0.4)])
def test_product_solitons(kind, rho):
    spec = build_product_soliton(kind, 1.3, rho)
    pts = sample_points(spec.box, 8, seed=3)
    rep = identity_report(spec, pts)
    assert rep.failures() == [], rep.summary()
    for p in pts:
        assert abs(CurvatureFields(spec.metric, p, 2).scalar.value - rho) <= 1e-10


def test_spec_validation():
    with pytest.raises(ValueError):
        SolitonSpec(FLAT, "x", 1.0, "expanding")
    with pytest.raises(ValueError):
        SolitonSpec(FLAT, "x", 1.0, "bogus")
    d = describe(SolitonSpec(FLAT, "x*y", 0.0))
    assert d["potential"] == "x*y" and d["kind"] == "steady"


def test_fd_scalar_derivatives_agree_with_jets():
    m = random_metric(3, 4)
    p = np.array([0.1, -0.3, 0.2])
    f = CurvatureFields(m, p, 4)
    g, h = fd_scalar_derivatives(m, p)
    assert np.allclose(g, f.scalar.gradient().value, atol=1e-6)
    hess_partial = np.array([[f.scalar.partial(tuple(int(k == i) + int(k == j) for k in range(3))) for j in range(3)] for i in range(3)])
    assert np.allclose(h, hess_partial, atol=1e-5)


@pytest.mark.parametrize("seed", [0, 1])
def test_cotton_identities_random(seed):
    m = random_metric(3, seed)
    rep = cotton_identities(m, sample_points(BOX3, 4, seed=seed))
    assert set(rep.residuals) == {"DIVB", "M2"}
    assert rep.max_residual("DIVB") <= 1e-10
    assert rep.max_residual("M2") <= 1e-10


@pytest.mark.slow
def test_double_divergence_slow():
    m = random_metric(3, 2)
    rep = cotton_identities(m, sample_points(BOX3, 4), slow=True)
    assert set(rep.residuals) == set(COTTON_KEYS)
    assert rep.max_residual("DDIV") <= 1e-8


def test_cotton_identities_need_three_dimensions():
    with pytest.raises(DimensionError):
        cotton_identities(random_metric(4, 0, amplitude=0.1), [(0, 0, 0, 0)])


def test_report_serialization():
    s = SolitonSpec(FLAT, "(x^2 + y^2 + z^2)/2", -1.0)
    rep = identity_report(s, sample_points(BOX3, 2), fd_check=False)
    payload = json.loads(rep.to_json())
    assert set(payload["identities"]) == set(SOLITON_KEYS)
    assert payload["identities"]["YS"]["passed"] is True
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["identity", "point", "x0", "x1", "x2", "residual"]
    assert len(rows) == 1 + 2 * len(SOLITON_KEYS) + len(SOLITON_KEYS)
    assert rep.to_json() == identity_report(s, sample_points(BOX3, 2), fd_check=False).to_json()
    with pytest.raises(ValueError):
        IdentityReport([(0.0,)], {"YS": [float("nan")]})
    other = IdentityReport(rep.points, {"extra": [0.0, 0.0]}, {"extra": 1.0})
    merged = rep.merge(other)
    assert "extra" in merged.residuals and "YS" in merged.residuals
