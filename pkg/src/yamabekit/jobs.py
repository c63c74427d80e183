"""Job runners behind the command line: config in, :class:`Results` out."""

from __future__ import annotations

import numpy as np

from .config import ConfigError, JobConfig, ProfileConfig, config_points
from .geometry import CurvatureFields, MetricField
from .geometry.random import random_metric
from .ode import ODEState, classify, integrate, origin_series_start, track_invariants
from .report import Results
from .sampling import sample_points
from .soliton import IdentityReport, SolitonSpec, cotton_identities, identity_report
from .warped import build_product_soliton

RANDOM_BOX = (-1.0, 1.0)
PRODUCT_R_END = 5.0


def _product_spec(cfg: JobConfig) -> SolitonSpec:
    p = cfg.product
    return build_product_soliton(p["kind"], p["a"], p["rho"])


def metric_source(cfg: JobConfig) -> tuple[MetricField, tuple]:
    if cfg.metric is not None:
        return cfg.metric, cfg.box
    if cfg.product is not None:
        spec = _product_spec(cfg)
        return spec.metric, spec.box
    if cfg.random is not None and cfg.random.metrics > 0:
        n = cfg.random.n
        return _random_metric(cfg, 0), (RANDOM_BOX,) * n
    raise cfg.error("metric", "this mode needs [chart]/[metric], [product] or [random]")


def _random_metric(cfg: JobConfig, k: int) -> MetricField:
    rng = np.random.default_rng([cfg.sampling.seed, k])
    return random_metric(cfg.random.n, rng, cfg.random.amplitude)


def _rel(x, scale) -> float:
    return float(np.max(np.abs(x))) / max(1.0, float(scale))


def run_curvature(cfg: JobConfig, res: Results, jet_order: int = 4) -> None:
    metric, box = metric_source(cfg)
    order = max(jet_order, 4)
    tol = cfg.tolerances["identity"]
    worst = {"riemann_symmetry": 0.0, "first_bianchi": 0.0, "weyl_trace": 0.0, "cotton_structure": 0.0}
    n = metric.dim
    for p in config_points(cfg, box):
        f = CurvatureFields(metric, p, order)
        pack = f.pack().as_dict()
        pack["point"] = [float(x) for x in p]
        res.curvature.append(pack)
        Rm = f.riemann.value
        scale = np.max(np.abs(Rm))
        sym = max(_rel(Rm + Rm.transpose(1, 0, 2, 3), scale), _rel(Rm - Rm.transpose(2, 3, 0, 1), scale))
        bianchi = _rel(Rm + Rm.transpose(0, 2, 3, 1) + Rm.transpose(0, 3, 1, 2), scale)
        worst["riemann_symmetry"] = max(worst["riemann_symmetry"], sym)
        worst["first_bianchi"] = max(worst["first_bianchi"], bianchi)
        if n >= 3:
            W = f.weyl.value
            worst["weyl_trace"] = max(worst["weyl_trace"], _rel(np.einsum("ik,ijkl->jl", f.ginv.value, W), scale))
        if n == 3:
            C = f.cotton.value
            cs = max(np.max(np.abs(C + C.transpose(1, 0, 2))), np.max(np.abs(np.einsum("ij,ijk->k", f.ginv.value, C))))
            worst["cotton_structure"] = max(worst["cotton_structure"], float(cs))
    if not res.curvature:
        return
    for key, v in worst.items():
        if key == "cotton_structure" and n != 3:
            continue
        res.check("curvature", key, v, tol)


def _soliton_source(cfg: JobConfig):
    if cfg.soliton is not None:
        return cfg.soliton, "soliton"
    if cfg.product is not None:
        return _product_spec(cfg), "product"
    return None, None


def run_verify(cfg: JobConfig, res: Results, jet_order: int = 5, slow: bool = False) -> None:
    tol = cfg.tolerances
    spec, src = _soliton_source(cfg)
    ran = False
    if spec is not None:
        ran = True
        pts = config_points(cfg, spec.box)
        rep = identity_report(spec, pts, gate=tol["gate"], tol=tol["identity"])
        res.identities["soliton"] = rep
        if pts.size:
            for key in rep.residuals:
                res.check("soliton", key, rep.max_residual(key), rep.tolerances[key])
            if src == "product":
                dev = max(abs(CurvatureFields(spec.metric, p, 2).scalar.value - spec.rho) for p in pts)
                res.check("soliton", "R_minus_rho", float(dev), tol["product_scalar"])
                res.notes.append(
                    "product fiber: scalar curvature {fiber_scalar_curvature!r}, Gaussian curvature "
                    "{fiber_gaussian_curvature_gbar!r} (unscaled) / {fiber_gaussian_curvature_scaled!r} (scaled)".format(
                        **spec.info
                    )
                )
        res.notes.extend(rep.notes)
    cotton_tols = {"DIVB": tol["divb"], "M2": tol["m2"], "DDIV": tol["ddiv"]}
    order = max(jet_order, 6 if slow else 5)
    metric = spec.metric if spec is not None else cfg.metric
    if metric is not None and metric.dim == 3:
        ran = True
        box = spec.box if spec is not None else cfg.box
        rep = cotton_identities(metric, config_points(cfg, box), order, slow, cotton_tols)
        _cotton_checks(res, "cotton", rep)
    if cfg.random is not None:
        ran = True
        if cfg.random.n != 3:
            raise cfg.error("random.n", "the Cotton/Bach identity battery is defined for n = 3")
        pts, resid = [], {k: [] for k in (["DIVB", "M2"] + (["DDIV"] if slow else []))}
        for k in range(cfg.random.metrics):
            m = _random_metric(cfg, k)
            sp = sample_points((RANDOM_BOX,) * 3, cfg.sampling.count, cfg.sampling.seed + k, cfg.sampling.margin) if cfg.sampling.count else []
            rep = cotton_identities(m, sp, order, slow, cotton_tols)
            pts.extend((float(k), *p) for p in rep.points)
            for key in resid:
                resid[key].extend(rep.residuals[key])
        battery = IdentityReport(pts, resid, {k: cotton_tols[k] for k in resid})
        _cotton_checks(res, "random", battery)
    if not ran:
        raise cfg.error("soliton", "verify needs [soliton], [product], [random] or a 3-dimensional [metric]")


def _cotton_checks(res: Results, name: str, rep: IdentityReport) -> None:
    res.identities[name] = rep
    if rep.points:
        for key in rep.residuals:
            res.check(name, key, rep.max_residual(key), rep.tolerances[key])


def profile_config(cfg: JobConfig) -> ProfileConfig:
    if cfg.profile is not None:
        return cfg.profile
    if cfg.product is not None:
        p = cfg.product
        return ProfileConfig(3, p["rho"] * p["a"] ** 2, p["rho"], PRODUCT_R_END, (0.0, p["a"], 0.0))
    raise cfg.error("profile", "this mode needs a [profile] table (initial conditions or origin_start) or [product]")


def run_profile(cfg: JobConfig, res: Results, classify_it: bool = False) -> None:
    pc = profile_config(cfg)
    tol = cfg.tolerances
    if pc.origin_start:
        ic = origin_series_start(pc.n, pc.fiber_scalar, pc.rho, pc.eps)
    else:
        ic = ODEState(*pc.ic)
    t = integrate(
        pc.n, pc.fiber_scalar, pc.rho, ic, pc.r_end, rtol=tol["rtol"], atol=tol["atol"], origin_start=pc.origin_start
    )
    res.trajectory = t
    if t.status != "completed":
        res.numerical_failure = f"integration stopped with status {t.status!r}: {t.metadata['message']}"
    if len(t) >= 3:
        inv = track_invariants(t, tol["classify"])
        res.invariants = inv
        res.check("profile", "R2_residual", inv.r2_residual, tol["r2"])
        res.check("profile", "scalar_two_way", inv.scalar_two_way, tol["two_way"])
        res.check("profile", "sign_lemma", inv.sign_lemma_holds, None, inv.sign_lemma_holds)
        # conserved only along trajectories with F'' F''' = 0 at launch
        if inv.c_drift is not None and abs(t.dphi[0] * t.ddphi[0]) <= tol["classify"]:
            res.check("profile", "c_drift", inv.c_drift, tol["c_drift"])
        if inv.key3_residual is not None:
            res.check("profile", "key3_residual", inv.key3_residual, tol["key3"])
    else:
        res.notes.append(f"trajectory has {len(t)} samples; invariants need at least 3")
    if classify_it:
        c = classify(t, pc.rho, tol["classify"])
        res.classification = c
        want = cfg.expect.get("label")
        if want is not None:
            res.check("classify", "label", c.label, None, c.label == want)


def run_job(cfg: JobConfig, mode: str, jet_order: int = 4, slow: bool = False) -> Results:
    res = Results(cfg.name, mode, cfg.sampling.seed)
    if mode == "curvature":
        run_curvature(cfg, res, jet_order)
    elif mode == "verify":
        run_verify(cfg, res, max(jet_order, 5), slow)
    elif mode == "profile":
        run_profile(cfg, res)
    elif mode == "classify":
        run_profile(cfg, res, classify_it=True)
    elif mode == "report":
        did = False
        if any(x is not None for x in (cfg.soliton, cfg.product, cfg.random)) or (
            cfg.metric is not None and cfg.metric.dim == 3
        ):
            run_verify(cfg, res, max(jet_order, 5), slow)
            did = True
        if cfg.profile is not None or cfg.product is not None:
            run_profile(cfg, res, classify_it=True)
            did = True
        if not did:
            run_curvature(cfg, res, jet_order)
    else:
        raise ConfigError(cfg.path, "mode", f"unknown mode {mode!r}")
    return res
