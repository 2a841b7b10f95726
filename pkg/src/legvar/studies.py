"""Refinement studies and check suites that back the CLI and acceptance runs.

Every function returns a JSON-ready dict and is deterministic in its arguments.
"""
from __future__ import annotations

import math

import numpy as np

from . import families
from . import hamiltonian as hm
from . import heisenberg as hb
from . import sphere as sp
from . import surfaces as sf
from .cutoff import make_cutoff
from .fields import horizontal_from_euclidean, translated_field
from .grid import GridDomain, converges_at_order, log_slope
from .varifold import monotonicity_scan

ORDER = 1.8

DEFAULT_TOLERANCES = {
    "group_associativity": 1e-12,
    "group_neutral": 1e-12,
    "group_inverse": 1e-12,
    "dk_nonnegative": 0.0,
    "dk_symmetry": 1e-12,
    "dk_triangle": 1e-12,
    "dk_left_invariance": 1e-12,
    "dk_right_translation_bound": 1e-12,
    "dk_dilation": 1e-12,
    "dk_rotation": 1e-12,
    "frame_orthonormal": 1e-12,
    "frame_contact": 1e-12,
    "plane_grad_z_norm": 1e-10,
    "gauge_gradient_norm": 1e-10,
    "gauge_sigma_rotation": 1e-10,
    "phi_gradient_rotation": 1e-12,
    "hamiltonian_expansion": 1e-10,
    "divergence_radial_vs_general": 1e-8,
    "rho_phi_split": 1e-10,
    "arctan_sigma_energy": 1e-8,
    "monotonicity_identity": 1e-8,
}


def _rel(a, b):
    return np.abs(a - b) / np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))


def identity_suite(seed: int = 0, n: int = 1000, tol: float | dict | None = None) -> dict:
    """Pointwise identities of the group, the frame and the monotonicity identity."""
    tols = dict(DEFAULT_TOLERANCES)
    if isinstance(tol, dict):
        tols.update(tol)
    elif tol is not None:
        tols = {k: float(tol) for k in tols}
    rng = np.random.default_rng(seed)
    p, q, r = (rng.normal(size=(n, 5)) for _ in range(3))
    zero = np.zeros(5)
    vals: dict[str, float] = {}

    pq_r = hb.group_mul(hb.group_mul(p, q), r)
    p_qr = hb.group_mul(p, hb.group_mul(q, r))
    vals["group_associativity"] = float(np.max(_rel(pq_r, p_qr)))
    vals["group_neutral"] = float(np.max(np.abs(hb.group_mul(p, zero) - p)))
    vals["group_inverse"] = float(np.max(np.abs(hb.group_mul(p, hb.group_inv(p)))))

    dpq = hb.koranyi_dist(p, q)
    dqr = hb.koranyi_dist(q, r)
    dpr = hb.koranyi_dist(p, r)
    vals["dk_nonnegative"] = float(max(0.0, -np.min(dpq)))
    vals["dk_symmetry"] = float(np.max(_rel(dpq, hb.koranyi_dist(q, p))))
    vals["dk_triangle"] = float(max(0.0, np.max(dpr - dpq - dqr)))
    vals["dk_left_invariance"] = float(np.max(_rel(hb.koranyi_dist(hb.group_mul(r, p), hb.group_mul(r, q)), dpq)))
    right = hb.koranyi_dist(hb.group_mul(p, r), hb.group_mul(q, r))
    bound = dpq + 2.0 * np.sqrt(np.sqrt(hb.rho2(r))) * np.sqrt(dpq)
    vals["dk_right_translation_bound"] = float(max(0.0, np.max(right - bound)))
    t = rng.uniform(-3.0, 3.0, size=n)
    dil = hb.koranyi_dist(hb.dilate(t, p), hb.dilate(t, q))
    vals["dk_dilation"] = float(np.max(_rel(dil, np.abs(t) * dpq)))
    A = hb.UnitaryRotation.haar(rng)
    vals["dk_rotation"] = float(np.max(_rel(hb.koranyi_dist(hb.rotate(A, p), hb.rotate(A, q)), dpq)))

    fr = hb.frame_at(p)
    gram = np.einsum("nik,njk->nij", hb.to_frame(p[:, None, :], fr), hb.to_frame(p[:, None, :], fr))
    vals["frame_orthonormal"] = float(np.max(np.abs(gram - np.eye(5))))
    alpha = hb.contact_form(p[:, None, :], fr)
    vals["frame_contact"] = float(max(np.max(np.abs(alpha[:, :4])), np.max(np.abs(alpha[:, 4] + 1.0))))

    planes = hm.random_legendrian_planes(p, rng)
    vals["plane_grad_z_norm"] = float(np.max(np.abs(hm.grad_z_norm2(planes) - 2.0)))

    gauge_field = translated_field("gauge", zero)
    hg = horizontal_from_euclidean(p, gauge_field.gradient(p))[:, :4]
    s = hb.rho2(p)
    rr = hb.gauge(p)
    vals["gauge_gradient_norm"] = float(np.max(np.abs(np.sum(hg**2, axis=-1) - s / rr**2)))
    lhs = rr[:, None] ** 3 * hb.complex_structure(hg)
    rhs = 0.5 * s[:, None] ** 2 * hb.hgrad_sigma(p)
    vals["gauge_sigma_rotation"] = float(np.max(_rel(lhs, rhs)))
    phi_field = translated_field("phi", zero)
    hphi = horizontal_from_euclidean(p, phi_field.gradient(p))[:, :4]
    vals["phi_gradient_rotation"] = float(np.max(np.abs(hphi - hb.complex_structure(0.5 * hb.hgrad_rho2(p)))))

    F = hm.random_bump_hamiltonian(rng, zero, 3.0)
    w_frame = hm.hamiltonian_vector(F, p)
    w_amb = hm.hamiltonian_vector_expansion(F, p)
    vals["hamiltonian_expansion"] = float(np.max(np.abs(hb.from_frame(p, w_frame) - w_amb)))

    chi = make_cutoff("bump")
    centres = rng.normal(size=(n, 5))
    x = hb.group_mul(hb.group_inv(centres), p)
    keep = hb.rho2(x) > 0.04
    cplanes = hm.LegendrianPlane(p[keep], planes.frame[keep])
    xr = hb.gauge(x[keep])
    a = xr * rng.uniform(0.45, 1.5, size=xr.shape)
    eps = a * rng.uniform(0.2, 0.95, size=xr.shape)
    radial = hm.monotonicity_radial(1.0, 0.4, chi)
    local = hm.LegendrianPlane(x[keep], planes.frame[keep])
    div_general = hm.plane_divergence(radial.to_scalar_field(), local)
    div_radial = hm.plane_divergence_radial(radial, local)
    vals["divergence_radial_vs_general"] = float(np.max(np.abs(div_general - div_radial)))
    vals["rho_phi_split"] = float(np.max(hm.rho_phi_split_residual(cplanes, centres[keep])))
    vals["arctan_sigma_energy"] = float(np.max(hm.arctan_sigma_energy_residual(cplanes, centres[keep])))
    vals["monotonicity_identity"] = float(np.max(hm.magic_identity_residual(cplanes, a, eps, chi, centres[keep])))

    checks = [{"name": k, "value": vals[k], "tol": tols[k], "passed": bool(vals[k] <= tols[k])}
              for k in DEFAULT_TOLERANCES]
    return {"seed": seed, "n": n, "checks": checks, "passed": all(c["passed"] for c in checks)}


def _ladder(hs, errs, order: float = ORDER) -> dict:
    errs = [float(e) for e in errs]
    ok = converges_at_order(hs, errs, order)
    nz = [e for e in errs if e > 0]
    slope = log_slope(hs, errs) if len(nz) == len(errs) else math.nan
    return {"values": errs, "slope": slope, "passed": bool(ok)}


def _support_chart(mapping, centre, F, half, n_probe=241, margin=0.35, bounds=None):
    """Rectangle around the parameter-space support of F o mapping, padded by ``margin``."""
    t1 = np.linspace(centre[0] - half[0], centre[0] + half[0], n_probe)
    t2 = np.linspace(centre[1] - half[1], centre[1] + half[1], n_probe)
    X1, X2 = np.meshgrid(t1, t2, indexing="ij")
    vals = F(mapping(X1, X2))
    m = vals != 0.0
    lo = np.array([X1[m].min(), X2[m].min()])
    hi = np.array([X1[m].max(), X2[m].max()])
    pad = margin * (hi - lo) + 2.0 * np.array([t1[1] - t1[0], t2[1] - t2[0]])
    lo, hi = lo - pad, hi + pad
    if bounds is not None:
        lo = np.maximum(lo, bounds[0])
        hi = np.minimum(hi, bounds[1])
    return lo, hi


def _stationarity_ladder(mapping, make_surface, Fs, centre, half, ns, bounds=None) -> list:
    out = []
    for F in Fs:
        lo, hi = _support_chart(mapping, centre, F, half, bounds=bounds)
        res, hs = [], []
        for n in ns:
            g = GridDomain.rectangle(n, n, hi - lo, lo)
            res.append(abs(sf.stationarity_residual(make_surface(g), F)))
            hs.append(g.spacing)
        out.append({"chart": [lo.tolist(), hi.tolist()], **_ladder(hs, res)})
    return out


def clifford_study(ns=(32, 64, 128), seed: int = 0, n_hamiltonians: int = 5, radius: float = 1.5) -> dict:
    hs, leg, conf, iso, energy = [], [], [], [], []
    for n in ns:
        g = GridDomain.torus(n, n, sf.clifford_lattice(1))
        S = sf.clifford_torus_lift(g)
        hs.append(g.spacing)
        leg.append(sf.legendrian_residual(S))
        conf.append(sf.conformality_residual(S))
        iso.append(sf.metric_defect(S))
        energy.append(sf.dirichlet_energy(S))
    target = 8.0 * math.pi**2
    rng = np.random.default_rng(seed)
    centre = np.array([1.0, 2.0]) + rng.uniform(-0.5, 0.5, 2)
    Fs = [hm.random_bump_hamiltonian(rng, sf.clifford_map(*(centre + rng.uniform(-0.2, 0.2, 2))), radius)
          for _ in range(n_hamiltonians)]

    def make(g):
        return sf.clifford_torus_lift(g)

    stat = _stationarity_ladder(lambda a, b: sf.clifford_map(a, b), make, Fs, centre,
                                (math.pi, math.pi), ns)
    return {
        "family": "clifford",
        "grid": list(ns),
        "spacing": hs,
        "legendrian_residual": _ladder(hs, leg),
        "conformality_residual": _ladder(hs, conf),
        "isometry_defect": _ladder(hs, iso),
        "dirichlet_energy": {"values": energy, "target": target,
                             "rel_error": abs(energy[-1] - target) / target},
        "stationarity": stat,
    }


def sw_cone_study(p: int, q: int, ns=(32, 64, 128), seed: int = 0, n_hamiltonians: int = 5,
                  radius: float = 0.5, stationarity_ns=(64, 128, 256)) -> dict:
    hs, conf, lift, pde, wind, ang = [], [], [], [], [], []
    for n in ns:
        g = GridDomain.rectangle(n, n, (1.0, 2.0 * math.pi), (-0.5, 0.0))
        S = sf.sw_cone(p, q, g)
        hs.append(g.spacing)
        conf.append(sf.conformality_residual(S))
        lifted = sf.legendrian_lift(S.u[..., :4], g)
        lift.append(float(np.max(np.abs(lifted.surface.u[..., 4]))))
        la = sf.lagrangian_angle(S)
        wind.append(sf.winding_number(la.g[n // 2, :-1]))
        x = g.nodes()
        ang.append(float(np.nanmax(np.abs(la.g - sf.sw_cone_angle(p, q, x[..., 1])))))
        pde.append(sf.flat_pde_residual(S.u[..., :4], -(p - q) * x[..., 1], g))
    rng = np.random.default_rng(seed)
    centre = np.array([0.0, rng.uniform(0.0, 2.0 * math.pi)])

    def mapping(s, th):
        w1, w2 = sf.sw_cone_complex(p, q, s, th)
        return np.stack([w1.real, w1.imag, w2.real, w2.imag, np.zeros_like(w1.real)], axis=-1)

    Fs = [hm.random_bump_hamiltonian(rng, mapping(*(centre + rng.uniform(-0.05, 0.05, 2))), radius)
          for _ in range(n_hamiltonians)]
    # the bump is only resolved from n = 64 on, so this ladder starts one level finer
    stat = _stationarity_ladder(mapping, lambda g: sf.sw_cone(p, q, g), Fs, centre,
                                (1.5, math.pi), stationarity_ns)
    return {
        "family": "sw_cone", "p": p, "q": q, "grid": list(ns), "spacing": hs,
        "conformality_residual": _ladder(hs, conf),
        "phi_lift": _ladder(hs, lift),
        "angle_error": _ladder(hs, ang),
        "flat_pde_residual": _ladder(hs, pde),
        "maslov_winding": {"values": wind, "target": p - q, "passed": bool(wind[-1] == p - q)},
        "stationarity_grid": list(stationarity_ns),
        "stationarity": stat,
    }


def appendix_study(k: int, ns=(64, 128, 256), pde_ns=(32, 64, 128), hs=(0.1, 0.05, 0.025)) -> dict:
    t, gamma = sp.family_parameters(k)
    g11, g22, g12 = sp.appendix_metric_closed_form(t)
    e11, e22, e12 = [], [], []
    for h in hs:
        m = sp.appendix_metric_check(t, h)
        e11.append(abs(m[0] - g11))
        e22.append(abs(m[1] - g22))
        e12.append(abs(m[2] - g12))
    target = 4.0 * math.pi**2 / gamma
    areas = [sp.appendix_area(k, sp.appendix_grid(k, n, n)) for n in ns]
    pde, pde_h = [], []
    for n in pde_ns:
        g = GridDomain.rectangle(n, n, (2.0 * math.pi, 2.0 * math.pi))
        pde.append(sp.appendix_pde_residual(t, g))
        pde_h.append(g.spacing)
    leg, leg_h = [], []
    for n in pde_ns:
        g = sp.appendix_grid(k, n, n // 4)
        leg.append(sp.sphere_legendrian_residual(sp.appendix_torus(k, g)))
        leg_h.append(g.spacing)
    return {
        "family": "appendix", "k": k, "t": t, "gamma": gamma,
        "metric": {"closed_form": [g11, g22, g12], "h": list(hs),
                   "g11": _ladder(hs, e11), "g22": _ladder(hs, e22),
                   "g12_max": float(max(e12))},
        "area": {"grid": list(ns), "values": areas, "target": target,
                 "rel_error": abs(areas[-1] - target) / target},
        "pde_residual": {"grid": list(pde_ns), **_ladder(pde_h, pde)},
        "legendrian_residual": {"grid": list(pde_ns), **_ladder(leg_h, leg)},
    }


def counterexample_study(ks=(2, 4, 8, 16, 32), panel=None, n_theta: int = 64, per_unit: int = 16,
                         method: str = "spectral", limit_resolution: int = 32) -> dict:
    names = list(sp.OBSERVABLES) if panel is None else list(panel)
    if not names:
        raise ValueError("the observable panel is empty")
    obs = [sp.OBSERVABLES[nm] for nm in names]
    limits = {o.name: sp.limit_pairing(o, limit_resolution, limit_resolution, limit_resolution) for o in obs}
    rows = []
    for k in ks:
        grid = sp.appendix_grid(k, n_theta, per_unit)
        for o in obs:
            v = sp.counterexample_pairing(k, o, grid, method)
            rows.append({"k": int(k), "observable_id": o.name, "pairing": v,
                         "limit": limits[o.name], "abs_err": abs(v - limits[o.name])})
    fits = {}
    for o in obs:
        errs = [r["abs_err"] for r in rows if r["observable_id"] == o.name]
        slope = log_slope(ks, errs) if all(e > 0 for e in errs) else math.nan
        fits[o.name] = {"slope": slope, "passed": bool(abs(slope + 1.0) <= 0.3)}
    mass = [{"k": int(k), "pairing": r["pairing"], "closed_form": 4.0 * math.pi**2 / sp.family_parameters(k)[1]}
            for k in ks for r in rows if r["k"] == k and r["observable_id"] == "one"]
    return {"k": list(ks), "panel": names, "method": method, "rows": rows, "fits": fits, "mass": mass,
            "limit_mass": 4.0 * math.pi**2}


# ---------------------------------------------------------------- densities

def builtin_varifold(name: str, resolution: int | None = None):
    """(varifold, centre, target density, default radii) for a named family."""
    if name == "plane":
        v = families.flat_plane(extent=3.0, n=resolution or 241)
        return v, np.zeros(5), 2.0 * math.pi, np.geomspace(1.2, 0.3, 8)
    if name == "plane2":
        v = families.flat_plane(extent=3.0, n=resolution or 241, multiplicity=2)
        return v, np.zeros(5), 4.0 * math.pi, np.geomspace(1.2, 0.3, 8)
    if name == "clifford-blowdown":
        v = families.clifford_blowdown(phi_max=3.0, n_phi=resolution or 3001)
        return v, np.zeros(5), 2.0 * math.pi**2, np.geomspace(1.2, 0.4, 6)
    if name == "sw-cone":
        n = resolution or 256
        g = GridDomain.rectangle(2 * n, n, (4.0, 2.0 * math.pi), (-3.0, 0.0))
        v = sf.induced_varifold(sf.sw_cone(2, 1, g))
        return v, np.zeros(5), None, np.geomspace(1.5, 0.1, 8)
    if name == "clifford":
        n = resolution or 256
        g = GridDomain.torus(n, 2 * n, sf.clifford_lattice(2))
        S = sf.clifford_torus_lift(g)
        v = sf.induced_varifold(S)
        centre = S.u[n // 2, n]
        return v, centre, 2.0 * math.pi, np.geomspace(1.0, 0.25, 7)
    raise ValueError(f"unknown built-in varifold {name!r}")


BUILTINS = ("plane", "plane2", "clifford-blowdown", "sw-cone", "clifford")


def density_study(v, centre, radii, target: float | None = None, chi_kind: str = "bump") -> dict:
    chi = make_cutoff(chi_kind)
    rep = monotonicity_scan(v, centre, np.asarray(radii, dtype=float), chi)
    out = rep.to_dict()
    out["cutoff"] = chi_kind
    out["total_mass"] = v.total_mass()
    out["samples"] = len(v)
    if target is not None:
        out["target"] = target
        best = out["extrapolated_density"]
        if not math.isfinite(best):
            best = out["smallest_radius_value"]
        out["rel_error"] = abs(best - target) / target
    return out
