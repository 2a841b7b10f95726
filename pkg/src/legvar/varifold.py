"""Discrete Legendrian varifolds and the monotone density quantity."""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from . import heisenberg as hb
from ._kernels import nearest_gauge, theta_terms
from .cutoff import CutoffProfile
from .errors import DiagnosticError, DomainError, ParseError
from .fields import ScalarField
from .hamiltonian import LegendrianPlane, plane_coeffs, plane_divergence

log = logging.getLogger(__name__)

CSV_HEADER = (
    ["b_z1", "b_z2", "b_z3", "b_z4", "b_phi"]
    + [f"Z1_{c}" for c in ("z1", "z2", "z3", "z4", "phi")]
    + [f"Z2_{c}" for c in ("z1", "z2", "z3", "z4", "phi")]
    + ["weight"]
)


class DiscreteVarifold:
    """Weighted Legendrian plane samples.

    base: (n, 5) points, frames: (n, 2, 4) horizontal frame coefficients,
    weights: (n,) positive reals.
    """

    def __init__(self, base, frames, weights):
        base = hb.as_points(np.atleast_2d(base), name="varifold base")
        frames = np.asarray(frames, dtype=float).reshape(-1, 2, 4)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if not (base.shape[0] == frames.shape[0] == weights.shape[0]):
            raise DomainError("base, frames and weights must have the same length")
        if np.any(~np.isfinite(weights)) or np.any(weights <= 0.0):
            raise DomainError("varifold weights must be positive and finite")
        self.base = base
        self.frames = frames
        self.weights = weights

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def planes(self) -> LegendrianPlane:
        return LegendrianPlane(self.base, self.frames)

    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def translate(self, q) -> "DiscreteVarifold":
        """Push forward under left translation by q."""
        return DiscreteVarifold(hb.group_mul(hb.as_points(q), self.base), self.frames, self.weights)

    def scale_weights(self, factor: float) -> "DiscreteVarifold":
        return DiscreteVarifold(self.base, self.frames, self.weights * factor)

    def __add__(self, other: "DiscreteVarifold") -> "DiscreteVarifold":
        return DiscreteVarifold(
            np.concatenate([self.base, other.base]),
            np.concatenate([self.frames, other.frames]),
            np.concatenate([self.weights, other.weights]),
        )

    def to_csv(self, path_or_buf=None) -> str | None:
        amb = self.planes.ambient()
        rows = np.concatenate([self.base, amb[:, 0, :], amb[:, 1, :], self.weights[:, None]], axis=1)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", encoding="utf-8") as fh:
                fh.write(text)
        return None

    @classmethod
    def from_csv(cls, path_or_buf, tol: float = 1e-8) -> "DiscreteVarifold":
        if hasattr(path_or_buf, "read"):
            text = path_or_buf.read()
        else:
            with open(path_or_buf, encoding="utf-8") as fh:
                text = fh.read()
        reader = csv.reader(io.StringIO(text))
        rows = []
        for lineno, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if lineno == 1 and row[0].strip() == CSV_HEADER[0]:
                if [c.strip() for c in row] != CSV_HEADER:
                    raise ParseError("unexpected header", lineno)
                continue
            if len(row) != len(CSV_HEADER):
                raise ParseError(f"expected {len(CSV_HEADER)} columns, got {len(row)}", lineno)
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise ParseError(f"non-numeric field ({exc})", lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("non-finite value", lineno)
            if vals[-1] <= 0.0:
                raise ParseError("weight must be positive", lineno)
            base = np.array(vals[0:5])
            c1 = hb.to_frame(base, np.array(vals[5:10]))
            c2 = hb.to_frame(base, np.array(vals[10:15]))
            if abs(c1[4]) > tol or abs(c2[4]) > tol:
                raise ParseError("plane vectors are not horizontal", lineno)
            plane = LegendrianPlane(base, np.stack([c1[:4], c2[:4]]))
            d = plane.defects()
            if d["orthonormality"] > tol or d["lagrangian"] > tol:
                raise ParseError("plane frame is not an orthonormal Legendrian pair", lineno)
            rows.append((base, plane.frame, vals[-1]))
        if not rows:
            raise ParseError("no samples found", None)
        return cls(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]),
                   np.array([r[2] for r in rows]))


def _local(v: DiscreteVarifold, q) -> np.ndarray:
    q = hb.as_points(q)
    return hb.group_mul(hb.group_inv(q), v.base)


def theta_profile(v: DiscreteVarifold, q, a: float, chi: CutoffProfile,
                  backend: str | None = None) -> tuple[float, float]:
    """(full, limit-integrand) sums at scale a."""
    if not a > 0.0:
        raise DomainError(f"scale must be positive, got {a}")
    x = _local(v, q)
    full, limit = theta_terms(x, v.frames, v.weights, a, chi.code, chi.norm, backend)
    return float(np.sum(full)), float(np.sum(limit))


def capital_theta(v: DiscreteVarifold, q, a: float, chi: CutoffProfile,
                  backend: str | None = None) -> float:
    return theta_profile(v, q, a, chi, backend)[0]


def sample_spacing(v: DiscreteVarifold, k: int = 8) -> float:
    """Median Koranyi distance to the nearest distinct sample base point."""
    pts = np.unique(v.base, axis=0)
    if pts.shape[0] < 2:
        return math.inf
    k = min(k, pts.shape[0])
    tree = cKDTree(pts)
    _, idx = tree.query(pts, k=k)
    d = nearest_gauge(pts, np.asarray(idx).reshape(pts.shape[0], -1))
    return float(np.median(d[np.isfinite(d)]))


@dataclass
class DensityReport:
    center: list
    radii: list
    theta_values: list
    limit_values: list
    valid: list
    extrapolated_density: float
    smallest_radius_value: float
    spread: float
    monotonicity_violation: float
    relative_violation: float
    radius_floor: float
    fit: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "center": [float(c) for c in self.center],
            "radii": [float(r) for r in self.radii],
            "theta_values": [float(t) for t in self.theta_values],
            "limit_values": [float(t) for t in self.limit_values],
            "valid": [bool(b) for b in self.valid],
            "extrapolated_density": float(self.extrapolated_density),
            "smallest_radius_value": float(self.smallest_radius_value),
            "spread": float(self.spread),
            "monotonicity_violation": float(self.monotonicity_violation),
            "relative_violation": float(self.relative_violation),
            "radius_floor": float(self.radius_floor),
            "fit": {k: float(x) for k, x in self.fit.items()},
        }


def _check_radii(radii) -> np.ndarray:
    radii = np.asarray(radii, dtype=float).reshape(-1)
    if radii.size == 0 or np.any(radii <= 0.0):
        raise DomainError("radii must be positive")
    if np.any(np.diff(radii) >= 0.0):
        raise DomainError("radii must be strictly decreasing")
    return radii


def _violation(theta: np.ndarray) -> float:
    if theta.size < 2:
        return 0.0
    # radii decrease along the list, so a violation is an increase
    return float(max(0.0, np.max(theta[1:] - theta[:-1])))


def _fit_power_law(a: np.ndarray, theta: np.ndarray) -> dict:
    """Fit theta(a) = theta0 + c a^alpha with alpha in [0.5, 2]."""
    scale = max(np.max(np.abs(theta)), 1e-300)
    amax = np.max(a)

    def resid(params):
        t0, c, alpha = params
        return (t0 + c * (a / amax) ** alpha - theta) / scale

    best = None
    for alpha0 in (0.5, 1.0, 2.0):
        sol = least_squares(resid, x0=[theta[-1], theta[0] - theta[-1], alpha0],
                            bounds=([-np.inf, -np.inf, 0.5], [np.inf, np.inf, 2.0]),
                            xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or sol.cost < best.cost:
            best = sol
    t0, c, alpha = best.x
    return {"theta0": float(t0), "c": float(c / amax**alpha), "alpha": float(alpha),
            "rms": float(np.sqrt(2.0 * best.cost / a.size) * scale)}


def monotonicity_scan(v: DiscreteVarifold, q, radii, chi: CutoffProfile,
                      floor_factor: float = 5.0, fit_count: int = 6,
                      backend: str | None = None, require_valid: int = 0) -> DensityReport:
    radii = _check_radii(radii)
    q = hb.as_points(q)
    spacing = sample_spacing(v)
    floor = floor_factor * spacing if math.isfinite(spacing) else 0.0
    valid = radii >= floor
    if int(np.sum(valid)) < require_valid:
        raise DiagnosticError(
            f"only {int(np.sum(valid))} radii above the sampling floor {floor:.4g}; need {require_valid}")
    theta = np.empty(radii.size)
    limit = np.empty(radii.size)
    for i, a in enumerate(radii):
        theta[i], limit[i] = theta_profile(v, q, a, chi, backend)
    tv = theta[valid]
    viol = _violation(tv)
    ref = abs(tv[0]) if tv.size else 0.0
    rel = viol / ref if ref > 0 else (0.0 if viol == 0 else math.inf)
    fit: dict = {}
    extrap = math.nan
    if tv.size >= 3:
        av = radii[valid][-fit_count:]
        th = tv[-fit_count:]
        if np.max(th) - np.min(th) <= 1e-12 * max(1.0, np.max(np.abs(th))):
            fit = {"theta0": float(np.mean(th)), "c": 0.0, "alpha": math.nan, "rms": 0.0}
        else:
            fit = _fit_power_law(av, th)
        extrap = fit["theta0"]
    smallest = float(tv[-1]) if tv.size else math.nan
    tail = tv[-fit_count:] if tv.size else tv
    spread = float(np.max(tail) - np.min(tail)) if tail.size else math.nan
    return DensityReport(
        center=list(q), radii=list(radii), theta_values=list(theta), limit_values=list(limit),
        valid=list(valid), extrapolated_density=extrap, smallest_radius_value=smallest,
        spread=spread, monotonicity_violation=viol, relative_violation=rel,
        radius_floor=floor, fit=fit,
    )


def density(v: DiscreteVarifold, q, chi: CutoffProfile, radii, **kwargs) -> DensityReport:
    """Density estimate at q from the monotone quantity over decreasing radii."""
    kwargs.setdefault("require_valid", 3)
    return monotonicity_scan(v, q, radii, chi, **kwargs)


def stationarity_pairing(v: DiscreteVarifold, F: ScalarField, method: str = "analytic") -> float:
    div = plane_divergence(F, v.planes, method=method)
    return float(np.sum(v.weights * div))


def _ball_masses(v: DiscreteVarifold, q, radii):
    r = hb.gauge(_local(v, q))
    return [float(np.sum(v.weights[r < rr])) for rr in radii], r


def mass_ratio_check(v: DiscreteVarifold, q, r: float, s: float) -> float:
    """(|v|(B_r)/r^2) / (|v|(B_2s minus B_s)/s^2)."""
    if not (0.0 < r <= 0.5 * s):
        raise DomainError("need 0 < r <= s/2")
    rq = hb.gauge(_local(v, q))
    ball = float(np.sum(v.weights[rq < r]))
    ann = float(np.sum(v.weights[(rq >= s) & (rq < 2.0 * s)]))
    if ball == 0.0:
        return 0.0
    if ann == 0.0:
        log.warning("annulus B_2s \\ B_s carries no mass; ratio undefined")
        return math.nan
    return (ball / r**2) / (ann / s**2)


def arctan_sigma_dirichlet(v: DiscreteVarifold, q, b: float, chi: CutoffProfile | None = None) -> float:
    """Sum of w |grad^P arctan(sigma_q)|^2 over samples with 0 < r_q < b."""
    x = _local(v, q)
    r = hb.gauge(x)
    sel = (r > 0.0) & (r < b)
    if not np.any(sel):
        return 0.0
    planes = LegendrianPlane(x[sel], v.frames[sel])
    c = plane_coeffs(hb.hgrad_arctan_sigma(x[sel]), planes)
    return float(np.sum(v.weights[sel] * np.sum(c * c, axis=-1)))
