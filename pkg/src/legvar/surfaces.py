"""Sampled parametrised Legendrian surfaces in H^2 and their functionals."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from . import heisenberg as hb
from .errors import DomainError, NotLegendrianError
from .fields import ScalarField
from .grid import GridDomain, grid_derivatives, laplacian
from .varifold import DiscreteVarifold

log = logging.getLogger(__name__)

DEGENERATE_RATIO = 1e-14


@dataclass
class GridSurface:
    """Nodes u (n1, n2, 5) with multiplicity N (n1, n2).

    ``phi_jumps`` records the phi increment across each torus period; a
    nonzero entry marks that direction's seam as a cut.
    """

    domain: GridDomain
    u: np.ndarray
    N: np.ndarray | None = None
    phi_jumps: tuple = (0.0, 0.0)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.u.shape != (self.domain.n1, self.domain.n2, 5):
            raise DomainError(f"u must have shape {(self.domain.n1, self.domain.n2, 5)}, got {self.u.shape}")
        if not np.all(np.isfinite(self.u)):
            raise DomainError("surface nodes must be finite")
        if self.N is None:
            self.N = np.ones((self.domain.n1, self.domain.n2), dtype=int)
        self.N = np.asarray(self.N)
        if self.N.shape != self.u.shape[:2] or np.any(self.N < 1):
            raise DomainError("multiplicity must be a positive integer per node")
        self.phi_jumps = tuple(float(j) for j in self.phi_jumps)

    def _jumps(self):
        out = []
        for j in self.phi_jumps:
            v = np.zeros(5)
            v[4] = j
            out.append(v)
        return out

    def derivatives(self, method: str = "fd") -> np.ndarray:
        """Ambient partials (2, n1, n2, 5)."""
        return grid_derivatives(self.u, self.domain, self._jumps(), method)

    def frame_derivatives(self, method: str = "fd") -> np.ndarray:
        """Partials as frame coefficients at u(node), (2, n1, n2, 5)."""
        return hb.to_frame(self.u[None], self.derivatives(method))

    def weights(self) -> np.ndarray:
        return self.domain.weights()

    def seam_mask(self, width: int = 2) -> np.ndarray:
        """Nodes within ``width`` cells of a torus cut (a period with a phi jump)."""
        m = np.zeros(self.u.shape[:2], dtype=bool)
        if self.domain.is_torus:
            if self.phi_jumps[0] != 0.0:
                m[:width + 1, :] = m[-width - 1:, :] = True
            if self.phi_jumps[1] != 0.0:
                m[:, :width + 1] = m[:, -width - 1:] = True
        return m

    # serialisation
    def to_json(self) -> str:
        return json.dumps({
            "domain": self.domain.to_dict(),
            "phi_jumps": list(self.phi_jumps),
            "u": self.u.reshape(-1, 5).tolist(),
            "N": self.N.reshape(-1).astype(int).tolist(),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GridSurface":
        d = json.loads(text)
        dom = GridDomain.from_dict(d["domain"])
        u = np.asarray(d["u"], dtype=float).reshape(dom.n1, dom.n2, 5)
        N = np.asarray(d["N"], dtype=int).reshape(dom.n1, dom.n2)
        return cls(dom, u, N, tuple(d.get("phi_jumps", (0.0, 0.0))))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x1", "x2", "z1", "z2", "z3", "z4", "phi", "N"])
        x = self.domain.nodes().reshape(-1, 2)
        for xi, ui, ni in zip(x, self.u.reshape(-1, 5), self.N.reshape(-1)):
            w.writerow([repr(float(c)) for c in xi] + [repr(float(c)) for c in ui] + [int(ni)])
        return buf.getvalue()


class SurfaceReport(NamedTuple):
    legendrian_residual: float
    conformality_residual: float
    dirichlet_energy: float
    notes: str = ""

    def to_dict(self) -> dict:
        return dict(self._asdict())


def _mask_array(S: GridSurface, mask) -> np.ndarray:
    if mask is None:
        return np.ones(S.u.shape[:2], dtype=bool)
    if callable(mask):
        return np.asarray(mask(S.domain.nodes(), S.u), dtype=bool)
    m = np.asarray(mask, dtype=bool)
    if m.shape != S.u.shape[:2]:
        raise DomainError("mask does not match the grid")
    return m


def legendrian_residual(S: GridSurface, method: str = "fd") -> float:
    d = S.derivatives(method)
    return float(np.max(np.abs(hb.contact_form(S.u[None], d))))


def energy_density(S: GridSurface, method: str = "fd") -> np.ndarray:
    """|grad u|^2 in the left-invariant metric, per node."""
    c = S.frame_derivatives(method)
    return np.sum(c * c, axis=(0, -1))


def conformality_residual(S: GridSurface, method: str = "fd") -> float:
    c = S.frame_derivatives(method)
    e11 = np.sum(c[0] ** 2, axis=-1)
    e22 = np.sum(c[1] ** 2, axis=-1)
    e12 = np.sum(c[0] * c[1], axis=-1)
    tot = e11 + e22
    live = tot > DEGENERATE_RATIO * np.max(tot, initial=0.0)
    if not np.any(live):
        return 0.0
    return float(np.max((np.abs(e11 - e22) + 2.0 * np.abs(e12))[live] / tot[live]))


def metric_defect(S: GridSurface, method: str = "fd") -> float:
    """max |g_ij - delta_ij| of the pulled-back metric."""
    c = S.frame_derivatives(method)
    g = np.einsum("a...k,b...k->...ab", c, c)
    return float(np.max(np.abs(g - np.eye(2))))


def dirichlet_energy(S: GridSurface, mask=None, method: str = "fd") -> float:
    m = _mask_array(S, mask)
    dens = energy_density(S, method)
    return float(np.sum((S.N * 0.5 * dens * S.weights())[m]))


def surface_report(S: GridSurface, notes: str = "") -> SurfaceReport:
    return SurfaceReport(legendrian_residual(S), conformality_residual(S), dirichlet_energy(S), notes)


def euclidean_sandwich(S: GridSurface, method: str = "fd") -> tuple[float, float, float]:
    """(int |grad u|_H, int |grad u|_R5, (1 + sup|v|^2) int |grad u|_H) with |.|_H horizontal."""
    d = S.derivatives(method)
    w = S.weights() * S.N
    h = np.sqrt(np.sum(d[..., :4] ** 2, axis=(0, -1)))
    e = np.sqrt(np.sum(d**2, axis=(0, -1)))
    vmax = float(np.max(np.sum(S.u[..., :4] ** 2, axis=-1)))
    ih = float(np.sum(h * w))
    return ih, float(np.sum(e * w)), (1.0 + vmax) * ih


class LiftResult(NamedTuple):
    surface: GridSurface
    defect: float


def _liouville_increment(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact integral of v1 dv2 - v2 dv1 + v3 dv4 - v4 dv3 along the segment a -> b."""
    return hb.symplectic(a, b)


def legendrian_lift(v, domain: GridDomain, base_value: float = 0.0,
                    defect_tol: float = 0.05) -> LiftResult:
    """Integrate the Liouville form over the grid to a phi coordinate.

    ``v`` is (n1, n2, 4) real or (n1, n2, 2) complex. The lift follows row 0 and
    then every column. The defect is the largest plaquette circulation divided
    by the plaquette's projected symplectic scale; a defect above
    ``defect_tol`` means the map is not exact Lagrangian at this resolution.
    """
    if domain.is_torus:
        raise DomainError("Legendrian lifts are built on rectangles")
    v = np.asarray(v)
    if np.iscomplexobj(v):
        v = np.stack([v[..., 0].real, v[..., 0].imag, v[..., 1].real, v[..., 1].imag], axis=-1)
    v = np.asarray(v, dtype=float)
    if v.shape != (domain.n1, domain.n2, 4):
        raise DomainError("v must have shape (n1, n2, 4) or (n1, n2, 2) complex")
    di = _liouville_increment(v[:-1, :], v[1:, :])  # along axis 0
    dj = _liouville_increment(v[:, :-1], v[:, 1:])  # along axis 1
    phi = np.empty(v.shape[:2])
    phi[0, 0] = base_value
    phi[1:, 0] = base_value + np.cumsum(di[:, 0])
    phi[:, 1:] = phi[:, :1] + np.cumsum(dj, axis=1)
    circ = di[:, :-1] + dj[1:, :] - di[:, 1:] - dj[:-1, :]
    # symplectic scale of a plaquette: product of its edge lengths
    ei = np.linalg.norm(v[1:, :] - v[:-1, :], axis=-1)
    ej = np.linalg.norm(v[:, 1:] - v[:, :-1], axis=-1)
    scale = 0.5 * (ei[:, :-1] + ei[:, 1:]) * 0.5 * (ej[:-1, :] + ej[1:, :])
    live = scale > 0
    defect = float(np.max(np.abs(circ[live]) / scale[live])) if np.any(live) else 0.0
    if defect > defect_tol:
        raise NotLegendrianError(
            f"plaquette circulation {defect:.3g} of the plaquette scale exceeds {defect_tol:g}: "
            "the map is not exact Lagrangian")
    u = np.concatenate([v, phi[..., None]], axis=-1)
    return LiftResult(GridSurface(domain, u), defect)


def induced_varifold(S: GridSurface, mask=None, method: str = "fd") -> DiscreteVarifold:
    """One weighted plane per masked immersed node."""
    m = _mask_array(S, mask)
    c = S.frame_derivatives(method)
    dens = np.sum(c * c, axis=(0, -1))
    live = dens > DEGENERATE_RATIO * np.max(dens, initial=0.0)
    skipped = int(np.sum(m & ~live))
    if skipped:
        log.info("induced_varifold: skipped %d degenerate nodes", skipped)
    sel = m & live
    a = c[0][sel][:, :4]
    b = c[1][sel][:, :4]
    e1 = a / np.linalg.norm(a, axis=-1, keepdims=True)
    b = b - np.sum(b * e1, axis=-1, keepdims=True) * e1
    e2 = b / np.linalg.norm(b, axis=-1, keepdims=True)
    w = (S.N * 0.5 * dens * S.weights())[sel]
    return DiscreteVarifold(S.u[sel], np.stack([e1, e2], axis=1), w)


def stationarity_residual(S: GridSurface, F: ScalarField, mask=None, collar: int = 2,
                          support_tol: float = 1e-12, method: str = "fd") -> float:
    """Discrete first variation of the energy along the Hamiltonian field W_F.

    The integrand is the expanded form
        sum_j grad u_{2j} . grad(F_{z_{2j-1}} o u) - grad u_{2j-1} . grad(F_{z_{2j}} o u)
        - sum_k grad u_k . grad(u_k F_phi o u)
    with derivatives of F from its analytic Hessian and grid differences of u.
    """
    m = _mask_array(S, mask)
    # F must vanish with its gradient near the edge of the integration region
    edge = S.domain.boundary_collar(collar) | S.seam_mask(collar)
    if not np.all(m):
        inner = m.copy()
        for _ in range(collar + 1):
            g = inner.copy()
            g[1:] &= inner[:-1]
            g[:-1] &= inner[1:]
            g[:, 1:] &= inner[:, :-1]
            g[:, :-1] &= inner[:, 1:]
            inner = g
        edge |= m & ~inner
    u = S.u
    edge_pts = u[edge & m]
    if edge_pts.size:
        f = np.abs(F(edge_pts))
        g = np.max(np.abs(F.gradient(edge_pts)), axis=-1)
        worst = float(np.max(f + g))
        if worst > support_tol:
            raise DomainError(
                f"Hamiltonian does not vanish near the boundary of the integration region "
                f"(|F| + |grad F| = {worst:.3g})")
    d = S.derivatives(method)  # (2, n1, n2, 5)
    g = F.gradient(u)
    H = F.hessian(u)
    # grad(G_a o u) for G_a = dF/dx_a: sum_m H[a, m] grad u_m
    dG = np.einsum("...am,d...m->d...a", H, d)  # (2, n1, n2, 5)
    dz = d[..., :4]
    val = np.zeros(u.shape[:2])
    for j in range(2):
        val += np.sum(dz[..., 2 * j + 1] * dG[..., 2 * j], axis=0)
        val -= np.sum(dz[..., 2 * j] * dG[..., 2 * j + 1], axis=0)
    fphi = g[..., 4]
    for k in range(4):
        grad_ukf = dz[..., k] * fphi + u[..., k] * dG[..., 4]
        val -= np.sum(dz[..., k] * grad_ukf, axis=0)
    return float(np.sum((S.N * val * S.weights())[m]))


def flat_pde_residual(v, beta, domain: GridDomain) -> float:
    """max |lap v + i grad(beta).grad(v)| + max |lap beta| over interior nodes."""
    v = np.asarray(v)
    if not np.iscomplexobj(v):
        v = v[..., 0::2] + 1j * v[..., 1::2]
    beta = np.asarray(beta, dtype=float)
    lv = laplacian(v, domain)
    lb = laplacian(beta, domain)
    gv = grid_derivatives(v, domain)
    gb = grid_derivatives(beta, domain)
    r = lv + 1j * (gb[0][..., None] * gv[0] + gb[1][..., None] * gv[1])
    inner = np.isfinite(lb)
    res = np.max(np.linalg.norm(r[inner], axis=-1))
    return float(res + np.max(np.abs(lb[inner])))


class LagrangianAngle(NamedTuple):
    g: np.ndarray        # unit complex angle per node (nan where degenerate)
    modulus: np.ndarray  # |pullback / area| before normalisation
    valid: np.ndarray    # immersed nodes


def lagrangian_angle(S: GridSurface, method: str = "fd") -> LagrangianAngle:
    """e^{i beta} with v*(dw1 ^ dw2) = e^{i beta} dvol."""
    d = S.derivatives(method)[..., :4]
    w1 = d[..., 0] + 1j * d[..., 1]
    w2 = d[..., 2] + 1j * d[..., 3]
    pull = w1[0] * w2[1] - w1[1] * w2[0]
    e11 = np.sum(d[0] ** 2, axis=-1)
    e22 = np.sum(d[1] ** 2, axis=-1)
    e12 = np.sum(d[0] * d[1], axis=-1)
    area = np.sqrt(np.maximum(e11 * e22 - e12**2, 0.0))
    valid = area > np.sqrt(DEGENERATE_RATIO) * np.max(area, initial=0.0)
    g = np.full(pull.shape, np.nan + 1j * np.nan)
    mod = np.full(pull.shape, np.nan)
    g[valid] = pull[valid] / area[valid]
    mod[valid] = np.abs(g[valid])
    g[valid] = g[valid] / mod[valid]
    return LagrangianAngle(g, mod, valid)


def winding_number(values: np.ndarray) -> int:
    """Degree of a closed loop of unit complex numbers (last joins first)."""
    ang = np.angle(np.asarray(values))
    steps = np.diff(np.concatenate([ang, ang[:1]]))
    steps = (steps + np.pi) % (2.0 * np.pi) - np.pi
    return int(np.rint(np.sum(steps) / (2.0 * np.pi)))


# ---------------------------------------------------------------- families


def sw_cone_complex(p: int, q: int, s, theta, scale: float = 1.0):
    """(w1, w2) of the cone in the chart r = e^s."""
    m = np.sqrt(p * q)
    amp = scale * np.exp(m * np.asarray(s)) / np.sqrt(p + q)
    return (amp * np.sqrt(q) * np.exp(1j * p * np.asarray(theta)),
            1j * amp * np.sqrt(p) * np.exp(-1j * q * np.asarray(theta)))


def sw_cone(p: int, q: int, grid: GridDomain, scale: float = 1.0) -> GridSurface:
    """Schoen-Wolfson cone on a rectangle in (s = log r, theta), inside {phi = 0}."""
    if int(p) != p or int(q) != q or p < 1 or q < 1:
        raise DomainError("cone parameters p, q must be integers >= 1")
    if grid.is_torus:
        raise DomainError("the cone chart is a rectangle in (log r, theta)")
    x = grid.nodes()
    w1, w2 = sw_cone_complex(p, q, x[..., 0], x[..., 1], scale)
    u = np.stack([w1.real, w1.imag, w2.real, w2.imag, np.zeros_like(w1.real)], axis=-1)
    S = GridSurface(grid, u)
    S.meta.update({"family": "sw_cone", "p": int(p), "q": int(q), "scale": float(scale)})
    return S


def sw_cone_angle(p: int, q: int, theta) -> np.ndarray:
    """Closed-form Lagrangian angle of the cone in the (s, theta) chart."""
    return np.exp(1j * (p - q) * np.asarray(theta))


CLIFFORD_L1 = (2.0 * np.pi, -2.0 * np.pi)


def clifford_lattice(n: int) -> np.ndarray:
    return np.array([CLIFFORD_L1, (2.0 * np.pi * n, 2.0 * np.pi * n)])


def clifford_map(x1, x2) -> np.ndarray:
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    return np.stack([np.cos(x1), np.sin(x1), np.cos(x2), np.sin(x2), x1 + x2], axis=-1)


def clifford_torus_lift(grid: GridDomain) -> GridSurface:
    """Legendrian lift of the Clifford torus.

    On a torus grid the lattice must be 2 pi Z(1, -1) + 2 pi Z(n, n); the phi
    coordinate then jumps by 4 pi n across the second period.
    """
    x = grid.nodes()
    jumps = (0.0, 0.0)
    if grid.is_torus:
        lat = np.asarray(grid.lattice)
        l1, l2 = lat[0], lat[1]
        ok1 = np.allclose(l1, CLIFFORD_L1, atol=1e-12) or np.allclose(l1, -np.asarray(CLIFFORD_L1), atol=1e-12)
        n = l2[0] / (2.0 * np.pi)
        ok2 = abs(l2[0] - l2[1]) < 1e-12 and n >= 1 - 1e-12 and abs(n - round(n)) < 1e-12
        if not (ok1 and ok2):
            raise DomainError("Clifford lift needs the lattice 2 pi Z(1,-1) + 2 pi Z(n,n), n >= 1")
        jumps = (0.0, 4.0 * np.pi * round(n))
    S = GridSurface(grid, clifford_map(x[..., 0], x[..., 1]), phi_jumps=jumps)
    S.meta["family"] = "clifford"
    return S


def clifford_plane_frame(x1, x2) -> np.ndarray:
    """Frame coefficients of the Clifford tangent plane at parameter (x1, x2)."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    fr = np.zeros(np.broadcast_shapes(x1.shape, x2.shape) + (2, 4))
    fr[..., 0, 0] = -np.sin(x1)
    fr[..., 0, 1] = np.cos(x1)
    fr[..., 1, 2] = -np.sin(x2)
    fr[..., 1, 3] = np.cos(x2)
    return fr


def surface_from_function(grid: GridDomain, fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
                          **kwargs) -> GridSurface:
    x = grid.nodes()
    return GridSurface(grid, fn(x[..., 0], x[..., 1]), **kwargs)
