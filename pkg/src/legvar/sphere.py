"""Legendrian tori in S^5 collapsing onto a Hopf fibre.

Points of S^5 are complex arrays (..., 3); real tangent vectors are either
complex (..., 3) or real (..., 6) arrays laid out as (Re w1, Im w1, ..., Im w3).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DomainError
from .grid import GridDomain, grid_derivatives, laplacian


def as_sphere_points(w, tol: float = 1e-12) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    if w.shape[-1:] != (3,):
        raise DomainError("sphere points have 3 complex coordinates")
    if np.any(np.abs(np.linalg.norm(w, axis=-1) - 1.0) > tol):
        raise DomainError("point is not on the unit sphere")
    return w


def to_real(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    out = np.empty(v.shape[:-1] + (6,))
    out[..., 0::2] = v.real
    out[..., 1::2] = v.imag
    return out


def to_complex(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def contact_alpha_s5(w, v, tol: float = 1e-10) -> np.ndarray:
    """alpha(v) = sum x_{2l-1} dx_{2l} - x_{2l} dx_{2l-1} = Im <w, v>."""
    w = np.asarray(w, dtype=complex)
    v = np.asarray(v)
    if not np.iscomplexobj(v) and v.shape[-1] == 6:
        v = to_complex(v)
    v = np.asarray(v, dtype=complex)
    herm = np.sum(np.conj(w) * v, axis=-1)
    if np.any(np.abs(herm.real) > tol * np.maximum(1.0, np.linalg.norm(v, axis=-1))):
        raise DomainError("vector is not tangent to the sphere")
    return herm.imag


def hopf_map(w, tol: float = 1e-14) -> np.ndarray:
    """Representative of [w] whose first non-negligible coordinate is real positive."""
    w = np.asarray(w, dtype=complex)
    w = w / np.linalg.norm(w, axis=-1, keepdims=True)
    mag = np.abs(w)
    first = np.argmax(mag > tol, axis=-1)
    lead = np.take_along_axis(w, first[..., None], axis=-1)
    return w * (np.conj(lead) / np.abs(lead))


def affine_chart(w) -> np.ndarray:
    """[w1, w2, w3] -> (w1/w3, w2/w3)."""
    w = np.asarray(w, dtype=complex)
    return w[..., :2] / w[..., 2:3]


# ------------------------------------------------------------- the family

def appendix_map(t: float, theta, phi) -> np.ndarray:
    """u_t(theta, phi) in the original coordinates."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    g2 = 1.0 + 2.0 * t * t
    kappa = 2.0 * t * t / g2
    pre = np.exp(-1j * kappa * phi) / np.sqrt(g2)
    return np.stack([pre * t * np.exp(1j * (theta + phi)),
                     pre * t * np.exp(-1j * (theta - phi)),
                     pre * np.ones_like(theta)], axis=-1)


def appendix_map_conformal(t: float, theta, phi_t) -> np.ndarray:
    """u_t in the conformal coordinates (theta, phi_t = phi / sqrt(1 + 2t^2))."""
    return appendix_map(t, theta, np.sqrt(1.0 + 2.0 * t * t) * np.asarray(phi_t, dtype=float))


def family_parameters(k: int) -> tuple[float, float]:
    """(t_k, gamma_k) for k >= 2."""
    if int(k) != k or k < 2:
        raise DomainError("k must be an integer >= 2")
    return 1.0 / math.sqrt(2.0 * k - 2.0), math.sqrt(k / (k - 1.0))


def appendix_periods(k: int) -> tuple[float, float]:
    _, gamma = family_parameters(k)
    return 2.0 * math.pi, 2.0 * math.pi * k / gamma


def appendix_grid(k: int, n_theta: int = 64, per_unit: int = 16) -> GridDomain:
    """Torus grid on the fundamental domain, about ``per_unit`` nodes per phi-period of the fast modes."""
    p1, p2 = appendix_periods(k)
    return GridDomain.torus(n_theta, per_unit * k, [(p1, 0.0), (0.0, p2)])


@dataclass
class SphereSurface:
    domain: GridDomain
    u: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=complex)
        if self.u.shape != (self.domain.n1, self.domain.n2, 3):
            raise DomainError("node array does not match the grid")
        if np.any(np.abs(np.linalg.norm(self.u, axis=-1) - 1.0) > 1e-12):
            raise DomainError("sphere surface nodes must have unit norm")

    def derivatives(self, method: str = "fd") -> np.ndarray:
        """Complex partials (2, n1, n2, 3)."""
        return grid_derivatives(self.u, self.domain, method=method)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["theta", "phi", "re_w1", "im_w1", "re_w2", "im_w2", "re_w3", "im_w3"])
        x = self.domain.nodes().reshape(-1, 2)
        for xi, ui in zip(x, self.u.reshape(-1, 3)):
            wr.writerow([repr(float(c)) for c in xi] + [repr(float(c)) for c in to_real(ui)])
        return buf.getvalue()


def appendix_torus(k: int, grid: GridDomain) -> SphereSurface:
    t, gamma = family_parameters(k)
    if not grid.is_torus:
        raise DomainError("u_k lives on a torus grid")
    want = np.array([[2.0 * math.pi, 0.0], [0.0, 2.0 * math.pi * k / gamma]])
    if not np.allclose(np.asarray(grid.lattice), want, rtol=1e-12, atol=1e-12):
        raise DomainError(f"u_k needs the periods (2 pi, 2 pi k / gamma_k) = ({want[0, 0]:.6g}, {want[1, 1]:.6g})")
    x = grid.nodes()
    u = appendix_map_conformal(t, x[..., 0], x[..., 1])
    return SphereSurface(grid, u, {"t": t, "k": int(k), "gamma": gamma})


def sphere_legendrian_residual(S: SphereSurface, method: str = "fd") -> float:
    d = S.derivatives(method)
    return float(np.max(np.abs(np.sum(np.conj(S.u)[None] * d, axis=-1).imag)))


def sphere_conformality_residual(S: SphereSurface, method: str = "fd") -> float:
    d = to_real(S.derivatives(method))
    e11 = np.sum(d[0] ** 2, axis=-1)
    e22 = np.sum(d[1] ** 2, axis=-1)
    e12 = np.sum(d[0] * d[1], axis=-1)
    return float(np.max((np.abs(e11 - e22) + 2.0 * np.abs(e12)) / (e11 + e22)))


def fibre_distance(S: SphereSurface) -> float:
    """Hausdorff-type distance of the image to the circle {(0, 0, e^{i a})}: max over nodes."""
    w = S.u
    r3 = np.abs(w[..., 2])
    return float(np.max(np.sqrt(np.abs(w[..., 0]) ** 2 + np.abs(w[..., 1]) ** 2 + (1.0 - r3) ** 2)))


def appendix_area(k: int, grid: GridDomain | None = None, mask=None, method: str = "fd") -> float:
    """Half the Dirichlet energy of u_k over its fundamental domain."""
    grid = appendix_grid(k) if grid is None else grid
    S = appendix_torus(k, grid)
    d = to_real(S.derivatives(method))
    dens = 0.5 * np.sum(d**2, axis=(0, -1))
    w = grid.weights()
    if mask is not None:
        m = np.asarray(mask(grid.nodes()) if callable(mask) else mask, dtype=bool)
        return float(np.sum((dens * w)[m]))
    return float(np.sum(dens * w))


def appendix_metric_closed_form(t: float) -> tuple[float, float, float]:
    g2 = 1.0 + 2.0 * t * t
    return 2.0 * t * t / g2, 2.0 * t * t / g2**2, 0.0


def appendix_metric_check(t: float, h: float = 1e-2, n_nodes: int = 64, seed: int = 0):
    """Finite-difference metric of u_t in (theta, phi), averaged over random nodes."""
    if not 0.0 < t <= 1.0:
        raise DomainError("t must lie in (0, 1]")
    rng = np.random.default_rng(seed)
    th = rng.uniform(0.0, 2.0 * math.pi, n_nodes)
    ph = rng.uniform(0.0, 2.0 * math.pi, n_nodes)
    dth = to_real((appendix_map(t, th + h, ph) - appendix_map(t, th - h, ph)) / (2.0 * h))
    dph = to_real((appendix_map(t, th, ph + h) - appendix_map(t, th, ph - h)) / (2.0 * h))
    return (float(np.mean(np.sum(dth * dth, axis=-1))),
            float(np.mean(np.sum(dph * dph, axis=-1))),
            float(np.mean(np.sum(dth * dph, axis=-1))))


def appendix_beta_slope(t: float) -> float:
    """d beta_t / d phi_t."""
    return (2.0 * t * t - 2.0) / math.sqrt(1.0 + 2.0 * t * t)


def appendix_pde_residual(t: float, grid: GridDomain,
                          perturbation: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None) -> float:
    """max |lap u + u |grad u|^2 + i grad(beta_t) . grad u| over interior nodes.

    ``grid`` is a rectangle (or axis-aligned torus) in (theta, phi_t).
    ``perturbation(theta, phi_t)`` is added to u before differencing.
    """
    x = grid.nodes()
    u = appendix_map_conformal(t, x[..., 0], x[..., 1])
    if perturbation is not None:
        u = u + perturbation(x[..., 0], x[..., 1])
    lap = laplacian(u, grid)
    d = grid_derivatives(u, grid)
    grad2 = np.sum(np.abs(d) ** 2, axis=(0, -1))
    res = lap + u * grad2[..., None] + 1j * appendix_beta_slope(t) * d[1]
    inner = np.all(np.isfinite(lap), axis=-1)
    return float(np.max(np.linalg.norm(res[inner], axis=-1)))


# ------------------------------------------------------------ observables

@dataclass(frozen=True)
class TestObservable:
    """Continuous test function of (plane projector (..., 6, 6), base point (..., 3) complex)."""

    __test__ = False  # not a pytest class

    name: str
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def __call__(self, P, w) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.fn(P, w), dtype=float), np.shape(w)[:-1])


def plane_projector(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto span{e1, e2} (real 6-vectors, orthonormalised here)."""
    a = e1 / np.linalg.norm(e1, axis=-1, keepdims=True)
    b = e2 - np.sum(e2 * a, axis=-1, keepdims=True) * a
    b = b / np.linalg.norm(b, axis=-1, keepdims=True)
    return a[..., :, None] * a[..., None, :] + b[..., :, None] * b[..., None, :]


_P_REF = np.zeros((6, 6))
_P_REF[0, 0] = _P_REF[2, 2] = 1.0


def _hs_gauss(P, w):
    return np.exp(-np.sum((P - _P_REF) ** 2, axis=(-1, -2)))


STANDARD_PANEL = (
    TestObservable("one", lambda P, w: np.ones(np.shape(w)[:-1])),
    TestObservable("w3_modsq", lambda P, w: np.abs(w[..., 2]) ** 2),
    TestObservable("re_w3_sq", lambda P, w: w[..., 2].real ** 2),
    TestObservable("plane_x1x1", lambda P, w: P[..., 0, 0]),
    TestObservable("fibre_tilt", lambda P, w: P[..., 4, 4] + P[..., 5, 5]),
    TestObservable("hs_gauss", _hs_gauss),
)

OBSERVABLES = {o.name: o for o in STANDARD_PANEL}


def counterexample_pairing(k: int, phi: TestObservable, grid: GridDomain | None = None,
                           method: str = "spectral") -> float:
    """Riemann sum of phi against the induced varifold of u_k.

    u_k is a trigonometric polynomial on its torus, so ``method="spectral"``
    gives exact tangents; ``method="fd"`` uses centred differences.
    """
    grid = appendix_grid(k) if grid is None else grid
    S = appendix_torus(k, grid)
    d = to_real(S.derivatives(method))
    dens = 0.5 * np.sum(d**2, axis=(0, -1))
    P = plane_projector(d[0], d[1])
    vals = phi(P, S.u)
    return float(np.sum(vals * dens * grid.weights()))


def limit_planes(tau, eta) -> tuple[np.ndarray, np.ndarray]:
    tau = np.asarray(tau, dtype=float)
    eta = np.asarray(eta, dtype=float)
    z = np.zeros_like(tau + eta)
    s = 1.0 / math.sqrt(2.0)
    e1 = s * np.stack([-np.sin(tau) + z, np.cos(tau) + z, np.sin(eta) + z, -np.cos(eta) + z, z, z], axis=-1)
    e2 = s * np.stack([-np.sin(tau) + z, np.cos(tau) + z, -np.sin(eta) + z, np.cos(eta) + z, z, z], axis=-1)
    return e1, e2


def rotate_phase(x: np.ndarray, alpha) -> np.ndarray:
    """Multiply every complex coordinate of a real 6-vector by e^{i alpha}."""
    return to_real(to_complex(x) * np.exp(1j * np.asarray(alpha))[..., None])


def limit_pairing(phi: TestObservable, n_tau: int = 32, n_eta: int = 32, n_alpha: int = 32) -> float:
    """Tensor trapezoid rule for the pairing with the limit measure on the Hopf fibre."""
    tau = 2.0 * math.pi * np.arange(n_tau) / n_tau
    eta = 2.0 * math.pi * np.arange(n_eta) / n_eta
    alpha = 2.0 * math.pi * np.arange(n_alpha) / n_alpha
    T, E, A = np.meshgrid(tau, eta, alpha, indexing="ij")
    e1, e2 = limit_planes(T, E)
    P = plane_projector(rotate_phase(e1, A), rotate_phase(e2, A))
    w = np.zeros(A.shape + (3,), dtype=complex)
    w[..., 2] = np.exp(1j * A)
    vals = phi(P, w)
    cell = (2.0 * math.pi) ** 3 / (n_tau * n_eta * n_alpha)
    return float(np.sum(2.0 * math.pi * vals) * cell / (4.0 * math.pi**2))
