"""Hamiltonian vector fields, Legendrian planes and plane-tangential calculus.

All functions broadcast over leading batch dimensions: a batch of planes is a
``LegendrianPlane`` whose ``base`` has shape (..., 5) and ``frame`` (..., 2, 4).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import heisenberg as hb
from .cutoff import CutoffProfile
from .errors import DomainError, NotLegendrianError
from .fields import (ARCTAN_SIGMA, GAUGE, RadialField, ScalarField,
                     horizontal_from_euclidean, translate_field)


@dataclass(frozen=True)
class LegendrianPlane:
    """Base point plus an orthonormal horizontal 2-frame (frame coefficients)."""

    base: np.ndarray
    frame: np.ndarray

    def __post_init__(self):
        base = hb.as_points(self.base, name="plane base")
        frame = np.asarray(self.frame, dtype=float)
        if frame.shape[-2:] != (2, 4):
            raise DomainError(f"plane frame must have trailing shape (2, 4), got {frame.shape}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)

    @classmethod
    def from_ambient(cls, base, z1, z2, tol: float = 1e-10) -> "LegendrianPlane":
        base = hb.as_points(base)
        c1 = hb.to_frame(base, z1)
        c2 = hb.to_frame(base, z2)
        if np.any(np.abs(c1[..., 4]) > tol) or np.any(np.abs(c2[..., 4]) > tol):
            raise NotLegendrianError("frame vectors are not horizontal")
        plane = cls(base, np.stack([c1[..., :4], c2[..., :4]], axis=-2))
        plane.validate(tol)
        return plane

    def ambient(self) -> np.ndarray:
        """Frame vectors as ambient R^5 vectors, shape (..., 2, 5)."""
        c = np.zeros(self.frame.shape[:-1] + (5,))
        c[..., :4] = self.frame
        return hb.from_frame(self.base[..., None, :], c)

    def defects(self) -> dict:
        f = self.frame
        gram = np.einsum("...ik,...jk->...ij", f, f)
        lag = np.einsum("...k,...k->...", hb.complex_structure(f[..., 0, :]), f[..., 1, :])
        return {
            "orthonormality": float(np.max(np.abs(gram - np.eye(2)), initial=0.0)),
            "lagrangian": float(np.max(np.abs(lag), initial=0.0)),
            "grad_z_norm": float(np.max(np.abs(grad_z_norm2(self) - 2.0), initial=0.0)),
        }

    def validate(self, tol: float = 1e-10) -> None:
        d = self.defects()
        if d["orthonormality"] > tol:
            raise NotLegendrianError(f"frame is not orthonormal (defect {d['orthonormality']:.3g})")
        if d["lagrangian"] > tol:
            raise NotLegendrianError(f"plane is not Lagrangian (defect {d['lagrangian']:.3g})")

    def rebase(self, angle: float) -> "LegendrianPlane":
        """Same plane, frame rotated by ``angle`` inside the plane."""
        c, s = np.cos(angle), np.sin(angle)
        rot = np.array([[c, -s], [s, c]])
        return LegendrianPlane(self.base, np.einsum("ij,...jk->...ik", rot, self.frame))

    def translate(self, q) -> "LegendrianPlane":
        """Left translation by q; frame coefficients are left-invariant."""
        return LegendrianPlane(hb.group_mul(q, self.base), self.frame)

    def __len__(self) -> int:
        return 1 if self.base.ndim == 1 else self.base.shape[0]


def random_legendrian_plane(p, seed) -> LegendrianPlane:
    """Haar-random U(2) image of span{e1, e3}, lifted horizontally to p."""
    rng = np.random.default_rng(seed)
    a = hb.UnitaryRotation.haar(rng).matrix
    return LegendrianPlane(hb.as_points(p), a[:, [0, 2]].T.copy())


def random_legendrian_planes(points, rng: np.random.Generator) -> LegendrianPlane:
    """One Haar-random Legendrian plane at each of ``points`` (n, 5)."""
    points = hb.as_points(points)
    n = points.shape[0]
    g = rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (d / np.abs(d))[:, None, :]
    # columns of q are the images of e1 and e3 as complex 2-vectors
    frame = np.empty((n, 2, 4))
    for i in range(2):
        frame[:, i, 0] = q[:, 0, i].real
        frame[:, i, 1] = q[:, 0, i].imag
        frame[:, i, 2] = q[:, 1, i].real
        frame[:, i, 3] = q[:, 1, i].imag
    return LegendrianPlane(points, frame)


def plane_coeffs(hgrad: np.ndarray, plane: LegendrianPlane) -> np.ndarray:
    """Project horizontal gradient coefficients (..., 4) onto the plane frame."""
    return np.einsum("...ik,...k->...i", plane.frame, hgrad[..., :4])


def plane_gradient(f: ScalarField, plane: LegendrianPlane) -> np.ndarray:
    g = f.gradient(plane.base)
    return plane_coeffs(horizontal_from_euclidean(plane.base, g), plane)


def grad_z_norm2(plane: LegendrianPlane) -> np.ndarray:
    """sum_k |grad^P z_k|^2, which is 2 for any orthonormal horizontal frame."""
    return np.einsum("...ik,...ik->...", plane.frame, plane.frame)


def hamiltonian_vector(F: ScalarField, p) -> np.ndarray:
    """Frame coefficients (..., 5) of W_F, where 2 W_F = J grad^H F - 2 F d_phi."""
    p = hb.as_points(p)
    h = horizontal_from_euclidean(p, F.gradient(p))
    out = np.empty(h.shape)
    out[..., :4] = 0.5 * hb.complex_structure(h[..., :4])
    out[..., 4] = -F(p)
    return out


def hamiltonian_vector_expansion(F: ScalarField, p) -> np.ndarray:
    """Ambient components of W_F from the coordinate expansion."""
    p = hb.as_points(p)
    g = F.gradient(p)
    z = p[..., :4]
    out = np.empty(p.shape)
    gz = g[..., :4]
    out[..., 0] = -gz[..., 1]
    out[..., 1] = gz[..., 0]
    out[..., 2] = -gz[..., 3]
    out[..., 3] = gz[..., 2]
    out[..., :4] -= g[..., 4:5] * z
    out[..., 4] = np.einsum("...k,...k->...", z, gz) - 2.0 * F(p)
    return 0.5 * out


def plane_divergence(F: ScalarField, plane: LegendrianPlane, method: str = "analytic",
                     h: float = 1e-4) -> np.ndarray:
    """div_P W_F from tangential derivatives of the frame coefficients of W_F.

    ``method="analytic"`` uses F's Hessian; ``method="fd"`` differentiates the
    frame coefficients of W_F along the plane by centred differences.
    """
    base = plane.base
    c = plane.frame
    zeros = np.zeros(c.shape[:-1] + (1,))
    amb = hb.from_frame(base[..., None, :], np.concatenate([c, zeros], axis=-1))
    if method == "analytic":
        g = F.gradient(base)
        H = F.hessian(base)
        B = hb.frame_at(base)[..., :4, :]
        # Z(G_k) for G_k = (frame_k F): B H Z + (J Z_z) F_phi
        zg = np.einsum("...km,...mn,...in->...ik", B, H, amb)
        zg = zg + hb.complex_structure(c) * g[..., None, 4:5]
        return -0.5 * np.einsum("...ik,...ik->...", zg, hb.complex_structure(c))
    if method == "fd":
        step = h * (1.0 + hb.gauge(base))[..., None, None]
        xp = base[..., None, :] + step * amb
        xm = base[..., None, :] - step * amb
        wp = hamiltonian_vector(F, xp)[..., :4]
        wm = hamiltonian_vector(F, xm)[..., :4]
        dw = (wp - wm) / (2.0 * step)
        return np.einsum("...ik,...ik->...", dw, c)
    raise ValueError(f"unknown method {method!r}")


def plane_divergence_radial(F: RadialField, plane: LegendrianPlane) -> np.ndarray:
    """div_P W_F for F = F(rho^2, phi) through the radial formula."""
    p = plane.base
    _, fs, fp, fss, fsp, fpp = F.evaluate(p)
    g_r2 = plane_coeffs(hb.hgrad_rho2(p), plane)
    g_phi = plane_coeffs(hb.hgrad_phi(p), plane)
    grad_fs = fss[..., None] * g_r2 + fsp[..., None] * g_phi
    grad_fp = fsp[..., None] * g_r2 + fpp[..., None] * g_phi
    two_div = (2.0 * np.sum(grad_fs * g_phi, axis=-1) - grad_z_norm2(plane) * fp
               - 0.5 * np.sum(grad_fp * g_r2, axis=-1))
    return 0.5 * two_div


def _profile_derivs(r, a, eps, chi: CutoffProfile):
    """c(r) = chi(r/a) - chi(r/eps) and its first two r-derivatives."""
    c0 = chi(r / a) - chi(r / eps)
    c1 = chi.d1(r / a) / a - chi.d1(r / eps) / eps
    c2 = chi.d2(r / a) / a**2 - chi.d2(r / eps) / eps**2
    return np.asarray(c0, dtype=float), c1, c2


def monotonicity_radial(a: float, eps: float, chi: CutoffProfile) -> RadialField:
    """F(s, phi) = (chi(r/a) - chi(r/eps)) arctan(sigma) with its partials."""
    if not np.all((0.0 < np.asarray(eps)) & (np.asarray(eps) < np.asarray(a))):
        raise DomainError(f"need 0 < eps < a, got eps={eps}, a={a}")

    def partials(s, phi):
        r, rs, rp, rss, rsp, rpp = GAUGE.partials(s, phi)
        A, As, Ap, Ass, Asp, App = ARCTAN_SIGMA.partials(s, phi)
        c0, c1, c2 = _profile_derivs(r, a, eps, chi)
        F = c0 * A
        Fs = c1 * rs * A + c0 * As
        Fp = c1 * rp * A + c0 * Ap
        Fss = c2 * rs * rs * A + c1 * rss * A + 2.0 * c1 * rs * As + c0 * Ass
        Fsp = c2 * rs * rp * A + c1 * rsp * A + c1 * rs * Ap + c1 * rp * As + c0 * Asp
        Fpp = c2 * rp * rp * A + c1 * rpp * A + 2.0 * c1 * rp * Ap + c0 * App
        return F, Fs, Fp, Fss, Fsp, Fpp

    return RadialField(partials, name="monotonicity")


def monotonicity_hamiltonian(q, a: float, eps: float, chi: CutoffProfile) -> ScalarField:
    """(chi(r_q/a) - chi(r_q/eps)) arctan(sigma_q) centred at q.

    The returned field carries ``radial`` (the untranslated profile) and ``center``.
    """
    radial = monotonicity_radial(a, eps, chi)
    field = translate_field(radial.to_scalar_field(), q)
    field.radial = radial
    field.center = hb.as_points(q)
    return field


def _local_quantities(plane: LegendrianPlane, q):
    x = plane.base if q is None else hb.group_mul(hb.group_inv(q), plane.base)
    s = hb.rho2(x)
    if np.any(s <= 0.0):
        raise DomainError("identity requires base points off the phi-axis")
    return x, s


def magic_identity_terms(plane: LegendrianPlane, a: float, eps: float, chi: CutoffProfile, q=None):
    """Left and right sides of the pointwise monotonicity identity."""
    x, s = _local_quantities(plane, q)
    radial = monotonicity_radial(a, eps, chi)
    _, fs, fp, fss, fsp, fpp = radial.evaluate(x)
    g_r2 = plane_coeffs(hb.hgrad_rho2(x), plane)
    g_phi = plane_coeffs(hb.hgrad_phi(x), plane)
    gz2 = grad_z_norm2(plane)
    grad_fp = fsp[..., None] * g_r2 + fpp[..., None] * g_phi
    grad_fs = fss[..., None] * g_r2 + fsp[..., None] * g_phi
    lhs = (0.5 * np.sum(g_r2 * grad_fp, axis=-1) + gz2 * fp
           - 2.0 * np.sum(g_phi * grad_fs, axis=-1))

    r = hb.gauge(x)
    phi = x[..., 4]
    A = hb.arctan_sigma(x)
    g_r = plane_coeffs(hb.hgrad_gauge(x), plane)
    g_A = plane_coeffs(hb.hgrad_arctan_sigma(x), plane)
    c0, c1, c2 = _profile_derivs(r, a, eps, chi)
    # gradient of r^-3 c'(r) A along the plane
    inner = ((-3.0 * c1 / r**4 + c2 / r**3) * A)[..., None] * g_r + (c1 / r**3)[..., None] * g_A
    rhs = (2.0 * np.sum(g_r**2, axis=-1) / r * c1
           + gz2 * (2.0 * phi / r**3) * c1 * A
           - 0.5 * r**4 * np.sum(g_A * inner, axis=-1)
           + 2.0 * np.sum(g_A**2, axis=-1) * c0)
    return lhs, rhs


def magic_identity_residual(plane: LegendrianPlane, a: float, eps: float, chi: CutoffProfile,
                            q=None) -> np.ndarray:
    lhs, rhs = magic_identity_terms(plane, a, eps, chi, q)
    return np.abs(lhs - rhs)


def rho_phi_split_residual(plane: LegendrianPlane, q=None) -> np.ndarray:
    """| rho^2 |grad^P z|^2 / 2 - rho^2 |grad^P rho|^2 - |grad^P phi|^2 |."""
    x, s = _local_quantities(plane, q)
    g_rho = plane_coeffs(hb.hgrad_rho2(x), plane) / (2.0 * np.sqrt(s))[..., None]
    g_phi = plane_coeffs(hb.hgrad_phi(x), plane)
    lhs = 0.5 * s * grad_z_norm2(plane)
    rhs = s * np.sum(g_rho**2, axis=-1) + np.sum(g_phi**2, axis=-1)
    return np.abs(lhs - rhs)


def arctan_sigma_energy_residual(plane: LegendrianPlane, q=None) -> np.ndarray:
    """Residual of the identity expressing 2|grad^P arctan sigma|^2 through rho^2, phi and r."""
    x, s = _local_quantities(plane, q)
    phi = x[..., 4]
    r = hb.gauge(x)
    r4 = r**4
    g_r2 = plane_coeffs(hb.hgrad_rho2(x), plane)
    g_phi = plane_coeffs(hb.hgrad_phi(x), plane)
    g_r = plane_coeffs(hb.hgrad_gauge(x), plane)
    g_A = plane_coeffs(hb.hgrad_arctan_sigma(x), plane)
    g_s_over = g_r2 / r4[..., None] - (4.0 * s / r**5)[..., None] * g_r
    g_phi_over = g_phi / r4[..., None] - (4.0 * phi / r**5)[..., None] * g_r
    lhs = (np.sum(g_r2 * g_s_over, axis=-1) + 2.0 * grad_z_norm2(plane) * s / r4
           + 4.0 * np.sum(g_phi * g_phi_over, axis=-1))
    rhs = 2.0 * np.sum(g_A**2, axis=-1)
    return np.abs(lhs - rhs)


def bump_hamiltonian(center, radius: float, coeffs=None) -> ScalarField:
    """Smooth Hamiltonian supported in the Koranyi ball B(center, radius).

    F(x) = (c0 + c . y) psi(r(y)^4 / radius^4) with y = center^{-1} * x,
    psi(t) = exp(-1/(1 - t)) on [0, 1). r^4 is a polynomial, so F is smooth.
    """
    center = hb.as_points(center)
    coeffs = np.array([1.0, 0, 0, 0, 0, 0]) if coeffs is None else np.asarray(coeffs, dtype=float)
    if coeffs.shape != (6,):
        raise DomainError("bump coefficients are (c0, c_z1..c_z4, c_phi)")
    R4 = float(radius) ** 4
    c0, cl = coeffs[0], coeffs[1:]

    def parts(y):
        z = y[..., :4]
        phi = y[..., 4]
        s = np.einsum("...i,...i->...", z, z)
        t = (s * s + 4.0 * phi * phi) / R4
        inside = t < 1.0
        om = np.where(inside, 1.0 - t, 1.0)
        psi = np.where(inside, np.exp(-1.0 / om), 0.0)
        dpsi = np.where(inside, -psi / om**2, 0.0)
        ddpsi = np.where(inside, psi * (1.0 / om**4 - 2.0 / om**3), 0.0)
        L = c0 + y @ cl
        gq = np.empty(y.shape)
        gq[..., :4] = 4.0 * s[..., None] * z / R4
        gq[..., 4] = 8.0 * phi / R4
        return z, s, psi, dpsi, ddpsi, L, gq

    def value(y):
        _, _, psi, _, _, L, _ = parts(y)
        return L * psi

    def grad(y):
        _, _, psi, dpsi, _, L, gq = parts(y)
        return psi[..., None] * cl + (L * dpsi)[..., None] * gq

    def hess(y):
        z, s, psi, dpsi, ddpsi, L, gq = parts(y)
        hq = np.zeros(y.shape + (5,))
        hq[..., :4, :4] = 4.0 * (s[..., None, None] * np.eye(4) + 2.0 * z[..., :, None] * z[..., None, :]) / R4
        hq[..., 4, 4] = 8.0 / R4
        cross = dpsi[..., None, None] * (cl[:, None] * gq[..., None, :] + gq[..., :, None] * cl[None, :])
        return cross + L[..., None, None] * (ddpsi[..., None, None] * gq[..., :, None] * gq[..., None, :]
                                             + dpsi[..., None, None] * hq)

    local = ScalarField(value, grad, hess, name="bump")
    field = translate_field(local, center)
    field.center = center
    field.radius = float(radius)
    return field


def random_bump_hamiltonian(rng: np.random.Generator, center, radius: float) -> ScalarField:
    coeffs = np.concatenate([[1.0 + rng.uniform(-0.5, 0.5)], rng.normal(scale=1.0 / radius, size=5)])
    return bump_hamiltonian(center, radius, coeffs)
