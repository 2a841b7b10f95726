"""Closed-form primitives of the Heisenberg group H^2 = C^2 x R.

Points are float arrays of shape (..., 5) laid out as ``[z1, z2, z3, z4, phi]``.
Tangent vectors are usually carried as frame coefficients of shape (..., 5)
in the orthonormal frame (X1, Y1, X2, Y2, d_phi); the first four entries are
the horizontal part.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError

_J = np.array(
    [[0.0, -1.0, 0.0, 0.0],
     [1.0, 0.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, -1.0],
     [0.0, 0.0, 1.0, 0.0]]
)


def as_points(p, *, name: str = "point") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape[-1:] != (5,):
        raise DomainError(f"{name} must have trailing dimension 5, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite components")
    return arr


def hpoint(z, phi: float = 0.0) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    return as_points(np.concatenate([z, [phi]]))


def complex_structure(v: np.ndarray) -> np.ndarray:
    """Multiply (..., 4) real coordinates of C^2 by i."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    out[..., 2] = -v[..., 3]
    out[..., 3] = v[..., 2]
    return out


def symplectic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """sum_j a_{2j-1} b_{2j} - a_{2j} b_{2j-1} on (..., 4) arrays."""
    return (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
            + a[..., 2] * b[..., 3] - a[..., 3] * b[..., 2])


def group_mul(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1:] != (5,) or q.shape[-1:] != (5,):
        raise DomainError(f"group elements have 5 coordinates, got shapes {p.shape} and {q.shape}")
    z = p[..., :4] + q[..., :4]
    phi = p[..., 4] + q[..., 4] + symplectic(p[..., :4], q[..., :4])
    return np.concatenate([z, phi[..., None]], axis=-1)


def group_inv(p) -> np.ndarray:
    return -np.asarray(p, dtype=float)


def rho2(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.einsum("...i,...i->...", p[..., :4], p[..., :4])


def gauge(p) -> np.ndarray:
    """Folland-Koranyi gauge, r^4 = |z|^4 + 4 phi^2."""
    p = np.asarray(p, dtype=float)
    s = rho2(p)
    return np.sqrt(np.sqrt(s * s + 4.0 * p[..., 4] ** 2))


def koranyi_dist(p, q) -> np.ndarray:
    return gauge(group_mul(group_inv(p), q))


def dilate(t: float, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = p.copy()
    t = np.asarray(t, dtype=float)
    out[..., :4] *= t[..., None]
    out[..., 4] *= t * t
    return out


class UnitaryRotation:
    """An element of U(2) acting on R^4 = C^2 by a real 4x4 matrix."""

    def __init__(self, matrix, tol: float = 1e-12):
        a = np.asarray(matrix, dtype=float)
        if a.shape != (4, 4):
            raise DomainError(f"rotation matrix must be 4x4, got {a.shape}")
        if np.max(np.abs(a.T @ a - np.eye(4))) > tol:
            raise DomainError("rotation matrix is not orthogonal")
        if np.max(np.abs(a @ _J - _J @ a)) > tol:
            raise DomainError("rotation matrix does not commute with the complex structure")
        self.matrix = a

    @classmethod
    def from_complex(cls, u) -> "UnitaryRotation":
        u = np.asarray(u, dtype=complex)
        if u.shape != (2, 2):
            raise DomainError("complex unitary must be 2x2")
        a = np.zeros((4, 4))
        for r in range(2):
            for c in range(2):
                x, y = u[r, c].real, u[r, c].imag
                a[2 * r:2 * r + 2, 2 * c:2 * c + 2] = [[x, -y], [y, x]]
        return cls(a, tol=1e-10)

    @classmethod
    def haar(cls, rng: np.random.Generator) -> "UnitaryRotation":
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q, r = np.linalg.qr(g)
        d = np.diagonal(r)
        q = q * (d / np.abs(d))
        return cls.from_complex(q)

    @classmethod
    def identity(cls) -> "UnitaryRotation":
        return cls(np.eye(4))


def rotate(A: UnitaryRotation, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = p.copy()
    out[..., :4] = p[..., :4] @ A.matrix.T
    return out


def frame_at(p) -> np.ndarray:
    """Rows X1, Y1, X2, Y2, d_phi in ambient R^5 coordinates, shape (..., 5, 5)."""
    p = np.asarray(p, dtype=float)
    z = p[..., :4]
    f = np.zeros(p.shape[:-1] + (5, 5))
    for k in range(4):
        f[..., k, k] = 1.0
    f[..., 0, 4] = -z[..., 1]
    f[..., 1, 4] = z[..., 0]
    f[..., 2, 4] = -z[..., 3]
    f[..., 3, 4] = z[..., 2]
    f[..., 4, 4] = 1.0
    return f


def contact_form(p, v) -> np.ndarray:
    """alpha(v) = -dphi(v) + sum_j z_{2j-1} dz_{2j} - z_{2j} dz_{2j-1}."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    return -v[..., 4] + symplectic(p[..., :4], v[..., :4])


def to_frame(p, v) -> np.ndarray:
    """Ambient vector at p -> frame coefficients."""
    v = np.asarray(v, dtype=float)
    out = v.copy()
    out[..., 4] = -contact_form(p, v)
    return out


def from_frame(p, c) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    c = np.asarray(c, dtype=float)
    out = c.copy()
    out[..., 4] = c[..., 4] + symplectic(p[..., :4], c[..., :4])
    return out


def metric(p, u, v) -> np.ndarray:
    """Inner product of two ambient vectors at p in the left-invariant metric."""
    return np.einsum("...i,...i->...", to_frame(p, u), to_frame(p, v))


def jh(c, tol: float = 1e-10) -> np.ndarray:
    """Complex structure on horizontal frame coefficients (..., 5) or (..., 4)."""
    c = np.asarray(c, dtype=float)
    if c.shape[-1] == 5:
        if np.any(np.abs(c[..., 4]) > tol):
            raise DomainError("jh expects a horizontal vector")
        out = np.zeros_like(c)
        out[..., :4] = complex_structure(c[..., :4])
        return out
    if c.shape[-1] != 4:
        raise DomainError("jh expects 4 or 5 frame coefficients")
    return complex_structure(c)


def arctan_sigma(p) -> np.ndarray:
    """arctan(2 phi / rho^2) extended to +-pi/2 on the punctured phi-axis."""
    p = np.asarray(p, dtype=float)
    s = rho2(p)
    if np.any((s == 0.0) & (p[..., 4] == 0.0)):
        raise DomainError("arctan_sigma is undefined at the origin")
    return np.arctan2(2.0 * p[..., 4], s)


# Horizontal gradients (first four frame coefficients) and d_phi derivatives of
# the model fields. They are smooth off the origin, including on the phi-axis.

def hgrad_rho2(p) -> np.ndarray:
    return 2.0 * np.asarray(p, dtype=float)[..., :4]


def hgrad_phi(p) -> np.ndarray:
    return complex_structure(np.asarray(p, dtype=float)[..., :4])


def hgrad_gauge(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    z = p[..., :4]
    s = rho2(p)[..., None]
    phi = p[..., 4][..., None]
    r = gauge(p)[..., None]
    return (s * z + 2.0 * phi * complex_structure(z)) / r**3


def hgrad_arctan_sigma(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    z = p[..., :4]
    s = rho2(p)[..., None]
    phi = p[..., 4][..., None]
    r4 = (s * s + 4.0 * phi * phi)
    return (2.0 * s * complex_structure(z) - 4.0 * phi * z) / r4


def hgrad_sigma(p) -> np.ndarray:
    """Horizontal gradient of sigma = 2 phi / rho^2 (off the phi-axis)."""
    p = np.asarray(p, dtype=float)
    z = p[..., :4]
    s = rho2(p)[..., None]
    if np.any(s == 0.0):
        raise DomainError("sigma is singular on the phi-axis")
    phi = p[..., 4][..., None]
    return (2.0 * s * complex_structure(z) - 4.0 * phi * z) / s**2


def dphi_gauge(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return 2.0 * p[..., 4] / gauge(p) ** 3


def dphi_arctan_sigma(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    s = rho2(p)
    return 2.0 * s / (s * s + 4.0 * p[..., 4] ** 2)
