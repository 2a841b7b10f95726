"""Built-in sampled varifolds with known densities."""
from __future__ import annotations

import numpy as np

from . import heisenberg as hb
from .varifold import DiscreteVarifold

# span{e1, e3}: horizontal and Lagrangian
STANDARD_FRAME = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]])


def flat_plane(q=None, extent: float = 3.0, n: int = 241, multiplicity: int = 1,
               rotation: hb.UnitaryRotation | None = None) -> DiscreteVarifold:
    """Legendrian plane through q sampled on an n x n grid of side 2*extent.

    The plane through the origin is R_A span{e1, e3} inside {phi = 0}; it is
    carried to q by left translation.
    """
    frame = STANDARD_FRAME if rotation is None else (rotation.matrix @ STANDARD_FRAME.T).T
    t = np.linspace(-extent, extent, n)
    h = t[1] - t[0]
    x1, x2 = np.meshgrid(t, t, indexing="ij")
    pts = np.zeros((n * n, 5))
    pts[:, :4] = x1.reshape(-1, 1) * frame[0] + x2.reshape(-1, 1) * frame[1]
    w = np.full(n * n, h * h * multiplicity)
    if q is not None:
        pts = hb.group_mul(hb.as_points(q), pts)
    return DiscreteVarifold(pts, np.broadcast_to(frame, (n * n, 2, 4)), w)


def clifford_blowdown(phi_max: float = 3.0, n_phi: int = 3001, n_angle: int = 16) -> DiscreteVarifold:
    """Tangent cone at infinity of the Clifford lift.

    Samples the measure 2 pi mu (x) H^1 on the phi-axis, with mu uniform over
    the planes span{(cos a, sin a, 0, 0), (0, 0, cos b, sin b)}.
    """
    phi = np.linspace(-phi_max, phi_max, n_phi)
    dphi = phi[1] - phi[0]
    wphi = np.full(n_phi, dphi)
    wphi[[0, -1]] *= 0.5
    ang = 2.0 * np.pi * np.arange(n_angle) / n_angle
    A, B = np.meshgrid(ang, ang, indexing="ij")
    A = A.reshape(-1)
    B = B.reshape(-1)
    fr = np.zeros((A.size, 2, 4))
    fr[:, 0, 0] = np.cos(A)
    fr[:, 0, 1] = np.sin(A)
    fr[:, 1, 2] = np.cos(B)
    fr[:, 1, 3] = np.sin(B)
    m = A.size
    base = np.zeros((n_phi * m, 5))
    base[:, 4] = np.repeat(phi, m)
    frames = np.tile(fr, (n_phi, 1, 1))
    w = np.repeat(wphi, m) * (2.0 * np.pi / m)
    return DiscreteVarifold(base, frames, w)
