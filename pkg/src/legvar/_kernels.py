"""Hot per-sample kernels with a numba path and a vectorised numpy twin.

Kernels return per-sample arrays; reductions happen in numpy (pairwise
summation), so both backends sum in the same order.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import HAS_NUMBA, resolve_backend
from .cutoff import chi_d1, chi_d2

if HAS_NUMBA:
    from numba import njit, prange
else:  # pragma: no cover
    njit = prange = None


def _theta_terms_numpy(x, frames, weights, a, code, norm):
    """Per-sample (full, limit) integrands of the monotone quantity at scale a.

    ``x`` are sample base points already translated so the centre is the origin.
    """
    z = x[:, :4]
    phi = x[:, 4]
    s = np.einsum("ij,ij->i", z, z)
    r4 = s * s + 4.0 * phi * phi
    r = np.sqrt(np.sqrt(r4))
    full = np.zeros(x.shape[0])
    limit = np.zeros(x.shape[0])
    live = (r > a) & (r < 2.0 * a)
    if not np.any(live):
        return full, limit
    z, phi, s, r4, r, fr, w = z[live], phi[live], s[live], r4[live], r[live], frames[live], weights[live]
    jz = np.empty_like(z)
    jz[:, 0] = -z[:, 1]
    jz[:, 1] = z[:, 0]
    jz[:, 2] = -z[:, 3]
    jz[:, 3] = z[:, 2]
    r3 = r**3
    gr = (s[:, None] * z + 2.0 * phi[:, None] * jz) / r3[:, None]
    gA = (2.0 * s[:, None] * jz - 4.0 * phi[:, None] * z) / r4[:, None]
    cr = np.einsum("nik,nk->ni", fr, gr)
    cA = np.einsum("nik,nk->ni", fr, gA)
    A = np.arctan2(2.0 * phi, s)
    d1 = chi_d1(code, norm, r / a) / a
    d2 = chi_d2(code, norm, r / a) / (a * a)
    t1 = -np.sum(cr * cr, axis=1) / r * d1
    t2 = -(2.0 * phi / r3) * d1 * A
    g = d1 / r3
    gp = -3.0 * d1 / (r3 * r) + d2 / r3
    t3 = 0.25 * r4 * np.sum(cA * ((gp * A)[:, None] * cr + g[:, None] * cA), axis=1)
    full[live] = w * (t1 + t2 + t3)
    limit[live] = w * (t1 + t2)
    return full, limit


if HAS_NUMBA:

    @njit(cache=True, inline="always")
    def _chi_d1_scalar(code, norm, t):
        if t <= 1.0 or t >= 2.0:
            return 0.0
        if code == 0:
            return -(8.0 / 3.0) * math.sin(math.pi * (t - 1.0)) ** 4
        return -math.exp(-1.0 / ((t - 1.0) * (2.0 - t))) / norm

    @njit(cache=True, inline="always")
    def _chi_d2_scalar(code, norm, t):
        if t <= 1.0 or t >= 2.0:
            return 0.0
        if code == 0:
            v = math.pi * (t - 1.0)
            return -(32.0 * math.pi / 3.0) * math.sin(v) ** 3 * math.cos(v)
        u = (t - 1.0) * (2.0 - t)
        return -math.exp(-1.0 / u) * (3.0 - 2.0 * t) / (u * u) / norm

    @njit(cache=True, parallel=True)
    def _theta_terms_numba(x, frames, weights, a, code, norm):
        n = x.shape[0]
        full = np.zeros(n)
        limit = np.zeros(n)
        for i in prange(n):
            z1, z2, z3, z4, phi = x[i, 0], x[i, 1], x[i, 2], x[i, 3], x[i, 4]
            s = z1 * z1 + z2 * z2 + z3 * z3 + z4 * z4
            r4 = s * s + 4.0 * phi * phi
            r = math.sqrt(math.sqrt(r4))
            if not (r > a and r < 2.0 * a):
                continue
            r3 = r * r * r
            # horizontal gradients of r and arctan(sigma)
            gr0 = (s * z1 - 2.0 * phi * z2) / r3
            gr1 = (s * z2 + 2.0 * phi * z1) / r3
            gr2 = (s * z3 - 2.0 * phi * z4) / r3
            gr3 = (s * z4 + 2.0 * phi * z3) / r3
            ga0 = (-2.0 * s * z2 - 4.0 * phi * z1) / r4
            ga1 = (2.0 * s * z1 - 4.0 * phi * z2) / r4
            ga2 = (-2.0 * s * z4 - 4.0 * phi * z3) / r4
            ga3 = (2.0 * s * z3 - 4.0 * phi * z4) / r4
            A = math.atan2(2.0 * phi, s)
            d1 = _chi_d1_scalar(code, norm, r / a) / a
            d2 = _chi_d2_scalar(code, norm, r / a) / (a * a)
            g = d1 / r3
            gp = -3.0 * d1 / (r3 * r) + d2 / r3
            cr2 = 0.0
            mix = 0.0
            for j in range(2):
                f0, f1, f2, f3 = frames[i, j, 0], frames[i, j, 1], frames[i, j, 2], frames[i, j, 3]
                cr = f0 * gr0 + f1 * gr1 + f2 * gr2 + f3 * gr3
                ca = f0 * ga0 + f1 * ga1 + f2 * ga2 + f3 * ga3
                cr2 += cr * cr
                mix += ca * (gp * A * cr + g * ca)
            t1 = -cr2 / r * d1
            t2 = -(2.0 * phi / r3) * d1 * A
            t3 = 0.25 * r4 * mix
            full[i] = weights[i] * (t1 + t2 + t3)
            limit[i] = weights[i] * (t1 + t2)
        return full, limit

    @njit(cache=True, parallel=True)
    def _nearest_gauge_numba(points, neighbours):
        n, k = neighbours.shape
        out = np.full(n, np.inf)
        for i in prange(n):
            for jj in range(k):
                j = neighbours[i, jj]
                if j == i or j >= n:
                    continue
                dz1 = points[j, 0] - points[i, 0]
                dz2 = points[j, 1] - points[i, 1]
                dz3 = points[j, 2] - points[i, 2]
                dz4 = points[j, 3] - points[i, 3]
                dphi = (points[j, 4] - points[i, 4]
                        - (points[i, 0] * points[j, 1] - points[i, 1] * points[j, 0]
                           + points[i, 2] * points[j, 3] - points[i, 3] * points[j, 2]))
                s = dz1 * dz1 + dz2 * dz2 + dz3 * dz3 + dz4 * dz4
                d = math.sqrt(math.sqrt(s * s + 4.0 * dphi * dphi))
                if d < out[i]:
                    out[i] = d
        return out


def _nearest_gauge_numpy(points, neighbours):
    n, k = neighbours.shape
    valid = (neighbours < n) & (neighbours != np.arange(n)[:, None])
    idx = np.where(valid, neighbours, 0)
    p = points[:, None, :]
    q = points[idx]
    dz = q[..., :4] - p[..., :4]
    dphi = q[..., 4] - p[..., 4] - (p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]
                                    + p[..., 2] * q[..., 3] - p[..., 3] * q[..., 2])
    s = np.einsum("...i,...i->...", dz, dz)
    d = np.sqrt(np.sqrt(s * s + 4.0 * dphi * dphi))
    d = np.where(valid, d, np.inf)
    return d.min(axis=1)


def theta_terms(x, frames, weights, a: float, code: int, norm: float, backend: str | None = None):
    x = np.ascontiguousarray(x, dtype=float)
    frames = np.ascontiguousarray(frames, dtype=float)
    weights = np.ascontiguousarray(weights, dtype=float)
    if resolve_backend(backend) == "numba":
        return _theta_terms_numba(x, frames, weights, float(a), int(code), float(norm))
    return _theta_terms_numpy(x, frames, weights, float(a), int(code), float(norm))


def nearest_gauge(points, neighbours, backend: str | None = None):
    """Koranyi distance from each point to the closest of its listed neighbours."""
    points = np.ascontiguousarray(points, dtype=float)
    neighbours = np.ascontiguousarray(neighbours, dtype=np.int64)
    if resolve_backend(backend) == "numba":
        return _nearest_gauge_numba(points, neighbours)
    return _nearest_gauge_numpy(points, neighbours)
