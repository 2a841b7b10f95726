"""Cutoff profiles chi with chi = 1 on [0, 1], chi = 0 on [2, inf) and -chi' a square."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicHermiteSpline

KINDS = ("poly", "bump")
KIND_CODES = {"poly": 0, "bump": 1}


def _bump_raw(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 1.0) & (t < 2.0)
    u = (t[inside] - 1.0) * (2.0 - t[inside])
    out[inside] = np.exp(-1.0 / u)
    return out


def _bump_norm() -> float:
    val, _ = integrate.quad(lambda x: math.exp(-1.0 / ((x - 1.0) * (2.0 - x))), 1.0, 2.0,
                            epsabs=1e-15, epsrel=1e-14, limit=200)
    return val


class CutoffProfile:
    """chi and its first two derivatives, vectorised over t >= 0."""

    def __init__(self, kind: str = "bump"):
        if kind not in KINDS:
            raise ValueError(f"cutoff kind must be one of {KINDS}, got {kind!r}")
        self.kind = kind
        self.code = KIND_CODES[kind]
        if kind == "bump":
            self.norm = _bump_norm()
            # chi is tabulated through the exact derivative, so a Hermite
            # spline on a fine grid is accurate to ~1e-15.
            nodes = np.linspace(1.0, 2.0, 4001)
            gl_x, gl_w = np.polynomial.legendre.leggauss(10)
            mid = 0.5 * (nodes[1:] + nodes[:-1])
            half = 0.5 * (nodes[1:] - nodes[:-1])
            pieces = np.array([
                np.sum(gl_w * _bump_raw(m + h * gl_x)) * h for m, h in zip(mid, half)
            ])
            cum = np.concatenate([[0.0], np.cumsum(pieces)]) / self.norm
            vals = 1.0 - cum
            self._spline = CubicHermiteSpline(nodes, vals, -_bump_raw(nodes) / self.norm)
        else:
            self.norm = 1.0

    def __repr__(self) -> str:
        return f"CutoffProfile({self.kind!r})"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.where(t <= 1.0, 1.0, 0.0)
        inside = (t > 1.0) & (t < 2.0)
        if np.any(inside):
            ti = t[inside]
            if self.kind == "poly":
                v = ti - 1.0
                out[inside] = 1.0 - (8.0 / 3.0) * (
                    3.0 * v / 8.0 - np.sin(2 * np.pi * v) / (4 * np.pi) + np.sin(4 * np.pi * v) / (32 * np.pi)
                )
            else:
                out[inside] = self._spline(ti)
        return out if out.ndim else float(out)

    def d1(self, t):
        return chi_d1(self.code, self.norm, np.asarray(t, dtype=float))

    def d2(self, t):
        return chi_d2(self.code, self.norm, np.asarray(t, dtype=float))

    def eta(self, t):
        """Non-negative square root of -chi'."""
        return np.sqrt(np.maximum(-self.d1(t), 0.0))


def chi_d1(code: int, norm: float, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    inside = (t > 1.0) & (t < 2.0)
    ti = t[inside]
    if code == 0:
        out[inside] = -(8.0 / 3.0) * np.sin(np.pi * (ti - 1.0)) ** 4
    else:
        out[inside] = -np.exp(-1.0 / ((ti - 1.0) * (2.0 - ti))) / norm
    return out


def chi_d2(code: int, norm: float, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    inside = (t > 1.0) & (t < 2.0)
    ti = t[inside]
    if code == 0:
        v = np.pi * (ti - 1.0)
        out[inside] = -(32.0 * np.pi / 3.0) * np.sin(v) ** 3 * np.cos(v)
    else:
        u = (ti - 1.0) * (2.0 - ti)
        out[inside] = -np.exp(-1.0 / u) * (3.0 - 2.0 * ti) / (u * u) / norm
    return out


def make_cutoff(kind: str = "bump") -> CutoffProfile:
    return CutoffProfile(kind)
