"""Parameter grids on rectangles and flat tori, with second-order differences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class GridDomain:
    """Sample grid on a rectangle or a flat torus.

    Rectangle: ``origin`` + ``extents`` (side lengths), nodes include both ends.
    Torus: ``lattice`` rows are the two period vectors; node (i, j) sits at
    ``origin + i/n1 * L1 + j/n2 * L2``.
    """

    topology: str
    n1: int
    n2: int
    extents: tuple = (1.0, 1.0)
    origin: tuple = (0.0, 0.0)
    lattice: tuple | None = None

    def __post_init__(self):
        if self.topology not in ("rectangle", "torus"):
            raise DomainError(f"unknown topology {self.topology!r}")
        if self.n1 < 4 or self.n2 < 4:
            raise DomainError("grids need at least 4 nodes per direction")
        if self.topology == "rectangle":
            if min(self.extents) <= 0.0:
                raise DomainError("rectangle extents must be positive")
        else:
            if self.lattice is None:
                raise DomainError("torus grids need lattice vectors")
            lat = np.asarray(self.lattice, dtype=float)
            if lat.shape != (2, 2) or abs(np.linalg.det(lat)) < 1e-12:
                raise DomainError("torus lattice vectors must be two independent 2-vectors")

    @classmethod
    def rectangle(cls, n1: int, n2: int, extents=(1.0, 1.0), origin=(0.0, 0.0)) -> "GridDomain":
        return cls("rectangle", int(n1), int(n2), tuple(map(float, extents)), tuple(map(float, origin)))

    @classmethod
    def torus(cls, n1: int, n2: int, lattice, origin=(0.0, 0.0)) -> "GridDomain":
        lat = tuple(tuple(map(float, row)) for row in np.asarray(lattice, dtype=float))
        return cls("torus", int(n1), int(n2), origin=tuple(map(float, origin)), lattice=lat)

    @property
    def is_torus(self) -> bool:
        return self.topology == "torus"

    def steps(self) -> np.ndarray:
        """Rows are the parameter displacement of one index step in each axis."""
        if self.is_torus:
            lat = np.asarray(self.lattice)
            return np.array([lat[0] / self.n1, lat[1] / self.n2])
        return np.array([[self.extents[0] / (self.n1 - 1), 0.0],
                         [0.0, self.extents[1] / (self.n2 - 1)]])

    @property
    def spacing(self) -> float:
        return float(np.max(np.linalg.norm(self.steps(), axis=1)))

    def nodes(self) -> np.ndarray:
        """Parameter coordinates of the nodes, shape (n1, n2, 2)."""
        i, j = np.meshgrid(np.arange(self.n1), np.arange(self.n2), indexing="ij")
        st = self.steps()
        return np.asarray(self.origin) + i[..., None] * st[0] + j[..., None] * st[1]

    def weights(self) -> np.ndarray:
        """Quadrature weight of every node (trapezoid on rectangles)."""
        st = self.steps()
        cell = abs(np.linalg.det(st))
        w = np.full((self.n1, self.n2), cell)
        if not self.is_torus:
            w[[0, -1], :] *= 0.5
            w[:, [0, -1]] *= 0.5
        return w

    def area(self) -> float:
        if self.is_torus:
            return float(abs(np.linalg.det(np.asarray(self.lattice))))
        return float(self.extents[0] * self.extents[1])

    def boundary_collar(self, width: int = 2) -> np.ndarray:
        """Nodes within ``width`` cells of the rectangle boundary (empty on tori)."""
        m = np.zeros((self.n1, self.n2), dtype=bool)
        if not self.is_torus:
            m[:width + 1, :] = m[-width - 1:, :] = True
            m[:, :width + 1] = m[:, -width - 1:] = True
        return m

    def to_dict(self) -> dict:
        d = {"topology": self.topology, "n1": self.n1, "n2": self.n2, "origin": list(self.origin)}
        if self.is_torus:
            d["lattice"] = [list(r) for r in self.lattice]
        else:
            d["extents"] = list(self.extents)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GridDomain":
        if d["topology"] == "torus":
            return cls.torus(d["n1"], d["n2"], d["lattice"], d.get("origin", (0.0, 0.0)))
        return cls.rectangle(d["n1"], d["n2"], d["extents"], d.get("origin", (0.0, 0.0)))


def _axis_diff_fd(u: np.ndarray, axis: int, periodic: bool, jump=None) -> np.ndarray:
    """Index-space derivative along ``axis`` (unit index step)."""
    if periodic:
        up = np.roll(u, -1, axis=axis)
        um = np.roll(u, 1, axis=axis)
        if jump is not None and np.any(jump != 0):
            # node n-1's forward neighbour is node 0 shifted by the deck jump
            sl_last = [slice(None)] * u.ndim
            sl_last[axis] = -1
            sl_first = [slice(None)] * u.ndim
            sl_first[axis] = 0
            up[tuple(sl_last)] = up[tuple(sl_last)] + jump
            um[tuple(sl_first)] = um[tuple(sl_first)] - jump
        return 0.5 * (up - um)
    d = np.empty_like(u)
    n = u.shape[axis]

    def sl(k):
        s = [slice(None)] * u.ndim
        s[axis] = k
        return tuple(s)

    d[sl(slice(1, n - 1))] = 0.5 * (u[sl(slice(2, n))] - u[sl(slice(0, n - 2))])
    d[sl(0)] = 0.5 * (-3.0 * u[sl(0)] + 4.0 * u[sl(1)] - u[sl(2)])
    d[sl(n - 1)] = 0.5 * (3.0 * u[sl(n - 1)] - 4.0 * u[sl(n - 2)] + u[sl(n - 3)])
    return d


def _axis_diff_spectral(u: np.ndarray, axis: int) -> np.ndarray:
    n = u.shape[axis]
    k = np.fft.fftfreq(n, d=1.0 / n) * 2.0 * np.pi / n
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1] * u.ndim
    shape[axis] = n
    k = k.reshape(shape)
    out = np.fft.ifft(1j * k * np.fft.fft(u, axis=axis), axis=axis)
    return out if np.iscomplexobj(u) else out.real


def grid_derivatives(u: np.ndarray, domain: GridDomain, jumps=None, method: str = "fd") -> np.ndarray:
    """Partial derivatives in parameter coordinates, shape (2, n1, n2, ...).

    ``jumps`` gives, per torus axis, the value added to u when crossing one
    period (same trailing shape as a node value). ``method="spectral"`` is
    available on tori without jumps.
    """
    u = np.asarray(u)
    if u.shape[:2] != (domain.n1, domain.n2):
        raise DomainError("node array does not match the grid")
    if jumps is None:
        jumps = [None, None]
    if method == "spectral":
        if not domain.is_torus:
            raise DomainError("spectral differences need a torus grid")
        if any(j is not None and np.any(np.asarray(j) != 0) for j in jumps):
            raise DomainError("spectral differences need periodic data (no jumps)")
        di = [_axis_diff_spectral(u, 0), _axis_diff_spectral(u, 1)]
    elif method == "fd":
        di = [_axis_diff_fd(u, ax, domain.is_torus, None if jumps[ax] is None else np.asarray(jumps[ax]))
              for ax in range(2)]
    else:
        raise ValueError(f"unknown method {method!r}")
    # index derivative D_a = grad . step_a  ->  grad = steps^{-1} D
    inv = np.linalg.inv(domain.steps())
    return np.stack([inv[0, 0] * di[0] + inv[0, 1] * di[1],
                     inv[1, 0] * di[0] + inv[1, 1] * di[1]])


def laplacian(u: np.ndarray, domain: GridDomain) -> np.ndarray:
    """Five-point Laplacian; rectangle boundary rows are left as NaN."""
    if domain.is_torus:
        st = domain.steps()
        if abs(st[0, 1]) > 1e-14 or abs(st[1, 0]) > 1e-14:
            raise DomainError("five-point Laplacian needs an axis-aligned lattice")
        h1, h2 = st[0, 0], st[1, 1]
        return ((np.roll(u, -1, 0) - 2 * u + np.roll(u, 1, 0)) / h1**2
                + (np.roll(u, -1, 1) - 2 * u + np.roll(u, 1, 1)) / h2**2)
    h1 = domain.extents[0] / (domain.n1 - 1)
    h2 = domain.extents[1] / (domain.n2 - 1)
    out = np.full(u.shape, np.nan, dtype=u.dtype if np.iscomplexobj(u) else float)
    out[1:-1, 1:-1] = ((u[2:, 1:-1] - 2 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / h1**2
                       + (u[1:-1, 2:] - 2 * u[1:-1, 1:-1] + u[1:-1, :-2]) / h2**2)
    return out


def log_slope(h, err) -> float:
    """Least-squares slope of log(err) against log(h)."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def converges_at_order(h, err, order: float = 1.8, floor: float = 1e-12) -> bool:
    """True when the fitted order reaches ``order`` or the finest error is at round-off."""
    err = np.abs(np.asarray(err, dtype=float))
    if err[np.argmin(h)] <= floor:
        return True
    return log_slope(h, err) >= order
