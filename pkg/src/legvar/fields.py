"""Scalar fields on H^2 with value, gradient and Hessian in (z, phi) coordinates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import heisenberg as hb

Array = np.ndarray


class ScalarField:
    """A scalar map on H^2 with a derivative contract.

    ``value`` maps points (..., 5) to (...). ``grad`` and ``hess`` are optional
    analytic derivatives returning (..., 5) and (..., 5, 5); when missing they
    are replaced by centred finite differences with step ``h_fd * (1 + r)``.
    """

    def __init__(
        self,
        value: Callable[[Array], Array],
        grad: Callable[[Array], Array] | None = None,
        hess: Callable[[Array], Array] | None = None,
        h_fd: float = 1e-5,
        h_fd_hess: float = 1e-4,
        name: str = "field",
    ):
        self._value = value
        self._grad = grad
        self._hess = hess
        self.h_fd = h_fd
        self.h_fd_hess = h_fd_hess
        self.name = name

    @property
    def has_analytic_grad(self) -> bool:
        return self._grad is not None

    @property
    def has_analytic_hess(self) -> bool:
        return self._hess is not None

    def __call__(self, p) -> Array:
        return np.asarray(self._value(np.asarray(p, dtype=float)), dtype=float)

    def gradient(self, p) -> Array:
        p = np.asarray(p, dtype=float)
        if self._grad is not None:
            return np.asarray(self._grad(p), dtype=float)
        return self.fd_gradient(p)

    def hessian(self, p) -> Array:
        p = np.asarray(p, dtype=float)
        if self._hess is not None:
            return np.asarray(self._hess(p), dtype=float)
        return self.fd_hessian(p)

    def fd_gradient(self, p, h: float | None = None) -> Array:
        p = np.asarray(p, dtype=float)
        step = (self.h_fd if h is None else h) * (1.0 + hb.gauge(p))
        out = np.empty(p.shape)
        for k in range(5):
            e = np.zeros(5)
            e[k] = 1.0
            d = step[..., None] * e
            out[..., k] = (self(p + d) - self(p - d)) / (2.0 * step)
        return out

    def fd_hessian(self, p, h: float | None = None) -> Array:
        p = np.asarray(p, dtype=float)
        out = np.empty(p.shape + (5,))
        if self._grad is not None:
            step = (self.h_fd if h is None else h) * (1.0 + hb.gauge(p))
            for k in range(5):
                d = np.zeros(5)
                d[k] = 1.0
                d = step[..., None] * d
                out[..., :, k] = (self.gradient(p + d) - self.gradient(p - d)) / (2.0 * step[..., None])
            return 0.5 * (out + np.swapaxes(out, -1, -2))
        step = (self.h_fd_hess if h is None else h) * (1.0 + hb.gauge(p))
        f0 = self(p)
        eye = np.eye(5)
        for k in range(5):
            dk = step[..., None] * eye[k]
            out[..., k, k] = (self(p + dk) - 2.0 * f0 + self(p - dk)) / step**2
            for m in range(k + 1, 5):
                dm = step[..., None] * eye[m]
                v = (self(p + dk + dm) - self(p + dk - dm) - self(p - dk + dm) + self(p - dk - dm))
                out[..., k, m] = out[..., m, k] = v / (4.0 * step**2)
        return out


def horizontal_gradient(f: ScalarField, p) -> Array:
    """Frame coefficients (..., 5) of the horizontal gradient (last entry 0)."""
    p = np.asarray(p, dtype=float)
    g = f.gradient(p)
    return horizontal_from_euclidean(p, g)


def horizontal_from_euclidean(p: Array, g: Array) -> Array:
    z = p[..., :4]
    out = np.zeros(np.broadcast_shapes(p.shape, g.shape))
    out[..., :4] = g[..., :4] + hb.complex_structure(z) * g[..., 4:5]
    return out


@dataclass(frozen=True)
class RadialField:
    """F(s, phi) with s = rho^2, given with its partials up to order two.

    ``partials(s, phi)`` returns a tuple ``(F, F_s, F_phi, F_ss, F_sphi, F_phiphi)``.
    """

    partials: Callable[[Array, Array], tuple]
    name: str = "radial"

    def evaluate(self, p) -> tuple:
        p = np.asarray(p, dtype=float)
        return self.partials(hb.rho2(p), p[..., 4])

    def to_scalar_field(self) -> ScalarField:
        def value(p):
            # the partials may be singular where the value itself is fine
            with np.errstate(divide="ignore", invalid="ignore"):
                return self.evaluate(p)[0]

        def grad(p):
            _, fs, fp, *_ = self.evaluate(p)
            out = np.empty(p.shape)
            out[..., :4] = 2.0 * p[..., :4] * fs[..., None]
            out[..., 4] = fp
            return out

        def hess(p):
            _, fs, _, fss, fsp, fpp = self.evaluate(p)
            z = p[..., :4]
            out = np.zeros(p.shape + (5,))
            out[..., :4, :4] = (2.0 * fs[..., None, None] * np.eye(4)
                                + 4.0 * fss[..., None, None] * z[..., :, None] * z[..., None, :])
            out[..., :4, 4] = 2.0 * z * fsp[..., None]
            out[..., 4, :4] = out[..., :4, 4]
            out[..., 4, 4] = fpp
            return out

        return ScalarField(value, grad, hess, name=self.name)


def _gauge_partials(s, phi):
    r4 = s * s + 4.0 * phi * phi
    r = np.sqrt(np.sqrt(r4))
    r3 = r**3
    r7 = r3 * r4
    return (
        r,
        s / (2.0 * r3),
        2.0 * phi / r3,
        1.0 / (2.0 * r3) - 3.0 * s * s / (4.0 * r7),
        -3.0 * s * phi / r7,
        2.0 / r3 - 12.0 * phi * phi / r7,
    )


def _arctan_sigma_partials(s, phi):
    r4 = s * s + 4.0 * phi * phi
    r8 = r4 * r4
    return (
        np.arctan2(2.0 * phi, s),
        -2.0 * phi / r4,
        2.0 * s / r4,
        4.0 * phi * s / r8,
        -2.0 / r4 + 16.0 * phi * phi / r8,
        -16.0 * s * phi / r8,
    )


def _phi_partials(s, phi):
    zero = np.zeros_like(s)
    return (phi, zero, zero + 1.0, zero, zero, zero)


def _rho2_partials(s, phi):
    zero = np.zeros_like(s)
    return (s, zero + 1.0, zero, zero, zero, zero)


GAUGE = RadialField(_gauge_partials, "gauge")
ARCTAN_SIGMA = RadialField(_arctan_sigma_partials, "arctan_sigma")
PHI = RadialField(_phi_partials, "phi")
RHO2 = RadialField(_rho2_partials, "rho2")

_MODEL_FIELDS = {"gauge": GAUGE, "arctan_sigma": ARCTAN_SIGMA, "phi": PHI, "rho2": RHO2}


def left_translation_jacobian(q) -> Array:
    """Jacobian of x -> q^{-1} * x; it is constant in x."""
    q = np.asarray(q, dtype=float)
    m = np.eye(5)
    m[4, :4] = -hb.complex_structure(q[:4])
    return m


def translate_field(f: ScalarField, q) -> ScalarField:
    """The field x -> f(q^{-1} * x) with pulled-back derivatives."""
    q = hb.as_points(q)
    if q.shape != (5,):
        raise ValueError("translation centre must be a single point")
    qinv = hb.group_inv(q)
    m = left_translation_jacobian(q)

    def value(x):
        return f(hb.group_mul(qinv, x))

    def grad(x):
        return f.gradient(hb.group_mul(qinv, x)) @ m

    def hess(x):
        return m.T @ f.hessian(hb.group_mul(qinv, x)) @ m

    return ScalarField(
        value,
        grad if f.has_analytic_grad else None,
        hess if f.has_analytic_hess else None,
        h_fd=f.h_fd,
        h_fd_hess=f.h_fd_hess,
        name=f"{f.name}@q",
    )


def translated_field(name: str, q) -> ScalarField:
    """Model field (gauge, arctan_sigma, phi or rho2) centred at q."""
    try:
        radial = _MODEL_FIELDS[name]
    except KeyError:
        raise ValueError(f"unknown field {name!r}; expected one of {sorted(_MODEL_FIELDS)}") from None
    return translate_field(radial.to_scalar_field(), q)
