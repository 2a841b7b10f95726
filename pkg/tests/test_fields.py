import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from legvar import heisenberg as hb
from legvar.fields import (ARCTAN_SIGMA, GAUGE, ScalarField, horizontal_gradient,
                           left_translation_jacobian, translate_field, translated_field)

points = arrays(np.float64, 5, elements=st.floats(-3.0, 3.0))
off_origin = points.filter(lambda p: hb.gauge(p) > 0.2)


def test_fd_gradient_and_hessian_of_polynomial(rng):
    # f = z1^2 phi + z3, gradient and Hessian by hand
    f = ScalarField(lambda p: p[..., 0] ** 2 * p[..., 4] + p[..., 2])
    p = rng.normal(size=5)
    g = np.array([2 * p[0] * p[4], 0, 1, 0, p[0] ** 2])
    H = np.zeros((5, 5))
    H[0, 0] = 2 * p[4]
    H[0, 4] = H[4, 0] = 2 * p[0]
    np.testing.assert_allclose(f.gradient(p), g, atol=1e-8)
    np.testing.assert_allclose(f.hessian(p), H, atol=1e-5)
    assert not f.has_analytic_grad


@given(off_origin)
def test_radial_fields_chain_rule(p):
    for radial in (GAUGE, ARCTAN_SIGMA):
        f = radial.to_scalar_field()
        numeric = ScalarField(f.__call__)
        scale = 1.0 + np.max(np.abs(f.gradient(p)))
        np.testing.assert_allclose(f.gradient(p), numeric.gradient(p), atol=2e-6 * scale)
        hscale = 1.0 + np.max(np.abs(f.hessian(p)))
        np.testing.assert_allclose(f.hessian(p), numeric.hessian(p), atol=2e-4 * hscale)


def test_translated_gauge_basics(rng):
    p = rng.normal(size=5)
    assert translated_field("gauge", np.zeros(5))(p) == pytest.approx(hb.gauge(p))
    q = rng.normal(size=5)
    assert translated_field("gauge", q)(q) == pytest.approx(0.0, abs=1e-12)


@given(points, points)
def test_translated_gauge_is_distance(q, x):
    assert translated_field("gauge", q)(x) == pytest.approx(hb.koranyi_dist(q, x), rel=1e-12, abs=1e-12)


def test_left_translation_jacobian_matches_fd(rng):
    q = rng.normal(size=5)
    x = rng.normal(size=5)
    m = left_translation_jacobian(q)
    h = 1e-6
    for k in range(5):
        e = np.zeros(5)
        e[k] = h
        col = (hb.group_mul(-q, x + e) - hb.group_mul(-q, x - e)) / (2 * h)
        np.testing.assert_allclose(m[:, k], col, atol=1e-8)


@given(points.filter(lambda p: hb.gauge(p) > 0.3), points)
def test_translate_field_derivatives(x, q):
    x = hb.group_mul(q, x)  # keep x away from the centre q
    f = translated_field("arctan_sigma", q)
    numeric = translate_field(ScalarField(ARCTAN_SIGMA.to_scalar_field().__call__), q)
    scale = 1.0 + np.max(np.abs(f.gradient(x)))
    np.testing.assert_allclose(f.gradient(x), numeric.gradient(x), atol=1e-5 * scale)


def test_horizontal_gradient_of_phi_is_j_of_half_rho2_gradient(rng):
    p = rng.normal(size=(20, 5))
    hg = horizontal_gradient(translated_field("phi", np.zeros(5)), p)
    np.testing.assert_allclose(hg[..., :4], hb.complex_structure(0.5 * hb.hgrad_rho2(p)), atol=1e-14)
    assert np.all(hg[..., 4] == 0.0)


def test_unknown_field_name():
    with pytest.raises(ValueError):
        translated_field("nope", np.zeros(5))
