import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from legvar import heisenberg as hb
from legvar.errors import DomainError
from legvar.fields import ScalarField, horizontal_gradient

coord = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)
points = arrays(np.float64, 5, elements=coord)
scales = st.floats(-4.0, 4.0).filter(lambda t: abs(t) > 1e-3)


def close(a, b, tol=1e-10):
    a, b = np.asarray(a), np.asarray(b)
    return np.all(np.abs(a - b) <= tol * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b))))


# group law

def test_group_mul_hand_value():
    # phi picks up z1 * w2 - z2 * w1 = 1
    out = hb.group_mul([1, 0, 0, 0, 0], [0, 1, 0, 0, 0])
    np.testing.assert_array_equal(out, [1, 1, 0, 0, 1])


def test_group_inv_flips_sign():
    np.testing.assert_array_equal(hb.group_inv([1, 2, 3, 4, 5]), [-1, -2, -3, -4, -5])
    np.testing.assert_array_equal(hb.group_inv(np.zeros(5)), np.zeros(5))


@given(points, points, points)
def test_group_associative(p, q, r):
    assert close(hb.group_mul(hb.group_mul(p, q), r), hb.group_mul(p, hb.group_mul(q, r)), 1e-12)


@given(points)
def test_neutral_and_inverse(p):
    np.testing.assert_array_equal(hb.group_mul(np.zeros(5), p), p)
    assert np.allclose(hb.group_mul(p, hb.group_inv(p)), 0.0, atol=1e-12)
    assert np.allclose(hb.group_mul(hb.group_inv(p), p), 0.0, atol=1e-12)


def test_group_mul_rejects_bad_shape():
    with pytest.raises(DomainError):
        hb.group_mul(np.zeros(4), np.zeros(5))


# gauge and distance

def test_gauge_values():
    assert hb.gauge(np.zeros(5)) == 0.0
    assert hb.gauge([1, 0, 0, 0, 0]) == pytest.approx(1.0)
    for phi in (-3.0, -0.2, 0.5, 7.0):
        assert hb.gauge([0, 0, 0, 0, phi]) == pytest.approx(math.sqrt(2 * abs(phi)))


@given(points, points, points)
def test_koranyi_metric_axioms(p, q, r):
    d = hb.koranyi_dist
    assert d(p, p) == pytest.approx(0.0, abs=1e-12)
    assert d(p, q) >= 0.0
    assert d(p, q) == pytest.approx(d(q, p), rel=1e-12, abs=1e-12)
    assert d(p, r) <= d(p, q) + d(q, r) + 1e-10


@given(points, points, points)
def test_left_invariance_and_right_bound(p, q, a):
    d = hb.koranyi_dist
    assert d(hb.group_mul(a, p), hb.group_mul(a, q)) == pytest.approx(d(p, q), rel=1e-10, abs=1e-10)
    right = d(hb.group_mul(p, a), hb.group_mul(q, a))
    rho_a = math.sqrt(hb.rho2(a))
    assert right <= d(p, q) + 2.0 * math.sqrt(rho_a) * math.sqrt(d(p, q)) + 1e-9


@given(points, points, scales)
def test_dilation(p, q, t):
    np.testing.assert_array_equal(hb.dilate(1.0, p), p)
    assert close(hb.dilate(t, hb.group_mul(p, q)), hb.group_mul(hb.dilate(t, p), hb.dilate(t, q)), 1e-11)
    assert hb.koranyi_dist(hb.dilate(t, p), hb.dilate(t, q)) == pytest.approx(
        abs(t) * hb.koranyi_dist(p, q), rel=1e-10, abs=1e-10)


@given(points, points, st.integers(0, 2**31))
def test_unitary_rotation(p, q, seed):
    A = hb.UnitaryRotation.haar(np.random.default_rng(seed))
    np.testing.assert_allclose(hb.rotate(hb.UnitaryRotation.identity(), p), p)
    assert close(hb.rotate(A, hb.group_mul(p, q)), hb.group_mul(hb.rotate(A, p), hb.rotate(A, q)), 1e-11)
    assert hb.koranyi_dist(hb.rotate(A, p), hb.rotate(A, q)) == pytest.approx(
        hb.koranyi_dist(p, q), rel=1e-10, abs=1e-10)


def test_rotation_rejects_non_unitary():
    with pytest.raises(DomainError):
        hb.UnitaryRotation(2.0 * np.eye(4))
    # orthogonal but not complex-linear: conjugation of w1
    with pytest.raises(DomainError):
        hb.UnitaryRotation(np.diag([1.0, -1.0, 1.0, 1.0]))


# frame

def test_frame_at_origin():
    f = hb.frame_at(np.zeros(5))
    np.testing.assert_array_equal(f, np.eye(5))


@given(points)
def test_frame_contact_and_orthonormal(p):
    f = hb.frame_at(p)
    alpha = hb.contact_form(p, f)
    np.testing.assert_allclose(alpha, [0, 0, 0, 0, -1], atol=1e-12)
    gram = hb.metric(p, f[:, None, :], f[None, :, :])
    np.testing.assert_allclose(gram, np.eye(5), atol=1e-12)


@given(points, arrays(np.float64, 5, elements=coord))
def test_frame_round_trip(p, c):
    np.testing.assert_allclose(hb.to_frame(p, hb.from_frame(p, c)), c, atol=1e-10)


def test_jh():
    np.testing.assert_array_equal(hb.jh(np.array([1.0, 0, 0, 0, 0])), [0, 1, 0, 0, 0])
    v = np.array([0.3, -1.2, 2.0, 0.7])
    np.testing.assert_allclose(hb.jh(hb.jh(v)), -v)
    assert np.dot(hb.jh(v), v) == 0.0
    with pytest.raises(DomainError):
        hb.jh(np.array([1.0, 0, 0, 0, 0.5]))


# horizontal gradients

def test_horizontal_gradient_of_z1_is_x1():
    f = ScalarField(lambda p: p[..., 0], name="z1")
    out = horizontal_gradient(f, np.array([0.4, -1.0, 2.0, 0.5, 3.0]))
    np.testing.assert_allclose(out, [1, 0, 0, 0, 0], atol=1e-8)


@given(points.filter(lambda p: hb.rho2(p) > 1e-2))
def test_gauge_gradient_identities(p):
    g = hb.hgrad_gauge(p)
    r = hb.gauge(p)
    s = hb.rho2(p)
    assert np.sum(g * g) == pytest.approx(s / r**2, rel=1e-10)
    np.testing.assert_allclose(r**3 * hb.complex_structure(g), 0.5 * s * s * hb.hgrad_sigma(p),
                               rtol=1e-10, atol=1e-10 * (1 + s * s))


@given(points.filter(lambda p: hb.gauge(p) > 0.1))
def test_model_gradients_match_finite_differences(p):
    for fn, grad, dphi in ((hb.gauge, hb.hgrad_gauge, hb.dphi_gauge),
                           (hb.arctan_sigma, hb.hgrad_arctan_sigma, hb.dphi_arctan_sigma)):
        f = ScalarField(fn)
        fd = horizontal_gradient(f, p)
        scale = 1.0 + np.max(np.abs(fd))
        np.testing.assert_allclose(fd[:4], grad(p), atol=1e-6 * scale)
        assert f.gradient(p)[4] == pytest.approx(dphi(p), abs=1e-6 * scale)


def test_arctan_sigma_values():
    assert hb.arctan_sigma([1, 0, 0, 0, 0]) == 0.0
    assert hb.arctan_sigma([0, 0, 0, 0, 1]) == pytest.approx(math.pi / 2)
    assert hb.arctan_sigma([0, 0, 0, 0, -2]) == pytest.approx(-math.pi / 2)
    with pytest.raises(DomainError):
        hb.arctan_sigma(np.zeros(5))


@given(points.filter(lambda p: hb.gauge(p) > 1e-3), st.floats(0.05, 20.0))
def test_arctan_sigma_dilation_invariant(p, t):
    assert hb.arctan_sigma(hb.dilate(t, p)) == pytest.approx(hb.arctan_sigma(p), abs=1e-12)
