import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from legvar import hamiltonian as hm
from legvar import heisenberg as hb
from legvar.cutoff import make_cutoff
from legvar.errors import DomainError, NotLegendrianError
from legvar.fields import RHO2, ScalarField, translated_field

CHI = make_cutoff("bump")


def planes_off_axis(rng, n, scale=1.5):
    p = rng.normal(scale=scale, size=(n, 5))
    p = p[hb.rho2(p) > 0.05]
    return hm.random_legendrian_planes(p, rng)


def test_random_plane_deterministic_and_valid():
    p = np.array([0.2, -0.1, 0.5, 1.0, -0.3])
    a = hm.random_legendrian_plane(p, 7)
    b = hm.random_legendrian_plane(p, 7)
    np.testing.assert_array_equal(a.frame, b.frame)
    for seed in range(1000):
        pl = hm.random_legendrian_plane(p, seed)
        pl.validate(1e-12)
        assert hm.grad_z_norm2(pl) == pytest.approx(2.0, abs=1e-12)


def test_batched_random_planes_valid(rng):
    pl = hm.random_legendrian_planes(rng.normal(size=(1000, 5)), rng)
    pl.validate(1e-12)
    np.testing.assert_allclose(hm.grad_z_norm2(pl), 2.0, atol=1e-12)
    amb = pl.ambient()
    np.testing.assert_allclose(hb.contact_form(pl.base[:, None, :], amb), 0.0, atol=1e-12)


def test_plane_rejections():
    with pytest.raises(NotLegendrianError):
        hm.LegendrianPlane(np.zeros(5), np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]])).validate()
    with pytest.raises(NotLegendrianError):
        hm.LegendrianPlane(np.zeros(5), np.array([[1.0, 0, 0, 0], [1.0, 0, 1.0, 0]])).validate()
    with pytest.raises(NotLegendrianError):
        hm.LegendrianPlane.from_ambient(np.zeros(5), [1.0, 0, 0, 0, 1.0], [0, 0, 1.0, 0, 0])
    with pytest.raises(DomainError):
        hm.LegendrianPlane(np.zeros(5), np.zeros((3, 4)))


def test_plane_gradient_examples():
    plane = hm.LegendrianPlane(np.zeros(5), np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0]]))
    z1 = ScalarField(lambda p: p[..., 0])
    np.testing.assert_allclose(hm.plane_gradient(z1, plane), [1.0, 0.0], atol=1e-8)
    const = ScalarField(lambda p: np.full(p.shape[:-1], 3.0))
    np.testing.assert_allclose(hm.plane_gradient(const, plane), [0.0, 0.0], atol=1e-12)


def test_plane_gradient_arctan_sigma_vs_normal_gauge_gradient(rng):
    pl = planes_off_axis(rng, 500)
    x = pl.base
    g_a = hm.plane_coeffs(hb.hgrad_arctan_sigma(x), pl)
    # the horizontal normal space of a Legendrian plane is J of the plane
    jpl = hm.LegendrianPlane(x, hb.complex_structure(pl.frame))
    g_rn = hm.plane_coeffs(hb.hgrad_gauge(x), jpl)
    r = hb.gauge(x)
    np.testing.assert_allclose(np.sum(g_a**2, -1), 4.0 / r**2 * np.sum(g_rn**2, -1), rtol=1e-10)


def test_hamiltonian_vector_examples(rng):
    p = rng.normal(size=(50, 5))
    one = ScalarField(lambda x: np.ones(x.shape[:-1]), lambda x: np.zeros(x.shape))
    np.testing.assert_allclose(hm.hamiltonian_vector(one, p), np.tile([0, 0, 0, 0, -1.0], (50, 1)))
    phi = translated_field("phi", np.zeros(5))
    expected = np.concatenate([p[:, :4], 2 * p[:, 4:5]], axis=1)
    np.testing.assert_allclose(-2.0 * hm.hamiltonian_vector(phi, p), expected, atol=1e-12)


def test_hamiltonian_frame_vs_expansion(rng):
    for _ in range(10):
        F = hm.random_bump_hamiltonian(rng, rng.normal(size=5), 2.0)
        p = hb.group_mul(F.center, rng.normal(scale=0.8, size=(200, 5)))
        np.testing.assert_allclose(hb.from_frame(p, hm.hamiltonian_vector(F, p)),
                                   hm.hamiltonian_vector_expansion(F, p), atol=1e-10)


def test_divergence_of_linear_field_vanishes():
    plane = hm.LegendrianPlane(np.zeros(5), np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0]]))
    z1 = ScalarField(lambda p: p[..., 0], lambda p: np.broadcast_to([1.0, 0, 0, 0, 0], p.shape),
                     lambda p: np.zeros(p.shape + (5,)))
    assert hm.plane_divergence(z1, plane) == pytest.approx(0.0, abs=1e-14)


def test_divergence_general_vs_radial_for_rho2(rng):
    pl = hm.random_legendrian_planes(rng.normal(size=(500, 5)), rng)
    np.testing.assert_allclose(hm.plane_divergence(RHO2.to_scalar_field(), pl),
                               hm.plane_divergence_radial(RHO2, pl), atol=1e-8)


def test_divergence_analytic_vs_fd(rng):
    F = hm.random_bump_hamiltonian(rng, np.zeros(5), 2.0)
    pl = hm.random_legendrian_planes(rng.normal(scale=0.6, size=(300, 5)), rng)
    # centred differences with step 1e-4 on a bump of radius 2
    np.testing.assert_allclose(hm.plane_divergence(F, pl), hm.plane_divergence(F, pl, method="fd"),
                               atol=3e-5)


def test_bump_support_and_derivatives(rng):
    c = rng.normal(size=5)
    F = hm.random_bump_hamiltonian(rng, c, 0.7)
    out = hb.group_mul(c, rng.normal(scale=3.0, size=(400, 5)))
    far = hb.koranyi_dist(c, out) >= 0.7
    assert np.all(F(out[far]) == 0.0)
    near = hb.group_mul(c, rng.normal(scale=0.2, size=(50, 5)))
    num = ScalarField(F.__call__)
    np.testing.assert_allclose(F.gradient(near), num.gradient(near), atol=1e-5)
    # Hessian rows as differences of the analytic gradient; second differences of
    # F itself carry a large h^2 constant near the edge of the support
    H = F.hessian(near)
    for k in range(5):
        row = ScalarField(lambda x, k=k: F.gradient(x)[..., k], h_fd=1e-6)
        np.testing.assert_allclose(H[:, k, :], row.gradient(near), atol=1e-5 * (1 + np.abs(H).max()))


def test_monotonicity_hamiltonian_support(rng):
    q = rng.normal(size=5)
    a, eps = 0.8, 0.3
    F = hm.monotonicity_hamiltonian(q, a, eps, CHI)
    x = hb.group_mul(q, rng.normal(scale=2.0, size=(2000, 5)))
    r = hb.koranyi_dist(q, x)
    sel = (r >= 2 * a) | ((r <= eps) & (r > 0))
    assert np.all(F(x[sel]) == 0.0)


def test_monotonicity_partials_closed_form(rng):
    # F = c(r) A with c(r) = chi(r/a) - chi(r/eps): d/dphi and d/d(rho^2) by the chain rule
    a, eps = 1.1, 0.4
    F = hm.monotonicity_radial(a, eps, CHI)
    x = rng.normal(scale=0.8, size=(500, 5))
    s = hb.rho2(x)
    phi = x[:, 4]
    r = hb.gauge(x)
    A = np.arctan2(2 * phi, s)
    c0 = CHI(r / a) - CHI(r / eps)
    c1 = CHI.d1(r / a) / a - CHI.d1(r / eps) / eps
    r4 = r**4
    _, fs, fp, *_ = F.evaluate(x)
    np.testing.assert_allclose(fp, c1 * (2 * phi / r**3) * A + c0 * 2 * s / r4, atol=1e-12)
    np.testing.assert_allclose(fs, c1 * (s / (2 * r**3)) * A - c0 * 2 * phi / r4, atol=1e-12)


@pytest.mark.parametrize("kind", ["bump", "poly"])
def test_monotonicity_identity_both_routes(rng, kind):
    chi = make_cutoff(kind)
    pl = planes_off_axis(rng, 1000)
    r = hb.gauge(pl.base)
    a = r * rng.uniform(0.45, 1.5, r.shape)
    eps = a * rng.uniform(0.2, 0.95, r.shape)
    assert np.max(hm.magic_identity_residual(pl, a, eps, chi)) < 1e-8
    # left side is minus twice the plane divergence of the Hamiltonian field,
    # computed from the Hessian and by differencing W_F
    lhs, rhs = hm.magic_identity_terms(pl, 0.9, 0.35, chi)
    F = hm.monotonicity_radial(0.9, 0.35, chi).to_scalar_field()
    np.testing.assert_allclose(-2.0 * hm.plane_divergence(F, pl), lhs, atol=1e-9)
    np.testing.assert_allclose(-2.0 * hm.plane_divergence(F, pl, method="fd"), rhs, atol=1e-5)


def test_monotonicity_identity_translated(rng):
    q = rng.normal(size=5)
    x = planes_off_axis(rng, 300)
    pl = x.translate(q)
    res = hm.magic_identity_residual(pl, 1.2, 0.5, CHI, q)
    assert np.max(res) < 1e-8


def test_split_identities(rng):
    pl = planes_off_axis(rng, 1000)
    assert np.max(hm.rho_phi_split_residual(pl)) < 1e-10
    assert np.max(hm.arctan_sigma_energy_residual(pl)) < 1e-8


@given(st.floats(0.01, 5.0), st.floats(0.01, 1.0))
def test_radial_requires_ordered_radii(a, frac):
    with pytest.raises(DomainError):
        hm.monotonicity_radial(a, a / frac if frac < 1 else a, CHI)


def test_identity_rejects_axis_points():
    pl = hm.LegendrianPlane(np.array([0, 0, 0, 0, 1.0]), np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0]]))
    with pytest.raises(DomainError):
        hm.magic_identity_residual(pl, 1.0, 0.5, CHI)
