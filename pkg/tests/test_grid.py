import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from legvar.errors import DomainError
from legvar.grid import GridDomain, converges_at_order, grid_derivatives, laplacian, log_slope


def test_weights_sum_to_area():
    r = GridDomain.rectangle(17, 33, (2.0, 3.0), (-1.0, 0.5))
    assert r.weights().sum() == pytest.approx(6.0, rel=1e-14)
    t = GridDomain.torus(16, 24, [(2.0, -1.0), (1.0, 3.0)])
    assert t.weights().sum() == pytest.approx(7.0, rel=1e-14)
    assert t.area() == pytest.approx(7.0)


def test_nodes_layout():
    t = GridDomain.torus(4, 4, [(4.0, 0.0), (0.0, 8.0)], origin=(1.0, 1.0))
    x = t.nodes()
    np.testing.assert_allclose(x[1, 2], [2.0, 5.0])
    r = GridDomain.rectangle(5, 4, (1.0, 2.0))
    np.testing.assert_allclose(r.nodes()[-1, -1], [1.0, 2.0])


def test_domain_validation():
    with pytest.raises(DomainError):
        GridDomain.rectangle(3, 10)
    with pytest.raises(DomainError):
        GridDomain.rectangle(10, 10, (0.0, 1.0))
    with pytest.raises(DomainError):
        GridDomain.torus(10, 10, [(1.0, 1.0), (2.0, 2.0)])
    with pytest.raises(DomainError):
        GridDomain("sphere", 10, 10)


def test_dict_round_trip():
    for d in (GridDomain.rectangle(9, 11, (1.0, 2.0), (0.5, -1.0)),
              GridDomain.torus(8, 12, [(1.0, -1.0), (2.0, 2.0)])):
        assert GridDomain.from_dict(d.to_dict()) == d


def _torus_err(n, method):
    g = GridDomain.torus(n, n, [(2 * math.pi, 0.0), (0.0, 2 * math.pi)])
    x = g.nodes()
    u = np.sin(x[..., 0]) * np.cos(2 * x[..., 1])
    d = grid_derivatives(u, g, method=method)
    exact = np.stack([np.cos(x[..., 0]) * np.cos(2 * x[..., 1]), -2 * np.sin(x[..., 0]) * np.sin(2 * x[..., 1])])
    return g.spacing, float(np.max(np.abs(d - exact)))


def test_torus_fd_second_order_and_spectral_exact():
    hs, errs = zip(*[_torus_err(n, "fd") for n in (16, 32, 64)])
    assert log_slope(hs, errs) == pytest.approx(2.0, abs=0.1)
    assert _torus_err(16, "spectral")[1] < 1e-13


def test_rectangle_edges_second_order():
    errs, hs = [], []
    for n in (11, 21, 41, 81):
        g = GridDomain.rectangle(n, n, (1.0, 1.0))
        x = g.nodes()
        d = grid_derivatives(np.exp(x[..., 0]) * x[..., 1] ** 3, g)
        exact = np.stack([np.exp(x[..., 0]) * x[..., 1] ** 3, 3 * np.exp(x[..., 0]) * x[..., 1] ** 2])
        errs.append(np.max(np.abs(d - exact)))
        hs.append(g.spacing)
    assert log_slope(hs, errs) >= 1.8


def test_jump_makes_linear_function_periodic():
    g = GridDomain.torus(8, 8, [(3.0, 0.0), (0.0, 5.0)])
    x = g.nodes()
    u = 2.0 * x[..., 0] - x[..., 1]
    d = grid_derivatives(u, g, jumps=[np.array(6.0), np.array(-5.0)])
    np.testing.assert_allclose(d[0], 2.0, atol=1e-13)
    np.testing.assert_allclose(d[1], -1.0, atol=1e-13)


def test_oblique_lattice_derivatives():
    lat = [(2 * math.pi, -2 * math.pi), (2 * math.pi, 2 * math.pi)]
    g = GridDomain.torus(64, 64, lat)
    x = g.nodes()
    u = np.cos(x[..., 0])
    d = grid_derivatives(u, g)
    assert np.max(np.abs(d[0] + np.sin(x[..., 0]))) < 5e-3
    assert np.max(np.abs(d[1])) < 1e-12


def test_spectral_needs_periodic_torus():
    r = GridDomain.rectangle(8, 8)
    with pytest.raises(DomainError):
        grid_derivatives(np.zeros((8, 8)), r, method="spectral")
    t = GridDomain.torus(8, 8, [(1.0, 0.0), (0.0, 1.0)])
    with pytest.raises(DomainError):
        grid_derivatives(np.zeros((8, 8)), t, jumps=[np.array(1.0), None], method="spectral")
    with pytest.raises(DomainError):
        grid_derivatives(np.zeros((7, 8)), t)


def test_laplacian():
    g = GridDomain.rectangle(21, 21, (2.0, 2.0))
    x = g.nodes()
    lap = laplacian(x[..., 0] ** 2 + 3 * x[..., 1] ** 2, g)
    assert np.all(np.isnan(lap[0])) and np.all(np.isnan(lap[:, -1]))
    np.testing.assert_allclose(lap[1:-1, 1:-1], 8.0, atol=1e-10)


@given(st.floats(0.5, 4.0), st.floats(1e-3, 10.0))
def test_log_slope_recovers_power(order, c):
    h = np.array([0.1, 0.05, 0.025])
    assert log_slope(h, c * h**order) == pytest.approx(order, abs=1e-9)


def test_converges_at_order_floor():
    assert converges_at_order([0.1, 0.05], [1e-14, 2e-14])
    assert not converges_at_order([0.1, 0.05], [1e-3, 5e-4])
