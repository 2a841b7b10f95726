import numpy as np
import pytest
from scipy import integrate

from legvar.cutoff import CutoffProfile, make_cutoff


@pytest.fixture(params=["bump", "poly"])
def chi(request):
    return make_cutoff(request.param)


def test_plateau_and_support(chi):
    assert chi(0.5) == 1.0
    assert chi(1.0) == 1.0
    assert chi(3.0) == 0.0
    assert chi(2.0) == 0.0


def test_midpoint_by_symmetry(chi):
    # -chi' is symmetric about 3/2 for both kinds
    assert chi(1.5) == pytest.approx(0.5, abs=1e-12)


def test_derivative_integrates_to_one(chi):
    val, _ = integrate.quad(lambda t: -float(chi.d1(np.array(t))), 1.0, 2.0,
                            epsabs=1e-14, epsrel=1e-13, limit=200)
    assert val == pytest.approx(1.0, abs=1e-10)


def test_monotone_and_square_root(chi):
    t = np.linspace(0.0, 2.5, 2001)
    v = chi(t)
    assert np.all(np.diff(v) <= 1e-15)
    assert np.all(chi.d1(t) <= 0.0)
    np.testing.assert_allclose(chi.eta(t) ** 2, -chi.d1(t), atol=1e-15)


def test_derivatives_match_finite_differences(chi):
    t = np.linspace(1.02, 1.98, 97)
    h = 1e-5
    np.testing.assert_allclose((chi(t + h) - chi(t - h)) / (2 * h), chi.d1(t), atol=1e-8)
    np.testing.assert_allclose((chi.d1(t + h) - chi.d1(t - h)) / (2 * h), chi.d2(t), atol=1e-6)


def test_unknown_kind():
    with pytest.raises(ValueError):
        CutoffProfile("gaussian")
