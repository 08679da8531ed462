import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from disperse1d.decayfit import (DecaySeries, default_ladder, fit_decay, gaussian_data,
                                 schrodinger_decay, sobolev_norm, sup_kernel_norm)
from disperse1d.errors import NonPositiveValue, SpectralLeakage
from disperse1d.propagator import KernelField

LADDER = default_ladder()


@settings(max_examples=30, deadline=None)
@given(p=st.floats(-3.0, 1.0), c=st.floats(1e-3, 1e3))
def test_fit_exact_power_law(p, c):
    slope, stderr, r2 = fit_decay(LADDER, c * LADDER ** p)
    assert slope == pytest.approx(p, abs=1e-10)
    assert stderr < 1e-8


def test_fit_requirements():
    with pytest.raises(ValueError):
        fit_decay(LADDER[:5], LADDER[:5] ** -1)
    with pytest.raises(ValueError):
        t = np.geomspace(10, 300, 8)
        fit_decay(t, t ** -1)
    with pytest.raises(NonPositiveValue):
        fit_decay(LADDER, -LADDER)


def test_series_csv_roundtrip(tmp_path):
    s = DecaySeries.from_values(LADDER, 2.0 * LADDER ** -0.5, 1.0, "sup", half_window=LADDER ** -0.5)
    s.to_csv(tmp_path / "d.csv")
    assert (tmp_path / "d.csv").read_text().splitlines()[0] == "t,value,weight"
    r = DecaySeries.from_csv(tmp_path / "d.csv")
    assert_allclose(r.values, s.values, rtol=1e-15)
    assert r.sigma == 1.0
    summ = s.summary(-0.5, 0.07)
    assert summ["pass"] and summ["schema_version"] == 1
    assert s.window_bias() == pytest.approx(0.5)


def test_series_rejects_bad_input():
    with pytest.raises(ValueError):
        DecaySeries.from_values(LADDER[::-1], LADDER, 0.0, "sup")
    with pytest.raises(NonPositiveValue):
        DecaySeries(LADDER, np.zeros(8), 0.0, "sup", 0.0, 0.0, 1.0)


def test_sup_kernel_norm_weights():
    x = np.array([-2.0, 0.0, 2.0])
    K = KernelField(1.0, x, x, np.ones((3, 3), dtype=complex), "fresnel")
    assert sup_kernel_norm(K) == 1.0
    V = np.zeros((3, 3), dtype=complex)
    V[0, 2] = 9.0
    K2 = KernelField(1.0, x, x, V, "fresnel")
    assert sup_kernel_norm(K2, sigma=1.0) == pytest.approx(1.0)
    assert sup_kernel_norm(K2, half=True) == 0.0


X = np.linspace(-30, 30, 2401)


def test_sobolev_alpha0_is_weighted_l1():
    assert sobolev_norm(np.exp(-X ** 2), X, 0) == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    ref = integrate.quad(lambda s: (1 + abs(s)) * math.exp(-s * s), -np.inf, np.inf)[0]
    assert sobolev_norm(np.exp(-X ** 2), X, 0, sigma=1.0) == pytest.approx(ref, rel=1e-4)  # trapezoid across the |x| kink


def test_sobolev_alpha2_is_one_minus_laplacian():
    """(1 - ∂²) e^{-x²} = (3 - 4x²) e^{-x²}."""
    ref = integrate.quad(lambda s: abs(3 - 4 * s * s) * math.exp(-s * s), -30, 30, points=[-math.sqrt(3) / 2, math.sqrt(3) / 2])[0]
    assert sobolev_norm(np.exp(-X ** 2), X, 2) == pytest.approx(ref, rel=1e-4)


def test_sobolev_leakage():
    f = np.zeros(X.size)
    f[0] = 1.0  # a spike on the edge spreads into the padding
    with pytest.raises(SpectralLeakage):
        sobolev_norm(f, X, 0.5)


@settings(max_examples=20, deadline=None)
@given(c=st.floats(-3, 3), w=st.floats(0.5, 2.0), a=st.floats(0.0, 1.0))
def test_sobolev_positive_and_homogeneous(c, w, a):
    f = gaussian_data(X, w, c)
    n1 = sobolev_norm(f, X, a)
    assert n1 > 0
    assert sobolev_norm(3.0 * f, X, a) == pytest.approx(3.0 * n1, rel=1e-12)


def test_gaussian_data_unit_mass():
    assert np.trapezoid(gaussian_data(X, 1.3, 0.7), X) == pytest.approx(1.0, rel=1e-10)


def test_free_decay_rate(zero):
    _, field, sd = zero
    s = schrodinger_decay(field, sd, np.geomspace(10, 1000, 6))
    assert s.slope == pytest.approx(-0.5, abs=1e-9)
    assert_allclose(s.values, 1 / np.sqrt(4 * math.pi * s.t), rtol=1e-9)
    assert s.window_bias() < 1e-9
