import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from disperse1d.jost import JostField, KGrid, b_kernel, jost_field, solve_h, wronskians, x_grid
from disperse1d.potential import eta_profile, make_potential, tail_moments


def sech2_h(x, k, sign):
    """Closed-form Jost factors of -2 sech^2 x."""
    th = np.tanh(x)
    return (k + 1j * th) / (k + 1j) if sign > 0 else (k - 1j * th) / (k + 1j)


def test_kgrid_contract():
    g = KGrid(10.0, 33)
    assert g.k[g.zero_index] == 0.0
    assert g.dk == pytest.approx(20.0 / 32)
    with pytest.raises(ValueError):
        KGrid(10.0, 34)
    with pytest.raises(ValueError):
        KGrid(-1.0, 33)


def test_sech2_closed_form(sech2):
    _, field, _ = sech2
    X = field.x[:, None]
    for s in (+1, -1):
        assert np.max(np.abs(field.h(s) - sech2_h(X, field.k, s))) < 1e-8


def test_sech2_derivative_closed_form(sech2):
    _, field, _ = sech2
    X = field.x[:, None]
    exact = 1j / np.cosh(X) ** 2 / (field.k + 1j)
    assert np.max(np.abs(field.dhp - exact)) < 1e-7
    assert np.max(np.abs(field.dhm + exact)) < 1e-7


def test_free_field_is_identity(zero):
    _, field, _ = zero
    assert np.max(np.abs(field.hp - 1)) < 1e-12
    assert np.max(np.abs(field.dhm)) < 1e-12


@pytest.mark.parametrize("name", ["sech2", "gauss", "square"])
def test_field_invariants(name, request):
    _, field, _ = request.getfixturevalue(name)
    assert field.symmetry_residual() < 1e-8
    assert field.boundary_residual() < 1e-12


def test_square_well_interior_solution():
    """Inside a square well f_+ is a combination of e^{±iqx}; check against the matching solution."""
    V = make_potential("square_well", depth=1.0, halfwidth=1.0)
    k = np.array([0.3, 1.7])
    x = np.linspace(-2, 2, 41)
    h, dh = solve_h(V, k, +1, x)
    q = np.sqrt(k * k + 1.0)
    a = 1.0
    # f_+ = e^{ikx} for x > a; inside, f = A cos(q(x-a)) + B sin(q(x-a))
    A = np.exp(1j * k * a)
    B = 1j * k * np.exp(1j * k * a) / q
    inside = np.abs(x) < a
    xi = x[inside][:, None]
    f_exact = A * np.cos(q * (xi - a)) + B * np.sin(q * (xi - a))
    assert_allclose(np.exp(1j * k * xi) * h[inside], f_exact, atol=1e-9)


def test_wronskian_and_save_load(tmp_path):
    V = make_potential("gaussian_well", depth=2.0, width=1.0)
    field = jost_field(V, KGrid(10.0, 129), x_grid(10.0, 41))
    W, Wp, Wm = wronskians(field)
    assert_allclose(W[::-1], np.conj(W), atol=1e-10)
    path = tmp_path / "f.npz"
    field.save(path)
    g = JostField.load(path)
    assert_allclose(g.hp, field.hp)
    assert g.potential_key == field.potential_key


def test_b_kernel_sech2_is_pure_pole(sech2):
    _, field, _ = sech2
    for x in (-2.0, 0.0, 1.6):
        B = b_kernel(field, x, +1)
        assert B.tail_amplitude == pytest.approx(1j * (np.tanh(x) - 1.0), abs=1e-6)
        assert_allclose(B.forward(), field.hp[field.x_index(x)] - 1.0, atol=1e-9)


def test_b_kernel_support_side(gauss):
    _, field, _ = gauss
    B = b_kernel(field, 0.6, -1)
    # finite-band Gibbs ringing from the jump at y = 0 leaks a little mass
    assert B.wrong_side_mass < 1e-4 * B.l1()
    assert B.imag_residual < 1e-6


@pytest.mark.parametrize("name", ["sech2", "gauss"])
def test_b_kernel_volterra_bound(name, request):
    """|B_+(0, y)| ≤ e^{γ_+(0)} η_+(y) away from the Gibbs zone at y = 0."""
    V, field, _ = request.getfixturevalue(name)
    B = b_kernel(field, 0.0, +1)
    _, gamma = tail_moments(V, 0.0, +1)
    sel = (B.y > 0.2) & (B.y < 6.0)
    eta = eta_profile(V, B.y[sel][::8], +1)
    assert np.all(np.abs(B.values[sel][::8]) <= np.exp(gamma) * eta + 1e-4)


@settings(max_examples=10, deadline=None)
@given(k=st.floats(0.05, 30.0), x=st.sampled_from([-4.0, -1.0, 0.0, 2.0, 5.0]))
def test_conjugation_symmetry_pointwise(k, x):
    V = make_potential("gaussian_well", depth=2.0, width=1.0)
    xs = np.array([x])
    h1, _ = solve_h(V, np.array([k, -k]), +1, xs)
    assert abs(h1[0, 1] - np.conj(h1[0, 0])) < 1e-10
