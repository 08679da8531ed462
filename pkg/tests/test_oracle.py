import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from disperse1d.errors import NegativeFrequency, TooLarge, ZeroTime
from disperse1d.oracle import (DiscreteHamiltonian, discretize, eig_propagator, free_kernel,
                               free_kg_apply, kg_eig_propagator, kg_energy, kg_evolve,
                               oracle_grid, oracle_kernel, split_step)
from disperse1d.potential import make_potential

SECH2 = {"family": "sech2", "coupling": 1.0}


@pytest.fixture(scope="module")
def hd_sech2():
    return discretize(SECH2, 40.0, 1200)


def test_fd2_structure(hd_sech2):
    Hd = hd_sech2
    assert Hd.n == 1200 and Hd.scheme == "fd2"
    assert_allclose(Hd.matrix, Hd.matrix.T)
    assert Hd.orthonormality_residual() < 1e-10
    # one bound state at -1 up to the O(h²) discretisation error
    assert Hd.bound_energies() == pytest.approx([-1.0], abs=5e-3)


def test_spectral_bound_state_is_accurate():
    Hd = discretize(SECH2, 20.0, 400, scheme="spectral")
    assert Hd.bound_energies() == pytest.approx([-1.0], abs=1e-9)


def test_discretize_caps_and_schemes():
    with pytest.raises(TooLarge):
        discretize("zero", 10.0, 5000)
    with pytest.raises(ValueError):
        discretize("zero", 10.0, 100, scheme="fd4")


def test_projector_and_group_law(hd_sech2):
    Hd = hd_sech2
    P = Hd.projector()
    assert np.max(np.abs(P @ P - P)) < 1e-10
    U1, U2, U3 = (eig_propagator(Hd, t) for t in (0.7, 1.9, 2.6))
    assert np.max(np.abs(U1 @ U2 - U3)) < 1e-9
    assert np.max(np.abs(eig_propagator(Hd, 0.0) - P)) < 1e-12


def test_kg_energy_conserved(hd_sech2):
    Hd = hd_sech2
    P = Hd.projector()
    u0 = P @ np.exp(-(Hd.x - 1) ** 2)
    u1 = P @ (Hd.x * np.exp(-Hd.x ** 2))
    E0 = kg_energy(Hd, 1.0, u0, u1)
    for t in (1.0, 17.0, 100.0):
        assert abs(kg_energy(Hd, 1.0, *kg_evolve(Hd, 1.0, t, u0, u1)) - E0) < 1e-8 * E0


def test_kg_blocks_group_law(hd_sech2):
    A, B, C = (kg_eig_propagator(hd_sech2, 1.0, t) for t in (0.8, 1.5, 2.3))
    blk = [np.block([[b["11"], b["12"]], [b["21"], b["22"]]]) for b in (A, B, C)]
    assert np.max(np.abs(blk[0] @ blk[1] - blk[2])) < 1e-9


def test_negative_frequency():
    Hd = discretize({"family": "square_well", "depth": 4.0, "halfwidth": 1.0}, 10.0, 400)
    with pytest.raises(NegativeFrequency):
        kg_eig_propagator(Hd, 0.1, 1.0, eps_c=10.0)


def test_free_kernel():
    assert abs(free_kernel(0.0, 0.0, 1 / (4 * math.pi))) == pytest.approx(1.0)
    assert free_kernel(1.0, 3.0, -2.0) == pytest.approx(np.conj(free_kernel(1.0, 3.0, 2.0)))
    with pytest.raises(ZeroTime):
        free_kernel(0.0, 0.0, 0.0)


def test_free_kg_t0():
    fhat = lambda k: np.sqrt(np.pi) * np.exp(-k * k / 4)  # noqa: E731
    x = np.array([-1.0, 0.0, 0.5])
    assert_allclose(free_kg_apply(x, 0.0, 1.0, fhat, kmax=15, entry="11"), np.exp(-x * x), atol=1e-10)


def test_oracle_grid_rule():
    L, n = oracle_grid(10.0)
    assert n % 2 == 0
    kb = 20.0 / 10.0 + 6.0
    assert math.pi * n / (2 * L) >= kb
    assert (2 * L - 40.0) / 20.0 >= kb + 4.0


@pytest.mark.parametrize("t", [1.0, 10.0])
def test_oracle_free_is_exact(t):
    x = np.array([-20.0, -3.0, 0.0, 11.0])
    K = oracle_kernel("zero", t, x)
    assert_allclose(K.values, free_kernel(x[:, None], x[None, :], t), atol=1e-12)


def test_oracle_matches_split_step():
    """Kernel applied to a Gaussian versus split-step evolution of the same Gaussian."""
    V = make_potential("gaussian_well", depth=2.0, width=1.0)
    L, n = 40.0, 1024
    x = -L + (2 * L / n) * np.arange(n)
    Hd = discretize(V, L, n, scheme="spectral")
    f = np.exp(-(x - 2) ** 2) * np.exp(1.5j * x)
    exact = (Hd.evecs * np.exp(-1j * 3.0 * Hd.evals)) @ (Hd.evecs.T @ f)
    u = split_step(V, f, x, 3.0, 4000)
    assert np.max(np.abs(u - exact)) < 1e-4


def test_save_load(tmp_path):
    Hd = discretize("zero", 5.0, 50)
    path = Hd.save(tmp_path)
    H2 = DiscreteHamiltonian.load(path)
    assert_allclose(H2.evals, Hd.evals)
    assert H2.scheme == "fd2"


@settings(max_examples=10, deadline=None)
@given(t=st.floats(0.1, 50.0))
def test_unitarity_on_continuum(hd_sech2, t):
    Hd = hd_sech2
    g = Hd.projector() @ np.exp(-(Hd.x - 0.3) ** 2)
    assert np.linalg.norm(eig_propagator(Hd, t) @ g) == pytest.approx(np.linalg.norm(g), rel=1e-10)
