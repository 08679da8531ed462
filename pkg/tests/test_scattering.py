import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import optimize

from disperse1d.jost import KGrid, x_grid
from disperse1d.potential import make_potential
from disperse1d.scattering import (ResonanceClass, ScatteringData, bound_states,
                                   classify_resonance, compute_scattering, extrapolate_zero,
                                   pc_projector, type_invariants, verify_identities)


def square_well_T(k, depth=1.0, a=1.0):
    """Transmission amplitude of -depth on |x| < a (textbook matching)."""
    q = np.sqrt(k * k + depth)
    return np.exp(-2j * k * a) / (np.cos(2 * q * a) - 1j * (k * k + q * q) / (2 * k * q) * np.sin(2 * q * a))


def square_well_kappa(depth=1.0, a=1.0):
    """Single even bound state: κ = q tan(qa), q² + κ² = depth (valid for a√depth < π/2)."""
    q = optimize.brentq(lambda q: q * math.tan(q * a) - math.sqrt(depth - q * q), 1e-9, min(math.sqrt(depth), math.pi / (2 * a)) - 1e-12)
    return math.sqrt(depth - q * q)


def test_sech2_closed_forms(sech2):
    _, _, sd = sech2
    k = sd.k
    assert np.max(np.abs(sd.T - (k + 1j) / (k - 1j))) < 1e-6
    assert np.max(np.abs(sd.Rp)) < 1e-6
    assert np.max(np.abs(sd.Rm)) < 1e-6
    assert sd.kappas == pytest.approx([1.0], abs=1e-6)
    assert_allclose(sd.W, 2j * k * (k - 1j) / (k + 1j), atol=1e-7)


def test_sech2_bound_state_and_norming(sech2):
    _, _, sd = sech2
    b = sd.bound_states[0]
    assert_allclose(b.phi, 1.0 / (math.sqrt(2.0) * np.cosh(sd.x)), atol=1e-6)
    # f_+(x, i) = e^{-x}(1 + tanh x)/2 = sech(x)/2, whose squared norm is 1/2
    assert b.norming_constant(+1) == pytest.approx(2.0, rel=1e-5)
    assert b.energy == pytest.approx(-1.0, abs=1e-6)


def test_square_well_against_matching(square):
    _, _, sd = square
    sel = (np.abs(sd.k) > 0.05) & (np.abs(sd.k) < 20)
    assert np.max(np.abs(sd.T[sel] - square_well_T(sd.k[sel]))) < 1e-7
    assert sd.kappas == pytest.approx([square_well_kappa()], abs=1e-8)
    assert sd.resonance_class is ResonanceClass.NON_RESONANT


@pytest.mark.parametrize("name,cls", [("zero", ResonanceClass.RESONANT_A),
                                      ("sech2", ResonanceClass.RESONANT_B),
                                      ("gauss", ResonanceClass.NON_RESONANT)])
def test_resonance_classes(name, cls, request):
    _, _, sd = request.getfixturevalue(name)
    assert sd.resonance_class is cls
    assert sd.resonance.margin > 10.0


@pytest.mark.parametrize("name", ["sech2", "gauss", "square"])
def test_scattering_identities(name, request):
    _, field, sd = request.getfixturevalue(name)
    res = verify_identities(sd, field)
    assert max(res.values()) < 1e-7, res


@pytest.mark.parametrize("name", ["zero", "sech2", "gauss", "square"])
def test_type_invariants(name, request):
    V, _, sd = request.getfixturevalue(name)
    inv = type_invariants(sd, V)
    assert inv["max_abs_T_minus_1"] < 1e-8
    assert inv["conjugation"] < 1e-10
    assert inv["consistency"] < 1e-8
    assert inv["bound_state_cap"] <= 0


def test_nonresonant_T_vanishes_at_zero(gauss):
    _, _, sd = gauss
    z = sd.k.size // 2
    assert sd.T[z] == 0
    assert abs(sd.Rp[z] + 1) < 1e-8 and abs(sd.Rm[z] + 1) < 1e-8


def test_extrapolate_zero_polynomial_exact():
    k = np.linspace(-1, 1, 33)
    vals = 3 - 2 * k + k ** 5
    vals[16] = 99.0
    assert extrapolate_zero(k, vals) == pytest.approx(3.0, abs=1e-12)


def test_classify_free():
    k = np.linspace(-1, 1, 9)
    rep = classify_resonance(2j * k, 1.0, 1.0, k)
    assert rep.cls is ResonanceClass.RESONANT_A


def test_pc_projector_properties(sech2, rng):
    V, _, sd = sech2
    x = sd.x
    P = pc_projector(sd.bound_states, x)
    f = rng.standard_normal(x.size)
    Pf = P(f)
    assert_allclose(P(Pf), Pf, atol=1e-12)
    w = P.weights()
    assert abs(np.sum(w * Pf * sd.bound_states[0].phi)) < 1e-12


def test_bound_states_square_well_deep():
    """a√depth = 2 gives two bound states (one even, one odd)."""
    V = make_potential("square_well", depth=4.0, halfwidth=1.0)
    ks = sorted(b.kappa for b in bound_states(V))
    # even: q tan q = κ, odd: -q cot q = κ with q² + κ² = 4
    even = optimize.brentq(lambda q: q * math.tan(q) - math.sqrt(4 - q * q), 0.1, math.pi / 2 - 1e-9)
    odd = optimize.brentq(lambda q: -q / math.tan(q) - math.sqrt(4 - q * q), math.pi / 2 + 1e-9, 2 - 1e-12)
    assert_allclose(ks, sorted([math.sqrt(4 - odd ** 2), math.sqrt(4 - even ** 2)]), atol=1e-8)


def test_csv_outputs(tmp_path, sech2):
    _, _, sd = sech2
    sd.to_csv(tmp_path / "s.csv")
    data = np.loadtxt(tmp_path / "s.csv", delimiter=",", skiprows=1)
    assert data.shape == (sd.k.size, 7)
    sd.bound_states_to_csv(tmp_path / "b.csv")
    assert (tmp_path / "b.csv").read_text().startswith("kappa,")


def test_small_grid_run():
    V = make_potential("exp_decay", amplitude=-1.0, scale=1.0)
    field, sd = compute_scattering(V, KGrid(10.0, 257), x_grid(10.0, 81))
    assert isinstance(sd, ScatteringData)
    assert max(verify_identities(sd, field, k_range=(0.1, 5.0)).values()) < 1e-7
