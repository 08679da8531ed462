"""Quantitative acceptance suite.

Each test prints one line ``criterion NN: PASS/FAIL  detail`` and asserts the
criterion as stated; a failing criterion fails its test.  Run with ``-s`` to
see the lines inline; they are also repeated in the terminal summary.
"""

import math

import numpy as np
import pytest

from conftest import record, scattering_for
from disperse1d.decayfit import default_ladder, kg_response, schrodinger_decay
from disperse1d.oracle import (discretize, free_kernel, kg_eig_propagator, kg_energy, kg_evolve,
                               oracle_kernel)
from disperse1d.oscquad import (VDC_CONSTANT, VDC_SLACK, appendix_psi_check, envelope_check,
                                vdc_suite)
from disperse1d.propagator import kg_det, schrodinger_kernel_direct, schrodinger_kernel_fresnel
from disperse1d.scattering import ResonanceClass, verify_identities
from disperse1d.wiener import resonant_diagnostics, uniformity_study, weighted_uniformity

pytestmark = pytest.mark.slow

LADDER = default_ladder(10.0, 1000.0, 8)
DIRECT_NODES = np.array([-20.0, -13.0, -6.0, 0.0, 5.0, 11.0, 20.0])


def test_criterion_01_free_kernel_exactness(zero):
    _, field, sd = zero
    worst = {"fresnel": 0.0, "direct": 0.0}
    for t in np.geomspace(0.1, 100.0, 7):
        F = schrodinger_kernel_fresnel(field, sd, t)
        D = schrodinger_kernel_direct(field, sd, t, DIRECT_NODES)
        for name, K in (("fresnel", F), ("direct", D)):
            exact = np.abs(free_kernel(K.x[:, None], K.y[None, :], t))
            worst[name] = max(worst[name], float(np.max(np.abs(np.abs(K.values) - exact) / exact)))
    ok = max(worst.values()) <= 1e-4
    record(1, ok, f"max rel error fresnel {worst['fresnel']:.2e}, direct {worst['direct']:.2e} (tol 1e-4)")
    assert ok


def test_criterion_02_scattering_identities():
    worst = {}
    for name in ("sech2", "gauss", "square"):
        _, field, sd = scattering_for(name)
        worst[name] = max(verify_identities(sd, field, k_range=(0.05, 20.0)).values())
    ok = max(worst.values()) <= 1e-7
    record(2, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + " (tol 1e-7)")
    assert ok


def test_criterion_03_closed_form_and_classes(sech2, zero, gauss):
    sd = sech2[2]
    errT = float(np.max(np.abs(sd.T - (sd.k + 1j) / (sd.k - 1j))))
    errR = float(max(np.max(np.abs(sd.Rp)), np.max(np.abs(sd.Rm))))
    errK = abs(sd.kappas[0] - 1.0) if len(sd.kappas) == 1 else math.inf
    classes = (sd.resonance_class, zero[2].resonance_class, gauss[2].resonance_class)
    ok = (max(errT, errR, errK) <= 1e-6 and classes == (ResonanceClass.RESONANT_B,
          ResonanceClass.RESONANT_A, ResonanceClass.NON_RESONANT))
    record(3, ok, f"T {errT:.1e}, R {errR:.1e}, kappa {errK:.1e}; classes "
           + "/".join(c.name for c in classes))
    assert ok


def test_criterion_04_oracle_equivalence(sech2, gauss):
    worst = {}
    for name, (V, field, sd) in (("sech2", sech2), ("gauss", gauss)):
        errs = []
        for t in (1.0, 3.0, 10.0, 30.0):
            F = schrodinger_kernel_fresnel(field, sd, t)
            O = oracle_kernel(V, t, F.x)
            errs.append(float(np.max(np.abs(F.values - O.values)) / np.max(np.abs(O.values))))
        worst[name] = max(errs)
    ok = max(worst.values()) <= 1e-2
    record(4, ok, f"sup-rel error sech2 {worst['sech2']:.2e}, gauss {worst['gauss']:.2e} (tol 1e-2)")
    assert ok


def test_criterion_05_unweighted_decay(sech2, gauss):
    slopes = {name: schrodinger_decay(f, sd, LADDER).slope
              for name, (_, f, sd) in (("sech2", sech2), ("gauss", gauss))}
    ok = all(abs(s + 0.5) <= 0.05 for s in slopes.values())
    record(5, ok, f"slopes sech2 {slopes['sech2']:.3f}, gauss {slopes['gauss']:.3f} (target -0.5 ± 0.05)")
    assert ok


def test_criterion_06_weighted_decay(gauss):
    _, field, sd = gauss
    s = schrodinger_decay(field, sd, LADDER, sigma=1.0)
    ok = abs(s.slope + 1.5) <= 0.1
    record(6, ok, f"gauss sigma=1 slope {s.slope:.3f} (target -1.5 ± 0.1)")
    assert ok


def test_criterion_07_klein_gordon_decay(sech2, gauss):
    a = kg_response(sech2[2], sech2[1], 1.0, None, LADDER, sigma=0.0)
    b = kg_response(gauss[2], gauss[1], 1.0, None, LADDER, sigma=1.0)
    ok_a = abs(a.slope + 0.5) <= 0.07
    ok_b = abs(b.slope + 1.5) <= 0.15
    record(7, ok_a and ok_b, f"sech2 sigma=0 slope {a.slope:.3f} (-0.5 ± 0.07) {'ok' if ok_a else 'out'}, "
           f"gauss sigma=1 slope {b.slope:.3f} (-1.5 ± 0.15) {'ok' if ok_b else 'out'}")
    assert ok_a and ok_b


def test_criterion_08_wiener_uniformity(sech2, gauss):
    slopes = {name: uniformity_study(f, sd)["slope"] for name, (_, f, sd) in (("sech2", sech2), ("gauss", gauss))}
    wu = weighted_uniformity(gauss[1], gauss[2])
    ok_trend = all(abs(s) < 0.01 for s in slopes.values())
    ok = ok_trend and bool(wu["pass"])
    record(8, ok, f"trend slopes sech2 {slopes['sech2']:.2e}, gauss {slopes['gauss']:.2e} (|.| < 0.01); "
           f"weighted single C {wu['C']:.3g}, outer/inner {wu['outer_over_inner']:.3f} "
           f"{'ok' if wu['pass'] else 'out'}")
    assert ok


def test_criterion_09_resonant_diagnostics(sech2):
    diag = resonant_diagnostics(sech2[1], sech2[2])
    inc = max(diag.tail_increment.values())
    glm = max(diag.glm_residual.values())
    ok = inc < 1e-3 and glm < 1e-4
    record(9, ok, f"tail increment {inc:.1e} (< 1e-3), GLM residual {glm:.1e} (< 1e-4)")
    assert ok


def test_criterion_10_oscillatory_bounds():
    vdc = max(float(np.max(r)) for r in vdc_suite().values())
    _, per_t, bounded = appendix_psi_check()
    env = envelope_check(kmax=50.0, t_list=(1.0, 10.0, 100.0, 1000.0, 10000.0))
    worst_env = max(v[0] for v in env.values())
    ok_vdc = vdc <= VDC_CONSTANT * VDC_SLACK
    ok_env = worst_env <= 1.0
    ok = ok_vdc and bool(bounded) and ok_env
    record(10, ok, f"vdC ratio {vdc:.3f} (≤ {VDC_CONSTANT * VDC_SLACK:.3f}); "
           f"max/median sqrt(t)J {per_t.max() / np.median(per_t):.3f} (≤ 2); "
           f"envelope ratio {worst_env:.3f} (≤ 1)")
    assert ok


def test_criterion_11_klein_gordon_oracle(sech2):
    V = sech2[0]
    Hd = discretize(V, 40.0, 1200)
    P = Hd.projector()
    u0 = P @ np.exp(-(Hd.x - 1.0) ** 2)
    u1 = P @ (Hd.x * np.exp(-Hd.x ** 2))
    E0 = kg_energy(Hd, 1.0, u0, u1)
    drift = max(abs(kg_energy(Hd, 1.0, *kg_evolve(Hd, 1.0, t, u0, u1)) - E0) / E0
                for t in np.linspace(0.0, 100.0, 11))
    k = np.linspace(0.0, 50.0, 2001)
    det = max(float(np.max(np.abs(kg_det(k, t, 1.0) - 1.0))) for t in (0.1, 1.0, 10.0, 100.0, 1000.0))
    blocks = [kg_eig_propagator(Hd, 1.0, t) for t in (0.7, 2.1, 2.8)]
    M = [np.block([[b["11"], b["12"]], [b["21"], b["22"]]]) for b in blocks]
    group = float(np.max(np.abs(M[0] @ M[1] - M[2])))
    ok = drift <= 1e-8 and det <= 1e-12 and group <= 1e-9
    record(11, ok, f"energy drift {drift:.1e} (≤ 1e-8), det {det:.1e} (≤ 1e-12), group law {group:.1e} (≤ 1e-9)")
    assert ok
