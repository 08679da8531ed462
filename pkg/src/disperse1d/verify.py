"""Aggregated invariant suite behind ``disperse1d verify``.

Every check is recorded as {value, tol, pass}; the suite passes when all do.
"""

from __future__ import annotations

import math

import numpy as np

from .decayfit import fit_decay, sobolev_norm
from .jost import KGrid, wronskian_drift, x_grid
from .oracle import (discretize, eig_propagator, free_kernel, kg_eig_propagator, kg_energy,
                     kg_evolve)
from .oscquad import OscIntegral, fresnel, oscint
from .potential import make_potential
from .propagator import kg_det, schrodinger_kernel_direct, schrodinger_kernel_fresnel
from .scattering import bound_states, compute_scattering, pc_projector, type_invariants, verify_identities
from .wiener import psi_profile


def _add(checks, name, value, tol):
    value = float(value)
    checks[name] = {"value": value, "tol": tol, "pass": bool(math.isfinite(value) and value <= tol)}


def _free_checks(checks, kgrid, x):
    """Both Schrödinger routes against |K| = (4πt)^{-1/2} for V = 0."""
    field0, sd0 = compute_scattering("zero", kgrid, x)
    sub = x[:: max(1, x.size // 6)]
    worst_f = worst_d = 0.0
    for t in (0.1, 1.0, 10.0, 100.0):
        F = schrodinger_kernel_fresnel(field0, sd0, t)
        worst_f = max(worst_f, float(np.max(np.abs(np.abs(F.values) * math.sqrt(4 * math.pi * t) - 1))))
        D = schrodinger_kernel_direct(field0, sd0, t, sub)
        worst_d = max(worst_d, float(np.max(np.abs(np.abs(D.values) * math.sqrt(4 * math.pi * t) - 1))))
    _add(checks, "free_exactness_fresnel", worst_f, 1e-4)
    _add(checks, "free_exactness_direct", worst_d, 1e-4)


def _oracle_checks(checks, V, sd, L_o, N_o):
    Hd = discretize(V, L_o, N_o)
    _add(checks, "oracle_symmetric", np.max(np.abs(Hd.matrix - Hd.matrix.T)), 0.0)
    _add(checks, "oracle_orthonormal", Hd.orthonormality_residual(), 1e-10)
    _add(checks, "oracle_lower_bound", max(0.0, -(Hd.evals.min() - (np.min(Hd.matrix.diagonal()) - 2 / Hd.h ** 2) + 1e-9)), 0.0)
    neg = np.sort(Hd.bound_energies())
    kap2 = np.sort(-sd.kappas ** 2)
    if neg.size == kap2.size:
        _add(checks, "oracle_bound_energies", np.max(np.abs(neg - kap2), initial=0.0), 1e-4)
    else:
        checks["oracle_bound_energies"] = {"value": float(neg.size - kap2.size), "tol": 0.0, "pass": False}
    P = eig_propagator(Hd, 0.0)
    _add(checks, "oracle_projector_idempotent", np.max(np.abs(P @ P - P)), 1e-10)
    U1, U2, U3 = eig_propagator(Hd, 1.3), eig_propagator(Hd, 2.1), eig_propagator(Hd, 3.4)
    _add(checks, "oracle_group_law", np.max(np.abs(U1 @ U2 - U3)), 1e-9)
    g = np.exp(-(Hd.x - 0.7) ** 2)
    Pg = P @ g
    _add(checks, "oracle_unitarity", abs(np.linalg.norm(U3 @ Pg) - np.linalg.norm(Pg)) / np.linalg.norm(Pg), 1e-10)
    m = 1.0
    u0, u1 = Pg, P @ (Hd.x * np.exp(-Hd.x ** 2))
    E0 = kg_energy(Hd, m, u0, u1)
    drift = max(abs(kg_energy(Hd, m, *kg_evolve(Hd, m, t, u0, u1)) - E0) / E0 for t in np.linspace(0, 100, 11))
    _add(checks, "kg_energy_drift", drift, 1e-8)
    B = [kg_eig_propagator(Hd, m, t) for t in (1.3, 2.1, 3.4)]
    blk = [np.block([[b["11"], b["12"]], [b["21"], b["22"]]]) for b in B]
    _add(checks, "kg_group_law", np.max(np.abs(blk[0] @ blk[1] - blk[2])), 1e-8)
    if sd.bound_states:
        proj = pc_projector(bound_states(V, Hd.x), Hd.x)
        f = np.exp(-(Hd.x - 0.5) ** 2)
        _add(checks, "oracle_pc_consistency", math.sqrt(Hd.h * np.sum(np.abs(P @ f - proj(f)) ** 2)), 1e-3)


def _oscquad_checks(checks):
    C, S = fresnel(0.0)
    _add(checks, "fresnel_zero", abs(C) + abs(S), 0.0)
    # |C(z) - 1/2|, |S(z) - 1/2| ≤ 1/(πz) for large z
    z = np.array([1e2, 1e4, 1e6])
    C, S = fresnel(z)
    _add(checks, "fresnel_limit", np.max(np.maximum(np.abs(C - 0.5), np.abs(S - 0.5)) * np.pi * z), 1.01)
    z = np.linspace(0.1, 5, 23)
    Cp, Sp = fresnel(z)
    Cm, Sm = fresnel(-z)
    _add(checks, "fresnel_odd", np.max(np.abs(Cp + Cm)) + np.max(np.abs(Sp + Sm)), 0.0)
    sq, dsq, d2 = (lambda s: s * s), (lambda s: 2 * s), (lambda s: np.full(np.shape(s), 2.0))
    worst = 0.0
    for t in (1.0, 10.0, 100.0):
        val = oscint(OscIntegral(sq, 1.0, -np.inf, np.inf, t, dsq, d2))
        ref = math.sqrt(math.pi / t) * np.exp(1j * math.pi / 4)
        worst = max(worst, abs(val - ref) / abs(ref))
    _add(checks, "oscint_gaussian", worst, 1e-6)
    f = lambda s: np.exp(-s * s)  # noqa: E731
    g = lambda s: 1.0 / (1.0 + s * s)  # noqa: E731
    a = oscint(OscIntegral(sq, f, -2, 3, 20.0, dsq, d2))
    b = oscint(OscIntegral(sq, g, -2, 3, 20.0, dsq, d2))
    c = oscint(OscIntegral(sq, lambda s: 2 * f(s) - 3j * g(s), -2, 3, 20.0, dsq, d2))
    _add(checks, "oscint_linearity", abs(c - (2 * a - 3j * b)) / abs(c), 1e-8)


def _misc_checks(checks, field, sd):
    k = np.linspace(0, 60, 601)
    _add(checks, "kg_det", max(np.max(np.abs(kg_det(k, t, 1.0) - 1)) for t in (0.0, 1.0, 37.5, 1e3)), 1e-12)
    t = np.geomspace(10, 1000, 8)
    v = 3.0 * t ** -0.5 * (1 + 0.1 * np.sin(t))
    s1, _, _ = fit_decay(t, v)
    s2, _, _ = fit_decay(t, 1e5 * v)
    _add(checks, "fit_scale_invariance", abs(s1 - s2), 1e-12)
    x = field.x
    gauss = np.exp(-x * x)
    _add(checks, "sobolev_identity", abs(sobolev_norm(gauss, x, 0.0) - math.sqrt(math.pi)), 1e-10)
    prof = psi_profile(field, sd, 0.0, 0.0)
    ref = field.hp[field.x_index(0.0)] * field.hm[field.x_index(0.0)] * sd.T - 1.0
    _add(checks, "wiener_roundtrip", np.max(np.abs(prof.resynthesize() - ref)), 1e-10)


def verify_suite(V, kgrid=None, x=None, cfg=None, scattering=None, free=True):
    """Run the invariant suite for potential ``V``; returns {"checks": {...}}."""
    V = make_potential(V)
    kgrid = kgrid or KGrid()
    x = x_grid() if x is None else x
    field, sd = scattering or compute_scattering(V, kgrid, x)
    checks = {}
    _add(checks, "jost_conjugation", field.symmetry_residual(), 1e-8)
    _add(checks, "jost_boundary", field.boundary_residual(), 1e-12)
    _add(checks, "wronskian_drift", wronskian_drift(field), 1e-7)
    for name, val in verify_identities(sd, field).items():
        _add(checks, f"scattering_{name}", val, 1e-7)
    ti = type_invariants(sd, V)
    _add(checks, "T_bounded", max(0.0, ti["max_abs_T_minus_1"]), 1e-8)
    _add(checks, "T_conjugation", ti["conjugation"], 1e-10)
    _add(checks, "bound_state_cap", max(0.0, ti["bound_state_cap"]), 0.0)
    K5 = schrodinger_kernel_fresnel(field, sd, 5.0)
    Km = schrodinger_kernel_fresnel(field, sd, -5.0)
    _add(checks, "kernel_symmetry", K5.symmetry_residual(), 1e-6)
    _add(checks, "kernel_finite", 0.0 if K5.is_finite() else 1.0, 0.0)
    _add(checks, "kernel_time_reversal", np.max(np.abs(Km.values - np.conj(K5.values))), 1e-6)
    if free:
        _free_checks(checks, kgrid, x)
    L_o = getattr(cfg, "L_o", 40.0)
    N_o = getattr(cfg, "N_o", 2400)
    _oracle_checks(checks, V, sd, L_o, N_o)
    _oscquad_checks(checks)
    _misc_checks(checks, field, sd)
    fk = free_kernel(0.0, 0.0, 1.0 / (4 * math.pi))
    _add(checks, "free_kernel_unit", abs(abs(fk) - 1.0), 1e-14)
    return {"potential": V.to_spec(), "checks": checks,
            "pass": all(c["pass"] for c in checks.values())}
