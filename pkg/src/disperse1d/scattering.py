"""Scattering matrix, bound states, P_c and zero-energy resonance class."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize

from .errors import InteriorZero, MissedRootSuspected
from .jost import JostField, KGrid, jost_field, solve_h, wronskians, x_grid
from .potential import Potential, make_potential, moment_norm

TAU_RES = 1e-6
KAPPA_STEP = 1e-3
KAPPA_TOL = 1e-10


class ResonanceClass(str, Enum):
    NON_RESONANT = "NonResonant"
    RESONANT_A = "ResonantA"
    RESONANT_B = "ResonantB"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ResonanceReport:
    cls: ResonanceClass
    W0: complex
    h0_product: complex
    s: float
    s_prime: float

    @property
    def margin(self):
        """Factor (≥ 1 when decided cleanly) by which each deciding quantity clears its threshold."""
        def ratio(a, b):
            return np.inf if a == 0 else b / a

        r_w = abs(self.W0) / (TAU_RES * self.s)
        r_h = abs(self.h0_product) / (TAU_RES * self.s_prime)
        if self.cls is ResonanceClass.NON_RESONANT:
            return float(r_w)
        if self.cls is ResonanceClass.RESONANT_A:
            return float(min(ratio(r_w, 1.0), r_h))
        return float(min(ratio(r_w, 1.0), ratio(r_h, 1.0)))


@dataclass(frozen=True)
class BoundState:
    kappa: float
    phi: np.ndarray = field(repr=False)
    norm_plus: float = 1.0
    norm_minus: float = 1.0

    def norming_constant(self, sign):
        """m_± = 1/‖f_±(·, iκ)‖²."""
        n = self.norm_plus if sign > 0 else self.norm_minus
        return 1.0 / n ** 2

    @property
    def energy(self):
        return -self.kappa ** 2


@dataclass(frozen=True, eq=False)
class ScatteringData:
    k: np.ndarray
    T: np.ndarray
    Rp: np.ndarray
    Rm: np.ndarray
    W: np.ndarray
    Wp: np.ndarray
    Wm: np.ndarray
    bound_states: tuple
    resonance: ResonanceReport
    x: np.ndarray

    @property
    def resonance_class(self):
        return self.resonance.cls

    @property
    def kappas(self):
        return np.array([b.kappa for b in self.bound_states])

    def R(self, sign):
        return self.Rp if sign > 0 else self.Rm

    def to_csv(self, path):
        cols = [self.k, self.T.real, self.T.imag, self.Rp.real, self.Rp.imag,
                self.Rm.real, self.Rm.imag]
        np.savetxt(path, np.column_stack(cols), delimiter=",", fmt="%.17e", comments="",
                   header="k,ReT,ImT,ReRp,ImRp,ReRm,ImRm")

    def bound_states_to_csv(self, path):
        """One row per bound state: kappa followed by the eigenfunction samples."""
        header = "kappa," + ",".join(f"phi(x={x:.17e})" for x in self.x)
        rows = [np.concatenate([[b.kappa], b.phi]) for b in self.bound_states]
        data = np.array(rows).reshape(len(rows), 1 + self.x.size)
        np.savetxt(path, data, delimiter=",", fmt="%.17e", comments="", header=header)


def extrapolate_zero(k, values, npts=4, degree=7):
    """Polynomial through ``npts`` nodes on each side of 0, evaluated at 0.

    ``degree=3`` gives the least-squares cubic; the default interpolates all
    eight nodes, which removes the O(Δk⁴) bias of the cubic.
    """
    k = np.asarray(k)
    z = k.size // 2
    idx = np.concatenate([np.arange(z - npts, z), np.arange(z + 1, z + npts + 1)])
    kk = k[idx]
    coef_r = np.polyfit(kk / kk[-1], np.real(values[idx]), degree)
    coef_i = np.polyfit(kk / kk[-1], np.imag(values[idx]), degree)
    return complex(coef_r[-1], coef_i[-1])


def scattering_matrix(W, Wp, Wm, kgrid):
    """(T, R_+, R_-) with T = 2ik/W and R_± = ∓W_±/W.

    At k = 0 the non-resonant case uses the exact limits (T = 0, R_± from
    W_±(0)/W(0)); the resonant case extrapolates from the neighbouring nodes.
    """
    k = kgrid.k if isinstance(kgrid, KGrid) else np.asarray(kgrid)
    dk = k[1] - k[0]
    away = np.abs(k) >= 0.5 * dk
    bad = away & (np.abs(W) < 1e-12 * np.abs(2.0 * k))
    if np.any(bad):
        raise InteriorZero(f"W vanishes at interior k = {k[bad][0]:.6g}")
    T = np.empty(k.size, dtype=complex)
    Rp = np.empty_like(T)
    Rm = np.empty_like(T)
    T[away] = 2j * k[away] / W[away]
    Rp[away] = -Wp[away] / W[away]
    Rm[away] = Wm[away] / W[away]
    z = k.size // 2
    s = max(1.0, abs((W[z + 1] - W[z - 1]) / (2.0 * dk)))
    if abs(W[z]) >= TAU_RES * s:
        # W(0) is available directly from the k = 0 column and is safely nonzero
        T[z] = 0.0
        Rp[z] = -Wp[z] / W[z]
        Rm[z] = Wm[z] / W[z]
    else:
        for arr in (T, Rp, Rm):
            arr[z] = extrapolate_zero(k, arr)
    return T, Rp, Rm


def classify_resonance(W, hp0, hm0, k, tau=TAU_RES, hp_dk=None, hm_dk=None):
    """Classify the zero-energy behaviour from W(0) and h_±(0, 0).

    Scales: s = max(1, |W'(0)|) with W'(0) by central differences, and
    s' = (1 + |h_+(0,Δk)|)(1 + |h_-(0,Δk)|).
    """
    k = np.asarray(k)
    z = k.size // 2
    dk = k[z + 1] - k[z]
    W = np.asarray(W)
    dW = (W[z + 1] - W[z - 1]) / (2.0 * dk)
    s = max(1.0, abs(dW))
    hpd = abs(hp_dk) if hp_dk is not None else abs(hp0)
    hmd = abs(hm_dk) if hm_dk is not None else abs(hm0)
    s_prime = (1.0 + hpd) * (1.0 + hmd)
    W0 = complex(W[z])
    prod = complex(hp0 * hm0)
    if abs(W0) >= tau * s:
        cls = ResonanceClass.NON_RESONANT
    elif abs(prod) >= tau * s_prime:
        cls = ResonanceClass.RESONANT_A
    else:
        cls = ResonanceClass.RESONANT_B
    return ResonanceReport(cls, W0, prod, s, s_prime)


def _w_imag_axis(V, kappa, x0):
    """Real W(iκ) at x = 0 for an array of κ."""
    kk = 1j * np.atleast_1d(kappa)
    xs = np.array([-x0, 0.0, x0]) if x0 > 0 else np.array([0.0])
    hp, dhp = solve_h(V, kk, +1, xs)
    hm, dhm = solve_h(V, kk, -1, xs)
    i = 1 if x0 > 0 else 0
    W = 2j * kk * hp[i] * hm[i] + hm[i] * dhp[i] - dhm[i] * hp[i]
    return W.real


def kappa_max(V: Potential):
    return 1.0 + np.sqrt(max(0.0, -V.min_value()))


def bound_states(V, x=None, step=KAPPA_STEP, tol=KAPPA_TOL):
    """Bound states (κ_j, φ_j) as zeros of W(iκ) on (0, κ_max].

    φ_j = f_+(·, iκ_j) normalised to unit L² norm (trapezoid on ``x``), with the
    sign fixed so that its largest-magnitude sample is positive.  For x < 0 the
    proportional f_- is used, since f_+ is swamped by the growing solution there.
    """
    V = make_potential(V)
    xs = x_grid() if x is None else np.asarray(x, dtype=float)
    if V.family == "zero" or V.cutoff_radius == 0.0:
        return []
    kmax = kappa_max(V)
    kap = np.arange(step, kmax + 0.5 * step, step)
    wv = np.concatenate([_w_imag_axis(V, kap[i:i + 512], 1.0) for i in range(0, kap.size, 512)])
    sgn = np.sign(wv)
    roots = []
    for i in np.flatnonzero(sgn[:-1] * sgn[1:] < 0):
        r = optimize.brentq(lambda s: float(_w_imag_axis(V, s, 0.0)[0]),
                            kap[i], kap[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps)
        roots.append(r)
    for i in np.flatnonzero(wv == 0.0):
        roots.append(float(kap[i]))
    # a dip of |W| that does not cross zero may hide a pair of roots
    a = np.abs(wv)
    for i in range(1, a.size - 1):
        if a[i] < a[i - 1] and a[i] < a[i + 1] and sgn[i - 1] == sgn[i] == sgn[i + 1]:
            c2 = 0.5 * (wv[i - 1] - 2 * wv[i] + wv[i + 1])
            c1 = 0.5 * (wv[i + 1] - wv[i - 1])
            vmin = wv[i] - c1 * c1 / (4 * c2) if c2 != 0 else wv[i]
            if np.sign(vmin) != sgn[i]:
                warnings.warn(f"possible unresolved root pair near kappa = {kap[i]:.6g}",
                              MissedRootSuspected, stacklevel=2)
    roots = sorted(set(roots), reverse=True)
    out = []
    for r in roots:
        hp, _ = solve_h(V, 1j * r, +1, xs)
        hm, _ = solve_h(V, 1j * r, -1, xs)
        fp = np.real(np.exp(-r * xs) * hp)
        fm = np.real(np.exp(r * xs) * hm)
        # each of f_± is only trusted on its decaying side; join them at the node nearest 0
        j = int(np.argmin(np.abs(xs)))
        c = fp[j] / fm[j]
        joined = np.where(xs >= xs[j], fp, c * fm)
        nplus = float(np.sqrt(np.trapezoid(joined * joined, xs)))
        nminus = nplus / abs(c)
        phi = joined / nplus
        if phi[np.argmax(np.abs(phi))] < 0:
            phi = -phi
        phi.setflags(write=False)
        out.append(BoundState(float(r), phi, nplus, nminus))
    return out


@dataclass(frozen=True, eq=False)
class Projector:
    """P_c = 1 - Σ |φ_j⟩⟨φ_j| in the trapezoid inner product on ``x``."""

    x: np.ndarray
    phis: tuple

    def weights(self):
        w = np.full(self.x.size, self.x[1] - self.x[0]) if self.x.size > 1 else np.ones(1)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    def __call__(self, f):
        f = np.asarray(f)
        out = f.astype(np.result_type(f, float), copy=True)
        w = self.weights()
        for phi in self.phis:
            out = out - np.sum(w * np.conj(phi) * out) * phi
        return out

    def matrix(self):
        w = self.weights()
        P = np.eye(self.x.size)
        for phi in self.phis:
            P -= np.outer(phi, phi * w)
        return P


def pc_projector(states, x):
    """Continuous-spectrum projector from bound states (re-orthonormalised)."""
    x = np.asarray(x, dtype=float)
    proj = Projector(x, ())
    w = proj.weights()
    basis = []
    for b in states:
        phi = np.asarray(b.phi if isinstance(b, BoundState) else b, dtype=float).copy()
        for q in basis:
            phi -= np.sum(w * q * phi) * q
        phi /= np.sqrt(np.sum(w * phi * phi))
        basis.append(phi)
    return Projector(x, tuple(basis))


def compute_scattering(V, kgrid=None, x=None, field=None, check=True):
    """Jost field plus the full ScatteringData for ``V``."""
    V = make_potential(V)
    kgrid = kgrid or KGrid()
    if field is None:
        field = jost_field(V, kgrid, x)
    W, Wp, Wm = wronskians(field, kgrid, check=check)
    T, Rp, Rm = scattering_matrix(W, Wp, Wm, field.k)
    i0 = field.x_index(0.0)
    z = field.k.size // 2
    rep = classify_resonance(W, field.hp[i0, z], field.hm[i0, z], field.k,
                             hp_dk=field.hp[i0, z + 1], hm_dk=field.hm[i0, z + 1])
    states = tuple(bound_states(V, field.x))
    cap = 1.0 + moment_norm(V, 1)
    if len(states) > cap:
        raise AssertionError(f"{len(states)} bound states exceed the sanity cap {cap:.3g}")
    for a in (T, Rp, Rm, W, Wp, Wm):
        a.setflags(write=False)
    sd = ScatteringData(field.k, T, Rp, Rm, W, Wp, Wm, states, rep, field.x)
    return field, sd


def verify_identities(sd: ScatteringData, field: JostField, k_range=(0.05, 20.0), nx=5):
    """Sup-norm residuals of unitarity, consistency and the scattering relations."""
    k = sd.k
    sel = (np.abs(k) >= k_range[0]) & (np.abs(k) <= k_range[1])
    T, Rp, Rm = sd.T, sd.Rp, sd.Rm
    out = {
        "unitarity_plus": float(np.max(np.abs(np.abs(T[sel]) ** 2 + np.abs(Rp[sel]) ** 2 - 1.0), initial=0.0)),
        "unitarity_minus": float(np.max(np.abs(np.abs(T[sel]) ** 2 + np.abs(Rm[sel]) ** 2 - 1.0), initial=0.0)),
        "consistency": float(np.max(np.abs(T * np.conj(Rm) + np.conj(T) * Rp)[sel], initial=0.0)),
    }
    L = field.x[-1]
    xs = np.linspace(-L / 2, L / 2, nx)
    worst = 0.0
    for xv in xs:
        i = field.x_index(xv)
        for s in (+1, -1):
            fs = field.f(s, i)
            fo = field.f(-s, i)
            res = T * fs - sd.R(-s) * fo - fo[::-1]
            worst = max(worst, float(np.max(np.abs(res[sel]), initial=0.0)))
    out["scattering_relation"] = worst
    return out


def type_invariants(sd: ScatteringData, V=None):
    """Residuals of the ScatteringData type invariants on the whole grid."""
    k = sd.k
    dk = k[1] - k[0]
    away = np.abs(k) >= dk * 0.5
    T = sd.T
    res = {
        "max_abs_T_minus_1": float(np.max(np.abs(T)) - 1.0),
        "unitarity": float(max(np.max(np.abs(np.abs(T[away]) ** 2 + np.abs(sd.Rp[away]) ** 2 - 1)),
                               np.max(np.abs(np.abs(T[away]) ** 2 + np.abs(sd.Rm[away]) ** 2 - 1)))),
        "consistency": float(np.max(np.abs(T * np.conj(sd.Rm) + np.conj(T) * sd.Rp))),
        "conjugation": float(max(np.max(np.abs(a[::-1] - np.conj(a))) for a in (T, sd.Rp, sd.Rm))),
    }
    if V is not None:
        res["bound_state_cap"] = float(len(sd.bound_states) - (1.0 + moment_norm(make_potential(V), 1)))
    return res
