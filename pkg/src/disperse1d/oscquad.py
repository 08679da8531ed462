"""Oscillatory quadrature: Fresnel integrals, a Legendre–Filon rule and
numerical checks of second-derivative van der Corput type bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special
from scipy.interpolate import CubicSpline

from ._parallel import pmap
from .errors import BoundViolated, NoConvergence

VDC_CONSTANT = 2.0 ** (8.0 / 3.0)
VDC_SLACK = 1.05
_FRESNEL_SWITCH = 1.6
_EPS = 1e-16


def _half_square_mod2(x):
    """x²/2 reduced to [0, 2) without the rounding error of forming x² (Dekker split)."""
    c = 134217729.0 * x
    hi = c - (c - x)
    lo = x - hi
    sq = x * x
    err = ((hi * hi - sq) + 2.0 * hi * lo) + lo * lo
    return (math.fmod(0.5 * sq, 2.0) + 0.5 * err) % 2.0


def _fresnel_scalar(x):
    ax = abs(x)
    if ax == 0.0:
        return 0.0, 0.0
    if ax <= _FRESNEL_SWITCH:
        # power series; odd powers alternate between the C and S sums
        fact = 0.5 * math.pi * ax * ax
        term = ax
        sum_c, sum_s = ax, 0.0
        n = 1
        k = 0
        while True:
            k += 1
            term *= fact / k
            n += 2
            if k % 4 == 1:
                sum_s += term / n
            elif k % 4 == 2:
                sum_c -= term / n
            elif k % 4 == 3:
                sum_s -= term / n
            else:
                sum_c += term / n
            if term / n < _EPS * max(abs(sum_c), abs(sum_s)):
                break
            if k > 200:
                break
        c, s = sum_c, sum_s
    else:
        # Lentz evaluation of the complementary error function continued fraction
        tiny = 1e-300
        b = complex(1.0, -math.pi * ax * ax)
        cc = 1.0 / tiny
        d = h = 1.0 / b
        n = -1
        for _ in range(2, 400):
            n += 2
            a = -n * (n + 1)
            b += 4.0
            d = 1.0 / (a * d + b)
            cc = b + a / cc
            delta = cc * d
            h *= delta
            if abs(delta.real - 1.0) + abs(delta.imag) < _EPS:
                break
        h *= complex(ax, -ax)
        phase = math.pi * _half_square_mod2(ax)
        cs = complex(0.5, 0.5) * (1.0 - complex(math.cos(phase), math.sin(phase)) * h)
        c, s = cs.real, cs.imag
    if x < 0:
        c, s = -c, -s
    return c, s


def fresnel(z):
    """(C(z), S(z)) with C = ∫₀^z cos(πs²/2) ds and S = ∫₀^z sin(πs²/2) ds."""
    if np.ndim(z) == 0:
        z = float(z)
        if math.isinf(z):
            return math.copysign(0.5, z), math.copysign(0.5, z)
        return _fresnel_scalar(z)
    z = np.asarray(z, dtype=float)
    out = np.array([fresnel(float(v)) for v in z.ravel()])
    return out[:, 0].reshape(z.shape), out[:, 1].reshape(z.shape)


@dataclass(frozen=True)
class OscIntegral:
    """∫_a^b e^{itφ(k)} f(k) dk.

    ``amplitude`` is a callable or, together with ``grid``, samples that are
    interpolated by a cubic spline.  Infinite limits are realised by a C^∞
    taper over the last 10% of the window [a, 10·max(|a|, t, 1)].
    """

    phase: Callable
    amplitude: object
    a: float
    b: float
    t: float
    dphase: Callable | None = None
    d2phase: Callable | None = None
    grid: np.ndarray | None = None


def _num_deriv(fun, h=1e-5):
    return lambda k: (fun(k + h) - fun(k - h)) / (2 * h)


def _amplitude(I: OscIntegral):
    f = I.amplitude
    if callable(f):
        return f
    if I.grid is None:
        val = complex(f)
        return lambda k: np.full(np.shape(k), val, dtype=complex)
    spl_r = CubicSpline(I.grid, np.real(f))
    spl_i = CubicSpline(I.grid, np.imag(f))
    return lambda k: spl_r(k) + 1j * spl_i(k)


def smooth_step(u):
    """C^∞ step: 0 for u ≤ 0, 1 for u ≥ 1."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    out = np.zeros_like(u)
    inner = (u > 0) & (u < 1)
    ui = u[inner]
    out[inner] = special.expit(1.0 / (1.0 - ui) - 1.0 / ui)
    out[u >= 1] = 1.0
    return out


def _taper(k, lo, hi, left, right, frac=0.1):
    """1 inside, rolling smoothly to 0 over the outer ``frac`` of [lo, hi] on infinite sides."""
    k = np.asarray(k, dtype=float)
    w = np.ones_like(k)
    span = hi - lo
    if right:
        s0 = hi - frac * span
        w = w * (1.0 - smooth_step((k - s0) / (hi - s0)))
    if left:
        s0 = lo + frac * span
        w = w * (1.0 - smooth_step((s0 - k) / (s0 - lo)))
    return w


_NQ = 16
_XQ, _WQ = np.polynomial.legendre.leggauss(_NQ)
_PV = np.polynomial.legendre.legvander(_XQ, _NQ - 1)  # P_n(x_i)
_PROJ = (_PV * _WQ[:, None]).T * ((2 * np.arange(_NQ) + 1) / 2.0)[:, None]


def _filon_panels(phi, dphi, f, t, u, v, with_floor=False):
    """Legendre–Filon estimate on panels [u, v] (vectorised).

    With ``with_floor`` also returns the rounding floor of each panel: the
    phase t·φ is only known to about eps·t·|φ|.
    """
    m = 0.5 * (u + v)
    h = 0.5 * (v - u)
    k = m[:, None] + h[:, None] * _XQ[None, :]
    pm = phi(m)
    dpm = dphi(m)
    resid = phi(k) - pm[:, None] - dpm[:, None] * (k - m[:, None])
    g = f(k) * np.exp(1j * t * resid)
    coef = g @ _PROJ.T  # Legendre coefficients per panel
    theta = t * dpm * h
    n = np.arange(_NQ)
    jn = special.spherical_jn(n[None, :], np.abs(theta)[:, None])
    sgn = np.where(theta[:, None] < 0, (-1.0) ** n[None, :], 1.0)
    mom = 2.0 * (1j ** n)[None, :] * jn * sgn
    val = h * np.exp(1j * t * pm) * np.sum(coef * mom, axis=1)
    if with_floor:
        mag = h * (np.abs(g) @ _WQ)
        floor = 64.0 * np.finfo(float).eps * (1.0 + t * np.max(np.abs(phi(k)), axis=1)) * mag
        return val, floor
    return val


def stationary_points(dphi, a, b, n=2001):
    """Roots of φ' on [a, b] by sign scan plus bisection."""
    ks = np.linspace(a, b, n)
    d = dphi(ks)
    roots = []
    for i in np.flatnonzero(np.sign(d[:-1]) * np.sign(d[1:]) < 0):
        roots.append(optimize.brentq(lambda s: float(dphi(np.array(s))), ks[i], ks[i + 1], xtol=1e-14))
    roots += [float(ks[i]) for i in np.flatnonzero(d == 0)]
    return sorted(roots)


def oscint(I: OscIntegral, rtol=1e-8, atol=1e-15, max_panels=2_000_000):
    """Adaptive Legendre–Filon quadrature of an OscIntegral."""
    t = float(I.t)
    phi = I.phase
    dphi = I.dphase or _num_deriv(phi)
    f0 = _amplitude(I)
    a, b = float(I.a), float(I.b)
    left, right = math.isinf(a), math.isinf(b)
    if left or right:
        W = 10.0 * max(abs(a) if not left else 0.0, abs(b) if not right else 0.0, t, 1.0)
        # the taper must be long compared with the local oscillation: t W² ≳ 2500
        W = max(W, 50.0 / math.sqrt(max(t, 1e-12)))
        lo = -W if left else a
        hi = W if right else b
        f = lambda k: f0(k) * _taper(k, lo, hi, left, right)  # noqa: E731
        a, b = lo, hi
    else:
        f = f0
    if b == a:
        return 0.0j
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    edges = [a, b] + [s for s in stationary_points(dphi, a, b) if a < s < b]
    d2 = I.d2phase
    # initial resolution: a few panels per unit of sqrt(t |φ''|) and of t|φ'|
    probe = np.linspace(a, b, 257)
    curv = np.abs(d2(probe)) if d2 is not None else np.abs(np.gradient(dphi(probe), probe))
    n0 = int(np.clip((b - a) * np.sqrt(t * curv.max()), 4, 200000))
    edges = np.unique(np.concatenate([np.sort(edges), np.linspace(a, b, n0 + 1)]))
    u, v = edges[:-1], edges[1:]
    total_len = b - a
    done = 0.0j
    count = 0
    while u.size:
        coarse, floor = _filon_panels(phi, dphi, f, t, u, v, with_floor=True)
        mid = 0.5 * (u + v)
        fine = _filon_panels(phi, dphi, f, t, u, mid) + _filon_panels(phi, dphi, f, t, mid, v)
        err = np.abs(fine - coarse)
        scale = abs(done + fine.sum()) + atol
        ok = err <= np.maximum(rtol * scale * (v - u) / total_len, atol * (v - u) / total_len)
        ok |= err <= floor
        done += fine[ok].sum()
        count += u.size
        if count > max_panels:
            raise NoConvergence(f"panel budget of {max_panels} exhausted")
        bad = ~ok
        u, v = np.concatenate([u[bad], mid[bad]]), np.concatenate([mid[bad], v[bad]])
    return sign * done


def vdc_ratio(phase, amplitude_norm, integral, t, min_d2):
    return abs(integral) * math.sqrt(t * min_d2) / amplitude_norm


def vdc_check(phase, f, a, b, t_list, d2phase, dphase=None, grid=None, norm=None, raise_on_fail=True):
    """Measured constants |I(t)| [t min φ'']^{1/2} / ‖f‖_{A_1} for each t.

    ``f`` is a WienerProfile (norm taken from it), a callable or a constant;
    ``norm`` overrides the A_1 norm.
    """
    from .wiener import WienerProfile

    if isinstance(f, WienerProfile):
        nrm = f.norm_A1 if norm is None else norm
        amp, grid = f.resynthesize(), f.k
    elif callable(f):
        amp, nrm = f, norm
    else:
        amp, nrm = complex(f), abs(complex(f)) if norm is None else norm
    if nrm is None:
        raise ValueError("norm is required for callable amplitudes")
    probe = np.linspace(a, b, 4001)
    md2 = float(np.min(d2phase(probe)))
    ratios = []
    for t in t_list:
        val = oscint(OscIntegral(phase, amp, a, b, t, dphase, d2phase, grid))
        r = vdc_ratio(phase, nrm, val, t, md2)
        ratios.append(r)
        if raise_on_fail and r > VDC_CONSTANT * VDC_SLACK:
            raise BoundViolated(f"van der Corput ratio {r:.4f} at t = {t} exceeds {VDC_CONSTANT:.4f}·{VDC_SLACK}")
    return np.array(ratios)


# --- J(t) and Psi envelope checks ---------------------------------------------

_GL8_X, _GL8_W = np.polynomial.legendre.leggauss(8)


def kg_phase(v, m=1.0):
    phi = lambda s: np.sqrt(s * s + m * m) + v * s  # noqa: E731
    dphi = lambda s: s / np.sqrt(s * s + m * m) + v  # noqa: E731
    d2phi = lambda s: m * m / (s * s + m * m) ** 1.5  # noqa: E731
    return phi, dphi, d2phi


def _psi_nodes_fast(v, t, kmax, dtheta=np.pi / 4):
    """Nodes on [0, kmax] with local spacing min(dθ/(t|φ'|), 1/(4√(tφ'')), 0.05 + k/20)."""
    phi, dphi, d2phi = kg_phase(v)
    # integrate dk/ds = step(k) via a fine reference grid in k, then invert
    ref = np.concatenate([np.linspace(0, min(kmax, 2.0), 20001), np.geomspace(min(kmax, 2.0), kmax, 20001)[1:]]) \
        if kmax > 2.0 else np.linspace(0, kmax, 20001)
    step = np.minimum.reduce([dtheta / (t * np.abs(dphi(ref)) + 1e-300),
                              0.25 / np.sqrt(t * d2phi(ref)), 0.05 + ref / 20.0])
    dens = 1.0 / step
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(ref))])
    n = int(math.ceil(cum[-1])) + 1
    return np.interp(np.linspace(0, cum[-1], n + 1), cum, ref)


def psi_values(v, t, k_nodes):
    """Ψ(k,t) = ∫₀^k e^{itφ(τ)} dτ at increasing nodes (8-point Gauss per panel)."""
    phi, _, _ = kg_phase(v)
    k_nodes = np.asarray(k_nodes, dtype=float)
    u, w = k_nodes[:-1], k_nodes[1:]
    out = np.empty(k_nodes.size, dtype=complex)
    out[0] = 0.0
    acc = 0.0j
    for i0 in range(0, u.size, 200000):
        uu, ww = u[i0:i0 + 200000], w[i0:i0 + 200000]
        mid, half = 0.5 * (uu + ww), 0.5 * (ww - uu)
        kq = mid[:, None] + half[:, None] * _GL8_X[None, :]
        panel = half * (np.exp(1j * t * phi(kq)) @ _GL8_W)
        cs = acc + np.cumsum(panel)
        out[1 + i0:1 + i0 + uu.size] = cs
        acc = cs[-1]
    return out


def lambda_test(k):
    """Built-in Λ(k) = k^{-5/2} test family."""
    return np.asarray(k, dtype=float) ** -2.5


def J_value(v, t, kcut=400.0):
    """J(t) = ∫₁^t |Ψ(k,t) Λ(k)| dk (upper limit capped at ``kcut``).

    The neglected part is at most sup|Ψ| · (2/3) kcut^{-3/2}; it is returned
    as the second element.
    """
    if t <= 1.0:
        return 0.0, 0.0
    top = min(float(t), kcut)
    nodes = _psi_nodes_fast(v, t, top)
    psi = psi_values(v, t, nodes)
    sel = nodes >= 1.0
    kk = np.concatenate([[1.0], nodes[sel]])
    ps = np.concatenate([[np.interp(1.0, nodes, psi.real) + 1j * np.interp(1.0, nodes, psi.imag)], psi[sel]])
    J = float(np.trapezoid(np.abs(ps) * lambda_test(kk), kk))
    rem = 0.0
    if t > kcut:
        bound = float(np.max(np.abs(psi))) + 2.0 / (t * max(1e-3, min(abs(v + 1), abs(v - 1), 1.0)))
        rem = bound * (2.0 / 3.0) * (kcut ** -1.5 - t ** -1.5)
    return J, rem


@dataclass(frozen=True)
class AppendixRow:
    t: float
    v: float
    J: float
    sqrt_t_J: float
    remainder: float


def appendix_psi_check(v_list=(-2.0, -1.0, -0.6, -0.3, 0.0, 0.5, 1.0),
                       t_list=(10.0, 100.0, 1000.0, 10000.0), raise_on_fail=False):
    """Table of t^{1/2}J(t) and, per t, the max over v; checks max ≤ 2·median."""
    jobs = [(t, v) for t in t_list for v in v_list]
    vals = pmap(lambda tv: J_value(tv[1], tv[0]), jobs)
    rows = [AppendixRow(t, v, J, math.sqrt(t) * J, rem) for (t, v), (J, rem) in zip(jobs, vals)]
    per_t = np.array([max(r.sqrt_t_J for r in rows if r.t == t) for t in t_list])
    bounded = bool(per_t.max() <= 2.0 * np.median(per_t)) if per_t.size else True
    if raise_on_fail and not bounded:
        raise BoundViolated(f"max_v sqrt(t) J(t) not bounded: {per_t}")
    return rows, per_t, bounded


def appendix_to_csv(rows, path):
    data = np.array([[r.t, r.v, r.J, r.sqrt_t_J] for r in rows])
    np.savetxt(path, data, delimiter=",", fmt="%.17e", header="t,v,J,sqrt_t_times_J", comments="")


def envelope_check(v_list=(-2.0, -1.0, -0.6, -0.3, 0.0, 0.5, 1.0),
                   t_list=(1.0, 10.0, 100.0, 1000.0, 10000.0), kmax=50.0, slack=1.1):
    """Worst ratio |Ψ(k,t)| / (Ĉ t^{-1/2}(k+1)^{3/2}) with Ĉ measured at (k,t) = (1,1).

    Ĉ is measured per v.  Returns a dict v -> (worst ratio / slack, argmax (k, t), Ĉ),
    so the envelope holds with the given slack when the first entry is ≤ 1.
    """
    out = {}
    for v in v_list:
        c_hat = abs(psi_values(v, 1.0, _psi_nodes_fast(v, 1.0, 1.0))[-1]) / 2.0 ** 1.5
        worst, where = 0.0, None
        for t in t_list:
            nodes = _psi_nodes_fast(v, t, kmax)
            psi = np.abs(psi_values(v, t, nodes))
            env = c_hat * t ** -0.5 * (nodes + 1.0) ** 1.5
            r = psi / env
            i = int(np.argmax(r))
            if r[i] > worst:
                worst, where = float(r[i]), (float(nodes[i]), float(t))
        out[v] = (worst / slack, where, c_hat)
    return out


def vdc_suite(t_list=(1.0, 10.0, 100.0)):
    """Measured van der Corput constants on the built-in test set.

    φ = k² with f ≡ 1 and f ≡ 7 on [-1, 1] (homogeneity), and the
    Klein–Gordon phase √(k²+1) with the amplitude (1+k²)^{-1} on [-1, 1];
    its transform is (1/2)e^{-|p|}, so ‖f‖_{A_1} = 1.
    """
    sq = lambda s: s * s  # noqa: E731
    dsq = lambda s: 2.0 * s  # noqa: E731
    d2sq = lambda s: np.full(np.shape(s), 2.0)  # noqa: E731
    phi, dphi, d2phi = kg_phase(0.0)
    lor = lambda s: 1.0 / (1.0 + s * s)  # noqa: E731
    return {
        "k2_unit": vdc_check(sq, 1.0, -1.0, 1.0, t_list, d2sq, dsq, raise_on_fail=False),
        "k2_scaled": vdc_check(sq, 7.0, -1.0, 1.0, t_list, d2sq, dsq, raise_on_fail=False),
        "kg_lorentzian": vdc_check(phi, lor, -1.0, 1.0, t_list, d2phi, dphi, norm=1.0, raise_on_fail=False),
    }
