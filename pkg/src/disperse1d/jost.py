"""Jost solutions f_±(x,k) = e^{±ikx} h_±(x,k) on an (x, k) product grid.

The second-order equation f'' = (V - k^2) f is integrated as a first-order
system with a fourth-order Magnus integrator (two Gauss points).  The Magnus
step is exact for piecewise-constant V, so large |k| costs nothing extra.
Each step is compared with two half steps; the difference gives both the
local error estimate and a Richardson-extrapolated update.  f_- is launched at
the left edge from e^{-ikx}; f_+ is obtained by running the same integrator
on the mirrored potential V(-x).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _ft
from ._parallel import pmap
from .errors import NonRealKernel, StepFailure, WronskianDrift
from .potential import Potential, evaluate, make_potential

LOCAL_TOL = 1e-12
SYMMETRY_TOL = 1e-8
DRIFT_RTOL = 1e-7
_G = np.sqrt(3.0) / 6.0
_C = np.sqrt(3.0) / 12.0
_MAX_STEPS = 200000


@dataclass(frozen=True)
class KGrid:
    """Symmetric uniform wavenumber grid with 0 as a node."""

    K: float = 40.0
    n: int = 4097

    def __post_init__(self):
        m = self.n - 1
        if self.n < 3 or m & (m - 1):
            raise ValueError("KGrid node count must be 2**j + 1")
        if not (np.isfinite(self.K) and self.K > 0):
            raise ValueError("KGrid half-width must be positive")

    @property
    def k(self):
        return np.linspace(-self.K, self.K, self.n)

    @property
    def dk(self):
        return 2.0 * self.K / (self.n - 1)

    @property
    def zero_index(self):
        return self.n // 2


def x_grid(L=20.0, n=201):
    return np.linspace(-L, L, n)


@dataclass(frozen=True, eq=False)
class JostField:
    """h_± and ∂ₓh_± sampled on ``x`` (rows) times ``k`` (columns)."""

    x: np.ndarray
    k: np.ndarray
    hp: np.ndarray
    hm: np.ndarray
    dhp: np.ndarray
    dhm: np.ndarray
    potential_key: str = ""
    meta: dict = field(default_factory=dict)

    def h(self, sign):
        return self.hp if sign > 0 else self.hm

    def dh(self, sign):
        return self.dhp if sign > 0 else self.dhm

    def x_index(self, x):
        i = int(np.argmin(np.abs(self.x - x)))
        if abs(self.x[i] - x) > 1e-9 * (1.0 + abs(x)):
            raise ValueError(f"x = {x} is not a node of the x-grid")
        return i

    def f(self, sign, i=None):
        """Jost solution f_± = e^{±ikx} h_± (row ``i`` or the whole field)."""
        x = self.x[:, None] if i is None else self.x[i]
        return np.exp(sign * 1j * self.k * x) * (self.h(sign) if i is None else self.h(sign)[i])

    def df(self, sign, i=None):
        x = self.x[:, None] if i is None else self.x[i]
        h = self.h(sign) if i is None else self.h(sign)[i]
        dh = self.dh(sign) if i is None else self.dh(sign)[i]
        return np.exp(sign * 1j * self.k * x) * (dh + sign * 1j * self.k * h)

    def symmetry_residual(self):
        """sup |a(x,-k) - conj a(x,k)| over the four stored arrays."""
        return max(float(np.max(np.abs(a[:, ::-1] - np.conj(a))))
                   for a in (self.hp, self.hm, self.dhp, self.dhm))

    def boundary_residual(self):
        return float(max(np.max(np.abs(self.hp[-1] - 1.0)), np.max(np.abs(self.hm[0] - 1.0))))

    def save(self, path):
        """Write an ``.npz`` archive: x, k and the four complex arrays."""
        np.savez_compressed(path, x=self.x, k=self.k, hp=self.hp, hm=self.hm,
                            dhp=self.dhp, dhm=self.dhm,
                            potential_key=np.array(self.potential_key))

    @classmethod
    def load(cls, path):
        with np.load(path) as d:
            return cls(d["x"], d["k"], d["hp"], d["hm"], d["dhp"], d["dhm"],
                       str(d["potential_key"]))


def _magnus_step(Vfun, x0, hstep, k2, y0, y1):
    """One Magnus-4 step of size ``hstep`` for (f, f') from x0."""
    v1 = Vfun(x0 + hstep * (0.5 - _G))
    v2 = Vfun(x0 + hstep * (0.5 + _G))
    c = _C * hstep * hstep * (v1 - v2)
    qbar = 0.5 * (v1 + v2) - k2
    s2 = c * c + hstep * hstep * qbar
    s = np.sqrt(s2.astype(complex))
    small = np.abs(s2) < 1e-6
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        sinhc = np.where(small, 1.0 + s2 / 6.0 + s2 * s2 / 120.0, np.sinh(s) / np.where(small, 1.0, s))
        cosh = np.where(small, 1.0 + s2 / 2.0 + s2 * s2 / 24.0, np.cosh(s))
    n0 = cosh * y0 + sinhc * (c * y0 + hstep * y1)
    n1 = cosh * y1 + sinhc * (hstep * qbar * y0 - c * y1)
    return n0, n1


def _integrate(Vfun, brk, cutoff, xs, k, tol=LOCAL_TOL):
    """f with f ~ e^{-ikx} at -inf, sampled at ``xs`` (increasing).

    Returns (f, f') arrays of shape (len(xs), len(k)).
    """
    k = np.asarray(k, dtype=complex)
    k2 = k * k
    X = max(abs(xs[0]), cutoff)
    x0 = -X
    y0 = np.exp(-1j * k * x0)
    y1 = -1j * k * y0
    stops = np.unique(np.concatenate([xs, brk[(brk > x0) & (brk < xs[-1])]]))
    stops = stops[stops >= x0]
    out0 = np.empty((xs.size, k.size), dtype=complex)
    out1 = np.empty_like(out0)
    node = {float(x): i for i, x in enumerate(xs)}
    kscale = np.maximum(1.0, np.abs(k))
    hstep = 0.05
    nsteps = 0
    cur = x0
    for target in stops:
        if target > cur:
            if target <= -cutoff or cur >= cutoff:
                # V vanishes identically here: the Magnus step is exact
                y0, y1 = _magnus_step(Vfun, cur, target - cur, k2, y0, y1)
                cur = target
            while cur < target:
                hh = min(hstep, target - cur)
                a0, a1 = _magnus_step(Vfun, cur, hh, k2, y0, y1)
                m0, m1 = _magnus_step(Vfun, cur, 0.5 * hh, k2, y0, y1)
                b0, b1 = _magnus_step(Vfun, cur + 0.5 * hh, 0.5 * hh, k2, m0, m1)
                d0 = (b0 - a0) / 15.0
                d1 = (b1 - a1) / 15.0
                scale = np.abs(b0) + np.abs(b1) / kscale
                err = float(np.max((np.abs(d0) + np.abs(d1) / kscale) / np.maximum(scale, 1e-300)))
                if not np.isfinite(err):
                    bad = np.flatnonzero(~np.isfinite(b0))
                    raise StepFailure("overflow during Jost integration",
                                      k=complex(k[bad[0]]) if bad.size else None)
                nsteps += 1
                if nsteps > _MAX_STEPS:
                    raise StepFailure("step budget exhausted", k=None)
                if err <= tol or hh < 1e-9:
                    y0, y1 = b0 + d0, b1 + d1
                    cur = target if hh == target - cur else cur + hh
                    fac = 2.0 if err == 0 else min(2.0, 0.9 * (tol / err) ** 0.2)
                    hstep = max(hh * fac, hstep if hh < hstep else 0.0)
                else:
                    hstep = hh * max(0.2, 0.9 * (tol / err) ** 0.2)
        i = node.get(float(target))
        if i is not None:
            out0[i] = y0
            out1[i] = y1
    return out0, out1


def _launch_data(V: Potential):
    brk = V.breakpoints()
    return (lambda s: evaluate(V, s)), brk, (lambda s: evaluate(V, -s)), -brk[::-1]


def solve_h(V, k, sign=+1, x=None, tol=LOCAL_TOL):
    """Jost factor h_± and its x-derivative on the x-grid.

    ``k`` may be a scalar or an array (real, or purely imaginary with
    positive imaginary part).  Returns arrays of shape (len(x),) or
    (len(x), len(k)).
    """
    V = make_potential(V)
    xs = x_grid() if x is None else np.asarray(x, dtype=float)
    kk = np.atleast_1d(np.asarray(k, dtype=complex))
    Vf, brk, Vr, brk_r = _launch_data(V)
    if sign > 0:
        g, dg = _integrate(Vr, brk_r, V.cutoff_radius, -xs[::-1], kk, tol)
        f, df = g[::-1], -dg[::-1]
        ph = np.exp(-1j * np.outer(xs, kk))
        h = ph * f
        dh = ph * (df - 1j * kk * f)
    else:
        f, df = _integrate(Vf, brk, V.cutoff_radius, xs, kk, tol)
        ph = np.exp(1j * np.outer(xs, kk))
        h = ph * f
        dh = ph * (df + 1j * kk * f)
    if np.ndim(k) == 0:
        return h[:, 0], dh[:, 0]
    return h, dh


def jost_field(V, kgrid: KGrid | None = None, x=None, chunk=512) -> JostField:
    """Batch ``solve_h`` over the whole k-grid, both signs."""
    V = make_potential(V)
    kgrid = kgrid or KGrid()
    xs = x_grid() if x is None else np.asarray(x, dtype=float)
    k = kgrid.k
    n = k.size
    z = n // 2
    # each chunk holds ±k pairs so mirrored columns share one step sequence
    pos = np.arange(z, n)
    chunks = []
    for i in range(0, pos.size, chunk // 2):
        pc = pos[i:i + chunk // 2]
        chunks.append(np.unique(np.concatenate([2 * z - pc, pc])))

    def work(idx):
        kc = k[idx]
        hp, dhp = solve_h(V, kc, +1, xs)
        hm, dhm = solve_h(V, kc, -1, xs)
        return hp, hm, dhp, dhm

    parts = pmap(work, chunks)
    arrays = [np.empty((xs.size, n), dtype=complex) for _ in range(4)]
    for idx, part in zip(chunks, parts):
        for a, b in zip(arrays, part):
            a[:, idx] = b
    for a in arrays:
        a.setflags(write=False)
    fld = JostField(xs, k, *arrays, potential_key=V.key(),
                    meta={"K": kgrid.K, "n": kgrid.n, "cutoff_radius": V.cutoff_radius})
    return fld


def _wronskians_at(field: JostField, i):
    k = field.k
    hp, hm, dhp, dhm = field.hp[i], field.hm[i], field.dhp[i], field.dhm[i]
    x = field.x[i]
    W = 2j * k * hp * hm + hm * dhp - dhm * hp
    Wp = np.exp(-2j * k * x) * (hm * dhp[::-1] - dhm * hp[::-1])
    Wm = np.exp(2j * k * x) * (hp * dhm[::-1] - dhp * hm[::-1])
    return W, Wp, Wm


def wronskians(field: JostField, kgrid: KGrid | None = None, check=True):
    """(W, W_+, W_-) on the k-grid, evaluated at x = 0.

    With ``check`` the same quantities are recomputed at x = -L/2 and L/2
    and compared at relative tolerance 1e-7 (scale: max(|W|, 2|k|, 2Δk)).
    """
    i0 = field.x_index(0.0)
    W, Wp, Wm = _wronskians_at(field, i0)
    if check:
        drift = wronskian_drift(field)
        if drift > DRIFT_RTOL:
            raise WronskianDrift(f"Wronskian x-dependence {drift:.3e} exceeds {DRIFT_RTOL}")
    return W, Wp, Wm


def wronskian_drift(field: JostField):
    i0 = field.x_index(0.0)
    L = field.x[-1]
    ref = _wronskians_at(field, i0)
    dk = abs(field.k[1] - field.k[0]) if field.k.size > 1 else 1.0
    # 2|k| floored at the grid spacing keeps the k = 0 column meaningful
    scale = np.maximum(np.abs(ref[0]), 2.0 * np.maximum(np.abs(field.k), dk))
    worst = 0.0
    for xs in (-L / 2.0, L / 2.0):
        other = _wronskians_at(field, field.x_index(xs))
        for a, b in zip(ref, other):
            worst = max(worst, float(np.max(np.abs(a - b) / scale)))
    return worst


@dataclass(frozen=True, eq=False)
class BKernel:
    """Samples of a transformation-operator kernel B_±(x, ·).

    ``values`` lives on ``y``; the represented function is split into a
    discrete part (exactly invertible on the k-grid) and a pole model
    a/(k+i) whose transform is added analytically.
    """

    x: float
    sign: int
    y: np.ndarray
    values: np.ndarray
    k: np.ndarray
    tail_amplitude: complex
    residual_hat: np.ndarray
    p: np.ndarray
    imag_residual: float
    wrong_side_mass: float

    def forward(self, k=None):
        """Reconstruct h_±(x, k) - 1 (or ∂ₓh_±) from the kernel."""
        k = self.k if k is None else np.asarray(k, dtype=float)
        return _ft.forward(self.residual_hat, self.p, k) + self.tail_amplitude / (k + 1j)

    def l1(self):
        return float(np.trapezoid(np.abs(self.values), self.y))


def _transform_with_tail(g, k):
    """Split g ≈ a/(k+i) + r and transform r; returns (a, p, rhat, ghat)."""
    n = k.size
    m = max(4, int(0.02 * n))
    outer = np.concatenate([np.arange(m), np.arange(n - m, n)])
    a = complex(np.mean((k[outer] + 1j) * g[outer]))
    r = g - a / (k + 1j)
    p, rhat = _ft.inverse(r, k)
    model = np.where(p > 0, -1j * a * np.exp(-np.clip(p, 0, None)), 0.0)
    model = np.where(p == 0, -1j * a, model)  # one-sided limit: B is continuous on its support
    return a, p, rhat, rhat + model


def b_kernel(field: JostField, x: float, sign: int = +1, derivative=False, imag_tol=1e-6):
    """B_±(x, y) (or ∂ₓB_± with ``derivative``) on its natural y-grid.

    h_±(x,k) - 1 = ∫ B_±(x,y) e^{±2iky} dy over ±y ≥ 0, so
    B_±(x, y) = 2 ĝ(±2y) with ĝ the transform of h_± - 1.
    """
    sign = 1 if sign > 0 else -1
    i = field.x_index(x)
    k = field.k
    g = field.dh(sign)[i] if derivative else field.h(sign)[i] - 1.0
    a, p, rhat, ghat = _transform_with_tail(np.asarray(g, dtype=complex), k)
    y = sign * p / 2.0
    vals = 2.0 * ghat
    if sign < 0:
        y, vals = y[::-1], vals[::-1]
    imag = float(np.max(np.abs(vals.imag))) if vals.size else 0.0
    if imag > imag_tol * max(1.0, float(np.max(np.abs(vals.real)))):
        raise NonRealKernel(f"imaginary part of B kernel is {imag:.3e}")
    wrong = (sign * y) < 0
    wrong_mass = float(np.sum(np.abs(vals[wrong])) * abs(y[1] - y[0]))
    return BKernel(float(field.x[i]), sign, y, vals.real.copy(), k, a, rhat, p, imag, wrong_mass)
