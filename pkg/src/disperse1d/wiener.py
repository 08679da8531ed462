"""Finite-grid surrogates for the Wiener algebras A and A_1.

A function f on the k-grid is written as c + ∫ e^{ikp} ĝ(p) dp.  Before the
discrete transform the slowly decaying odd tail b·k/(k²+1) is removed and its
transform -(ib/2) sgn(p) e^{-|p|} added back analytically; this keeps the
Gibbs ringing of the truncated 1/k tail out of ĝ and its L¹ norm.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _ft
from .errors import NoLimitAtInfinity, ResonantInput, SlowConvergence
from .jost import JostField, b_kernel
from .scattering import ResonanceClass, ScatteringData, extrapolate_zero

END_TOL = 0.01
OUTER_FRACTION = 0.02


@dataclass(frozen=True, eq=False)
class WienerProfile:
    c: complex
    p: np.ndarray
    hat: np.ndarray
    l1_norm: float
    k: np.ndarray
    tail: complex
    residual_hat: np.ndarray

    @property
    def norm_A1(self):
        return abs(self.c) + self.l1_norm

    def resynthesize(self, k=None):
        """c + ∫ e^{ikp} ĝ(p) dp; exact on the native k-grid."""
        k = self.k if k is None else np.asarray(k, dtype=float)
        if k is self.k:
            disc = _exact_forward(self.residual_hat, self.k)
        else:
            disc = _ft.forward(self.residual_hat, self.p, k)
        return self.c + disc + self.tail * k / (k * k + 1.0)

    def to_csv(self, path):
        header = (f"# c = {self.c.real:.17e} {self.c.imag:+.17e}j\n"
                  f"# l1_norm = {self.l1_norm:.17e}\np,Re_ghat,Im_ghat")
        np.savetxt(path, np.column_stack([self.p, self.hat.real, self.hat.imag]),
                   delimiter=",", fmt="%.17e", header=header, comments="")


def _exact_forward(rhat, k):
    """Inverse of ``_ft.inverse`` evaluated on the original nodes (FFT based)."""
    n = k.size
    M = rhat.size
    p = _ft.p_grid(k, M // n)
    dp = p[1] - p[0]
    g = rhat * np.exp(1j * k[0] * p)
    vals = np.fft.ifft(np.fft.ifftshift(g)) * M * dp
    return vals[:n]


def _outer(n):
    m = max(2, int(round(OUTER_FRACTION * n)))
    return np.arange(m), np.arange(n - m, n)


def tail_split(f, k):
    """Constant part c and odd 1/k tail coefficient b of samples ``f``."""
    lo, hi = _outer(k.size)
    c = complex(np.mean(np.concatenate([f[lo], f[hi]])))
    # odd part (f(k) - f(-k))/2 ≈ b k/(k²+1) on the outer nodes
    kk = k[hi]
    odd = 0.5 * (f[hi] - f[lo][::-1])
    b = complex(np.sum(odd * kk / (kk * kk + 1)) / np.sum((kk / (kk * kk + 1)) ** 2))
    return c, b


def to_profile(f, k, check=True) -> WienerProfile:
    """WienerProfile of samples ``f`` on the symmetric grid ``k``."""
    f = np.asarray(f, dtype=complex)
    k = np.asarray(k, dtype=float)
    if f.shape != k.shape:
        raise ValueError("samples and k-grid differ in shape")
    c, b = tail_split(f, k)
    if check:
        K = k[-1]
        gap = abs((f[-1] - b * K / (K * K + 1)) - (f[0] + b * K / (K * K + 1)))
        if gap >= END_TOL * (1.0 + float(np.max(np.abs(f)))):
            raise NoLimitAtInfinity(f"end values differ by {gap:.3e} after removing the 1/k tail")
    r = f - c - b * k / (k * k + 1.0)
    p, rhat = _ft.inverse(r, k)
    hat = rhat - 0.5j * b * np.sign(p) * np.exp(-np.abs(p))
    mag = np.abs(hat)
    # the sgn tail jumps at p = 0: use the mean of the one-sided limits there
    z = np.flatnonzero(p == 0.0)
    if z.size:
        mag[z] = 0.5 * (np.abs(rhat[z] - 0.5j * b) + np.abs(rhat[z] + 0.5j * b))
    l1 = float(np.trapezoid(mag, p))
    return WienerProfile(c, p, hat, l1, k, b, rhat)


def psi_values(field: JostField, sd: ScatteringData, x, y):
    """ψ(x,y,k) = h_+(x∨y,k) h_-(x∧y,k) T(k) - 1 on the k-grid."""
    hi, lo = max(x, y), min(x, y)
    return field.hp[field.x_index(hi)] * field.hm[field.x_index(lo)] * sd.T - 1.0


def psi_profile(field: JostField, sd: ScatteringData, x, y) -> WienerProfile:
    return to_profile(psi_values(field, sd, x, y), field.k)


def dk4(f, dk):
    """Fourth-order centred derivative on a uniform grid (one-sided near ends)."""
    f = np.asarray(f)
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * dk)
    d[:2] = (-25 * f[:2] + 48 * f[1:3] - 36 * f[2:4] + 16 * f[3:5] - 3 * f[4:6]) / (12 * dk)
    d[-2:] = (25 * f[-2:] - 48 * f[-3:-1] + 36 * f[-4:-2] - 16 * f[-5:-3] + 3 * f[-6:-4]) / (12 * dk)
    return d


def weighted_psi_values(field: JostField, sd: ScatteringData, x, y, sign):
    """Samples of ψ₁^±, ψ₂^±, ψ₃^± on the k-grid (k = 0 node extrapolated)."""
    k = field.k
    z = k.size // 2
    dk = k[1] - k[0]
    h = field.h(sign)
    prod = np.abs(sd.T) ** 2 * h[field.x_index(y)] * h[field.x_index(x)][::-1]
    kk = np.where(k == 0, 1.0, k)
    psi1 = sign * abs(y - x) * prod / kk
    psi2 = 1j * prod / kk ** 2
    psi3 = -1j * dk4(prod, dk) / kk
    for a in (psi1, psi2, psi3):
        a[z] = extrapolate_zero(k, a)
    return psi1, psi2, psi3


def weighted_psi_profiles(field: JostField, sd: ScatteringData, x, y):
    """{sign: (ψ₁, ψ₂, ψ₃) profiles} for the non-resonant weighted bounds."""
    if sd.resonance_class is not ResonanceClass.NON_RESONANT:
        raise ResonantInput(f"weighted profiles need a non-resonant potential, got {sd.resonance_class}")
    out = {}
    for s in (+1, -1):
        out[s] = tuple(to_profile(v, field.k) for v in weighted_psi_values(field, sd, x, y, s))
    return out


def trend_slope(r, values):
    """Least-squares slope of ``values`` against ``r``."""
    r = np.asarray(r, dtype=float)
    values = np.asarray(values, dtype=float)
    A = np.column_stack([r, np.ones_like(r)])
    return float(np.linalg.lstsq(A, values, rcond=None)[0][0])


def uniformity_study(field, sd, probes=(-20.0, -10.0, 0.0, 10.0, 20.0)):
    """l1 norms of ψ̂(x,y,·) over a probe grid and their trend in |x|+|y|."""
    pairs = [(x, y) for x in probes for y in probes]
    l1 = np.array([psi_profile(field, sd, x, y).l1_norm for x, y in pairs])
    r = np.array([abs(x) + abs(y) for x, y in pairs])
    return {"pairs": pairs, "l1": l1, "r": r, "slope": trend_slope(r, l1),
            "ratio": float(l1.max() / l1.min()) if l1.min() > 0 else np.inf}


@dataclass(frozen=True, eq=False)
class ResonantDiagnostics:
    y: dict
    K: dict
    D: dict
    H: dict
    tail_X: np.ndarray
    tails: dict
    tail_increment: dict
    glm_residual: dict


def _tail_cumulative(y, B, sign):
    """±∫_y^{±∞} B on the kernel's own y-grid (cumulative Simpson from the far end)."""
    dy = abs(y[1] - y[0])
    if sign > 0:
        rev = integrate.cumulative_simpson(B[::-1], dx=dy, initial=0.0)
        return rev[::-1]
    return integrate.cumulative_simpson(B, dx=dy, initial=0.0)


def glm_F(sd: ScatteringData, w, sign):
    """F_±(w) = (1/π)∫R_± e^{±2ikw}dk + 2Σ m_j e^{∓2κ_j w} (Simpson in k)."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    k = sd.k
    R = sd.R(sign)
    refl = np.empty(w.size)
    for i0 in range(0, w.size, 64):
        ww = w[i0:i0 + 64]
        integrand = R[None, :] * np.exp(sign * 2j * np.outer(ww, k))
        refl[i0:i0 + 64] = integrate.simpson(integrand, x=k, axis=1).real / np.pi
    bound = np.zeros(w.size)
    for bs in sd.bound_states:
        m = bs.norming_constant(sign)
        bound += 2.0 * m * np.exp(-sign * 2.0 * bs.kappa * w)
    return refl + bound


def resonant_diagnostics(field: JostField, sd: ScatteringData, y_max=None, glm_points=201):
    """K_±, D_±, H_± of the resonant-case argument, their L¹ tails and the GLM residual."""
    i0 = field.x_index(0.0)
    z = field.k.size // 2
    out = {n: {} for n in ("y", "K", "D", "H", "tails", "inc", "glm")}
    X = None
    for s in (+1, -1):
        B = b_kernel(field, 0.0, s)
        dB = b_kernel(field, 0.0, s, derivative=True)
        y = B.y
        keep = (s * y) >= 0
        if y_max is not None:
            keep &= np.abs(y) <= y_max
        ys, Bs, dBs = y[keep], B.values[keep], dB.values[keep]
        Kf = _tail_cumulative(ys, Bs, s)
        Df = _tail_cumulative(ys, dBs, s)
        H = Df * field.h(s)[i0, z].real - Kf * field.dh(s)[i0, z].real
        out["y"][s], out["K"][s], out["D"][s], out["H"][s] = ys, Kf, Df, H
        ay = np.abs(ys)
        order = np.argsort(ay)
        ay, aH = ay[order], np.abs(H[order])
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (aH[1:] + aH[:-1]) * np.diff(ay))])
        ymax = ay[-1]
        X = np.geomspace(ymax / 1000.0, ymax, 13)
        tails = np.interp(X, ay, cum)
        out["tails"][s] = tails
        inc = (tails[-1] - np.interp(ymax / 10.0, ay, cum)) / max(tails[-1], 1e-300)
        out["inc"][s] = float(inc)
        if inc >= 1e-3:
            warnings.warn(f"tail integral of |H_{'+' if s > 0 else '-'}| not settled "
                          f"(last-decade increment {inc:.2e})", SlowConvergence, stacklevel=2)
        out["glm"][s] = _glm_residual(sd, ys, Bs, s, glm_points)
    return ResonantDiagnostics(out["y"], out["K"], out["D"], out["H"], X, out["tails"],
                               out["inc"], out["glm"])


def _glm_residual(sd, ys, Bs, sign, npts, span=10.0):
    """sup_y |F(y) + B(0,y) ± ∫_0^{±∞} B(0,z)F(y+z)dz| for |y| ≤ span."""
    ay = np.abs(ys)
    order = np.argsort(ay)
    ay, Bo = ay[order], Bs[order]
    dy = ay[1] - ay[0]
    nz = int(np.searchsorted(ay, 2.0 * span))
    if nz % 2 == 0:
        nz += 1
    zg, Bz = ay[:nz], Bo[:nz]
    step = max(1, int(round(span / dy / (npts - 1))))
    iy = np.arange(0, int(np.searchsorted(ay, span)) + 1, step)
    Fgrid = glm_F(sd, sign * np.arange(nz + iy[-1] + 1) * dy, sign)
    res = np.empty(iy.size)
    for j, i in enumerate(iy):
        conv = integrate.simpson(Bz * Fgrid[i:i + nz], x=zg)
        res[j] = Fgrid[i] + Bo[i] + conv
    return float(np.max(np.abs(res)))


def weighted_uniformity(field, sd, probes=(-20.0, -10.0, 0.0, 10.0, 20.0), ratio_tol=2.0):
    """Normalised l1 norms l1(ψ̂_j^±)/((1+|x|)(1+|y|)) over a probe grid.

    A single constant C covers the grid when the outer ring of probes does
    not exceed ``ratio_tol`` times the worst value on the inner probes.
    """
    pairs = [(x, y) for x in probes for y in probes]
    edge = max(abs(p) for p in probes)
    norm = {}
    for x, y in pairs:
        prof = weighted_psi_profiles(field, sd, x, y)
        w = (1.0 + abs(x)) * (1.0 + abs(y))
        norm[(x, y)] = max(p.l1_norm for s in (+1, -1) for p in prof[s]) / w
    outer = max(v for (x, y), v in norm.items() if max(abs(x), abs(y)) == edge)
    inner = max(v for (x, y), v in norm.items() if max(abs(x), abs(y)) < edge)
    ratio = outer / inner
    return {"pairs": pairs, "normalised": [norm[p] for p in pairs], "C": max(norm.values()),
            "outer_over_inner": ratio, "pass": bool(ratio <= ratio_tol)}
