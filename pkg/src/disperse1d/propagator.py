"""Resolvent kernel, its spectral jump, the Schrödinger kernel and the Klein–Gordon flow.

Two Schrödinger routes are provided.  The Fresnel route integrates the
quadratic phase e^{i(p+|x-y|)²/(4t)} against the transform ψ̂(x,y,p) of

    ψ(x,y,k) = h_+(x∨y,k) h_-(x∧y,k) T(k) - 1,

and is the primary one.  The direct route evaluates the k-integral with the
oscillatory quadrature engine and serves as an independent cross-check.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy import integrate

from . import _ft
from ._parallel import pmap
from .errors import NoConvergence, NoLimitAtInfinity, NonFiniteMass
from .jost import JostField
from .oscquad import OscIntegral, oscint, smooth_step
from .scattering import Projector, ScatteringData
from .wiener import END_TOL, _outer

ROUTES = ("direct", "fresnel", "kg12", "kg11", "kg21", "kg22", "oracle")
DET_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class KernelField:
    """Complex kernel samples K(x_i, y_j) at one time, tagged with the route."""

    t: float
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    route: str
    mass: float | None = None
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.route not in ROUTES:
            raise ValueError(f"unknown route {self.route!r}")
        if self.values.shape != (self.x.size, self.y.size):
            raise ValueError("kernel shape does not match the grids")

    def symmetry_residual(self):
        if self.x.size != self.y.size or not np.allclose(self.x, self.y):
            return float("nan")
        return float(np.max(np.abs(self.values - self.values.T)))

    def is_finite(self):
        return bool(np.all(np.isfinite(self.values)))

    def to_csv(self, path):
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        K = self.values
        data = np.column_stack([X.ravel(), Y.ravel(), K.real.ravel(), K.imag.ravel(), np.abs(K).ravel()])
        np.savetxt(path, data, delimiter=",", fmt="%.17e", header="x,y,ReK,ImK,absK", comments="")

    @staticmethod
    def cache_key(potential_key, t, route):
        return hashlib.sha256(f"{potential_key}|{float(t)!r}|{route}".encode()).hexdigest()[:16]

    def save(self, directory, potential_key=""):
        """Write ``<key>.npz`` into ``directory``; returns the path."""
        path = Path(directory) / f"{self.cache_key(potential_key, self.t, self.route)}.npz"
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(path, t=self.t, x=self.x, y=self.y, values=self.values,
                            route=np.array(self.route),
                            mass=np.nan if self.mass is None else self.mass)
        return path

    @classmethod
    def load(cls, path):
        with np.load(path) as d:
            m = float(d["mass"])
            return cls(float(d["t"]), d["x"], d["y"], d["values"], str(d["route"]),
                       None if math.isnan(m) else m)

    @classmethod
    def cached(cls, directory, potential_key, t, route):
        """Load a cached field or return None."""
        path = Path(directory) / f"{cls.cache_key(potential_key, t, route)}.npz"
        return cls.load(path) if path.exists() else None


# --- resolvent ---------------------------------------------------------------

def _k_index(field: JostField, k):
    k = np.atleast_1d(np.asarray(k, dtype=float))
    idx = np.searchsorted(field.k, k)
    idx = np.clip(idx, 1, field.k.size - 1)
    idx = np.where(np.abs(field.k[idx - 1] - k) < np.abs(field.k[idx] - k), idx - 1, idx)
    dk = field.k[1] - field.k[0]
    if np.any(np.abs(field.k[idx] - k) > 1e-9 * dk):
        raise ValueError("k must be a node of the k-grid")
    return idx


def resolvent_kernel(field: JostField, sd: ScatteringData, x, y, k, side=+1):
    """R(k² ± i0)(x,y) = -f_+(x∨y, ±k) f_-(x∧y, ±k) / W(±k) for grid k > 0."""
    idx = _k_index(field, k)
    if np.any(field.k[idx] <= 0):
        raise ValueError("k must be positive")
    j = idx if side > 0 else field.k.size - 1 - idx
    hi, lo = field.x_index(max(x, y)), field.x_index(min(x, y))
    val = -field.f(+1, hi)[j] * field.f(-1, lo)[j] / sd.W[j]
    return val if np.ndim(k) else complex(val[0])


def resolvent_jump(field: JostField, sd: ScatteringData, x, y, k):
    """R(k²+i0) - R(k²-i0) = |T|²/(-2ik) [f_+(y,k)f_+(x,-k) + f_-(y,k)f_-(x,-k)]."""
    idx = _k_index(field, k)
    if np.any(field.k[idx] <= 0):
        raise ValueError("k must be positive")
    neg = field.k.size - 1 - idx
    i, j = field.x_index(x), field.x_index(y)
    kk = field.k[idx]
    fp, fm = field.f(+1), field.f(-1)
    val = (np.abs(sd.T[idx]) ** 2 / (-2j * kk)) * (fp[j, idx] * fp[i, neg] + fm[j, idx] * fm[i, neg])
    return val if np.ndim(k) else complex(val[0])


# --- Schrödinger kernel: Fresnel route ---------------------------------------

def _sqrt_4pi_i_t(t):
    return np.sqrt(4j * np.pi * t + 0j)


def _chirp(q, t):
    return np.exp(1j * q * q / (4.0 * t))


def fresnel_weights(k, t, d):
    """Weights w with Σ_k w(k) f(k) = c·G(d) + trapz_p[G(p+d) ĝ(p)], G(q) = e^{iq²/(4t)}.

    (c, ĝ) is the profile that ``wiener.to_profile`` builds from samples f; the
    map is linear in f, so its adjoint is applied once per distance d.
    Returns an array of shape (len(d), len(k)).
    """
    k = np.asarray(k, dtype=float)
    d = np.atleast_1d(np.asarray(d, dtype=float))
    n = k.size
    p = _ft.p_grid(k)
    M = p.size
    dp = p[1] - p[0]
    dk = k[1] - k[0]
    tau = np.full(M, dp)
    tau[0] = tau[-1] = 0.5 * dp
    q = k / (k * k + 1.0)
    lo, hi = _outer(n)
    cvec = np.zeros(n)
    cvec[lo] = cvec[hi] = 1.0 / (lo.size + hi.size)
    kk = k[hi]
    wq = kk / (kk * kk + 1.0)
    bvec = np.zeros(n)
    bvec[hi] += 0.5 * wq / np.sum(wq * wq)
    bvec[lo[::-1]] -= 0.5 * wq / np.sum(wq * wq)
    tail_hat = -0.5j * np.sign(p) * np.exp(-np.abs(p))
    phase0 = np.exp(-1j * k[0] * p)
    out = np.empty((d.size, n), dtype=complex)
    for i, dd in enumerate(d):
        a = tau * _chirp(p + dd, t)
        u = (dk / (2.0 * np.pi)) * np.fft.fft(np.fft.ifftshift(a * phase0))[:n]
        S1, S2 = u.sum(), np.sum(u * q)
        A = np.sum(a * tail_hat)
        out[i] = u + (_chirp(dd, t) - S1) * cvec + (A - S2) * bvec
    return out


class _Rows:
    """h_± rows (and T·h_± rows) on window nodes, inside or beyond the Jost grid.

    Beyond the grid the potential vanishes (the grid must cover the cutoff
    radius) and the scattering relation T f_∓ = R_± f_± + f_±(-k) gives
    T·h_-(x) = 1 + R_+ e^{2ikx} for x ≥ x_max and T·h_+(x) = 1 + R_- e^{-2ikx}
    for x ≤ -x_max, while h_+ = 1 (resp. h_- = 1) there.
    """

    def __init__(self, field: JostField, sd: ScatteringData, xs):
        xs = np.asarray(xs, dtype=float)
        lo_edge, hi_edge = field.x[0], field.x[-1]
        far_r = xs > hi_edge + 1e-9
        far_l = xs < lo_edge - 1e-9
        if np.any(far_r | far_l):
            cut = field.meta.get("cutoff_radius", np.inf)
            if cut > min(hi_edge, -lo_edge) + 1e-9:
                raise ValueError("window extends past the x-grid, which does not cover the potential's support")
        k, T = field.k, sd.T
        n = xs.size
        self.far_l = far_l
        self.hp = np.ones((n, k.size), dtype=complex)
        self.hmT = np.empty((n, k.size), dtype=complex)
        self.hpT = np.empty((n, k.size), dtype=complex)
        inside = ~(far_r | far_l)
        ii = np.array([field.x_index(v) for v in xs[inside]], dtype=int)
        self.hp[inside] = field.hp[ii]
        self.hmT[inside] = field.hm[ii] * T
        self.hpT[inside] = field.hp[ii] * T
        self.hmT[far_r] = 1.0 + sd.Rp * np.exp(2j * np.outer(xs[far_r], k))
        self.hpT[far_r] = T
        self.hpT[far_l] = 1.0 + sd.Rm * np.exp(-2j * np.outer(xs[far_l], k))
        self.hp[far_l] = np.nan  # never used: a far-left node is only ever the lower point
        self.hmT[far_l] = T

    def product(self, i, cols):
        """h_+(x∨y) h_-(x∧y) T for the node ``i`` against the (≥ i) nodes ``cols``."""
        if self.far_l[i]:
            return self.hpT[cols]
        return self.hp[cols] * self.hmT[i][None, :]


def _end_gap_check(field, rows: _Rows, n):
    """NoLimitAtInfinity test of ``to_profile`` for all pairs at once."""
    K = field.k[-1]
    q = K / (K * K + 1.0)
    lo, hi = _outer(field.k.size)
    kk = field.k[hi]
    wq = kk / (kk * kk + 1.0)
    for i in range(n):
        cols = np.arange(i, n)
        f = rows.product(i, cols) - 1.0
        odd = 0.5 * (f[:, hi] - f[:, lo][:, ::-1])
        b = (odd @ wq) / np.sum(wq * wq)
        gap = np.abs((f[:, -1] - b * q) - (f[:, 0] + b * q))
        bad = gap >= END_TOL * (1.0 + np.max(np.abs(f), axis=1))
        if np.any(bad):
            raise NoLimitAtInfinity(f"ψ(node {i}, node {cols[int(np.argmax(bad))]}, ·) has no limit at infinity")


def window_nodes(field: JostField, window=None):
    """x-nodes of a window: None (the x-grid), a half-width, or explicit nodes.

    A half-width beyond the x-grid extends it with the grid spacing.
    """
    if window is None:
        return field.x.copy()
    window = np.asarray(window, dtype=float)
    if window.ndim == 0:
        W = float(window)
        dx = field.x[1] - field.x[0]
        if W <= field.x[-1] + 1e-12 and -W >= field.x[0] - 1e-12:
            return field.x[np.abs(field.x) <= W + 1e-12].copy()
        m = int(math.floor(W / dx + 1e-9))
        return dx * np.arange(-m, m + 1)
    return np.sort(window)


def _window_indices(field: JostField, window):
    """Grid indices of a window that lies inside the x-grid."""
    return np.array([field.x_index(v) for v in window_nodes(field, window)], dtype=int)


def schrodinger_kernel_fresnel(field: JostField, sd: ScatteringData, t, window=None, check=True):
    """Kernel of e^{-itH}P_c on the x-window by the Fresnel representation.

    ``window`` is a half-width, a list of x-nodes, or None for the whole
    x-grid (see ``window_nodes``).  Negative t is allowed (principal square
    root), giving the kernel of e^{+i|t|H}P_c.
    """
    t = float(t)
    if t == 0:
        raise ValueError("t must be nonzero")
    xs = window_nodes(field, window)
    rows = _Rows(field, sd, xs)
    n = xs.size
    if check:
        _end_gap_check(field, rows, n)
    dist = np.abs(xs[:, None] - xs[None, :])
    dkey = np.round(dist, 9)
    uniq, inv = np.unique(dkey, return_inverse=True)
    inv = inv.reshape(n, n)
    w = fresnel_weights(field.k, t, uniq)
    wsum = w.sum(axis=1)

    def row(i):
        cols = np.arange(i, n)
        prod = rows.product(i, cols)
        sel = inv[i, i:]
        return _chirp(dist[i, i:], t) + np.einsum("jk,jk->j", w[sel], prod) - wsum[sel]

    vals = pmap(row, range(n))
    K = np.empty((n, n), dtype=complex)
    for i, r in enumerate(vals):
        K[i, i:] = r
        K[i:, i] = r
    K /= _sqrt_4pi_i_t(t)
    return KernelField(t, xs, xs.copy(), K, "fresnel")


def fresnel_pair_reference(field, sd, x, y, t):
    """Single-pair Fresnel value built from ``wiener.psi_profile`` (slow reference)."""
    from .wiener import psi_profile

    prof = psi_profile(field, sd, x, y)
    d = abs(x - y)
    integrand = _chirp(prof.p + d, t) * prof.hat
    val = _chirp(d, t) + prof.c * _chirp(d, t) + np.trapezoid(integrand, prof.p)
    return complex(val / _sqrt_4pi_i_t(t))


# --- Schrödinger kernel: direct route ----------------------------------------

def _edge_taper(k, frac=0.1):
    K = float(np.max(np.abs(k)))
    s0 = (1.0 - frac) * K
    return 1.0 - smooth_step((np.abs(k) - s0) / (K - s0))


def schrodinger_kernel_direct(field: JostField, sd: ScatteringData, t, window=None, rtol=1e-8):
    """Kernel by (1/2π)∫e^{-i(tk²-|y-x|k)} h_+(x∨y,k)h_-(x∧y,k)T(k) dk.

    The free part is exact; ψ is integrated by the Filon engine with its
    samples tapered to zero over the outer 10% of the k-grid.
    """
    t = float(t)
    if t <= 0:
        raise ValueError("t must be positive")
    idx = _window_indices(field, window)
    xs = field.x[idx]
    dx = field.x[1] - field.x[0]
    k = field.k
    taper = _edge_taper(k)
    phase = lambda s: -(s * s)  # noqa: E731
    dphase = lambda s: -2.0 * s  # noqa: E731
    d2phase = lambda s: np.full(np.shape(s), -2.0)  # noqa: E731
    pairs = [(a, b) for a in range(idx.size) for b in range(a, idx.size)]

    def one(ab):
        a, b = ab
        i, j = idx[a], idx[b]
        d = abs(j - i) * dx
        psi = (field.hp[max(i, j)] * field.hm[min(i, j)] * sd.T - 1.0) * taper
        amp = psi * np.exp(1j * d * k)
        try:
            val = oscint(OscIntegral(phase, amp, k[0], k[-1], t, dphase, d2phase, k), rtol=rtol)
        except NoConvergence as exc:
            raise NoConvergence(f"direct route at x={field.x[i]:g}, y={field.x[j]:g}: {exc}") from exc
        return _chirp(d, t) / _sqrt_4pi_i_t(t) + val / (2.0 * np.pi)

    vals = pmap(one, pairs)
    K = np.empty((idx.size, idx.size), dtype=complex)
    for (a, b), v in zip(pairs, vals):
        K[a, b] = K[b, a] = v
    return KernelField(t, xs, xs.copy(), K, "direct")


# --- Klein–Gordon ------------------------------------------------------------

def kg_matrix(k, t, m):
    """M_t(k) entries (11, 12, 21, 22) with ω = √(k²+m²)."""
    if not (np.isfinite(m) and m > 0):
        raise NonFiniteMass(f"mass must be finite and positive, got {m}")
    k = np.asarray(k, dtype=float)
    w = np.sqrt(k * k + m * m)
    c, s = np.cos(t * w), np.sin(t * w)
    return {"11": c, "12": s / w, "21": -w * s, "22": c}


def kg_det(k, t, m):
    M = kg_matrix(k, t, m)
    return M["11"] * M["22"] - M["12"] * M["21"]


def check_det(k, t, m, tol=DET_TOL):
    dev = float(np.max(np.abs(kg_det(k, t, m) - 1.0)))
    if dev > tol:
        raise AssertionError(f"det M_t(k) deviates from 1 by {dev:.3e}")
    return dev


def kg_amplitude(field: JostField, sd: ScatteringData, f, weights=None):
    """A(x,k) = ∫ e^{i|y-x|k}(1+ψ(x,y,k)) f(y) dy on the field's x-grid.

    Uses e^{i|y-x|k}(1+ψ) = T f_+(x∨y,k) f_-(x∧y,k) and cumulative sums in y,
    with trapezoid weights (the diagonal term split evenly).
    """
    f = np.asarray(f, dtype=complex)
    x = field.x
    if weights is None:
        weights = np.full(x.size, x[1] - x[0])
        weights[0] *= 0.5
        weights[-1] *= 0.5
    wf = (weights * f)[:, None]
    fp, fm = field.f(+1), field.f(-1)
    below = np.cumsum(fm * wf, axis=0) - 0.5 * fm * wf
    above = np.cumsum((fp * wf)[::-1], axis=0)[::-1] - 0.5 * fp * wf
    return sd.T[None, :] * (fp * below + fm * above)


def kg_band(field: JostField):
    """Upper end of the k-band used by ``kg_apply``.

    The y-sum in ``kg_amplitude`` is a trapezoid rule with spacing dx; it is
    exact for integrands band-limited to 2π/dx, so k (plus the band of f) must
    stay well below that.  The band is 3π/(4dx), capped by the k-grid.
    """
    dx = field.x[1] - field.x[0]
    return min(float(field.k[-1]), 0.75 * np.pi / dx)


def kg_taper(k, kc, flat=0.5):
    """Even C^∞ window: 1 for |k| ≤ flat·kc, 0 for |k| ≥ kc."""
    k1 = flat * kc
    return 1.0 - smooth_step((np.abs(k) - k1) / (kc - k1))


def kg_apply(field: JostField, sd: ScatteringData, m, t, f, entry="12", window=None,
             projector: Projector | None = None, rtol=1e-8, kc=None):
    """u(x) = (1/2π)∫ M_t^{entry}(k) A(x,k) dk with A from ``kg_amplitude``.

    ``f`` is sampled on the field's x-grid; it is projected with ``projector``
    (bound-state removal) first.  The k-integral runs over |k| ≤ kc (default
    ``kg_band``) with an even C^∞ window, by the Filon engine with one call per
    phase e^{±itω}; at t = 0 it is a Simpson sum.  The large-k tail of A is odd
    in k up to O(k^{-3}), so the symmetric window costs only that much.
    """
    entry = str(entry)
    if entry not in ("11", "12", "21", "22"):
        raise ValueError(f"unknown entry {entry}")
    if not (np.isfinite(m) and m > 0):
        raise NonFiniteMass(f"mass must be finite and positive, got {m}")
    kc = kg_band(field) if kc is None else float(kc)
    sel = np.abs(field.k) <= kc + 1e-12
    k = field.k[sel]
    check_det(k, t, m)
    f = np.asarray(f, dtype=complex)
    if projector is not None:
        f = projector(f)
    idx = _window_indices(field, window)
    A = kg_amplitude(field, sd, f)[idx][:, sel] * kg_taper(k, kc)
    w = np.sqrt(k * k + m * m)
    # M = c_+ e^{itω} + c_- e^{-itω}
    coef = {"11": (0.5, 0.5), "22": (0.5, 0.5),
            "12": (1.0 / (2j * w), -1.0 / (2j * w)), "21": (-w / (2j), w / (2j))}[entry]
    phase = lambda s: np.sqrt(s * s + m * m)  # noqa: E731
    dphase = lambda s: s / np.sqrt(s * s + m * m)  # noqa: E731
    d2phase = lambda s: m * m / (s * s + m * m) ** 1.5  # noqa: E731
    M0 = kg_matrix(k, t, m)[entry]

    def one(a):
        if t == 0:
            return integrate.simpson(M0 * A[a], x=k) / (2.0 * np.pi)
        plus = oscint(OscIntegral(phase, coef[0] * A[a], k[0], k[-1], t, dphase, d2phase, k), rtol=rtol)
        # e^{-itω} g = conj(e^{itω} conj g)
        minus = np.conj(oscint(OscIntegral(phase, np.conj(coef[1] * A[a]), k[0], k[-1], t,
                                           dphase, d2phase, k), rtol=rtol))
        return (plus + minus) / (2.0 * np.pi)

    u = np.array(pmap(one, range(idx.size)))
    return field.x[idx], u
