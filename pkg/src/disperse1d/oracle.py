"""Brute-force ground truth from dense discretisations of H = -d²/dx² + V.

Two discretisations are available.  ``fd2`` is the second-order central
difference with Dirichlet ends.  ``spectral`` is Fourier collocation on a
periodic box; its free dispersion is exact on the resolved band, which the
pointwise kernel comparison needs (fd2 has a spurious stationary point near
the band edge).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import linalg

from .errors import NegativeFrequency, TooLarge, ZeroTime
from .potential import Potential, evaluate, make_potential

MAX_NODES = 4000
EPS_C = 1e-8


@dataclass(frozen=True, eq=False)
class DiscreteHamiltonian:
    x: np.ndarray
    h: float
    L: float
    matrix: np.ndarray
    evals: np.ndarray
    evecs: np.ndarray
    scheme: str = "fd2"
    potential_key: str = ""

    @property
    def n(self):
        return self.x.size

    def continuum(self, eps_c=EPS_C):
        return self.evals >= -eps_c

    def bound_energies(self, eps_c=EPS_C):
        return self.evals[~self.continuum(eps_c)]

    def projector(self, eps_c=EPS_C):
        """P_c as a matrix in the l² basis of the grid."""
        Vc = self.evecs[:, self.continuum(eps_c)]
        return Vc @ Vc.T

    def orthonormality_residual(self):
        return float(np.max(np.abs(self.evecs.T @ self.evecs - np.eye(self.n))))

    def save(self, directory):
        path = Path(directory) / f"{cache_key(self.potential_key, self.L, self.n, self.scheme)}.npz"
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez_compressed(path, x=self.x, h=self.h, L=self.L, matrix=self.matrix, evals=self.evals,
                            evecs=self.evecs, scheme=np.array(self.scheme),
                            potential_key=np.array(self.potential_key))
        return path

    @classmethod
    def load(cls, path):
        with np.load(path) as d:
            return cls(d["x"], float(d["h"]), float(d["L"]), d["matrix"], d["evals"], d["evecs"],
                       str(d["scheme"]), str(d["potential_key"]))


def cache_key(potential_key, L, n, scheme):
    return hashlib.sha256(f"{potential_key}|{float(L)!r}|{int(n)}|{scheme}".encode()).hexdigest()[:16]


def _spectral_laplacian(n, L):
    """-d²/dx² by Fourier collocation on n periodic nodes of [-L, L)."""
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=2.0 * L / n)
    D = np.fft.ifft(k[:, None] ** 2 * np.fft.fft(np.eye(n), axis=0), axis=0).real
    return 0.5 * (D + D.T)


def discretize(V, L_o=40.0, N_o=2400, scheme="fd2") -> DiscreteHamiltonian:
    """Dense symmetric matrix of H on [-L_o, L_o] and its eigendecomposition."""
    if N_o > MAX_NODES:
        raise TooLarge(f"N_o = {N_o} exceeds the dense-eigensolve cap {MAX_NODES}")
    V = make_potential(V)
    key = V.key() if isinstance(V, Potential) else ""
    if scheme == "fd2":
        x = np.linspace(-L_o, L_o, N_o)
        h = x[1] - x[0]
        d = 2.0 / h ** 2 + evaluate(V, x)
        e = np.full(N_o - 1, -1.0 / h ** 2)
        evals, evecs = linalg.eigh_tridiagonal(d, e)
        H = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    elif scheme == "spectral":
        h = 2.0 * L_o / N_o
        x = -L_o + h * np.arange(N_o)
        H = _spectral_laplacian(N_o, L_o) + np.diag(evaluate(V, x))
        evals, evecs = linalg.eigh(H)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    for a in (x, H, evals, evecs):
        a.setflags(write=False)
    return DiscreteHamiltonian(x, float(h), float(L_o), H, evals, evecs, scheme, key)


def eig_propagator(Hd: DiscreteHamiltonian, t, eps_c=EPS_C):
    """Matrix of e^{-itH}P_c (continuum modes only)."""
    keep = Hd.continuum(eps_c)
    Vc = Hd.evecs[:, keep]
    return (Vc * np.exp(-1j * t * Hd.evals[keep])) @ Vc.T


def kg_eig_propagator(Hd: DiscreteHamiltonian, m, t, eps_c=EPS_C):
    """Blocks (11, 12, 21, 22) of the Klein–Gordon flow on P_c with ω = √(λ+m²)."""
    keep = Hd.continuum(eps_c)
    lam = Hd.evals[keep]
    w2 = lam + m * m
    if np.any(w2 <= 0):
        raise NegativeFrequency(f"λ + m² = {w2.min():.3e} ≤ 0 on a retained mode")
    w = np.sqrt(w2)
    Vc = Hd.evecs[:, keep]
    c, s = np.cos(t * w), np.sin(t * w)

    def blk(g):
        return (Vc * g) @ Vc.T

    return {"11": blk(c), "12": blk(s / w), "21": blk(-w * s), "22": blk(c)}


def kg_energy(Hd: DiscreteHamiltonian, m, u, ut):
    """‖u̇‖² + ⟨u, Hu⟩ + m²‖u‖² in the grid inner product (h-weighted)."""
    Hu = Hd.matrix @ u
    return float(Hd.h * (np.vdot(ut, ut).real + np.vdot(u, Hu).real + m * m * np.vdot(u, u).real))


def kg_evolve(Hd: DiscreteHamiltonian, m, t, u0, u1, eps_c=EPS_C):
    """(u(t), u̇(t)) from data (u0, u1) by the eigenbasis blocks."""
    B = kg_eig_propagator(Hd, m, t, eps_c)
    return B["11"] @ u0 + B["12"] @ u1, B["21"] @ u0 + B["22"] @ u1


def free_kernel(x, y, t):
    """e^{-|x-y|²/(4it)}/√(4πit), principal branch."""
    if t == 0:
        raise ZeroTime("the free kernel is singular at t = 0")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d2 = (x - y) ** 2
    return np.exp(1j * d2 / (4.0 * t)) / np.sqrt(4j * np.pi * t + 0j)


def free_kg_apply(x, t, m, f_hat_fn, kmax=40.0, n=16001, entry="12"):
    """Free Klein–Gordon flow by spectral synthesis in k.

    ``f_hat_fn(k)`` is ∫e^{-iky} f(y) dy; returns u(x) = (1/2π)∫M(k) f̂(k) e^{ikx} dk.
    """
    from scipy import integrate

    k = np.linspace(-kmax, kmax, n)
    w = np.sqrt(k * k + m * m)
    M = {"11": np.cos(t * w), "22": np.cos(t * w), "12": np.sin(t * w) / w, "21": -w * np.sin(t * w)}[entry]
    x = np.atleast_1d(np.asarray(x, dtype=float))
    g = M * f_hat_fn(k)
    return np.array([integrate.simpson(g * np.exp(1j * k * xx), x=k) for xx in x]) / (2.0 * np.pi)


# --- pointwise kernel oracle -------------------------------------------------

def oracle_grid(t, half_window=20.0, k_extra=6.0):
    """(L_o, N_o) of the periodic box used for the kernel at time t.

    The band limit k_b exceeds the stationary frequency |x-y|/(2t) of every
    window pair by ``k_extra``.  Waves that wrap around the box reach the
    window with stationary frequency (2L_o - 2w)/(2t); L_o is chosen so that
    this lies beyond k_b by 4 + 8/√t, i.e. many stationary-phase widths.
    """
    t = abs(float(t))
    w = float(half_window)
    kb = w / t + k_extra
    L = t * (kb + 4.0 + 8.0 / math.sqrt(t)) + w
    h = math.pi / kb
    n = int(math.ceil(2.0 * L / h))
    n += n % 2
    return L, n


def _sinc_interp(xq, L, n):
    """Periodic band-limited interpolation matrix from the n-node grid to ``xq``."""
    h = 2.0 * L / n
    xg = -L + h * np.arange(n)
    s = np.pi * (np.asarray(xq)[:, None] - xg[None, :]) / L
    with np.errstate(invalid="ignore", divide="ignore"):
        E = np.sin(0.5 * n * s) / (n * np.tan(0.5 * s))
    E[np.isclose(np.sin(0.5 * s), 0.0, atol=1e-14)] = 1.0
    return E


def _window_kernel(Hd, t, E, eps_c=EPS_C):
    keep = Hd.continuum(eps_c)
    EV = E @ Hd.evecs[:, keep]
    return (EV * np.exp(-1j * t * Hd.evals[keep])) @ EV.T / Hd.h


def oracle_kernel(V, t, x, grid=None):
    """Kernel of e^{-itH}P_c on the nodes ``x``: exact free part plus the discrete difference.

    K = K_free + (K_V - K_0) where the last two come from spectral
    discretisations of H and H_0 on the same periodic box.
    """
    from .propagator import KernelField

    x = np.asarray(x, dtype=float)
    L, n = grid or oracle_grid(t, half_window=float(np.max(np.abs(x))))
    if n > MAX_NODES:
        raise TooLarge(f"oracle grid for t = {t} needs {n} nodes")
    HV = discretize(V, L, n, scheme="spectral")
    H0 = discretize("zero", L, n, scheme="spectral")
    E = _sinc_interp(x, L, n)
    K = free_kernel(x[:, None], x[None, :], t) + _window_kernel(HV, t, E) - _window_kernel(H0, t, E)
    return KernelField(float(t), x, x.copy(), K, "oracle", meta={"L_o": L, "N_o": n})


def split_step(V, f, x, t, nsteps):
    """Strang split-step Fourier evolution of e^{-itH}f on a periodic grid (secondary check)."""
    V = make_potential(V)
    x = np.asarray(x, dtype=float)
    n = x.size
    h = x[1] - x[0]
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
    dt = t / nsteps
    half = np.exp(-0.5j * dt * evaluate(V, x))
    kin = np.exp(-1j * dt * k * k)
    u = np.asarray(f, dtype=complex)
    for _ in range(nsteps):
        u = half * np.fft.ifft(kin * np.fft.fft(half * u))
    return u
