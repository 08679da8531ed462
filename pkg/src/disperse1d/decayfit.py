"""Decay-rate measurements and the weighted Sobolev norms they are stated in."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import NonPositiveValue, SpectralLeakage
from .propagator import KernelField, kg_apply, schrodinger_kernel_fresnel
from .scattering import pc_projector

SCHEMA_VERSION = 1
LEAKAGE_TOL = 1e-6
DEFAULT_LADDER = tuple(np.geomspace(10.0, 1000.0, 8))


def default_ladder(a=10.0, b=1000.0, n=8):
    return np.geomspace(a, b, n)


@dataclass(frozen=True, eq=False)
class DecaySeries:
    t: np.ndarray
    values: np.ndarray
    sigma: float
    descriptor: str
    slope: float
    stderr: float
    r2: float
    half_window: np.ndarray | None = None
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("t-samples must be strictly increasing")
        if np.any(self.values <= 0):
            raise NonPositiveValue("decay values must be positive")

    @classmethod
    def from_values(cls, t, values, sigma, descriptor, half_window=None, meta=None):
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=float)
        slope, stderr, r2 = fit_decay(t, values)
        hw = None if half_window is None else np.asarray(half_window, dtype=float)
        return cls(t, values, float(sigma), descriptor, slope, stderr, r2, hw, dict(meta or {}))

    def window_bias(self):
        """max relative gap between full-window and half-window values."""
        if self.half_window is None:
            return None
        return float(np.max(np.abs(self.values - self.half_window) / self.values))

    def verdict(self, target, tol):
        return bool(abs(self.slope - target) <= tol)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "value", "weight"])
            for t, v in zip(self.t, self.values):
                w.writerow([f"{t:.17e}", f"{v:.17e}", f"{self.sigma:.17e}"])

    @classmethod
    def from_csv(cls, path, descriptor="sup"):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls.from_values(data[:, 0], data[:, 1], float(data[0, 2]), descriptor)

    def summary(self, target=None, tol=None):
        out = {"schema_version": SCHEMA_VERSION, "descriptor": self.descriptor,
               "sigma": self.sigma, "slope": self.slope, "stderr": self.stderr, "r2": self.r2,
               "t_min": float(self.t[0]), "t_max": float(self.t[-1]), "n": int(self.t.size)}
        if self.half_window is not None:
            out["window_bias"] = self.window_bias()
        if target is not None:
            out.update(target=target, tolerance=tol, pass_=self.verdict(target, tol))
            out["pass"] = out.pop("pass_")
        return out

    def to_json(self, path, target=None, tol=None):
        with open(path, "w") as fh:
            json.dump(self.summary(target, tol), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _weights(x, sigma):
    return (1.0 + np.abs(np.asarray(x, dtype=float))) ** sigma


def sup_kernel_norm(K: KernelField, sigma=0.0, half=False):
    """max |K(x,y)| / ((1+|x|)^σ (1+|y|)^σ), optionally on the half window."""
    vals = np.abs(K.values) / np.outer(_weights(K.x, sigma), _weights(K.y, sigma))
    if half:
        hx = np.abs(K.x) <= 0.5 * np.max(np.abs(K.x)) + 1e-12
        hy = np.abs(K.y) <= 0.5 * np.max(np.abs(K.y)) + 1e-12
        vals = vals[np.ix_(hx, hy)]
    return float(vals.max())


def fit_decay(t, values):
    """Least squares of log value on log t: (slope, standard error, R²)."""
    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0) or np.any(t <= 0):
        raise NonPositiveValue("log-log fit needs positive t and values")
    if t.size < 6 or math.log10(t.max() / t.min()) < 1.5 - 1e-12:
        raise ValueError("need at least 6 samples spanning 1.5 decades")
    X, Y = np.log(t), np.log(values)
    A = np.column_stack([X, np.ones_like(X)])
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = Y - A @ coef
    n = X.size
    sxx = np.sum((X - X.mean()) ** 2)
    stderr = math.sqrt(np.sum(resid ** 2) / (n - 2) / sxx)
    sst = np.sum((Y - Y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / sst if sst > 0 else 1.0
    return float(coef[0]), float(stderr), float(r2)


def sobolev_norm(f, x, alpha, sigma=0.0, pad=4, leak_tol=LEAKAGE_TOL):
    """‖f‖ in H^{α,1}_σ: weighted L¹ norm of (1+k²)^{α/2} applied to f.

    The multiplier acts through an FFT on the grid zero-padded ``pad`` times;
    SpectralLeakage is raised when the result has more than ``leak_tol`` of
    its weighted mass in the padded region.
    """
    f = np.asarray(f, dtype=complex)
    x = np.asarray(x, dtype=float)
    n = x.size
    h = x[1] - x[0]
    if alpha == 0:
        return float(np.trapezoid(_weights(x, sigma) * np.abs(f), x))
    M = pad * n
    off = (M - n) // 2
    buf = np.zeros(M, dtype=complex)
    buf[off:off + n] = f
    k = 2.0 * np.pi * np.fft.fftfreq(M, d=h)
    g = np.fft.ifft((1.0 + k * k) ** (alpha / 2.0) * np.fft.fft(buf))
    xx = x[0] + h * (np.arange(M) - off)
    dens = _weights(xx, sigma) * np.abs(g)
    total = float(np.trapezoid(dens, xx))
    inside = float(np.trapezoid(dens[off:off + n], xx[off:off + n]))
    if total - inside > leak_tol * total:
        raise SpectralLeakage(f"{(total - inside) / total:.2e} of the norm lies in the padded region")
    return total


def gaussian_data(x, width=1.0, center=0.0):
    """Unit-mass Gaussian of the given width."""
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * ((x - center) / width) ** 2) / (width * math.sqrt(2.0 * math.pi))


def schrodinger_decay(field, sd, t_ladder=DEFAULT_LADDER, sigma=0.0, window=None):
    """Sup norms of the Fresnel-route kernel over a t-ladder (standard window by default)."""
    t_ladder = np.asarray(t_ladder, dtype=float)
    fields = [schrodinger_kernel_fresnel(field, sd, t, window) for t in t_ladder]
    vals = [sup_kernel_norm(K, sigma) for K in fields]
    half = [sup_kernel_norm(K, sigma, half=True) for K in fields]
    desc = "sup" if sigma == 0 else "weighted_sup"
    return DecaySeries.from_values(t_ladder, vals, sigma, desc, half)


DEFAULT_CENTER = 1.0


def kg_response(sd, field, m=1.0, f=None, t_ladder=DEFAULT_LADDER, sigma=0.0, window=None, stride=2):
    """‖kg_apply(·, 12)‖_{L^∞_{-σ}} / ‖f‖_{H^{1/2,1}_σ} over a t-ladder.

    The default f is the unit-mass Gaussian of width 1 centred at x = 1
    (before projection): an even datum would be orthogonal to odd
    zero-energy resonance functions and miss the slow decay.  The sup is
    taken over every ``stride``-th node of the window.
    """
    x = field.x
    f = gaussian_data(x, 1.0, DEFAULT_CENTER) if f is None else np.asarray(f)
    if window is None:
        window = x[::stride]
    proj = pc_projector(sd.bound_states, x)
    fp = proj(f)
    denom = sobolev_norm(fp, x, 0.5, sigma)
    t_ladder = np.asarray(t_ladder, dtype=float)

    def one(t):
        xs, u = kg_apply(field, sd, m, t, fp, "12", window=window)
        w = np.abs(u) / _weights(xs, sigma)
        h = np.abs(xs) <= 0.5 * np.max(np.abs(xs)) + 1e-12
        return float(w.max()), float(w[h].max())

    res = [one(t) for t in t_ladder]
    vals = np.array([r[0] for r in res]) / denom
    half = np.array([r[1] for r in res]) / denom
    return DecaySeries.from_values(t_ladder, vals, sigma, "kg12_response", half,
                                   meta={"mass": m, "f_norm": denom})


__all__ = ["DecaySeries", "sup_kernel_norm", "fit_decay", "sobolev_norm", "kg_response",
           "schrodinger_decay", "gaussian_data", "default_ladder"]
