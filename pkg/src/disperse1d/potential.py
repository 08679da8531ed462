"""Real short-range potentials V(x) and their weighted moments.

A :class:`Potential` is immutable.  Analytic families carry their parameters,
tabulated ones a strictly increasing (x, V) table that is linearly
interpolated and extended by zero.  Every potential has a ``cutoff_radius``
beyond which it evaluates to exactly zero; by default this is the smallest L
with ``eta_+(L) + eta_-(-L) < 1e-12 (1 + ||V||_{L^1})``.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate, optimize, special

from .errors import EmptyTable, NonFiniteParameter

FAMILIES = ("zero", "gaussian_well", "sech2", "square_well", "exp_decay", "tabulated")

# positional parameter names per family, in the order used by the short spec form
_PARAMS = {
    "zero": (),
    "gaussian_well": ("depth", "width"),
    "sech2": ("coupling",),
    "square_well": ("depth", "halfwidth"),
    "exp_decay": ("amplitude", "scale"),
}
_POSITIVE = {"depth", "width", "halfwidth", "scale"}

CUTOFF_RTOL = 1e-12
MOMENT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Potential:
    family: str
    params: tuple = ()
    cutoff_radius: float = 0.0
    table_x: np.ndarray | None = field(default=None, repr=False)
    table_v: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, x):
        return evaluate(self, x)

    @property
    def param_dict(self):
        return dict(self.params)

    @property
    def is_symmetric(self):
        return self.family in ("zero", "gaussian_well", "sech2", "square_well", "exp_decay")

    def breakpoints(self):
        """Points where V or its derivative may jump (inside the cutoff)."""
        L = self.cutoff_radius
        pts = [-L, L]
        p = self.param_dict
        if self.family == "square_well":
            pts += [-p["halfwidth"], p["halfwidth"]]
        elif self.family == "exp_decay":
            pts.append(0.0)
        elif self.family == "tabulated":
            pts += list(self.table_x)
        return np.unique(np.clip(np.asarray(pts, dtype=float), -L, L))

    def min_value(self):
        p = self.param_dict
        if self.family == "zero":
            return 0.0
        if self.family == "gaussian_well":
            return -p["depth"]
        if self.family == "sech2":
            c = _sech2_strength(p["coupling"])
            return min(0.0, -c)
        if self.family == "square_well":
            return -p["depth"]
        if self.family == "exp_decay":
            return min(0.0, p["amplitude"])
        return min(0.0, float(self.table_v.min()))

    def to_spec(self):
        """Plain-dict description, suitable for config files."""
        spec = {"family": self.family}
        spec.update(self.param_dict)
        if self.family == "tabulated":
            spec["x"] = [float(v) for v in self.table_x]
            spec["V"] = [float(v) for v in self.table_v]
        return spec

    def key(self):
        """Stable short hash identifying this potential (used for caches)."""
        h = hashlib.sha256()
        h.update(json.dumps({"family": self.family, "params": list(self.params),
                             "cutoff": repr(self.cutoff_radius)}).encode())
        if self.table_x is not None:
            h.update(np.ascontiguousarray(self.table_x).tobytes())
            h.update(np.ascontiguousarray(self.table_v).tobytes())
        return h.hexdigest()[:16]


def _sech2_strength(lam):
    return lam * (lam + 1.0)


def _check_finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise NonFiniteParameter(f"parameter {name!r} is not finite: {value}")
    return value


def make_potential(spec=None, /, cutoff_radius=None, **params) -> Potential:
    """Build a potential.

    ``spec`` may be a family name (parameters as keywords), a dict with a
    ``family`` key, or a :class:`Potential` (returned unchanged).  Tabulated
    potentials take ``x=`` and ``V=`` arrays.

    >>> make_potential("sech2", coupling=1.0)(0.0)
    -2.0
    """
    if isinstance(spec, Potential):
        return spec
    if isinstance(spec, dict):
        params = {**{k: v for k, v in spec.items() if k != "family"}, **params}
        spec = spec["family"]
    family = spec or "zero"
    if family not in FAMILIES:
        raise ValueError(f"unknown potential family {family!r}; expected one of {FAMILIES}")
    if cutoff_radius is None:
        cutoff_radius = params.pop("cutoff_radius", None)

    if family == "tabulated":
        x = np.asarray(params.pop("x", []), dtype=float)
        v = np.asarray(params.pop("V", []), dtype=float)
        if x.size == 0 or v.size == 0:
            raise EmptyTable("tabulated potential needs at least one (x, V) sample")
        if x.shape != v.shape or x.ndim != 1:
            raise ValueError("x and V tables must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise NonFiniteParameter("tabulated potential contains non-finite samples")
        if np.any(np.diff(x) <= 0):
            raise ValueError("tabulated x-grid must be strictly increasing")
        if params:
            raise TypeError(f"unexpected parameters for tabulated potential: {sorted(params)}")
        L = float(max(abs(x[0]), abs(x[-1]))) if cutoff_radius is None else float(cutoff_radius)
        x.setflags(write=False)
        v.setflags(write=False)
        return Potential("tabulated", (), L, x, v)

    names = _PARAMS[family]
    unknown = set(params) - set(names)
    if unknown:
        raise TypeError(f"unexpected parameters for {family}: {sorted(unknown)}")
    missing = [n for n in names if n not in params]
    if missing:
        raise TypeError(f"missing parameters for {family}: {missing}")
    values = []
    for n in names:
        val = _check_finite(n, params[n])
        if n in _POSITIVE and val <= 0:
            raise ValueError(f"parameter {n!r} must be positive, got {val}")
        values.append((n, val))
    values = tuple(values)
    if cutoff_radius is None:
        cutoff_radius = _default_cutoff(family, dict(values))
    else:
        cutoff_radius = _check_finite("cutoff_radius", cutoff_radius)
    return Potential(family, values, float(cutoff_radius))


def _tail_mass(family, p, L):
    """eta_+(L) + eta_-(-L) for the untruncated analytic family."""
    if family == "gaussian_well":
        d, w = p["depth"], p["width"]
        return d * w * math.sqrt(math.pi) * special.erfc(L / w)
    if family == "sech2":
        c = abs(_sech2_strength(p["coupling"]))
        return 4.0 * c / (math.exp(min(2.0 * L, 700.0)) + 1.0)
    if family == "exp_decay":
        a, s = p["amplitude"], p["scale"]
        return 2.0 * abs(a) * s * math.exp(-L / s)
    raise ValueError(family)


def _l1_untruncated(family, p):
    if family == "gaussian_well":
        return p["depth"] * p["width"] * math.sqrt(math.pi)
    if family == "sech2":
        return 2.0 * abs(_sech2_strength(p["coupling"]))
    if family == "exp_decay":
        return 2.0 * abs(p["amplitude"]) * p["scale"]
    raise ValueError(family)


def _default_cutoff(family, p):
    if family == "zero":
        return 0.0
    if family == "square_well":
        return p["halfwidth"]
    if family == "sech2" and _sech2_strength(p["coupling"]) == 0.0:
        return 0.0
    if family == "exp_decay" and p["amplitude"] == 0.0:
        return 0.0
    target = CUTOFF_RTOL * (1.0 + _l1_untruncated(family, p))

    def excess(L):
        return math.log(_tail_mass(family, p, L)) - math.log(target)

    hi = 1.0
    while excess(hi) > 0:
        hi *= 2.0
    if excess(0.0) <= 0:
        return 0.0
    return optimize.brentq(excess, 0.0, hi, xtol=1e-12)


def evaluate(V: Potential, x):
    """V(x); exactly zero for ``|x| > V.cutoff_radius``.  Vectorised over x."""
    xa = np.asarray(x, dtype=float)
    p = V.param_dict
    fam = V.family
    if fam == "zero":
        out = np.zeros_like(xa)
    elif fam == "gaussian_well":
        out = -p["depth"] * np.exp(-(xa / p["width"]) ** 2)
    elif fam == "sech2":
        out = -_sech2_strength(p["coupling"]) / np.cosh(np.minimum(np.abs(xa), 350.0)) ** 2
    elif fam == "square_well":
        out = np.where(np.abs(xa) < p["halfwidth"], -p["depth"], 0.0)
    elif fam == "exp_decay":
        out = p["amplitude"] * np.exp(-np.abs(xa) / p["scale"])
    else:
        out = np.interp(xa, V.table_x, V.table_v, left=0.0, right=0.0)
    out = np.where(np.abs(xa) > V.cutoff_radius, 0.0, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def _pieces(V, a, b):
    """Split [a, b] at the potential's breakpoints."""
    pts = V.breakpoints()
    inner = pts[(pts > a) & (pts < b)]
    return np.concatenate(([a], inner, [b]))


def _quad_pieces(V, fun, a, b):
    if b <= a:
        return 0.0
    edges = _pieces(V, a, b)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(fun, lo, hi, epsabs=MOMENT_TOL, epsrel=1e-13, limit=400)
        total += val
    return total


def moment_norm(V: Potential, n: int) -> float:
    """``||V||_{L^1_n} = int (1+|x|)^n |V(x)| dx`` for n in {0, 1, 2}."""
    if n not in (0, 1, 2):
        raise ValueError("moment order must be 0, 1 or 2")
    if V.family == "zero" or V.cutoff_radius == 0.0:
        return 0.0
    if V.family == "tabulated":
        x, v = V.table_x, V.table_v
        return float(np.trapezoid((1.0 + np.abs(x)) ** n * np.abs(v), x))
    L = V.cutoff_radius
    return _quad_pieces(V, lambda s: (1.0 + abs(s)) ** n * abs(evaluate(V, s)), -L, L)


def _table_tail(V, x, sign):
    xs, vs = V.table_x, np.abs(V.table_v)
    if sign > 0:
        keep = xs > x
        grid = np.concatenate(([x], xs[keep]))
        vals = np.concatenate(([abs(evaluate(V, x))], vs[keep]))
        eta = np.trapezoid(vals, grid)
        gamma = np.trapezoid((grid - x) * vals, grid)
    else:
        keep = xs < x
        grid = np.concatenate((xs[keep], [x]))
        vals = np.concatenate((vs[keep], [abs(evaluate(V, x))]))
        eta = np.trapezoid(vals, grid)
        gamma = np.trapezoid((x - grid) * vals, grid)
    return float(max(eta, 0.0)), float(max(gamma, 0.0))


def tail_moments(V: Potential, x: float, sign: int = +1):
    """Return ``(eta, gamma)`` on the ``sign`` side of x.

    ``eta_+(x) = int_x^inf |V|``, ``gamma_+(x) = int_x^inf (y-x)|V(y)| dy`` and
    mirror images for ``sign = -1``.
    """
    sign = 1 if sign > 0 else -1
    x = float(x)
    L = V.cutoff_radius
    if V.family == "zero" or L == 0.0:
        return 0.0, 0.0
    if V.family == "tabulated":
        return _table_tail(V, x, sign)
    absV = lambda s: abs(evaluate(V, s))  # noqa: E731
    if sign > 0:
        a, b = max(x, -L), L
        eta = _quad_pieces(V, absV, a, b)
        gamma = _quad_pieces(V, lambda s: (s - x) * absV(s), a, b)
    else:
        a, b = -L, min(x, L)
        eta = _quad_pieces(V, absV, a, b)
        gamma = _quad_pieces(V, lambda s: (x - s) * absV(s), a, b)
    return max(eta, 0.0), max(gamma, 0.0)


def eta_profile(V: Potential, xs, sign: int = +1):
    """``eta_sign`` sampled on an array (cumulative, cheap)."""
    xs = np.asarray(xs, dtype=float)
    return np.array([tail_moments(V, float(s), sign)[0] for s in xs.ravel()]).reshape(xs.shape)


def load_table(path) -> Potential:
    """Read a two-column ``x,V`` CSV into a tabulated potential."""
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().replace(" ", "")
        if header != "x,V":
            raise ValueError(f"{path}: expected header 'x,V', got {header!r}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # empty file: reported below
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise EmptyTable(f"{path}: no samples")
    return make_potential("tabulated", x=data[:, 0], V=data[:, 1])


def save_table(V: Potential, path, x=None):
    """Write ``V`` as an ``x,V`` CSV (samples ``x`` default to its own table)."""
    if x is None:
        if V.table_x is None:
            raise ValueError("x samples required for analytic potentials")
        x = V.table_x
    x = np.asarray(x, dtype=float)
    data = np.column_stack([x, evaluate(V, x)])
    np.savetxt(path, data, delimiter=",", header="x,V", comments="", fmt="%.17e")
