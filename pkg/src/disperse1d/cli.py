"""Command-line front end: ``disperse1d <subcommand> [--config PATH] [--out DIR] ...``.

Exit codes: 0 when every check of the subcommand passes, 1 when a check
fails, 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .errors import Disperse1DError, ParseError

SCHEMA_VERSION = 1
CAPS = {"K": 200.0, "N_k": 16385, "N_x": 2001, "N_o": 4000, "L": 200.0}
SUBCOMMANDS = ("scatter", "kernel", "decay", "wiener", "verify", "appendix")


@dataclass
class RunConfig:
    potential: dict
    L: float = 20.0
    N_x: int = 201
    K: float = 40.0
    N_k: int = 4097
    N_o: int = 2400
    L_o: float = 40.0
    mass: float = 1.0
    t_ladder: list = field(default_factory=lambda: [10.0, 1000.0, 8])
    kernel_times: list = field(default_factory=lambda: [5.0])
    sigma: float = 0.0
    routes: list = field(default_factory=lambda: ["fresnel", "direct", "oracle"])
    direct_stride: int = 10
    out: str = "out"

    def validate(self):
        for key, cap in CAPS.items():
            val = getattr(self, key)
            if not (val > 0 and val <= cap):
                raise ParseError(f"{key} = {val} outside (0, {cap}]")
        if (self.N_k - 1) & (self.N_k - 2) != 0:
            raise ParseError("N_k must be 2^j + 1")
        if self.N_x % 2 == 0:
            raise ParseError("N_x must be odd so that x = 0 is a node")
        if not (isinstance(self.potential, dict) and "family" in self.potential):
            raise ParseError("potential needs a 'family' key")
        from .potential import make_potential

        try:
            make_potential(dict(self.potential))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"potential: {exc}") from exc
        parse_ladder(self.t_ladder)
        from .propagator import ROUTES

        for r in self.routes:
            if r not in ROUTES:
                raise ParseError(f"unknown route {r!r}")
        if not math.isfinite(self.mass) or self.mass <= 0:
            raise ParseError("mass must be positive")
        return self

    def ladder(self):
        return parse_ladder(self.t_ladder)

    def to_yaml(self):
        return yaml.safe_dump(asdict(self), sort_keys=False, default_flow_style=None)


REQUIRED = ("potential",)


def parse_ladder(spec):
    """[a, b, n] or 'a:b:n' -> geometric ladder."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ParseError(f"t-ladder must be a:b:n, got {spec!r}")
        spec = parts
    try:
        a, b, n = float(spec[0]), float(spec[1]), int(spec[2])
    except (TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"bad t-ladder {spec!r}") from exc
    if not (0 < a < b) or n < 2:
        raise ParseError(f"bad t-ladder {spec!r}")
    return np.geomspace(a, b, n)


def load_config(path) -> RunConfig:
    text = Path(path).read_text()
    return parse_config(text)


def parse_config(text) -> RunConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ParseError(str(exc.problem), mark.line + 1 if mark else None,
                         mark.column + 1 if mark else None) from exc
    if not isinstance(data, dict):
        raise ParseError("configuration must be a mapping", 1, 1)
    for key in REQUIRED:
        if key not in data:
            raise ParseError(f"missing required key '{key}'")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ParseError(f"unknown keys: {', '.join(sorted(unknown))}")
    return RunConfig(**data).validate()


# Parameters used when ``--potential`` names a family without values.
STANDARD_PARAMS = {"zero": {}, "sech2": {"coupling": 1.0},
                   "gaussian_well": {"depth": 2.0, "width": 1.0},
                   "square_well": {"depth": 1.0, "halfwidth": 1.0}}


def parse_potential_arg(text):
    """``family`` or ``family:name=value,...`` into a potential dict."""
    fam, _, rest = text.partition(":")
    fam = fam.strip()
    pot = {"family": fam}
    if not rest:
        if fam not in STANDARD_PARAMS:
            raise ParseError(f"potential {fam!r} needs explicit parameters (family:name=value,...)")
        pot.update(STANDARD_PARAMS[fam])
        return pot
    for item in rest.split(","):
        name, eq, val = item.partition("=")
        if not eq:
            raise ParseError(f"bad potential parameter {item!r}; expected name=value")
        pot[name.strip()] = float(val)
    return pot


def default_config(potential=None) -> RunConfig:
    return RunConfig(potential=potential or {"family": "sech2", "coupling": 1.0})


# --- emission ----------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def emit(artifact, path):
    """Write an artifact: objects with ``to_csv`` to CSV, dicts to schema-versioned JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(artifact, dict):
        payload = {"schema_version": SCHEMA_VERSION, **_jsonable(artifact)}
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    elif hasattr(artifact, "to_csv"):
        artifact.to_csv(path)
    else:
        raise TypeError(f"cannot emit {type(artifact).__name__}")
    return path


# --- pipeline ----------------------------------------------------------------

class _Context:
    def __init__(self, cfg: RunConfig):
        from .jost import KGrid, x_grid
        from .potential import make_potential

        self.cfg = cfg
        pot = dict(cfg.potential)
        fam = pot.pop("family")
        try:
            self.V = make_potential(fam, **pot)
        except TypeError as exc:
            raise ParseError(str(exc)) from exc
        self.kgrid = KGrid(cfg.K, cfg.N_k)
        self.x = x_grid(cfg.L, cfg.N_x)
        self._sd = None

    @property
    def scattering(self):
        if self._sd is None:
            from .scattering import compute_scattering

            self._sd = compute_scattering(self.V, self.kgrid, self.x)
        return self._sd


def _check(results, name, value, tol):
    ok = bool(np.isfinite(value) and value <= tol)
    results[name] = {"value": value, "tol": tol, "pass": ok}
    return ok


def run_scatter(ctx, out):
    from .jost import wronskian_drift
    from .scattering import type_invariants, verify_identities

    field_, sd = ctx.scattering
    emit(sd, out / "scattering.csv")
    sd.bound_states_to_csv(out / "bound_states.csv")
    res = {}
    for k, v in verify_identities(sd, field_).items():
        _check(res, k, v, 1e-7)
    _check(res, "wronskian_drift", wronskian_drift(field_), 1e-7)
    inv = type_invariants(sd, ctx.V)
    report = {"resonance_class": sd.resonance_class.value, "W0": abs(sd.resonance.W0),
              "margin": sd.resonance.margin, "kappas": sd.kappas, "invariants": inv, "checks": res}
    emit(report, out / "resonance.json")
    return all(c["pass"] for c in res.values())


def run_kernel(ctx, out):
    from .oracle import oracle_kernel
    from .propagator import schrodinger_kernel_direct, schrodinger_kernel_fresnel

    field_, sd = ctx.scattering
    routes = ctx.cfg.routes
    res = {}
    sub = field_.x[::ctx.cfg.direct_stride]
    for t in ctx.cfg.kernel_times:
        tag = f"t{t:.6g}"
        F = schrodinger_kernel_fresnel(field_, sd, t)
        emit(F, out / f"kernel_fresnel_{tag}.csv")
        _check(res, f"symmetry_{tag}", F.symmetry_residual(), 1e-6)
        fsub = F.values[::ctx.cfg.direct_stride, ::ctx.cfg.direct_stride]
        if "direct" in routes:
            D = schrodinger_kernel_direct(field_, sd, t, sub)
            emit(D, out / f"kernel_direct_{tag}.csv")
            _check(res, f"route_agreement_{tag}", float(np.max(np.abs(D.values - fsub)) / np.max(np.abs(fsub))), 5e-3)
        if "oracle" in routes:
            O = oracle_kernel(ctx.V, t, field_.x)
            emit(O, out / f"kernel_oracle_{tag}.csv")
            _check(res, f"oracle_diff_{tag}",
                   float(np.max(np.abs(O.values - F.values)) / np.max(np.abs(O.values))), 1e-2)
    emit({"checks": res}, out / "kernel_report.json")
    return all(c["pass"] for c in res.values())


def decay_target(sigma):
    return (-0.5, 0.05) if sigma == 0 else (-1.5, 0.1)


def run_decay(ctx, out):
    from .decayfit import kg_response, schrodinger_decay
    from .scattering import ResonanceClass

    field_, sd = ctx.scattering
    sigma = ctx.cfg.sigma
    ladder = ctx.cfg.ladder()
    report = {}
    ok = True
    if sigma != 0 and sd.resonance_class is not ResonanceClass.NON_RESONANT:
        report["note"] = "weighted decay applies to non-resonant potentials only"
        emit(report, out / "decay.json")
        return True
    target, tol = decay_target(sigma)
    ser = schrodinger_decay(field_, sd, ladder, sigma)
    emit(ser, out / "decay_schrodinger.csv")
    report["schrodinger"] = ser.summary(target, tol)
    ok &= report["schrodinger"]["pass"]
    if "kg12" in ctx.cfg.routes:
        ktarget, ktol = (-0.5, 0.07) if sigma == 0 else (-1.5, 0.15)
        ks = kg_response(sd, field_, ctx.cfg.mass, None, ladder, sigma)
        emit(ks, out / "decay_kg12.csv")
        report["kg12"] = ks.summary(ktarget, ktol)
        ok &= report["kg12"]["pass"]
    emit(report, out / "decay.json")
    return bool(ok)


def run_wiener(ctx, out):
    from .scattering import ResonanceClass
    from .wiener import resonant_diagnostics, uniformity_study, weighted_uniformity

    field_, sd = ctx.scattering
    res = {}
    study = uniformity_study(field_, sd)
    report = {"probes": study["pairs"], "l1": study["l1"], "trend_slope": study["slope"]}
    _check(res, "trend_slope", abs(study["slope"]), 0.01)
    if sd.resonance_class is ResonanceClass.NON_RESONANT:
        wu = weighted_uniformity(field_, sd)
        report["weighted"] = wu
        res["weighted_single_constant"] = {"value": wu["outer_over_inner"], "tol": 2.0,
                                           "pass": bool(wu["pass"])}
    else:
        diag = resonant_diagnostics(field_, sd)
        report["tail_increment"] = diag.tail_increment
        report["glm_residual"] = diag.glm_residual
        for s in (+1, -1):
            _check(res, f"tail_increment_{'+' if s > 0 else '-'}", diag.tail_increment[s], 1e-3)
            _check(res, f"glm_residual_{'+' if s > 0 else '-'}", diag.glm_residual[s], 1e-4)
    report["checks"] = res
    emit(report, out / "wiener.json")
    return all(c["pass"] for c in res.values())


def run_appendix(ctx, out):
    from .oscquad import appendix_psi_check, appendix_to_csv, envelope_check, vdc_suite

    rows, per_t, bounded = appendix_psi_check()
    appendix_to_csv(rows, out / "appendix.csv")
    env = envelope_check()
    vdc = vdc_suite()
    res = {"psi_bounded": {"value": float(per_t.max() / np.median(per_t)), "tol": 2.0, "pass": bounded}}
    worst_env = max(v[0] for v in env.values())
    res["envelope"] = {"value": worst_env, "tol": 1.0, "pass": bool(worst_env <= 1.0)}
    worst_vdc = max(float(np.max(r)) for r in vdc.values())
    from .oscquad import VDC_CONSTANT, VDC_SLACK

    res["van_der_corput"] = {"value": worst_vdc, "tol": VDC_CONSTANT * VDC_SLACK,
                             "pass": bool(worst_vdc <= VDC_CONSTANT * VDC_SLACK)}
    emit({"per_t_max": per_t, "envelope": {str(k): list(v) for k, v in env.items()},
          "vdc": vdc, "checks": res}, out / "appendix.json")
    return all(c["pass"] for c in res.values())


def run_verify(ctx, out):
    from .verify import verify_suite

    report = verify_suite(ctx.V, ctx.kgrid, ctx.x, ctx.cfg, scattering=ctx.scattering)
    emit(report, out / "verify.json")
    return all(c["pass"] for c in report["checks"].values())


RUNNERS = {"scatter": run_scatter, "kernel": run_kernel, "decay": run_decay,
           "wiener": run_wiener, "verify": run_verify, "appendix": run_appendix}


def run(subcommand, config: RunConfig, out=None):
    """Run one subcommand; returns the exit code."""
    out = Path(out or config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(config.to_yaml())
    try:
        ctx = _Context(config)
        ok = RUNNERS[subcommand](ctx, out)
    except Disperse1DError as exc:
        emit({"error": type(exc).__name__, "message": str(exc)}, out / f"{subcommand}_error.json")
        print(f"{subcommand}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0 if ok else 1


def build_parser():
    p = argparse.ArgumentParser(prog="disperse1d", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", help="YAML run configuration")
    p.add_argument("--out", help="output directory")
    p.add_argument("--routes", help="comma-separated routes")
    p.add_argument("--sigma", type=float, help="weight exponent")
    p.add_argument("--tladder", help="geometric t-ladder a:b:n")
    p.add_argument("--potential", help="family or family:name=value,... (overrides the config)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else default_config()
        if args.potential:
            cfg.potential = parse_potential_arg(args.potential)
        if args.routes:
            cfg.routes = [r.strip() for r in args.routes.split(",") if r.strip()]
        if args.sigma is not None:
            cfg.sigma = args.sigma
        if args.tladder:
            a, b, n = args.tladder.split(":") if args.tladder.count(":") == 2 else (None, None, None)
            if a is None:
                raise ParseError(f"t-ladder must be a:b:n, got {args.tladder!r}")
            cfg.t_ladder = [float(a), float(b), int(n)]
        cfg.validate()
    except (ParseError, OSError, ValueError, TypeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    return run(args.subcommand, cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
