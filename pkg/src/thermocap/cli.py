"""Command-line front end.

Four subcommands: ``profile`` computes an interface profile and its
observables, ``celerity`` the tangential wave speed by both routes,
``sweep`` the scaling report across undercoolings, and ``check`` a
cross-module invariant suite.  Everything is deterministic: one seed (from
the config or --seed) drives all sampling and is recorded in every JSON
artifact, floats are written with 17 significant digits, and files are
written to a temp name and atomically renamed so failures leave no partial
artifacts.

Exit codes: 0 success; 2 configuration or validation error; 3 numerical
failure (divergence, unreachable root, undecayed tails, critical isotherm);
4 verification failure (a scaling law or invariant check did not pass).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from . import eos, equilibrium, scaling, waves
from .eos import BulkConditions, FluidParams, bulk_conditions, validate_params
from .equilibrium import GridConfig
from .errors import (
    IndefiniteGradientForm,
    InvalidConfig,
    ModelError,
    NonPositiveConstant,
)
from .scaling import EXPONENT_TARGETS, SweepConfig

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_VERIFICATION = 4

_CONFIG_ERRORS = (InvalidConfig, NonPositiveConstant, IndefiniteGradientForm)

_TOP_KEYS = {"params", "delta_T", "T0", "mu1", "grid", "sweep", "format", "seed", "out"}
_GRID_KEYS = {"half_width_in_zeta", "n_points"}
_SWEEP_KEYS = {"delta_t_values", "use_full_solver", "tolerances"}
_LOCUS_KEYS = ("rho", "a", "g2")


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------

def _format_json(value, indent: int = 0) -> str:
    """Render JSON with sorted keys and 17-significant-digit floats.

    The stdlib encoder prints floats in shortest round-trip form, which is
    deterministic but not fixed-width; this one pins the representation so
    artifacts are byte-stable across platforms and python versions.
    Non-finite floats become null (strict JSON has no NaN).
    """
    pad = " " * indent
    inner = " " * (indent + 2)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value) + 0.0  # fold -0.0 into 0.0
        return f"{v:.17g}" if math.isfinite(v) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, Mapping):
        if not value:
            return "{}"
        items = [f'{inner}{json.dumps(str(k))}: {_format_json(value[k], indent + 2)}'
                 for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [f"{inner}{_format_json(v, indent + 2)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(out_dir: str, name: str, payload) -> None:
    _write_atomic(os.path.join(out_dir, name), _format_json(payload) + "\n")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    params: FluidParams
    bc: BulkConditions
    grid: GridConfig
    sweep: SweepConfig
    tolerances: Optional[dict]
    out_dir: str
    fmt: str
    seed: int
    full: bool
    locus: Optional[waves.WaveLocus]


def _check_keys(raw: Mapping, allowed: set, where: str) -> None:
    unknown = set(raw) - allowed
    if unknown:
        raise InvalidConfig(f"unknown {where} keys: {sorted(unknown)}")


def _require_mapping(value, where: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise InvalidConfig(f"{where} must be a JSON object")
    return value


def _parse_locus(tokens: Optional[Sequence[str]]) -> Optional[waves.WaveLocus]:
    if tokens is None:
        return None
    seen = {}
    for tok in tokens:
        key, sep, val = tok.partition("=")
        if not sep or key not in _LOCUS_KEYS or key in seen:
            raise InvalidConfig(
                f"--locus expects rho=<val> a=<val> g2=<val>, got {tok!r}")
        try:
            seen[key] = float(val)
        except ValueError:
            raise InvalidConfig(f"--locus value not a number: {tok!r}") from None
    if set(seen) != set(_LOCUS_KEYS):
        raise InvalidConfig(f"--locus needs all of {_LOCUS_KEYS}")
    return waves.WaveLocus(rho=seen["rho"], grad_s_normal=seen["a"],
                           grad_s_tg_sq=seen["g2"])


def load_config(args: argparse.Namespace) -> RunConfig:
    raw: Mapping = {}
    if args.config is not None:
        with open(args.config, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        raw = _require_mapping(raw, "config")
    _check_keys(raw, _TOP_KEYS, "config")

    p = validate_params(_require_mapping(raw.get("params", {}), "params"))

    if "delta_T" in raw and "T0" in raw:
        raise InvalidConfig("config sets both delta_T and T0; pick one")
    mu1 = raw.get("mu1")
    if mu1 is not None and not isinstance(mu1, (int, float)):
        raise InvalidConfig("mu1 must be a number")
    if "T0" in raw:
        bc = bulk_conditions(p, T0=float(raw["T0"]), mu1=mu1)
    else:
        bc = bulk_conditions(p, delta_t=float(raw.get("delta_T", 0.01)), mu1=mu1)

    grid_raw = _require_mapping(raw.get("grid", {}), "grid")
    _check_keys(grid_raw, _GRID_KEYS, "grid")
    grid = GridConfig(**grid_raw)

    sweep_raw = _require_mapping(raw.get("sweep", {}), "sweep")
    _check_keys(sweep_raw, _SWEEP_KEYS, "sweep")
    tolerances = None
    if "tolerances" in sweep_raw:
        tolerances = dict(_require_mapping(sweep_raw["tolerances"], "sweep.tolerances"))
        _check_keys(tolerances, set(EXPONENT_TARGETS), "sweep.tolerances")
        tolerances = {k: float(v) for k, v in tolerances.items()}
    sweep_kwargs = {}
    if "delta_t_values" in sweep_raw:
        vals = sweep_raw["delta_t_values"]
        if not isinstance(vals, (list, tuple)):
            raise InvalidConfig("sweep.delta_t_values must be an array")
        sweep_kwargs["delta_t_values"] = tuple(float(v) for v in vals)
    use_full = bool(sweep_raw.get("use_full_solver", False)) or args.full
    sweep = SweepConfig(grid=grid, use_full_solver=use_full, **sweep_kwargs)

    fmt = args.format if args.format is not None else raw.get("format", "both")
    if fmt not in ("csv", "json", "both"):
        raise InvalidConfig(f"format must be csv, json or both, got {fmt!r}")

    seed = args.seed if args.seed is not None else raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2 ** 64:
        raise InvalidConfig(f"seed must be an integer in [0, 2^64), got {seed!r}")

    out_dir = args.out if args.out is not None else raw.get("out", ".")
    if not isinstance(out_dir, str):
        raise InvalidConfig("out must be a directory path string")

    return RunConfig(params=p, bc=bc, grid=grid, sweep=sweep, tolerances=tolerances,
                     out_dir=out_dir, fmt=fmt, seed=seed, full=args.full,
                     locus=_parse_locus(getattr(args, "locus", None)))


def _ensure_out(cfg: RunConfig) -> None:
    os.makedirs(cfg.out_dir, exist_ok=True)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_profile(cfg: RunConfig) -> int:
    if cfg.full:
        prof, report = equilibrium.solve_full_bvp(cfg.params, cfg.bc, cfg.grid)
    else:
        prof, report = equilibrium.closed_profile(cfg.params, cfg.bc, cfg.grid), None
    obs = equilibrium.interface_observables(cfg.params, cfg.bc, prof)
    _ensure_out(cfg)
    if cfg.fmt in ("csv", "both"):
        import io
        buf = io.StringIO()
        equilibrium.profile_to_csv(prof, buf)
        _write_atomic(os.path.join(cfg.out_dir, "profile.csv"), buf.getvalue())
    if cfg.fmt in ("json", "both"):
        payload = obs.to_dict()
        payload["seed"] = cfg.seed
        payload["provenance"] = prof.provenance
        _write_json(cfg.out_dir, "observables.json", payload)
        if report is not None:
            _write_json(cfg.out_dir, "newton.json",
                        {**report.to_dict(), "seed": cfg.seed})
    return EXIT_OK


def cmd_celerity(cfg: RunConfig) -> int:
    if cfg.locus is not None:
        locus = cfg.locus
        closed = waves.celerity_general(cfg.params, locus)
        payload = {"locus_source": "override"}
    else:
        locus = waves.dividing_surface_locus(cfg.params, cfg.bc)
        closed = waves.celerity_at_critical_density(cfg.params, cfg.bc)
        payload = {"locus_source": "dividing-surface", "delta_T": cfg.bc.delta_t}
    payload["locus"] = locus.to_dict()
    payload["closed_form"] = closed.to_dict()
    if locus.grad_s_tg_sq > 0.0:
        root = waves.celerity_by_determinant(cfg.params, locus)
        payload["determinant_root"] = root.to_dict()
        scale = closed.v if closed.v > 0.0 else 1.0
        payload["relative_difference"] = abs(closed.v - root.v) / scale
    else:
        # nothing to bracket when the tangential entropy gradient vanishes
        payload["determinant_root"] = None
        payload["relative_difference"] = None
    payload["seed"] = cfg.seed
    _ensure_out(cfg)
    _write_json(cfg.out_dir, "celerity.json", payload)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    report = scaling.run_sweep(cfg.params, cfg.sweep)
    summary = scaling.verify_exponents(report, cfg.tolerances)
    _ensure_out(cfg)
    if cfg.fmt in ("csv", "both"):
        import io
        buf = io.StringIO()
        scaling.report_to_csv(report, buf)
        _write_atomic(os.path.join(cfg.out_dir, "sweep.csv"), buf.getvalue())
    if cfg.fmt in ("json", "both"):
        payload = report.to_dict()
        payload["verification"] = summary.to_dict()
        payload["tolerance_overrides"] = cfg.tolerances
        payload["seed"] = cfg.seed
        _write_json(cfg.out_dir, "scaling.json", payload)
    return EXIT_OK if summary.all_passed else EXIT_VERIFICATION


def _run_checks(cfg: RunConfig) -> list[dict]:
    """Cross-module invariant suite; each entry is one named check."""
    rng = np.random.default_rng(cfg.seed)
    p = cfg.params
    checks: list[dict] = []

    def record(name: str, metric: float, threshold: float):
        checks.append({"name": name, "metric": float(metric),
                       "threshold": threshold, "passed": bool(metric <= threshold)})

    # sample physically scaled states: densities inside the coexistence
    # bracket at random undercoolings, entropies near the slaved value
    n = 200
    dts = 10.0 ** rng.uniform(-4.0, -1.0, n)
    m = rng.uniform(-1.0, 1.0, n) * np.sqrt(p.A * dts / p.B)
    rho = p.rho_c + m
    s = eos.entropy_slave(p, rho, dts) * rng.uniform(0.5, 1.5, n)

    h_rho = 6e-6 * np.maximum(1.0, np.abs(rho))
    h_s = 6e-6 * np.maximum(1.0, np.abs(s))
    g_rho, g_s = eos.bulk_energy_partials(p, rho, s)
    fd_rho = (eos.bulk_energy(p, rho + h_rho, s)
              - eos.bulk_energy(p, rho - h_rho, s)) / (2.0 * h_rho)
    fd_s = (eos.bulk_energy(p, rho, s + h_s)
            - eos.bulk_energy(p, rho, s - h_s)) / (2.0 * h_s)
    scale_r = np.maximum(1.0, np.abs(g_rho))
    scale_s = np.maximum(1.0, np.abs(g_s))
    record("eos-partials-vs-finite-difference",
           max(np.max(np.abs(fd_rho - g_rho) / scale_r),
               np.max(np.abs(fd_s - g_s) / scale_s)), 1e-6)

    hrr, hrs, hss = eos.bulk_energy_hessian(p, rho, s)
    fd_rr = (eos.bulk_energy_partials(p, rho + h_rho, s)[0]
             - eos.bulk_energy_partials(p, rho - h_rho, s)[0]) / (2.0 * h_rho)
    fd_rs = (eos.bulk_energy_partials(p, rho, s + h_s)[0]
             - eos.bulk_energy_partials(p, rho, s - h_s)[0]) / (2.0 * h_s)
    fd_ss = (eos.bulk_energy_partials(p, rho, s + h_s)[1]
             - eos.bulk_energy_partials(p, rho, s - h_s)[1]) / (2.0 * h_s)
    record("eos-hessian-vs-finite-difference",
           max(np.max(np.abs(fd_rr - hrr) / np.maximum(1.0, np.abs(hrr))),
               np.max(np.abs(fd_rs - hrs) / np.maximum(1.0, np.abs(hrs))),
               np.max(np.abs(fd_ss - hss) / np.maximum(1.0, np.abs(hss)))), 1e-6)

    s_slaved = eos.entropy_slave(p, rho, dts)
    t0 = p.T_c - dts
    mu_full = eos.chemical_potential_full(p, rho, s_slaved, t0)
    mu_cubic = eos.chemical_potential_cubic(p, rho, dts)
    record("slaved-chemical-potential-identity",
           np.max(np.abs(mu_full - mu_cubic) / np.maximum(1.0, np.abs(mu_cubic))), 1e-12)

    worst = 0.0
    for dt in (1e-1, 1e-2, 1e-3, 1e-4):
        bc_i = bulk_conditions(p, delta_t=dt)
        for st in equilibrium.bulk_states(p, bc_i):
            worst = max(worst,
                        abs(float(eos.temperature(p, st.rho, st.s)) - bc_i.T0),
                        abs(float(eos.chemical_potential_full(p, st.rho, st.s, bc_i.T0))
                            - p.mu_c))
    record("bulk-states-at-coexistence", worst, 1e-12)

    prof = equilibrium.closed_profile(p, cfg.bc, cfg.grid)
    record("profile-equation-residual",
           np.max(np.abs(equilibrium.reduced_residual(p, cfg.bc, prof))), 1e-7)
    record("first-integral-residual",
           np.max(np.abs(equilibrium.first_integral_residual(p, cfg.bc, prof))), 1e-7)

    sig_c = equilibrium.surface_tension_closed(p, cfg.bc)
    sig_q = equilibrium.surface_tension_quadrature(p, prof)
    record("surface-tension-quadrature-vs-closed", abs(sig_q - sig_c) / sig_c, 1e-6)

    full_prof, newton = equilibrium.solve_full_bvp(p, cfg.bc, cfg.grid)
    record("newton-iterations-from-closed-seed", float(newton.iterations), 10.0)
    record("equilibrium-stress-residual",
           equilibrium.equilibrium_stress_residual(p, full_prof), 1e-7)

    n_loci = 100
    rho_w = p.rho_c * rng.uniform(0.5, 1.5, n_loci)
    a_w = rng.uniform(-1.0, 1.0, n_loci) * 0.1
    g2_w = 10.0 ** rng.uniform(-12.0, -2.0, n_loci)
    det_err = 0.0
    cel_err = 0.0
    for rho_i, a_i, g2_i in zip(rho_w, a_w, g2_w):
        locus = waves.WaveLocus(rho=float(rho_i), grad_s_normal=float(a_i),
                                grad_s_tg_sq=float(g2_i))
        v_probe = float(rng.uniform(0.0, 2.0)) * math.sqrt(
            (p.C * p.E - p.D * p.D) * g2_i / (p.C * rho_i))
        num = waves.jump_matrix(p, locus, v_probe).determinant()
        ref = -rho_i * ((p.C * p.E - p.D * p.D) * g2_i - p.C * rho_i * v_probe ** 2)
        det_err = max(det_err, abs(num - ref) / max(1e-300, abs(ref)))
        closed = waves.celerity_general(p, locus)
        root = waves.celerity_by_determinant(p, locus)
        cel_err = max(cel_err, abs(closed.v - root.v) / closed.v)
    record("jump-determinant-identity", det_err, 1e-10)
    record("celerity-root-vs-closed-form", cel_err, 1e-10)

    v_direct = waves.celerity_at_critical_density(p, cfg.bc)
    v_locus = waves.celerity_general(p, waves.dividing_surface_locus(p, cfg.bc))
    scale = v_direct.v if v_direct.v > 0.0 else 1.0
    record("dividing-surface-celerity-consistency",
           abs(v_direct.v - v_locus.v) / scale, 1e-12)

    bc0 = bulk_conditions(p, delta_t=0.0)
    record("celerity-vanishes-at-critical-point",
           waves.celerity_at_critical_density(p, bc0).v, 0.0)

    return checks


def cmd_check(cfg: RunConfig) -> int:
    checks = _run_checks(cfg)
    width = max(len(c["name"]) for c in checks)
    lines = [f"{'check'.ljust(width)}  status  metric      threshold"]
    for c in checks:
        status = "PASS" if c["passed"] else "FAIL"
        lines.append(f"{c['name'].ljust(width)}  {status:4}  {c['metric']:.4e}  "
                     f"{c['threshold']:.4e}")
    n_pass = sum(c["passed"] for c in checks)
    all_passed = n_pass == len(checks)
    lines.append(f"{n_pass}/{len(checks)} checks passed")
    sys.stdout.write("\n".join(lines) + "\n")
    _ensure_out(cfg)
    _write_json(cfg.out_dir, "check.json",
                {"seed": cfg.seed, "checks": checks, "all_passed": all_passed})
    return EXIT_OK if all_passed else EXIT_VERIFICATION


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON config file (strict keys; defaults used when omitted)")
    common.add_argument("--out", metavar="DIR",
                        help="output directory, created if missing (default '.')")
    common.add_argument("--format", choices=("csv", "json", "both"),
                        help="artifact families to write where a command has both "
                             "(celerity and check always write JSON)")
    common.add_argument("--seed", type=int, metavar="N",
                        help="seed for all sampling, recorded in JSON outputs (default 0)")
    common.add_argument("--full", action="store_true",
                        help="use the coupled BVP solver instead of the closed form")

    ap = argparse.ArgumentParser(
        prog="thermocap",
        description="Equilibrium liquid-vapor interfaces of a thermocapillary "
                    "fluid and the acceleration waves they carry.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("profile", parents=[common],
                        help="interface profile and observables")
    sp.set_defaults(handler=cmd_profile)
    sp = sub.add_parser("celerity", parents=[common],
                        help="tangential wave celerity, closed form and determinant root")
    sp.add_argument("--locus", nargs=3, metavar="K=V",
                    help="evaluate at an explicit locus: rho=<val> a=<val> g2=<val>")
    sp.set_defaults(handler=cmd_celerity)
    sp = sub.add_parser("sweep", parents=[common],
                        help="scaling sweep across undercoolings")
    sp.set_defaults(handler=cmd_sweep)
    sp = sub.add_parser("check", parents=[common],
                        help="run the cross-module invariant suite")
    sp.set_defaults(handler=cmd_check)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (json.JSONDecodeError, TypeError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.handler(cfg)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        report = getattr(exc, "report", None)
        if report is not None:
            print(_format_json(report.to_dict()), file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
