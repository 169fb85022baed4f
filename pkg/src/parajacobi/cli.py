"""Command-line entry point: model configs, runs, CSV/JSON reports.

Exit-code contract: 0 success, 1 usage or configuration error, 2 model
outside the hard-edge class, 3 acceptance failure. CSV outputs carry '#'
metadata header lines and are byte-identical across reruns of the same
config and seed.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics as asym
from . import oracle as orc
from .errors import ConfigError, OutOfClassError, OutsideBandError, SpectralError
from .modulation import (
    DEFAULT_HORIZON,
    Explicit,
    ExplicitDecay,
    GeometricDecay,
    ModulatedModel,
    Power,
    PowerDecay,
    PowerShift,
    SqrtProduct,
    build_model,
    perturb,
)
from .periodic import Case, PeriodicParams, classify, spectral_bands
from .turan import density_grid

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_OUT_OF_CLASS = 2
EXIT_ACCEPTANCE = 3


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def _family_from_config(spec, what):
    if spec is None:
        return None
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{what}: family must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "power":
            return Power(gamma=float(spec["gamma"]), c=float(spec.get("c", 1.0)))
        if kind == "power_shift":
            shift = spec.get("shift", 0.0)
            if isinstance(shift, list):
                shift = np.asarray(shift, dtype=float)
            else:
                shift = float(shift)
            return PowerShift(gamma=float(spec["gamma"]), c=float(spec.get("c", 1.0)),
                              shift=shift)
        if kind == "sqrt_product":
            return SqrtProduct(lam=float(spec.get("lam", 0.0)))
        if kind == "explicit":
            return Explicit(np.asarray(spec["values"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: bad family parameters: {exc}")
    raise ConfigError(f"{what}: unknown family kind {kind!r}")


def _decay_from_config(spec, what):
    if spec is None:
        return None
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"{what}: perturbation must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "geometric":
            return GeometricDecay(c=float(spec.get("c", 1.0)))
        if kind == "power":
            return PowerDecay(p=float(spec["p"]), c=float(spec.get("c", 1.0)))
        if kind == "explicit":
            return ExplicitDecay(np.asarray(spec["values"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: bad perturbation parameters: {exc}")
    raise ConfigError(f"{what}: unknown perturbation kind {kind!r}")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {cfg.get('schema_version')!r}")
    return cfg


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


def model_from_config(cfg: dict, horizon_override=None) -> ModulatedModel:
    """Build a (possibly perturbed) model from a validated config dict."""
    try:
        N = int(cfg["N"])
        alpha = np.asarray(cfg["alpha"], dtype=float)
        beta = np.asarray(cfg["beta"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad periodic data: {exc}")
    if len(alpha) != N or len(beta) != N:
        raise ConfigError("alpha and beta must have length N")
    horizon = int(horizon_override or cfg.get("horizon", DEFAULT_HORIZON))
    if horizon < 1000:
        raise ConfigError("horizon must be at least 1000")
    try:
        periodic = PeriodicParams(N, alpha, beta)
    except ValueError as exc:
        raise ConfigError(str(exc))
    a_base = _family_from_config(cfg.get("a_family"), "a_family")
    if a_base is None:
        raise ConfigError("a_family is required")
    b_family = _family_from_config(cfg.get("b_family"), "b_family")
    s = cfg.get("s")
    r = cfg.get("r")
    if (s is None) != (r is None):
        raise ConfigError("s and r overrides must be given together")
    model = build_model(periodic, a_base, b_family=b_family, s=s, r=r, horizon=horizon)
    pert = cfg.get("perturbation")
    if pert is not None:
        xi = _decay_from_config(pert.get("xi"), "perturbation.xi")
        zeta = _decay_from_config(pert.get("zeta"), "perturbation.zeta")
        model = perturb(model, xi=xi, zeta=zeta)
    return model


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    command: str
    config_hash: str
    outputs: list = field(default_factory=list)
    wall_time_s: float = 0.0
    flags: dict = field(default_factory=dict)

    def write(self, out_dir: Path):
        path = out_dir / f"run_{self.command}.json"
        payload = {
            "command": self.command,
            "config_hash": self.config_hash,
            "outputs": [str(p) for p in self.outputs],
            "wall_time_s": round(self.wall_time_s, 3),
            "flags": self.flags,
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return path


def _write_csv(path, meta: dict, header, rows):
    with open(path, "w", newline="") as fh:
        for key, val in meta.items():
            fh.write(f"# {key}: {val}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_classify(cfg, args, out_dir) -> int:
    t0 = time.perf_counter()
    periodic = PeriodicParams(int(cfg["N"]), np.asarray(cfg["alpha"], float),
                              np.asarray(cfg["beta"], float))
    case = classify(periodic)
    from .mat2 import trace
    from .periodic import monodromy

    tr0 = trace(monodromy(periodic, 0, 0.0))
    bands = spectral_bands(periodic)
    print(f"case: {case.value}")
    print(f"trace at origin: {tr0:.12g}")
    print("bands: " + ", ".join(f"({lo:.9g}, {hi:.9g})" for lo, hi in bands))
    flags = {"case": case.value, "trace_at_origin": tr0, "bands": bands}
    if case is Case.IIb:
        from .modulation import modulation_diagnostics

        model = model_from_config(cfg, horizon_override=getattr(args, "horizon", None))
        tau = model.tau
        lo, hi = tau.ac_halfline()
        print(f"epsilon: {tau.epsilon:+d}")
        print(f"tau: slope {tau.slope:.12g}, intercept {tau.intercept:.12g}, x0 {tau.x0:.12g}")
        print(f"ac half-line: ({lo:.9g}, {hi:.9g})")
        print(f"shift limits: s {model.s.tolist()}, r {model.r.tolist()} [{model.s_r_source}]")
        flags.update(
            epsilon=tau.epsilon, tau_slope=tau.slope, tau_intercept=tau.intercept,
            x0=tau.x0, ac_halfline=[lo, hi], s=model.s.tolist(), r=model.r.tolist(),
            increments_vanish=bool(model.base.increments_vanish),
            modulation_diagnostics=modulation_diagnostics(model),
        )
        if model.is_perturbed:
            flags["summable_perturbation"] = bool(model.summable_perturbation)
    report = RunReport("classify", config_hash(cfg), [], time.perf_counter() - t0, flags)
    report.write(out_dir)
    return EXIT_OK if case is Case.IIb else EXIT_OUT_OF_CLASS


def cmd_density(cfg, args, out_dir) -> int:
    t0 = time.perf_counter()
    model = model_from_config(cfg, horizon_override=args.horizon)
    grid = np.linspace(args.x_lo, args.x_hi, args.points)
    try:
        table = density_grid(model, args.residue, grid, rel_tol=args.rel_tol)
    except OutsideBandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = out_dir / "density.csv"
    table.to_csv(out)
    run_flags = {
        "conjectural": table.flags["conjectural"],
        "increments_vanish": table.flags["increments_vanish"],
        "all_converged": bool(table.converged.all()),
    }
    if "summable_perturbation" in table.flags:
        run_flags["summable_perturbation"] = table.flags["summable_perturbation"]
    report = RunReport("density", config_hash(cfg), [out], time.perf_counter() - t0,
                       run_flags)
    report.write(out_dir)
    print(f"wrote {out} ({args.points} points, "
          f"{int(table.converged.sum())}/{args.points} converged)")
    return EXIT_OK


def cmd_asymptotics(cfg, args, out_dir) -> int:
    t0 = time.perf_counter()
    model = model_from_config(cfg, horizon_override=args.horizon)
    rep = asym.amplitude_extract(model, args.residue, args.x,
                                 (args.window[0], args.window[1]), rel_tol=args.rel_tol)
    out = out_dir / "asymptotics.json"
    out.write_text(json.dumps({
        "x": rep.x, "residue": rep.i, "window": list(rep.j_range),
        "amplitude_measured": rep.amplitude_measured,
        "amplitude_predicted": rep.amplitude_predicted,
        "ratio": rep.ratio, "mu_prime": rep.mu_prime,
        "ellipticity_threshold": rep.ellipticity_threshold,
        "max_phase_residual": float(np.abs(rep.phase_residuals).max())
        if rep.phase_residuals.size else None,
    }, indent=2, sort_keys=True) + "\n")
    print(f"amplitude ratio: {rep.ratio:.6f} (measured {rep.amplitude_measured:.6g}, "
          f"predicted {rep.amplitude_predicted:.6g})")
    RunReport("asymptotics", config_hash(cfg), [out], time.perf_counter() - t0,
              {"ratio": rep.ratio,
               "ellipticity_threshold": rep.ellipticity_threshold}).write(out_dir)
    return EXIT_OK


def cmd_kernel(cfg, args, out_dir) -> int:
    t0 = time.perf_counter()
    model = model_from_config(cfg, horizon_override=args.horizon)
    u_grid = np.linspace(-args.box, args.box, args.points)
    prof = asym.universality_profile(model, args.n, args.x, u_grid, rel_tol=args.rel_tol)
    out = out_dir / "kernel.csv"
    rows = []
    for a in range(len(u_grid)):
        for b in range(len(u_grid)):
            rows.append([float(u_grid[a]), float(u_grid[b]),
                         float(prof.values[a, b]), float(prof.prediction[a, b])])
    _write_csv(out, {
        "x": f"{args.x:.17g}", "n": args.n, "rho_n": f"{prof.rho_n:.17g}",
        "upsilon": f"{prof.upsilon:.17g}", "mu_prime": f"{prof.mu_prime:.17g}",
        "max_relative_deviation": f"{prof.max_relative_deviation:.17g}",
    }, ["u", "v", "kernel", "prediction"], rows)
    print(f"max relative deviation: {prof.max_relative_deviation:.4%}")
    RunReport("kernel", config_hash(cfg), [out], time.perf_counter() - t0,
              {"max_relative_deviation": prof.max_relative_deviation}).write(out_dir)
    return EXIT_OK


def cmd_oracle(cfg, args, out_dir) -> int:
    t0 = time.perf_counter()
    model = model_from_config(cfg, horizon_override=args.horizon)
    outputs = []
    flags = {}
    if args.counts_sizes:
        probe = orc.ess_spectrum_probe(model, (args.interval[0], args.interval[1]),
                                       args.counts_sizes)
        out = out_dir / "oracle_counts.csv"
        _write_csv(out, {"interval": f"[{probe.interval[0]:.17g}, {probe.interval[1]:.17g}]"},
                   ["size", "count"],
                   [[int(s), int(c)] for s, c in zip(probe.sizes, probe.counts)])
        outputs.append(out)
        flags["counts"] = probe.counts.tolist()
        print("counts:", dict(zip(probe.sizes.tolist(), probe.counts.tolist())))
    else:
        om = orc.oracle_measure(model, args.size)
        out = out_dir / "oracle_measure.csv"
        om.to_csv(out)
        outputs.append(out)
        if args.interval:
            flags["interval_mass"] = om.interval_mass(*args.interval)
        print(f"wrote {out} ({om.size} atoms)")
    RunReport("oracle", config_hash(cfg), outputs, time.perf_counter() - t0, flags).write(out_dir)
    return EXIT_OK


def cmd_report(cfg, args, out_dir) -> int:
    from .acceptance import run_all

    t0 = time.perf_counter()
    results = run_all(fast=args.fast)
    verdict = {
        "all_passed": all(r.passed for r in results if not r.skipped),
        "skipped": [r.index for r in results if r.skipped],
        "criteria": [
            {
                "index": r.index,
                "name": r.name,
                "passed": r.passed,
                "skipped": r.skipped,
                "seconds": round(r.seconds, 2),
                "details": r.details,
            }
            for r in results
        ],
    }
    out = out_dir / "acceptance_report.json"
    out.write_text(json.dumps(verdict, indent=2, sort_keys=True, default=str) + "\n")
    for r in results:
        status = "SKIP" if r.skipped else ("PASS" if r.passed else "FAIL")
        print(f"{status}  criterion {r.index}: {r.name} ({r.seconds:.1f} s)")
    RunReport("report", config_hash(cfg), [out], time.perf_counter() - t0,
              {"all_passed": verdict["all_passed"]}).write(out_dir)
    return EXIT_OK if verdict["all_passed"] else EXIT_ACCEPTANCE


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="parajacobi",
        description="Spectral pipeline for periodically modulated Jacobi matrices "
                    "at a parabolic hard edge",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="path to the JSON model config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--horizon", type=int, default=None, help="coefficient horizon override")
        p.add_argument("--rel-tol", dest="rel_tol", type=float, default=1e-3)
        p.add_argument("--threads", type=int, default=0, help="accepted for compatibility")

    p = sub.add_parser("classify", help="regime classification, bands and half-lines")
    common(p)

    p = sub.add_parser("density", help="density table on a grid in the ac half-line")
    common(p)
    p.add_argument("x_lo", type=float)
    p.add_argument("x_hi", type=float)
    p.add_argument("points", type=int)
    p.add_argument("--residue", type=int, default=0)

    p = sub.add_parser("asymptotics", help="amplitude extraction over a block window")
    common(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--window", type=int, nargs=2, required=True, metavar=("J_LO", "J_HI"))
    p.add_argument("--residue", type=int, default=0)

    p = sub.add_parser("kernel", help="rescaled kernel profile against the sinc prediction")
    common(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--box", type=float, default=1.0)
    p.add_argument("--points", type=int, default=9)

    p = sub.add_parser("oracle", help="truncation quadrature measure or eigenvalue counts")
    common(p)
    p.add_argument("--size", type=int, default=2000)
    p.add_argument("--interval", type=float, nargs=2, default=None, metavar=("C", "D"))
    p.add_argument("--counts-sizes", type=int, nargs="+", default=None,
                   help="when given, emit eigenvalue counts in --interval for these sizes")

    p = sub.add_parser("report", help="run the acceptance suite and emit a JSON verdict")
    common(p)
    p.add_argument("--fast", action="store_true", help="reduced horizons (smoke run)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        handler = {
            "classify": cmd_classify,
            "density": cmd_density,
            "asymptotics": cmd_asymptotics,
            "kernel": cmd_kernel,
            "oracle": cmd_oracle,
            "report": cmd_report,
        }[args.command]
        return handler(cfg, args, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OutOfClassError as exc:
        print(f"model outside the hard-edge class: {exc}", file=sys.stderr)
        return EXIT_OUT_OF_CLASS
    except OutsideBandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpectralError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ACCEPTANCE


if __name__ == "__main__":
    sys.exit(main())
