"""Command-line front end: runs, sweeps, verification, table printing.

Subcommands
-----------
simulate     integrate one run and write a fidelity-decay CSV
sweep        run several feedback strengths concurrently, with a manifest
verify       execute the self-verification battery
stark-table  print the per-state level-shift table

Configuration comes from an optional JSON file (``--config``) overlaid
by command-line flags; flags win.  CSV output has the fixed header
``t,fidelity,trace_error,min_eig`` with 17-significant-digit values, so
identical configurations produce byte-identical files.  Exit codes:
0 success, 2 configuration error, 3 integration failure.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import network, verify
from .lindblad import IntegrationError, IntegratorOptions, integrate

__all__ = ["main", "RunConfig"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3

CSV_HEADER = "t,fidelity,trace_error,min_eig"


class ConfigError(ValueError):
    pass


@dataclasses.dataclass
class RunConfig:
    """Resolved parameters for one run or sweep.

    ``alpha`` defaults to omega/8 and ``gamma_flip`` to 0.1, matching
    the reference decay protocol; all dynamics are deterministic, so
    there is no seed.
    """

    omega: list[float]
    alpha: float | None = None
    gamma_flip: float = 0.1
    variant: str = "bitflip"
    stark_compensated: bool = False
    initial_state: str = "codeword"
    t_max: float = 30.0
    method: str = "adaptive"
    dt: float | None = None
    rtol: float = 1e-8
    atol: float = 1e-10
    n_samples: int = 200
    out: str | None = None

    def validate(self) -> None:
        if not self.omega:
            raise ConfigError("omega list must be non-empty")
        if any(w < 0 for w in self.omega):
            raise ConfigError("omega values must be nonnegative")
        if self.alpha is not None and self.alpha < 0:
            raise ConfigError("alpha must be nonnegative")
        if self.gamma_flip < 0:
            raise ConfigError("gamma_flip must be nonnegative")
        if self.variant not in ("bitflip", "phaseflip"):
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.method not in ("adaptive", "fixed"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.method == "fixed" and (self.dt is None or self.dt <= 0):
            raise ConfigError("fixed method requires --dt > 0")
        if self.t_max < 0:
            raise ConfigError("t_max must be nonnegative")
        if self.initial_state != "codeword":
            network.register_basis_state(self.initial_state)  # raises if malformed

    def alpha_for(self, omega: float) -> float:
        return self.alpha if self.alpha is not None else omega / 8.0

    def params_for(self, omega: float) -> network.MemoryParams:
        return network.MemoryParams(
            omega=omega,
            alpha=self.alpha_for(omega),
            gamma_flip=self.gamma_flip,
            variant=self.variant,
            stark_compensated=self.stark_compensated,
        )

    def integrator_options(self) -> IntegratorOptions:
        return IntegratorOptions(
            t_max=self.t_max,
            method=self.method,
            rtol=self.rtol,
            atol=self.atol,
            dt=self.dt,
            n_samples=self.n_samples,
        )


_CONFIG_FIELDS = {f.name for f in dataclasses.fields(RunConfig)}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    unknown = set(data) - _CONFIG_FIELDS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def _parse_omega_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad omega list {text!r}") from exc


def _merge_config(file_cfg: dict, args: argparse.Namespace) -> RunConfig:
    merged = dict(file_cfg)
    for key in _CONFIG_FIELDS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    if "omega" in merged and isinstance(merged["omega"], (int, float)):
        merged["omega"] = [float(merged["omega"])]
    if "omega" not in merged:
        raise ConfigError("omega is required (flag --omega or config)")
    try:
        cfg = RunConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _write_csv(path: Path, trace) -> None:
    lines = [CSV_HEADER]
    for t, fid, tr_err, min_eig in trace.rows():
        lines.append(",".join((_fmt(t), _fmt(fid), _fmt(tr_err), _fmt(min_eig))))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="")


def _sidecar(path: Path, cfg: RunConfig, omega: float, status: str,
             trace=None, error: str | None = None) -> None:
    meta = {
        "config": dataclasses.asdict(cfg),
        "omega": omega,
        "alpha": cfg.alpha_for(omega),
        "status": status,
        "error": error,
    }
    if trace is not None:
        meta["integrator"] = {
            "method": trace.method,
            "n_steps": trace.n_steps,
            "n_rejected": trace.n_rejected,
            "max_hermiticity_error": trace.max_hermiticity_error,
            "flags": list(trace.flags),
        }
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _run_single(cfg: RunConfig, omega: float, csv_path: Path) -> tuple[str, str | None]:
    """Run one point; returns (status, error message)."""
    params = cfg.params_for(omega)
    if cfg.initial_state == "codeword":
        register = network.codeword_state(cfg.variant)
    else:
        register = network.register_basis_state(cfg.initial_state)
    model = network.assemble_memory(params)
    rho0 = network.initial_density(register)
    target = network.fidelity_projector(register)
    try:
        trace = integrate(model, rho0, cfg.integrator_options(), target)
    except IntegrationError as exc:
        if exc.partial is not None:
            _write_csv(csv_path, exc.partial)
        _sidecar(csv_path.with_suffix(".json"), cfg, omega, "failed",
                 trace=exc.partial, error=str(exc))
        return "failed", str(exc)
    _write_csv(csv_path, trace)
    _sidecar(csv_path.with_suffix(".json"), cfg, omega, "ok", trace=trace)
    return "ok", None


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _merge_config(_load_config(args.config), args)
    if len(cfg.omega) != 1:
        raise ConfigError("simulate takes exactly one omega; use sweep for lists")
    if cfg.out is None:
        raise ConfigError("simulate requires --out")
    csv_path = Path(cfg.out)
    if csv_path.parent and not csv_path.parent.exists():
        raise ConfigError(f"output directory {csv_path.parent} does not exist")
    status, error = _run_single(cfg, cfg.omega[0], csv_path)
    if status == "failed":
        print(f"integration failed: {error}", file=sys.stderr)
        return EXIT_INTEGRATION
    return EXIT_OK


def _sweep_point(payload: tuple) -> tuple[float, str, str | None]:
    cfg_dict, omega, csv_path = payload
    cfg = RunConfig(**cfg_dict)
    status, error = _run_single(cfg, omega, Path(csv_path))
    return omega, status, error


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _merge_config(_load_config(args.config), args)
    if cfg.out is None:
        raise ConfigError("sweep requires --out directory")
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)

    omegas: list[float] = []
    for w in cfg.omega:
        if w in omegas:
            print(f"warning: duplicate omega {w:g} ignored", file=sys.stderr)
        else:
            omegas.append(w)

    jobs = []
    for w in omegas:
        csv_path = outdir / f"omega_{w:g}.csv"
        jobs.append((dataclasses.asdict(cfg), w, str(csv_path)))

    results: dict[float, tuple[str, str | None]] = {}
    max_workers = min(len(jobs), args.workers)
    if max_workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=max_workers) as pool:
            for omega, status, error in pool.map(_sweep_point, jobs):
                results[omega] = (status, error)
    else:
        for job in jobs:
            omega, status, error = _sweep_point(job)
            results[omega] = (status, error)

    points = []
    for w in omegas:
        status, error = results[w]
        points.append(
            {
                "omega": w,
                "alpha": cfg.alpha_for(w),
                "csv": f"omega_{w:g}.csv",
                "status": status,
                "error": error,
            }
        )
    manifest = {
        "variant": cfg.variant,
        "gamma_flip": cfg.gamma_flip,
        "stark_compensated": cfg.stark_compensated,
        "t_max": cfg.t_max,
        "initial_state": cfg.initial_state,
        "points": points,
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    failures = [p for p in points if p["status"] != "ok"]
    for p in failures:
        print(f"omega={p['omega']:g} failed: {p['error']}", file=sys.stderr)
    return EXIT_INTEGRATION if failures else EXIT_OK


def _cmd_verify(_args: argparse.Namespace) -> int:
    results = verify.run_checks()
    width = max(len(r.name) for r in results)
    ok = True
    for r in results:
        mark = "ok" if r.passed else "FAIL"
        print(f"[{mark:>4}] {r.name:<{width}}  {r.detail}")
        ok = ok and r.passed
    print(f"{sum(r.passed for r in results)}/{len(results)} checks passed")
    return EXIT_OK if ok else 1


def _cmd_stark_table(args: argparse.Namespace) -> int:
    omega = args.omega_value
    params = network.MemoryParams(omega=omega, alpha=omega / 8, gamma_flip=0.1)
    rows = network.stark_shift_table(params)
    print(f"Per-qubit level shifts for correctly tracked states (omega = {omega:g})")
    print("Q1,Q2,Q3 | R1 R2 | SS1 SS2 SS3")
    for row in rows:
        shifts = " ".join(f"{s:g}" for s in row.shifts)
        print(f"{','.join(row.qubits)}    | {row.relays[0]}  {row.relays[1]}  | {shifts}")
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--omega", dest="omega", type=_parse_omega_list, metavar="W[,W...]",
                   help="feedback parameter(s)")
    p.add_argument("--alpha", type=float, help="probe amplitude (default omega/8)")
    p.add_argument("--gamma", dest="gamma_flip", type=float,
                   help="qubit flip rate (default 0.1)")
    p.add_argument("--variant", choices=("bitflip", "phaseflip"))
    p.add_argument("--compensated", dest="stark_compensated",
                   action="store_const", const=True,
                   help="drop the drive-induced level shifts")
    p.add_argument("--initial", dest="initial_state", metavar="STATE",
                   help='"codeword" (default) or a three-letter g/h string')
    p.add_argument("--tmax", dest="t_max", type=float, help="integration horizon")
    p.add_argument("--method", choices=("adaptive", "fixed"))
    p.add_argument("--dt", type=float, help="fixed-method step size")
    p.add_argument("--rtol", type=float, help="adaptive relative tolerance")
    p.add_argument("--atol", type=float, help="adaptive absolute tolerance")
    p.add_argument("--samples", dest="n_samples", type=int, help="output rows (default 200)")
    p.add_argument("--out", help="output CSV file (simulate) or directory (sweep)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autoqec",
        description="Simulate an autonomous error-correcting memory cell",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="integrate one run to CSV")
    _add_run_flags(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run several omegas concurrently")
    _add_run_flags(p_sweep)
    p_sweep.add_argument("--workers", type=int, default=4,
                         help="max concurrent points (default 4)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the self-verification battery")
    p_verify.set_defaults(func=_cmd_verify)

    p_table = sub.add_parser("stark-table", help="print the level-shift table")
    p_table.add_argument("--omega", dest="omega_value", type=float, default=1.0)
    p_table.set_defaults(func=_cmd_stark_table)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
