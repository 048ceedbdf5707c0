"""Config-driven command-line frontend.

Commands::

    weyl-lab spectrum     --config cfg.json --out dir [--seed N]
    weyl-lab verify       --config cfg.json --out dir [--seed N] [--oracle dirichlet-interval]
    weyl-lab symbol-audit --config cfg.json --out dir

Every command validates the whole configuration before any computation
starts. Exit codes: 0 success, 2 validation error, 3 solver failure,
4 checks failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import analysis, plots
from .geometry import Box, DegenerateDomainError, DomainError, DomainSet, domain_from_config
from .quadrature import MonteCarloEstimate
from .spectral import (ConvergenceError, GridOperator, Spectrum, build_operator,
                       dirichlet_interval_spectrum, lowest_eigenvalues)
from .symbols import (Symbol, SymbolError, check_assumption_one, check_assumption_two,
                      phase_volume, principal_part, symbol_from_config)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_CHECKS = 4


class ConfigError(ValueError):
    """Configuration rejected before any computation."""


# --------------------------------------------------------------------------
# configuration validation
# --------------------------------------------------------------------------

def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            cfg = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    _require(isinstance(cfg, dict), "config document must be a JSON object")
    version = cfg.get("schema_version", SCHEMA_VERSION)
    _require(version == SCHEMA_VERSION, f"unsupported schema_version {version!r}")
    return cfg


def validate_config(cfg: dict, need_solver: bool = True) -> tuple[Symbol, DomainSet | None]:
    """Cross-validate all sections; returns the parsed symbol and domain."""
    try:
        symbol = symbol_from_config(cfg.get("symbol"))
    except SymbolError as exc:
        raise ConfigError(f"symbol: {exc}")
    domain = None
    if "domain" in cfg or need_solver:
        try:
            domain = domain_from_config(cfg.get("domain"))
        except (DomainError, KeyError, TypeError) as exc:
            raise ConfigError(f"domain: {exc}")
        _require(domain.d == symbol.d,
                 f"domain dimension {domain.d} != symbol dimension {symbol.d}")
    if need_solver:
        grid = cfg.get("grid")
        _require(isinstance(grid, dict), "grid section missing")
        n = grid.get("n")
        _require(isinstance(n, int) and n >= 2 and (n & (n - 1)) == 0,
                 f"grid.n must be a power of two >= 2, got {n!r}")
        pad = grid.get("pad", 0.5)
        _require(isinstance(pad, (int, float)) and pad >= 0,
                 f"grid.pad must be nonnegative, got {pad!r}")
        solver = cfg.get("solver")
        _require(isinstance(solver, dict), "solver section missing")
        count = solver.get("count")
        _require(isinstance(count, int) and count >= 1,
                 f"solver.count must be a positive integer, got {count!r}")
        tol = solver.get("tol", 1e-8)
        _require(isinstance(tol, (int, float)) and tol > 0,
                 f"solver.tol must be positive, got {tol!r}")
        _validate_analysis(cfg.get("analysis", {}))
    seed = cfg.get("seed", 0)
    _require(isinstance(seed, int) and seed >= 0, f"seed must be a nonnegative integer, got {seed!r}")
    return symbol, domain


def _validate_analysis(section) -> None:
    _require(isinstance(section, dict), "analysis section must be an object")
    lam = section.get("lambda_grid", {"rule": "auto"})
    _require(isinstance(lam, dict), "analysis.lambda_grid must be an object")
    rule = lam.get("rule", "auto")
    if rule in ("log", "linear"):
        for key in ("min", "max"):
            _require(isinstance(lam.get(key), (int, float)) and lam[key] > 0,
                     f"lambda_grid.{key} must be positive for rule {rule!r}")
        _require(lam["min"] < lam["max"], "lambda_grid needs min < max")
    else:
        _require(rule == "auto", f"unknown lambda_grid rule {rule!r}")
    points = lam.get("points", 64)
    _require(isinstance(points, int) and points >= 2,
             f"lambda_grid.points must be an integer >= 2, got {points!r}")
    m = section.get("m_grid", {"rule": "all"})
    _require(isinstance(m, dict), "analysis.m_grid must be an object")
    m_rule = m.get("rule", "all")
    if m_rule == "list":
        values = m.get("values")
        _require(isinstance(values, list) and values
                 and all(isinstance(v, int) and v >= 1 for v in values),
                 "m_grid.values must be a nonempty list of positive integers")
    else:
        _require(m_rule == "all", f"unknown m_grid rule {m_rule!r}")


def _resolve_lambda_grid(section: dict, spectrum: Spectrum) -> np.ndarray:
    lam = section.get("lambda_grid", {"rule": "auto"})
    rule = lam.get("rule", "auto")
    points = lam.get("points", 64)
    if rule == "auto":
        ev = spectrum.eigenvalues
        lo = float(ev[0]) * 1.02
        hi = min(float(ev[-1]), spectrum.reliability_cutoff)
        if hi <= lo:
            hi = float(ev[-1])
            lo = float(ev[0])
        return np.geomspace(max(lo, 1e-12), hi, points)
    if rule == "log":
        return np.geomspace(lam["min"], lam["max"], points)
    return np.linspace(lam["min"], lam["max"], points)


def _resolve_m_grid(section: dict, spectrum: Spectrum) -> np.ndarray | None:
    m = section.get("m_grid", {"rule": "all"})
    if m.get("rule", "all") == "all":
        return None
    return np.asarray(m["values"], dtype=int)


# --------------------------------------------------------------------------
# output helpers
# --------------------------------------------------------------------------

def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _write_json(path: Path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True,
                               default=_json_default) + "\n", encoding="utf-8")


def _format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_spectrum_csv(path: Path, spectrum: Spectrum) -> None:
    lines = ["k,lambda,residual,trusted"]
    trusted = spectrum.trusted
    for i, (lam, res) in enumerate(zip(spectrum.eigenvalues, spectrum.residuals)):
        lines.append(f"{i + 1},{_format_float(lam)},{_format_float(res)},{int(trusted[i])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_spectrum_csv(path: Path) -> Spectrum:
    """Load a spectrum written by ``write_spectrum_csv``; the JSON sidecar
    (same stem) restores the metadata and reliability cutoff."""
    rows = path.read_text(encoding="utf-8").strip().splitlines()
    if not rows or rows[0] != "k,lambda,residual,trusted":
        raise ConfigError(f"{path} is not a spectrum CSV")
    lam, res = [], []
    for row in rows[1:]:
        fields = row.split(",")
        lam.append(float(fields[1]))
        res.append(float(fields[2]))
    sidecar = path.with_suffix(".json")
    cutoff = np.inf
    shift = 0.0
    metadata = {"solver": "loaded"}
    if sidecar.exists():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        cutoff = meta.get("reliability_cutoff", np.inf)
        shift = meta.get("sigma", 0.0)
        metadata.update(meta)
    return Spectrum(eigenvalues=np.asarray(lam), residuals=np.asarray(res),
                    reliability_cutoff=cutoff, shift=shift, metadata=metadata)


def _spectrum_metadata(cfg: dict, op: GridOperator, spectrum: Spectrum,
                       status: str) -> dict:
    return {
        "status": status,
        "symbol": cfg["symbol"],
        "domain": cfg["domain"],
        "n": op.grid.n,
        "L": op.grid.side,
        "pad": cfg["grid"].get("pad", 0.5),
        "sigma": op.shift,
        "tol": cfg["solver"].get("tol", 1e-8),
        "T_max": op.grid.t_max,
        "reliability_cutoff": op.reliability_cutoff,
        "seed": cfg.get("seed", 0),
        "solver": spectrum.metadata if spectrum is not None else None,
    }


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _compute_spectrum(cfg: dict, symbol: Symbol, domain: DomainSet,
                      seed: int) -> tuple[GridOperator, Spectrum]:
    op = build_operator(symbol, domain, cfg["grid"]["n"], cfg["grid"].get("pad", 0.5))
    spectrum = lowest_eigenvalues(op, cfg["solver"]["count"],
                                  tol=cfg["solver"].get("tol", 1e-8), seed=seed)
    return op, spectrum


def cmd_spectrum(cfg: dict, out_dir: Path, seed: int | None = None) -> int:
    symbol, domain = validate_config(cfg)
    if seed is not None:
        cfg = {**cfg, "seed": seed}
    run_seed = cfg.get("seed", 0)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        op, spectrum = _compute_spectrum(cfg, symbol, domain, run_seed)
    except DegenerateDomainError as exc:
        raise ConfigError(f"domain: {exc}")
    except ConvergenceError as exc:
        _write_failed_spectrum(cfg, out_dir, exc)
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    write_spectrum_csv(out_dir / "spectrum.csv", spectrum)
    _write_json(out_dir / "spectrum.json",
                _spectrum_metadata(cfg, op, spectrum, "ok"))
    lam_grid = _resolve_lambda_grid(cfg.get("analysis", {}), spectrum)
    vt = _phase_volume_for(symbol)
    vol = analysis.domain_volume(domain, seed=run_seed)
    weyl_values = [analysis.weyl_term(symbol, domain, lam, volume_value=vol,
                                      phase_volume_value=vt) for lam in lam_grid]
    plots.save_staircase(spectrum, out_dir / "staircase.svg",
                         weyl_curve=(lam_grid, weyl_values))
    return EXIT_OK


def _write_failed_spectrum(cfg: dict, out_dir: Path, exc: ConvergenceError) -> None:
    payload = {
        "status": "failed", "error": str(exc), "symbol": cfg["symbol"],
        "domain": cfg["domain"], "n": cfg["grid"]["n"],
        "seed": cfg.get("seed", 0),
    }
    _write_json(out_dir / "spectrum.json", payload)
    if exc.eigenvalues is not None:
        partial = Spectrum(eigenvalues=np.sort(np.asarray(exc.eigenvalues)),
                           residuals=np.asarray(exc.residuals),
                           reliability_cutoff=np.inf, shift=0.0,
                           metadata={"solver": "failed"})
        write_spectrum_csv(out_dir / "spectrum.csv", partial)


def _phase_volume_for(symbol: Symbol) -> float:
    principal = principal_part(symbol)
    result = phase_volume(principal, "auto")
    return result.value if isinstance(result, MonteCarloEstimate) else result


def cmd_verify(cfg: dict, out_dir: Path, seed: int | None = None,
               oracle: str | None = None) -> int:
    need_solver = oracle is None and "spectrum_csv" not in cfg
    symbol, domain = validate_config(cfg, need_solver=True)
    if seed is not None:
        cfg = {**cfg, "seed": seed}
    run_seed = cfg.get("seed", 0)
    out_dir.mkdir(parents=True, exist_ok=True)

    slack = 0.02
    if oracle is not None:
        _require(oracle == "dirichlet-interval", f"unknown oracle {oracle!r}")
        _require(isinstance(domain, Box) and domain.d == 1,
                 "the dirichlet-interval oracle needs a one-dimensional box domain")
        _require(symbol.kind == "power" and symbol.s == 1.0,
                 "the dirichlet-interval oracle is the quadratic symbol's spectrum")
        length = domain.hi[0] - domain.lo[0]
        spectrum = dirichlet_interval_spectrum(cfg["solver"]["count"], length)
        slack = 0.0
    elif "spectrum_csv" in cfg:
        spectrum = read_spectrum_csv(Path(cfg["spectrum_csv"]))
    else:
        try:
            _, spectrum = _compute_spectrum(cfg, symbol, domain, run_seed)
        except DegenerateDomainError as exc:
            raise ConfigError(f"domain: {exc}")
        except ConvergenceError as exc:
            print(f"solver failed: {exc}", file=sys.stderr)
            return EXIT_SOLVER

    lam_grid = _resolve_lambda_grid(cfg.get("analysis", {}), spectrum)
    m_grid = _resolve_m_grid(cfg.get("analysis", {}), spectrum)
    report = analysis.bound_report(spectrum, symbol, domain, lam_grid,
                                   m_grid=m_grid, slack=slack, seed=run_seed)
    _write_json(out_dir / "bounds.json", report.to_dict())

    data = analysis.counting_data(spectrum, lam_grid)
    fit_error = None
    try:
        fit = analysis.weyl_fit(data, symbol, domain)
        _write_json(out_dir / "weyl_fit.json", fit.to_dict())
    except ValueError as exc:
        fit_error = str(exc)
        _write_json(out_dir / "weyl_fit.json", {"status": "failed", "error": fit_error})

    plots.save_riesz_versus_bound(data, report.berezin["bound"],
                                  out_dir / "berezin.svg")
    plots.save_weyl_ratio(data, report.weyl["weyl_term"], out_dir / "weyl_ratio.svg")

    if fit_error is not None:
        print(f"counting-function fit unavailable: {fit_error}", file=sys.stderr)
        return EXIT_CHECKS
    if not all(report.passed.values()):
        failing = [k for k, v in report.passed.items() if not v]
        print(f"bound checks failed: {', '.join(failing)}", file=sys.stderr)
        return EXIT_CHECKS
    return EXIT_OK


def cmd_symbol_audit(cfg: dict, out_dir: Path, seed: int | None = None) -> int:
    symbol, _ = validate_config(cfg, need_solver=False)
    out_dir.mkdir(parents=True, exist_ok=True)
    audit = cfg.get("audit", {})
    tolerance = audit.get("tolerance", 1e-2)
    _require(isinstance(tolerance, (int, float)) and tolerance > 0,
             f"audit.tolerance must be positive, got {tolerance!r}")

    cert_one = check_assumption_one(symbol, tolerance=tolerance)
    cert_two = check_assumption_two(symbol)

    principal = principal_part(symbol)
    volume_check = None
    if principal.closed_form_kind is not None:
        closed = phase_volume(principal, "closed_form")
        if symbol.d <= 2:
            numeric = phase_volume(principal, "tensor_quadrature")
            method = "tensor_quadrature"
        else:
            est = phase_volume(principal, "monte_carlo", seed=cfg.get("seed", 0))
            numeric, method = est.value, "monte_carlo"
        rel = abs(numeric - closed) / closed
        volume_check = {"closed_form": closed, "numeric": numeric,
                        "method": method, "rel_error": rel,
                        "passed": bool(rel <= (1e-3 if method == "tensor_quadrature" else 0.05))}

    passed = bool(cert_one.passed and cert_two.passed
                  and (volume_check is None or volume_check["passed"]))
    _write_json(out_dir / "certificates.json", {
        "symbol": cfg["symbol"],
        "assumption_one": cert_one.to_dict(),
        "assumption_two": cert_two.to_dict(),
        "phase_volume_check": volume_check,
        "passed": passed,
    })
    return EXIT_OK if passed else EXIT_CHECKS


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weyl-lab",
        description="Spectra and spectral bounds of masked Fourier-multiplier operators")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("spectrum", "compute the lowest eigenvalues"),
                            ("verify", "evaluate bound and counting reports"),
                            ("symbol-audit", "check symbol assumptions")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="path to the JSON run config")
        cmd.add_argument("--out", required=True, help="output directory")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name == "verify":
            cmd.add_argument("--oracle", choices=["dirichlet-interval"], default=None,
                             help="inject the analytic interval spectrum instead of solving")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out)
    try:
        cfg = load_config(args.config)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, out_dir, seed=args.seed)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir, seed=args.seed, oracle=args.oracle)
        return cmd_symbol_audit(cfg, out_dir, seed=args.seed)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
