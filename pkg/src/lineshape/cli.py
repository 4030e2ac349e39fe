"""Command line front end.

Usage::

    lineshape spectrum    --config <file|preset> [--out PREFIX] [--threads N]
    lineshape field-sweep --config <file|preset> [--out PREFIX] [--threads N]
    lineshape compare     --config <file|preset> [--out PREFIX] [--threads N]
    lineshape validate    [--config <file|preset>] [--level quick|full] [--out PREFIX]

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import re
import sys
from dataclasses import replace
from pathlib import Path

from .bath import QuadratureError
from .config import (ConfigError, RunConfig, expand_family, override, parse_config,
                     preset_names)
from .kernel import KernelToggles
from .output import TableRef, emit_plots, write_table
from .susceptibility import (NumericalError, chi_sweep, default_threads, field_sweep,
                             peak_analysis, response_pair)
from .validate import report_to_json, run_validate

__all__ = ["main", "run_spectrum", "run_field_sweep", "run_compare", "run_validate"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3

#: Toggle combinations of the comparison mode, keyed by file-name suffix.
COMPARE_TOGGLES = (
    ("ic-on_fs-on", True, True),
    ("ic-off_fs-on", False, True),
    ("ic-on_fs-off", True, False),
    ("ic-off_fs-off", False, False),
)


def _threads(cfg: RunConfig) -> int:
    return cfg.threads or default_threads()


def _sweep(cfg: RunConfig):
    toggles = cfg.toggles
    pair = response_pair(cfg.pair, cfg.num_spins)
    grid = cfg.sweep.grid()
    if cfg.sweep.kind == "field":
        return field_sweep(cfg.sweep.omega_fixed, grid, cfg.system, cfg.coupling, cfg.bath,
                           pair, toggles, threads=_threads(cfg))
    return chi_sweep(grid, cfg.system, cfg.coupling, cfg.bath, pair, toggles,
                     threads=_threads(cfg), epsilon=cfg.epsilon)


def _safe(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._=+-]", "_", label)


def _table_path(prefix: str, *parts: str) -> Path:
    tail = "_".join(_safe(p) for p in parts if p)
    return Path(f"{prefix}_{tail}.csv" if tail else f"{prefix}.csv")


def _require_kind(cfg: RunConfig, kind: str, command: str):
    if cfg.sweep.kind != kind:
        raise ConfigError(f"sweep.kind = {cfg.sweep.kind} cannot be run with '{command}' "
                          f"(expected kind = {kind})")


def _run_family(cfg: RunConfig, prefix: str | None, variants) -> list[TableRef]:
    prefix = prefix or cfg.prefix
    tables = []
    for label, member in expand_family(cfg):
        for suffix, curve_cfg in variants(member):
            sweep = _sweep(curve_cfg)
            curve = " ".join(p for p in (label, suffix) if p)
            tables.append(write_table(_table_path(prefix, label, suffix), sweep, curve_cfg,
                                      curve or "default"))
    if cfg.plots:
        emit_plots(tables, Path(f"{prefix}.gp"), title=Path(prefix).name)
    return tables


def run_spectrum(cfg: RunConfig, prefix: str | None = None) -> list[TableRef]:
    """Frequency sweep for every family member; one table per curve."""
    _require_kind(cfg, "omega", "spectrum")
    return _run_family(cfg, prefix, lambda m: [("", m)])


def run_field_sweep(cfg: RunConfig, prefix: str | None = None) -> list[TableRef]:
    """Field sweep at fixed drive frequency; one table per curve."""
    _require_kind(cfg, "field", "field-sweep")
    return _run_family(cfg, prefix, lambda m: [("", m)])


def run_compare(cfg: RunConfig, prefix: str | None = None) -> list[TableRef]:
    """The four {initial correlation, frequency shift} x {on, off} curves.

    The kernel mode of the configuration is kept; in Born-Markov mode the
    initial correlation is always off, so two of the four curves coincide.
    """
    def variants(member):
        return [(suffix, override(member, {"response.frequency_shift": fs,
                                           "response.initial_correlation": ic}))
                for suffix, ic, fs in COMPARE_TOGGLES]
    return _run_family(cfg, prefix, variants)


def _summarise(tables, out):
    from .output import read_table
    from .susceptibility import SusceptibilitySweep

    for ref in tables:
        data = read_table(ref.path)
        sweep = SusceptibilitySweep(data["x"], data["re_chi"] + 1j * data["im_chi"],
                                    KernelToggles(), ref.kind)
        try:
            peaks = ", ".join(f"{p.position:.4f} (fwhm {p.fwhm:.4f})"
                              for p in peak_analysis(sweep))
        except ValueError:
            peaks = "none"
        print(f"{ref.path}: peaks at {peaks}", file=out)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lineshape",
        description="Spin line shapes from a second-order time-convolution master equation.",
        epilog=f"presets: {', '.join(preset_names())}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("spectrum", "susceptibility on a frequency grid"),
                       ("field-sweep", "susceptibility versus static field at fixed frequency"),
                       ("compare", "the four correction toggles side by side"),
                       ("validate", "run the oracle and invariant checks")):
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=name != "validate",
                         help="configuration file or preset name")
        cmd.add_argument("--out", help="output prefix (overrides [output] prefix)")
        cmd.add_argument("--threads", type=int, help="worker threads (default: all cores)")
        if name == "validate":
            cmd.add_argument("--level", choices=("quick", "full"), default="quick")
    return parser


def _validate(args, out) -> int:
    if args.config:
        parse_config(args.config)   # configuration errors still exit with code 1

    def progress(res):
        flag = "PASS" if res.passed else "FAIL"
        print(f"{flag} {res.name}: error {res.error:.3e} (tol {res.tolerance:.1e}) "
              f"{res.seconds:.1f}s  {res.detail}", file=out, flush=True)

    report = run_validate(args.level, progress)
    if args.out:
        path = Path(f"{args.out}_validate.json")
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report_to_json(report) + "\n")
        print(f"report written to {path}", file=out)
    print("validation " + ("passed" if report["passed"] else "FAILED"), file=out)
    return EXIT_OK if report["passed"] else EXIT_VALIDATION


def main(argv=None) -> int:
    """Entry point of the ``lineshape`` console script; returns the exit code."""
    args = _parser().parse_args(argv)
    out, err = sys.stdout, sys.stderr
    try:
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        if args.command == "validate":
            return _validate(args, out)
        cfg = parse_config(args.config)
        if args.threads is not None:
            cfg = replace(cfg, threads=args.threads)
        runner = {"spectrum": run_spectrum, "field-sweep": run_field_sweep,
                  "compare": run_compare}[args.command]
        tables = runner(cfg, args.out)
        _summarise(tables, out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=err)
        return EXIT_CONFIG
    except (NumericalError, QuadratureError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=err)
        return EXIT_NUMERICAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
