"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (the
solve is singular at every grid point), 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import output, plotting
from .closed_form import validate_against_numeric
from .config import ConfigError, parse_config
from .model import InvalidParameterError, drift_matrix, hybrid_modes, stability_check
from .sweeps import (FrequencyGrid, bandwidth_metric, find_effective_frequencies,
                     frequency_sweep, parameter_sweep)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class NumericalFailure(RuntimeError):
    pass


def _parse_grid(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError("--grid expects start,stop,points", "grid")
    try:
        start, stop = float(parts[0]), float(parts[1])
        points = int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}", "grid") from None
    try:
        return FrequencyGrid(start, stop, points)
    except ValueError as exc:
        raise ConfigError(str(exc), "grid") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value config file")
    common.add_argument("--out", metavar="PATH", help="write the main output here instead of stdout")
    common.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        dest="overrides", help="override a config key (repeatable)")
    common.add_argument("--grid", metavar="START,STOP,POINTS", help="frequency grid in units of omega_m")
    common.add_argument("--threads", type=int, default=1, metavar="N", help="worker threads for sweeps")
    common.add_argument("--figure", metavar="PATH", help="render a figure (png, pdf, svg) here")
    common.add_argument("--plot-script", metavar="PATH",
                        help="write a standalone matplotlib script that re-plots the CSV")

    parser = argparse.ArgumentParser(
        prog="optosense",
        description="Noise spectra of a cavity coupled to two phase-linked mechanical oscillators.")
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("spectrum", parents=[common], help="frequency sweep -> CSV")
    sp.add_argument("--quantity", help="quantity for figures/plot scripts (default n_add)")
    sp.add_argument("--overlay-phi", metavar="LIST",
                    help="comma-separated hopping phases to overlay (one CSV each)")
    sub.add_parser("modes", parents=[common], help="hybrid-mode table over phi in [0, 2pi]")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep at the effective frequency")
    sw.add_argument("--parameter", choices=("g_eff", "kappa", "v_hop", "phi"))
    sw.add_argument("--values", metavar="START,STOP,POINTS")
    va = sub.add_parser("validate", parents=[common], help="closed-form vs numeric coefficients")
    va.add_argument("--records", metavar="PATH", help="machine-readable CSV of per-variant results")
    sub.add_parser("stability", parents=[common], help="drift-matrix eigenvalues")
    return parser


def _load(args):
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise OSError(exc.errno, f"cannot read {args.config}: {exc.strerror or exc}") from exc
    overrides = list(args.overrides)
    if getattr(args, "quantity", None):
        overrides.append(f"analysis.quantity={args.quantity}")
    if getattr(args, "overlay_phi", None):
        overrides.append(f"analysis.overlay_phi={args.overlay_phi}")
    if getattr(args, "parameter", None):
        overrides.append(f"sweep.parameter={args.parameter}")
    if getattr(args, "values", None):
        parts = args.values.split(",")
        if len(parts) != 3:
            raise ConfigError("--values expects start,stop,points", "values")
        overrides += [f"sweep.start={parts[0]}", f"sweep.stop={parts[1]}", f"sweep.points={parts[2]}"]
    if getattr(args, "records", None):
        overrides.append(f"output.records={args.records}")
    cfg = parse_config(text, overrides)
    if args.grid:
        cfg.grid = _parse_grid(args.grid)
    if args.out:
        cfg.csv = args.out
    if args.figure:
        cfg.figure = args.figure
    if args.plot_script:
        cfg.plot_script = args.plot_script
    return cfg


def _emit(text, path):
    if path:
        output.write_text(path, text)
    else:
        sys.stdout.write(text)


def _note(msg):
    print(msg, file=sys.stderr)


def cmd_spectrum(cfg, args):
    series = frequency_sweep(cfg.params, cfg.grid, s_fex=cfg.s_fex, threads=args.threads)
    if len(series.singular) == len(series):
        raise NumericalFailure("susceptibility is singular at every grid point")
    _emit(output.emit_csv(series), cfg.csv)

    for w in series.warnings:
        _note(f"warning: {w}")
    minima = find_effective_frequencies(series)
    _note("effective frequencies: " + (", ".join(
        f"{e.omega_eff:.6f} (N_add={e.value:.4g})" for e in minima) or "none"))
    intervals = bandwidth_metric(series, cfg.threshold)
    _note(f"sub-threshold intervals (N_add < {cfg.threshold:g}): " + (", ".join(
        f"[{a:.6f}, {b:.6f}]" for a, b in intervals) or "none"))

    all_series, csv_paths = [series], [cfg.csv]
    if cfg.overlay_phi:
        if not cfg.csv:
            raise ConfigError("--overlay-phi needs --out to name the per-phase CSV files", "overlay_phi")
        stem = Path(cfg.csv)
        for k, phi in enumerate(cfg.overlay_phi):
            s = frequency_sweep(cfg.params.replace(phi=phi), cfg.grid, s_fex=cfg.s_fex,
                                threads=args.threads)
            path = stem.with_name(f"{stem.stem}.phi{k}{stem.suffix or '.csv'}")
            output.write_text(path, output.emit_csv(s))
            all_series.append(s)
            csv_paths.append(str(path))
    if cfg.figure:
        plotting.render_spectra(all_series, cfg.figure, cfg.quantity)
    if cfg.plot_script:
        if not cfg.csv:
            raise ConfigError("a plot script references the CSV file, so --out is required", "plot_script")
        output.write_text(cfg.plot_script, output.emit_plot_script(
            all_series, csv_paths, cfg.quantity, figure_path=cfg.figure))


def modes_table(params, points):
    return [(float(phi), hybrid_modes(params.replace(phi=float(phi))))
            for phi in np.linspace(0.0, 2.0 * math.pi, points)]


def cmd_modes(cfg, args):
    rows = modes_table(cfg.params, cfg.modes_points)
    _emit(output.emit_modes_csv(rows), cfg.csv)
    if cfg.figure:
        plotting.render_modes(rows, cfg.figure, cfg.params.g_lin)


def cmd_sweep(cfg, args):
    if cfg.sweep_parameter is None or cfg.sweep_values is None:
        raise ConfigError("sweep needs a parameter and values ([sweep] section, --parameter/--values)",
                          "parameter")
    result = parameter_sweep(cfg.params, cfg.sweep_parameter, cfg.sweep_values, cfg.grid,
                             threads=args.threads)
    _emit(output.emit_sweep_csv(result), cfg.csv)
    if all(math.isnan(x) for x in result.n_add):
        _note("warning: no effective frequency found for any sweep value")
    else:
        i = result.argmin()
        _note(f"minimum N_add = {result.n_add[i]:.4g} at {result.name} = {result.values[i]!r} "
              f"(omega_eff = {result.omega_eff[i]:.6f}, branch {result.branch[i]})")
    if cfg.figure:
        plotting.render_sweep(result, cfg.figure)
    if cfg.plot_script:
        if not cfg.csv:
            raise ConfigError("a plot script references the CSV file, so --out is required", "plot_script")
        output.write_text(cfg.plot_script, output.emit_plot_script(
            result, cfg.csv, "n_add", figure_path=cfg.figure))


def validation_grid(cfg, args):
    if args.grid:
        return cfg.grid
    return FrequencyGrid(cfg.grid.start, cfg.grid.stop, cfg.validate_points)


def cmd_validate(cfg, args):
    grid = validation_grid(cfg, args)
    report = validate_against_numeric(cfg.params, grid.omegas(), cfg.variants)
    if len(report.singular) == len(report.grid):
        raise NumericalFailure("every grid point is singular")
    _emit(report.summary(), cfg.csv)
    if cfg.records:
        output.write_text(cfg.records, report.records_csv())


def cmd_stability(cfg, args):
    _emit(output.stability_text(stability_check(drift_matrix(cfg.params))), cfg.csv)


COMMANDS = {
    "spectrum": cmd_spectrum,
    "modes": cmd_modes,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "stability": cmd_stability,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        cfg = _load(args)
        COMMANDS[args.command](cfg, args)
    except (ConfigError, InvalidParameterError) as exc:
        _note(f"config error: {exc}")
        return EXIT_CONFIG
    except NumericalFailure as exc:
        _note(f"numerical failure: {exc}")
        return EXIT_NUMERIC
    except OSError as exc:
        _note(f"I/O error: {exc}")
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
