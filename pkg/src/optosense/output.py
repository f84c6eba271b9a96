"""Serialization of spectra, sweeps and reports, plus standalone plot scripts."""

from __future__ import annotations

import csv
import io
import math
import os
from pathlib import Path

from .model import StabilityReport
from .spectra import SpectrumSample
from .sweeps import SpectrumSeries, SweepResult

SPECTRUM_COLUMNS = ("omega", "r_m", "s_th", "n_add", "s_total", "sql_margin")


def fmt(x) -> str:
    """Shortest repr that round-trips a float; infinities as ``inf``/``-inf``."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _write_rows(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_csv(series: SpectrumSeries) -> str:
    return _write_rows(SPECTRUM_COLUMNS,
                       ([fmt(getattr(s, c)) for c in SPECTRUM_COLUMNS] for s in series.samples))


def parse_csv(text: str) -> list:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != SPECTRUM_COLUMNS:
        raise ValueError(f"expected header {','.join(SPECTRUM_COLUMNS)}, got {header!r}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(SPECTRUM_COLUMNS):
            raise ValueError(f"line {lineno}: expected {len(SPECTRUM_COLUMNS)} fields, got {len(row)}")
        out.append(SpectrumSample(*(float(x) for x in row)))
    return out


def emit_sweep_csv(result: SweepResult) -> str:
    header = (result.name, "omega_eff", "n_add", "r_m", "branch")
    rows = ([fmt(v), fmt(w), fmt(n), fmt(r), b]
            for v, w, n, r, b in zip(result.values, result.omega_eff, result.n_add,
                                     result.r_m, result.branch))
    return _write_rows(header, rows)


MODES_COLUMNS = ("phi", "g_plus_re", "g_plus_im", "g_minus_re", "g_minus_im",
                 "abs_g_plus", "abs_g_minus", "omega_plus", "omega_minus", "dark_label")


def emit_modes_csv(rows) -> str:
    """``rows`` is a sequence of ``(phi, HybridModes)``."""
    return _write_rows(MODES_COLUMNS, (
        [fmt(phi), fmt(m.g_plus.real), fmt(m.g_plus.imag), fmt(m.g_minus.real),
         fmt(m.g_minus.imag), fmt(abs(m.g_plus)), fmt(abs(m.g_minus)),
         fmt(m.omega_plus), fmt(m.omega_minus), m.dark_label]
        for phi, m in rows))


def stability_text(report: StabilityReport) -> str:
    lines = [f"stable = {'true' if report.stable else 'false'}",
             f"margin = {fmt(report.margin)}",
             "eigenvalues (real, imag):"]
    lines += [f"  {fmt(z.real)}, {fmt(z.imag)}" for z in report.eigenvalues]
    return "\n".join(lines) + "\n"


def write_text(path, text: str) -> None:
    """Write ``text`` to ``path``; failures are re-raised naming the path."""
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror or exc}") from exc


_LABELS = {
    "n_add": r"$N_{\rm add}$",
    "r_m": r"$R_m$",
    "s_th": r"$S_{\rm th}$",
    "s_total": r"$S$",
    "sql_margin": r"$0.5 - N_{\rm add}$",
}

_SCRIPT = '''\
"""Plot {what} from {sources}."""
import csv

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CURVES = {curves!r}
X_COLUMN = {x_column!r}
Y_COLUMN = {y_column!r}


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r[X_COLUMN]) for r in rows], [float(r[Y_COLUMN]) for r in rows]


fig, ax = plt.subplots(figsize=(6, 4))
for label, path in CURVES:
    x, y = read(path)
    ax.plot(x, y, label=label)
{sql_line}ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
ax.set_yscale({yscale!r})
{legend}fig.tight_layout()
fig.savefig({figure!r}, dpi=150)
'''


def emit_plot_script(data, csv_paths, quantity: str = "n_add", labels=None,
                     figure_path=None) -> str:
    """Self-contained matplotlib script that re-plots the given CSV file(s).

    ``data`` is a :class:`SpectrumSeries`, a list of them (overlay, one CSV
    each) or a :class:`SweepResult`.  Frequency axes are in units of the
    mechanical frequency; added-noise plots carry the SQL line at 0.5.
    """
    if isinstance(csv_paths, (str, os.PathLike)):
        csv_paths = [csv_paths]
    csv_paths = [str(p) for p in csv_paths]

    if isinstance(data, SweepResult):
        if not data.values:
            raise ValueError("nothing to plot: empty sweep")
        if quantity not in ("n_add", "r_m", "omega_eff"):
            raise ValueError(f"cannot plot {quantity!r} from a sweep")
        x_column, xlabel = data.name, _sweep_axis_label(data.name)
        curves = [(labels[0] if labels else quantity, csv_paths[0])]
        what = f"{quantity} vs {data.name}"
    else:
        series_list = [data] if isinstance(data, SpectrumSeries) else list(data)
        if not series_list or any(len(s) == 0 for s in series_list):
            raise ValueError("nothing to plot: empty series")
        if len(csv_paths) != len(series_list):
            raise ValueError(f"{len(series_list)} series but {len(csv_paths)} CSV paths")
        if quantity not in _LABELS:
            raise ValueError(f"unknown quantity {quantity!r}")
        if labels is None:
            labels = [phi_label(s.params.phi) for s in series_list]
        curves = list(zip(labels, csv_paths))
        x_column, xlabel = "omega", r"$\omega/\omega_m$"
        what = f"{quantity} vs omega/omega_m"

    if figure_path is None:
        figure_path = str(Path(csv_paths[0]).with_suffix(".png"))
    sql = quantity == "n_add"
    return _SCRIPT.format(
        what=what,
        sources=", ".join(csv_paths),
        curves=curves,
        x_column=x_column,
        y_column=quantity,
        sql_line='ax.axhline(0.5, color="k", ls="--", lw=0.8, label="SQL")\n' if sql else "",
        xlabel=xlabel,
        ylabel=_LABELS.get(quantity, quantity),
        yscale="log" if quantity in ("n_add", "r_m", "s_th", "s_total") else "linear",
        legend="ax.legend()\n" if len(curves) > 1 or sql else "",
        figure=str(figure_path),
    )


def phi_label(phi: float) -> str:
    frac = phi / math.pi
    for num, den in ((0, 1), (1, 4), (1, 2), (3, 4), (1, 1), (5, 4), (3, 2), (7, 4)):
        if math.isclose(frac, num / den, abs_tol=1e-12):
            if num == 0:
                return r"$\phi = 0$"
            top = "" if num == 1 else str(num)
            return rf"$\phi = {top}\pi$" if den == 1 else rf"$\phi = {top}\pi/{den}$"
    return rf"$\phi = {frac:.3g}\pi$"


def _sweep_axis_label(name):
    return {"g_eff": r"$G'/\omega_m$", "kappa": r"$\kappa/\omega_m$",
            "v_hop": r"$V/\omega_m$", "phi": r"$\phi$"}.get(name, name)

