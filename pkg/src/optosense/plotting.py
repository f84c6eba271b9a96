"""Render figures straight to image files (no pyplot state involved)."""

from __future__ import annotations

import numpy as np
from matplotlib.figure import Figure

from .output import _LABELS, _sweep_axis_label, phi_label
from .spectra import SQL


def _save(fig, path):
    fig.tight_layout()
    try:
        fig.savefig(path, dpi=150)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror or exc}") from exc


def _positive(y):
    y = np.asarray(y, dtype=float)
    return np.where(np.isfinite(y) & (y > 0), y, np.nan)


def render_spectra(series_list, path, quantity="n_add", labels=None):
    """One curve per series against omega/omega_m; SQL line for added noise."""
    if not series_list or any(len(s) == 0 for s in series_list):
        raise ValueError("nothing to plot: empty series")
    if labels is None:
        labels = [phi_label(s.params.phi) for s in series_list]
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    log = quantity in ("n_add", "r_m", "s_th", "s_total")
    for s, label in zip(series_list, labels):
        y = s.column(quantity)
        ax.plot(s.omega, _positive(y) if log else y, label=label, lw=1.0)
    if quantity == "n_add":
        ax.axhline(SQL, color="k", ls="--", lw=0.8, label="SQL")
    if log:
        ax.set_yscale("log")
    ax.set_xlabel(r"$\omega/\omega_m$")
    ax.set_ylabel(_LABELS[quantity])
    ax.legend(fontsize=8)
    _save(fig, path)
    return fig


def render_sweep(result, path, quantity="n_add"):
    if not result.values:
        raise ValueError("nothing to plot: empty sweep")
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    y = getattr(result, quantity)
    ax.plot(result.values, y, "o-", ms=3, lw=1.0)
    if quantity == "n_add":
        ax.axhline(SQL, color="k", ls="--", lw=0.8, label="SQL")
        ax.legend(fontsize=8)
    ax.set_xlabel(_sweep_axis_label(result.name))
    ax.set_ylabel(_LABELS.get(quantity, quantity) + r" at $\omega_{\rm eff}$")
    _save(fig, path)
    return fig


def render_modes(rows, path, g_lin):
    """|G~+| and |G~-| against phi, in units of G."""
    if not rows:
        raise ValueError("nothing to plot: no modes")
    phi = np.array([r[0] for r in rows])
    gp = np.array([abs(r[1].g_plus) for r in rows])
    gm = np.array([abs(r[1].g_minus) for r in rows])
    scale = g_lin if g_lin > 0 else 1.0
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    ax.plot(phi / np.pi, gp / scale, label=r"$|\tilde G_+|/G$")
    ax.plot(phi / np.pi, gm / scale, label=r"$|\tilde G_-|/G$")
    ax.set_xlabel(r"$\phi/\pi$")
    ax.set_ylabel("effective coupling")
    ax.legend(fontsize=8)
    _save(fig, path)
    return fig
