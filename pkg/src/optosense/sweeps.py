"""Frequency and parameter sweeps, effective-frequency search, bandwidth."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import SystemParams, drift_matrix, hybrid_modes, stability_check
from .spectra import (SpectrumSample, SingularSolveError, _check_s_fex, _sample,
                      added_noise, output_coefficients)

SWEEPABLE = ("g_eff", "kappa", "v_hop", "phi")


@dataclass(frozen=True)
class FrequencyGrid:
    start: float = 0.95
    stop: float = 1.05
    points: int = 501

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValueError("grid bounds must be finite")
        if not self.start < self.stop:
            raise ValueError(f"grid start {self.start!r} must be below stop {self.stop!r}")
        if isinstance(self.points, bool) or int(self.points) != self.points or self.points < 2:
            raise ValueError(f"grid needs an integer number of points >= 2, got {self.points!r}")
        object.__setattr__(self, "points", int(self.points))

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.points - 1)

    def omegas(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class SpectrumSeries:
    params: SystemParams
    samples: list
    stable: bool
    singular: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    @property
    def omega(self) -> np.ndarray:
        return self.column("omega")

    @property
    def n_add(self) -> np.ndarray:
        return self.column("n_add")

    @property
    def r_m(self) -> np.ndarray:
        return self.column("r_m")

    @property
    def s_th(self) -> np.ndarray:
        return self.column("s_th")

    def __len__(self):
        return len(self.samples)


def _nan_sample(omega):
    nan = float("nan")
    return SpectrumSample(float(omega), nan, nan, nan, nan, nan)


def _evaluate(params, omega, s_fex):
    try:
        return _sample(output_coefficients(params, omega), params.n_bar, s_fex)
    except SingularSolveError:
        return None


def frequency_sweep(params: SystemParams, grid: FrequencyGrid = FrequencyGrid(),
                    s_fex: float = 0.0, threads: int = 1) -> SpectrumSeries:
    """One spectrum sample per grid point.

    Singular points are kept as all-NaN rows and listed in ``singular``; an
    unstable drift matrix is reported through ``stable`` and ``warnings``.
    """
    _check_s_fex(s_fex)
    omegas = [float(w) for w in grid.omegas()]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(lambda w: _evaluate(params, w, s_fex), omegas))
    else:
        out = [_evaluate(params, w, s_fex) for w in omegas]

    samples, singular = [], []
    for w, s in zip(omegas, out):
        if s is None:
            singular.append(w)
            s = _nan_sample(w)
        samples.append(s)
    report = stability_check(drift_matrix(params))
    notes = []
    if not report.stable:
        notes.append(f"unstable drift matrix (max eigenvalue real part {report.margin!r}); "
                     "stationary spectra are not physical")
    return SpectrumSeries(params, samples, report.stable, singular, notes)


@dataclass(frozen=True)
class RefinedExtremum:
    omega_eff: float
    value: float
    kind: str
    refinement: float
    index: int


def _parabola_offset(y0, y1, y2, h):
    den = y0 - 2.0 * y1 + y2
    if den == 0 or not math.isfinite(den):
        return 0.0
    off = 0.5 * h * (y0 - y2) / den
    # vertex of a strict extremum lies within half a step of the middle point
    return min(max(off, -0.5 * h), 0.5 * h)


def refine_extrema(omega, y, sign=+1):
    """Strict local extrema of sampled data with 3-point parabolic refinement.

    ``sign=+1`` finds minima, ``-1`` maxima.  Non-finite samples never take
    part; of two equal neighbouring samples the lower-omega one is kept.
    Returns ``(omega_refined, offset, index)`` tuples in grid order.
    """
    omega = np.asarray(omega, dtype=float)
    y = np.asarray(y, dtype=float)
    out = []
    for i in range(1, len(y) - 1):
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        if not (math.isfinite(y0) and math.isfinite(y1) and math.isfinite(y2)):
            continue
        if not (sign * y1 < sign * y0 and sign * y1 <= sign * y2):
            continue
        h = omega[i + 1] - omega[i]
        off = _parabola_offset(y0, y1, y2, h)
        out.append((float(omega[i] + off), off, i))
    return out


def _extrema(series, y, kind, sign):
    params = series.params

    def value_at(w):
        c = output_coefficients(params, w)
        return added_noise(c) if kind == "n_add-minimum" else abs(c.a3 + c.a4) ** 2

    omega = series.omega
    out = []
    for w, off, i in refine_extrema(omega, y, sign):
        value = value_at(w)
        # dips narrower than the grid step are not locally quadratic on it
        if off != 0.0 and not sign * value <= sign * y[i]:
            off, w = 0.0, float(omega[i])
            value = value_at(w)
        out.append(RefinedExtremum(w, value, kind, off, i))
    out.sort(key=lambda e: (e.omega_eff, e.index))
    return out


def find_effective_frequencies(series: SpectrumSeries) -> list:
    """Strict local minima of the added noise, refined by a 3-point parabola.

    The reported value is the added noise re-evaluated at the refined frequency.
    """
    if len(series) < 3:
        raise ValueError("need at least 3 samples to locate minima")
    return _extrema(series, series.n_add, "n_add-minimum", +1)


def find_response_peaks(series: SpectrumSeries) -> list:
    if len(series) < 3:
        raise ValueError("need at least 3 samples to locate maxima")
    return _extrema(series, series.r_m, "r_m-maximum", -1)


def branch_for(params: SystemParams) -> str:
    """Which effective frequency a parameter sweep tracks.

    With an unbroken dark mode only the bright hybrid mode is visible: the
    upper one when the minus mode is dark, the lower one otherwise.  A broken
    dark mode tracks the global added-noise minimum.
    """
    label = hybrid_modes(params).dark_label
    return {"minus-dark": "high", "plus-dark": "low"}.get(label, "global")


def select_branch(extrema: list, branch: str):
    if not extrema:
        return None
    if branch == "high":
        return max(extrema, key=lambda e: e.omega_eff)
    if branch == "low":
        return min(extrema, key=lambda e: e.omega_eff)
    return min(extrema, key=lambda e: (e.value, e.omega_eff))


@dataclass
class SweepResult:
    name: str
    values: list
    omega_eff: list
    n_add: list
    r_m: list
    branch: list

    def argmin(self) -> int:
        return int(np.nanargmin(np.asarray(self.n_add, dtype=float)))


def parameter_sweep(base: SystemParams, name: str, values, grid: FrequencyGrid = FrequencyGrid(),
                    threads: int = 1) -> SweepResult:
    """Added noise and response at the tracked effective frequency vs one parameter."""
    if name not in SWEEPABLE:
        raise ValueError(f"cannot sweep {name!r}; choose one of {', '.join(SWEEPABLE)}")
    values = [float(v) for v in values]
    if not values:
        raise ValueError("no sweep values")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("sweep values must be strictly increasing")

    def one(value):
        p = base.replace(**{name: value})
        branch = branch_for(p)
        e = select_branch(find_effective_frequencies(frequency_sweep(p, grid)), branch)
        if e is None:
            return float("nan"), float("nan"), float("nan"), branch
        c = output_coefficients(p, e.omega_eff)
        return e.omega_eff, added_noise(c), abs(c.a3 + c.a4) ** 2, branch

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, values))
    else:
        rows = [one(v) for v in values]
    return SweepResult(
        name=name,
        values=values,
        omega_eff=[r[0] for r in rows],
        n_add=[r[1] for r in rows],
        r_m=[r[2] for r in rows],
        branch=[r[3] for r in rows],
    )


def bandwidth_metric(series: SpectrumSeries, threshold: float) -> list:
    """Maximal frequency intervals where the added noise stays below ``threshold``.

    Interval ends are linearly interpolated between the bracketing samples and
    clipped to the grid.  This is a sub-threshold-interval definition of the
    detection bandwidth, not a standard one.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be > 0, got {threshold!r}")
    w = series.omega
    if len(w) == 0:
        return []
    if math.isinf(threshold):
        return [(float(w[0]), float(w[-1]))]
    y = series.n_add
    below = y < threshold  # NaN and inf compare False

    def crossing(i, j):
        # threshold crossing between samples i (one side) and j (other side)
        yi, yj = y[i], y[j]
        if not (math.isfinite(yi) and math.isfinite(yj)) or yi == yj:
            return float(w[i] if below[i] else w[j])
        t = (threshold - yi) / (yj - yi)
        return float(w[i] + t * (w[j] - w[i]))

    intervals = []
    i, n = 0, len(w)
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        lo = float(w[0]) if i == 0 else crossing(i - 1, i)
        hi = float(w[-1]) if j == n - 1 else crossing(j, j + 1)
        intervals.append((lo, hi))
        i = j + 1
    return intervals


def thermal_comparison(params: SystemParams, grid: FrequencyGrid = FrequencyGrid()):
    """Two-oscillator thermal noise over the single-oscillator value n_bar + 1/2.

    Returns ``(omega, ratio)`` arrays; divergences stay ``inf``.
    """
    series = frequency_sweep(params, grid)
    return series.omega, series.s_th / (params.n_bar + 0.5)
