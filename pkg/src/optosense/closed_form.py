"""Closed-form homodyne coefficients, cross-checked against the solver.

The closed-form expressions carry two inconsistencies that are kept as explicit
variants instead of being corrected:

* the sign of ``e5`` in the denominator of ``k1`` (minus) differs from the one
  used for ``k3`` and ``k5`` (plus);
* the input-output subtraction is written on ``k~1`` and ``k~5``, whereas the
  input-output relation subtracts the vacuum input from the X_in weight of
  X^o (``k~1``) and the P_in weight of P^o (``k~6``).

The phase written as ``alpha`` in ``e5`` is read as the hopping phase, the
detuning as the effective detuning, and the coupling ``g`` as G = G'/sqrt(2).
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .model import SystemParams
from .spectra import OutputCoefficients, SingularSolveError, intracavity_coefficients, output_coefficients

REL_FLOOR = 1e-30
DEFAULT_TOLERANCE = 1e-6


class SingularEvaluationError(ArithmeticError):
    def __init__(self, omega):
        self.omega = omega
        super().__init__(f"closed-form denominator vanishes at omega = {omega!r}")


@dataclass(frozen=True)
class ClosedFormVariant:
    e5_sign_in_k1_denominator: str = "minus"
    tilde_index_set: tuple = (1, 5)
    alpha_reading: str = "phi"

    def __post_init__(self):
        if self.e5_sign_in_k1_denominator not in ("minus", "plus"):
            raise ValueError(f"e5 sign must be 'minus' or 'plus', got {self.e5_sign_in_k1_denominator!r}")
        object.__setattr__(self, "tilde_index_set", tuple(self.tilde_index_set))
        if self.tilde_index_set not in ((1, 5), (1, 6)):
            raise ValueError(f"tilde index set must be (1, 5) or (1, 6), got {self.tilde_index_set!r}")
        if self.alpha_reading != "phi":
            raise ValueError("alpha is always read as phi")

    @property
    def name(self) -> str:
        idx = "".join(str(i) for i in self.tilde_index_set)
        return f"e5{self.e5_sign_in_k1_denominator}-tilde{idx}"

    @classmethod
    def from_name(cls, name: str) -> "ClosedFormVariant":
        for v in ALL_VARIANTS:
            if v.name == name:
                return v
        raise ValueError(f"unknown closed-form variant {name!r}; "
                         f"choose from {', '.join(v.name for v in ALL_VARIANTS)}")


ALL_VARIANTS = tuple(
    ClosedFormVariant(sign, idx)
    for sign, idx in itertools.product(("minus", "plus"), ((1, 5), (1, 6)))
)


def _e_terms(params: SystemParams, w: float):
    k, gam, d = params.kappa, params.gamma, params.delta_eff
    v, phi = params.v_hop, params.phi
    g = params.g_lin
    wm = 1.0
    cos_alpha = math.cos(phi)
    c2 = math.cos(2 * phi)
    e1 = d**2 + (k - 1j * w) ** 2
    e2 = gam**2 * (v**2 - 2 * w**2) + 2 * (v**2 - w**2) ** 2 + 4j * gam * w * (-(v**2) + w**2)
    e3 = 4 * d * g**2 * (v**2 + w * (1j * gam + w)) * wm
    e4 = 4 * e1 * (v**2 + w * (1j * gam + w)) * wm**2 - 2 * e1 * wm**4
    e5 = 4 * d * g**2 * v * (v**2 - 1j * gam * w - w**2 - wm**2) * cos_alpha + gam**2 * v**2 * e1 * c2
    e6 = (gam**2 * (v**2 - 2 * w**2)
          + 2 * (v - w - wm) * (v + w - wm) * (v - w + wm) * (v + w + wm)
          - 4j * gam * w * (v**2 - w**2 + wm**2))
    return e1, e2, e3, e4, e5, e6


def k_coefficients(params: SystemParams, omega: float,
                   variant: ClosedFormVariant = ALL_VARIANTS[0]) -> np.ndarray:
    """k_1..k_8 as written, with the e5 sign of k_1 chosen by ``variant``."""
    k, gam, d = params.kappa, params.gamma, params.delta_eff
    v, phi = params.v_hop, params.phi
    g = params.g_lin
    wm = 1.0
    w = omega
    s, c, c2 = math.sin(phi), math.cos(phi), math.cos(2 * phi)
    e1, e2, e3, e4, e5, e6 = _e_terms(params, w)

    den_minus = -e1 * e2 - e3 + e4 - e5
    den_plus = -e1 * e2 - e3 + e4 + e5
    den_k1 = den_minus if variant.e5_sign_in_k1_denominator == "minus" else den_plus
    for den in (den_k1, den_plus):
        if den == 0 or not np.isfinite(den):
            raise SingularEvaluationError(omega)
    cav = k - 1j * w
    if cav == 0:
        raise SingularEvaluationError(omega)

    k1 = math.sqrt(2) * math.sqrt(k) * cav * (gam**2 * v**2 * c2 - e6) / den_k1
    k2 = k1 * d / cav
    k3 = (2 * math.sqrt(2) * d * g * math.sqrt(gam)
          * (-(v**2 + w * (1j * gam + w)) * wm + wm**3
             - v * (gam - 2j * w) * wm * s
             + v * c * (v**2 - 1j * gam * w - w**2 - wm**2 + gam * v * s))
          / den_plus)
    k4 = k3
    k5 = (math.sqrt(2) * math.sqrt(k)
          * (4 * g**2 * wm * (v**2 + 1j * gam * w + w**2 - wm**2)
             + d * e6 + e6 * c - d * gam**2 * v * c2)
          / den_plus)
    k6 = k1
    k7 = k3 * d / cav
    k8 = k7
    return np.array([k1, k2, k3, k4, k5, k6, k7, k8], dtype=complex)


def homodyne_coefficients_closed(params: SystemParams, omega: float,
                                 variant: ClosedFormVariant = ALL_VARIANTS[0]) -> OutputCoefficients:
    kk = k_coefficients(params, omega, variant)
    sk = math.sqrt(2.0 * params.kappa)
    tilde = sk * kk
    for i in variant.tilde_index_set:
        tilde[i - 1] = sk * (kk[i - 1] - 1.0 / sk)
    a = math.cos(params.theta) * tilde[:4] + math.sin(params.theta) * tilde[4:]
    return OutputCoefficients(float(omega), complex(a[0]), complex(a[1]), complex(a[2]), complex(a[3]))


def _rel_dev(closed: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    return np.abs(closed - numeric) / np.maximum(np.abs(numeric), REL_FLOOR)


@dataclass
class VariantResult:
    variant: ClosedFormVariant
    max_deviation: float
    coefficient_deviation: list  # max over grid, per A_1..A_4
    k_deviation: list  # max over grid, per k_1..k_8
    worst_omega: float
    worst_coefficient: int


@dataclass
class ValidationReport:
    params: SystemParams
    grid: list
    results: list
    best_variant: ClosedFormVariant
    best_deviation: float
    passed: bool
    tolerance: float
    singular: list = field(default_factory=list)
    exchange_asymmetry: float = 0.0
    exchange_asymmetry_omega: float = float("nan")
    k3_k4_identity_consistent: bool = True

    def result_for(self, variant: ClosedFormVariant) -> VariantResult:
        for r in self.results:
            if r.variant == variant:
                return r
        raise KeyError(variant.name)

    def summary(self) -> str:
        p = self.params
        lines = [
            "closed-form vs numeric homodyne coefficients",
            f"params: kappa={p.kappa!r} gamma={p.gamma!r} delta_eff={p.delta_eff!r} "
            f"g_eff={p.g_eff!r} v_hop={p.v_hop!r} phi={p.phi!r} theta={p.theta!r}",
            f"grid: {len(self.grid)} points on [{self.grid[0]!r}, {self.grid[-1]!r}]",
            f"tolerance: {self.tolerance:g} relative",
            "",
            "variant             max dev     A1          A2          A3          A4",
        ]
        for r in self.results:
            cols = "  ".join(f"{x:10.3e}" for x in r.coefficient_deviation)
            lines.append(f"{r.variant.name:<18}  {r.max_deviation:10.3e}  {cols}")
        lines.append("")
        lines.append("per-k deviation of the best variant (k1..k8):")
        best = self.result_for(self.best_variant)
        lines.append("  " + "  ".join(f"k{i + 1}={x:.3e}" for i, x in enumerate(best.k_deviation)))
        bad = [f"k{i + 1}" for i, x in enumerate(best.k_deviation) if not x < self.tolerance]
        lines.append("  disagreeing: " + (", ".join(bad) if bad else "none"))
        lines.append(f"  worst point: A{best.worst_coefficient} at omega={best.worst_omega!r}")
        lines.append("")
        lines.append(
            f"numeric |a3 - a4| / max(|a3|, |a4|): max {self.exchange_asymmetry:.3e} "
            f"at omega={self.exchange_asymmetry_omega!r}")
        if self.k3_k4_identity_consistent:
            lines.append("closed-form identity k4 = k3: consistent with the numeric solution")
        else:
            lines.append("closed-form identity k4 = k3: CONTRADICTED by the numeric solution "
                         "(oscillator exchange symmetry is broken)")
        if self.singular:
            lines.append("singular frequencies skipped: " + ", ".join(repr(w) for w in self.singular))
        lines.append("")
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"best variant: {self.best_variant.name} "
                     f"(max dev {self.best_deviation:.3e}) -> {verdict}")
        return "\n".join(lines) + "\n"

    def records(self) -> list:
        rows = []
        for r in self.results:
            row = {
                "variant": r.variant.name,
                "max_deviation": r.max_deviation,
                "worst_omega": r.worst_omega,
                "worst_coefficient": r.worst_coefficient,
                "best": r.variant == self.best_variant,
                "passed": r.max_deviation < self.tolerance,
            }
            for i, x in enumerate(r.coefficient_deviation):
                row[f"dev_a{i + 1}"] = x
            for i, x in enumerate(r.k_deviation):
                row[f"dev_k{i + 1}"] = x
            rows.append(row)
        return rows

    def records_csv(self) -> str:
        rows = self.records()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _cell(v) for k, v in row.items()})
        return buf.getvalue()


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def validate_against_numeric(params: SystemParams, grid, variants=ALL_VARIANTS,
                             tolerance: float = DEFAULT_TOLERANCE) -> ValidationReport:
    """Compare every variant with the matrix-inversion path over ``grid``.

    Frequencies where either path is singular are skipped and listed.
    """
    grid = [float(w) for w in grid]
    if not grid or not all(math.isfinite(w) for w in grid):
        raise ValueError("grid must be non-empty and finite")
    variants = tuple(variants)
    if not variants:
        raise ValueError("at least one variant is required")

    numeric = {}
    singular = []
    for w in grid:
        try:
            numeric[w] = (output_coefficients(params, w).as_array(), intracavity_coefficients(params, w))
        except SingularSolveError:
            singular.append(w)

    asym, asym_w = 0.0, float("nan")
    for w, (a, _) in numeric.items():
        scale = max(abs(a[2]), abs(a[3]))
        if scale > 0:
            d = abs(a[2] - a[3]) / scale
            if d > asym:
                asym, asym_w = d, w

    results = []
    for v in variants:
        a_dev = np.zeros(4)
        k_dev = np.zeros(8)
        worst = (-1.0, float("nan"), 0)
        for w, (a_num, k_num) in numeric.items():
            try:
                a_cf = homodyne_coefficients_closed(params, w, v).as_array()
                k_cf = k_coefficients(params, w, v)
            except SingularEvaluationError:
                if w not in singular:
                    singular.append(w)
                continue
            da = _rel_dev(a_cf, a_num)
            a_dev = np.maximum(a_dev, da)
            k_dev = np.maximum(k_dev, _rel_dev(k_cf, k_num))
            i = int(np.argmax(da))
            if da[i] > worst[0]:
                worst = (float(da[i]), w, i + 1)
        results.append(VariantResult(v, float(np.max(a_dev)), a_dev.tolist(), k_dev.tolist(),
                                     worst[1], worst[2]))

    best = min(results, key=lambda r: r.max_deviation)
    return ValidationReport(
        params=params,
        grid=grid,
        results=results,
        best_variant=best.variant,
        best_deviation=best.max_deviation,
        passed=best.max_deviation < tolerance,
        tolerance=tolerance,
        singular=sorted(singular),
        exchange_asymmetry=asym,
        exchange_asymmetry_omega=asym_w,
        k3_k4_identity_consistent=asym < tolerance,
    )
