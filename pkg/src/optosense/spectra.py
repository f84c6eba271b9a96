"""Frequency-domain solution, homodyne coefficients and noise spectra."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import (P1, P2, PC, XC, SystemParams, drift_matrix,
                    single_mode_drift_matrix, stability_check)

SQL = 0.5


class SingularSolveError(ArithmeticError):
    """(-i omega I - A) cannot be inverted at this frequency."""

    def __init__(self, omega):
        self.omega = omega
        super().__init__(f"susceptibility is singular at omega = {omega!r}")


class UnstableParametersWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class Susceptibility:
    omega: float
    matrix: np.ndarray
    residual: float


@dataclass(frozen=True)
class OutputCoefficients:
    """Weights of X_c^in, P_c^in, f_in,1 and f_in,2 in the detected quadrature."""

    omega: float
    a1: complex
    a2: complex
    a3: complex
    a4: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a3, self.a4], dtype=complex)


@dataclass(frozen=True)
class SpectrumSample:
    omega: float
    r_m: float
    s_th: float
    n_add: float
    s_total: float
    sql_margin: float


def _solve(a: np.ndarray, omega: float) -> Susceptibility:
    if not math.isfinite(omega):
        raise ValueError(f"omega must be finite, got {omega!r}")
    n = a.shape[0]
    lhs = -1j * omega * np.eye(n) - a
    try:
        m = np.linalg.solve(lhs, np.eye(n, dtype=complex))
    except np.linalg.LinAlgError:
        raise SingularSolveError(omega) from None
    if not np.all(np.isfinite(m)):
        raise SingularSolveError(omega)
    residual = float(np.max(np.abs(lhs @ m - np.eye(n))))
    return Susceptibility(omega=float(omega), matrix=m, residual=residual)


def susceptibility(params: SystemParams, omega: float) -> Susceptibility:
    """(-i omega I - A)^-1 for the two-oscillator drift matrix."""
    return _solve(drift_matrix(params), omega)


def intracavity_coefficients(params: SystemParams, omega: float) -> np.ndarray:
    """k_1..k_8: weights of the four inputs in X_c (k_1..k_4) and P_c (k_5..k_8)."""
    m = susceptibility(params, omega).matrix
    sk = math.sqrt(2.0 * params.kappa)
    sg = math.sqrt(2.0 * params.gamma)
    return np.array([
        sk * m[XC, XC], sk * m[XC, PC], sg * m[XC, P1], sg * m[XC, P2],
        sk * m[PC, XC], sk * m[PC, PC], sg * m[PC, P1], sg * m[PC, P2],
    ])


def _homodyne(k: np.ndarray, kappa: float, theta: float, omega: float) -> OutputCoefficients:
    # input-output: X^o = sqrt(2 kappa) X_c - X^in, P^o = sqrt(2 kappa) P_c - P^in
    sk = math.sqrt(2.0 * kappa)
    x_out = sk * k[:4]
    p_out = sk * k[4:]
    x_out[0] -= 1.0
    p_out[1] -= 1.0
    a = math.cos(theta) * x_out + math.sin(theta) * p_out
    return OutputCoefficients(omega, complex(a[0]), complex(a[1]), complex(a[2]), complex(a[3]))


def output_coefficients(params: SystemParams, omega: float) -> OutputCoefficients:
    """Homodyne coefficients A_1..A_4 from the numeric susceptibility."""
    k = intracavity_coefficients(params, omega)
    return _homodyne(k, params.kappa, params.theta, omega)


def mechanical_response(c: OutputCoefficients) -> float:
    return abs(c.a3 + c.a4) ** 2


def thermal_noise(c: OutputCoefficients, n_bar: float) -> float:
    """Thermal noise referred to the force input; ``inf`` where a3 + a4 = 0."""
    r = mechanical_response(c)
    if r == 0.0:
        return math.inf
    return (n_bar + 0.5) * ((abs(c.a3) ** 2 + abs(c.a4) ** 2) / r)


def added_noise(c: OutputCoefficients) -> float:
    """Shot plus back-action noise referred to the force input; ``inf`` where a3 + a4 = 0."""
    r = mechanical_response(c)
    if r == 0.0:
        return math.inf
    return 0.5 * ((abs(c.a1) ** 2 + abs(c.a2) ** 2) / r)


def _sample(c: OutputCoefficients, n_bar: float, s_fex: float) -> SpectrumSample:
    r_m = mechanical_response(c)
    s_th = thermal_noise(c, n_bar)
    n_add = added_noise(c)
    s_total = r_m * (s_th + n_add + s_fex) if r_m > 0.0 else 0.0
    return SpectrumSample(c.omega, r_m, s_th, n_add, s_total, SQL - n_add)


def _check_s_fex(s_fex):
    if not (s_fex >= 0.0) or math.isnan(s_fex):
        raise ValueError(f"s_fex must be >= 0, got {s_fex!r}")


def total_spectrum(params: SystemParams, omega: float, s_fex: float = 0.0) -> SpectrumSample:
    """Symmetrised output spectrum and its decomposition at one frequency.

    Emits :class:`UnstableParametersWarning` if the drift matrix has a
    non-decaying eigenvalue; the numbers are still returned.
    """
    _check_s_fex(s_fex)
    if not stability_check(drift_matrix(params)).stable:
        warnings.warn(f"drift matrix is not stable for {params}", UnstableParametersWarning,
                      stacklevel=2)
    return _sample(output_coefficients(params, omega), params.n_bar, s_fex)


def single_mode_output_coefficients(params: SystemParams, omega: float) -> OutputCoefficients:
    """Coefficients of the one-oscillator reference sensor; a4 is identically 0."""
    m = _solve(single_mode_drift_matrix(params), omega).matrix
    sk = math.sqrt(2.0 * params.kappa)
    sg = math.sqrt(2.0 * params.gamma)
    # rows/cols: X_c, P_c, X_1, P_1
    k = np.array([
        sk * m[0, 0], sk * m[0, 1], sg * m[0, 3], 0.0,
        sk * m[1, 0], sk * m[1, 1], sg * m[1, 3], 0.0,
    ], dtype=complex)
    return _homodyne(k, params.kappa, params.theta, omega)


def single_mode_reference(params: SystemParams, omega: float, s_fex: float = 0.0) -> SpectrumSample:
    """Same spectra for a standard sensor with a single oscillator."""
    _check_s_fex(s_fex)
    return _sample(single_mode_output_coefficients(params, omega), params.n_bar, s_fex)
