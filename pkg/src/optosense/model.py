"""Parameter space, drift matrix, stability and hybrid-mode decomposition.

All rates are expressed in units of the bare mechanical frequency, so the
mechanical frequency is 1 inside this package.  The physical frequency only
enters when converting a bath temperature into a thermal occupation.

Quadrature ordering used throughout::

    index  0    1    2    3    4    5
           X_c  P_c  X_1  X_2  P_1  P_2
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Exact SI values (2019 redefinition).
PLANCK = 6.62607015e-34
HBAR = PLANCK / (2.0 * math.pi)
BOLTZMANN = 1.380649e-23

REF_TEMPERATURE = 0.077  # K
REF_OMEGA_M = 2.0 * math.pi * 3.6e6  # rad/s
REF_KAPPA = 0.1  # 2pi x 360 kHz / 2pi x 3.6 MHz
REF_GAMMA = 1e-5  # 2pi x 36 Hz / 2pi x 3.6 MHz
REF_DELTA = 0.0

QUADRATURES = ("X_c", "P_c", "X_1", "X_2", "P_1", "P_2")
XC, PC, X1, X2, P1, P2 = range(6)

DARK_EPS = 1e-12

TWO_PI = 2.0 * math.pi


class InvalidParameterError(ValueError):
    """A model parameter is out of range or not finite."""

    def __init__(self, name, value, reason):
        self.name = name
        self.value = value
        super().__init__(f"{name} = {value!r}: {reason}")


def reduce_angle(angle: float) -> float:
    """Map an angle onto [0, 2pi)."""
    r = math.fmod(angle, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2pi
    if r >= TWO_PI:
        r = 0.0
    return r + 0.0


def thermal_occupation(temperature: float, omega_m_phys: float) -> float:
    """Bose-Einstein occupation of a mode at angular frequency ``omega_m_phys``.

    Returns 0 at zero temperature.
    """
    for name, value in (("temperature", temperature), ("omega_m_phys", omega_m_phys)):
        if not math.isfinite(value):
            raise InvalidParameterError(name, value, "must be finite")
    if temperature < 0:
        raise InvalidParameterError("temperature", temperature, "must be >= 0")
    if omega_m_phys <= 0:
        raise InvalidParameterError("omega_m_phys", omega_m_phys, "must be > 0")
    if temperature == 0:
        return 0.0
    x = HBAR * omega_m_phys / (BOLTZMANN * temperature)
    return 1.0 / math.expm1(x)


@dataclass(frozen=True)
class SystemParams:
    """One scenario of the two-oscillator sensor, rates in units of omega_m.

    ``g_eff`` is the drift-matrix coupling G' = sqrt(2) G; the beam-splitter
    coupling G used for the hybrid modes is available as :attr:`g_lin`.

    Provide the thermal occupation either directly (``n_bar``) or through
    :meth:`from_temperature`.
    """

    kappa: float = REF_KAPPA
    gamma: float = REF_GAMMA
    delta_eff: float = REF_DELTA
    g_eff: float = 4.5e-3
    v_hop: float = 0.01
    phi: float = 0.0
    theta: float = math.pi / 2
    n_bar: Optional[float] = None
    temperature: Optional[float] = field(default=None, compare=False)
    omega_m_phys: Optional[float] = field(default=None, compare=False)

    def __post_init__(self):
        n_bar = self.n_bar
        if self.temperature is not None or self.omega_m_phys is not None:
            if self.temperature is None or self.omega_m_phys is None:
                raise InvalidParameterError(
                    "temperature", self.temperature,
                    "temperature and omega_m_phys must be given together")
            from_t = thermal_occupation(self.temperature, self.omega_m_phys)
            if n_bar is None:
                n_bar = from_t
            elif not math.isclose(n_bar, from_t, rel_tol=1e-12, abs_tol=1e-300):
                raise InvalidParameterError(
                    "n_bar", n_bar,
                    "give either n_bar or (temperature, omega_m_phys), not both")
        if n_bar is None:
            raise InvalidParameterError(
                "n_bar", None, "n_bar or (temperature, omega_m_phys) is required")

        for name in ("kappa", "gamma", "delta_eff", "g_eff", "v_hop", "phi", "theta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
                raise InvalidParameterError(name, value, "must be a real number")
            if not math.isfinite(value):
                raise InvalidParameterError(name, value, "must be finite")
        if not math.isfinite(n_bar):
            raise InvalidParameterError("n_bar", n_bar, "must be finite")
        if self.kappa <= 0:
            raise InvalidParameterError("kappa", self.kappa, "must be > 0")
        if self.gamma <= 0:
            raise InvalidParameterError("gamma", self.gamma, "must be > 0")
        if self.v_hop < 0:
            raise InvalidParameterError("v_hop", self.v_hop, "must be >= 0")
        if n_bar < 0:
            raise InvalidParameterError("n_bar", n_bar, "must be >= 0")

        object.__setattr__(self, "n_bar", float(n_bar))
        for name in ("kappa", "gamma", "delta_eff", "g_eff", "v_hop"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "phi", reduce_angle(float(self.phi)))
        object.__setattr__(self, "theta", reduce_angle(float(self.theta)))

    @classmethod
    def from_temperature(cls, temperature: float = REF_TEMPERATURE,
                         omega_m_phys: float = REF_OMEGA_M, **rates) -> "SystemParams":
        if "n_bar" in rates:
            raise InvalidParameterError(
                "n_bar", rates["n_bar"],
                "give either n_bar or (temperature, omega_m_phys), not both")
        return cls(temperature=temperature, omega_m_phys=omega_m_phys, **rates)

    @property
    def g_lin(self) -> float:
        """Beam-splitter coupling G = G'/sqrt(2)."""
        return self.g_eff / math.sqrt(2.0)

    def replace(self, **changes) -> "SystemParams":
        """Copy with some fields changed.

        Changing the temperature or physical frequency recomputes ``n_bar``;
        setting ``n_bar`` directly drops the temperature provenance.
        """
        values = {name: getattr(self, name) for name in self.__dataclass_fields__}
        if "n_bar" in changes:
            values["temperature"] = None
            values["omega_m_phys"] = None
        elif "temperature" in changes or "omega_m_phys" in changes:
            values["n_bar"] = None
        values.update(changes)
        return SystemParams(**values)


def reference_params(**overrides) -> SystemParams:
    """Reference scenario (T = 77 mK, omega_m = 2pi x 3.6 MHz) with overrides."""
    if "n_bar" in overrides:
        return SystemParams(**overrides)
    return SystemParams.from_temperature(**overrides)


def drift_matrix(params: SystemParams) -> np.ndarray:
    """6x6 real drift matrix of the linearised fluctuations."""
    k, gm, d, g = params.kappa, params.gamma, params.delta_eff, params.g_eff
    vs = params.v_hop * math.sin(params.phi)
    vc = params.v_hop * math.cos(params.phi)
    wm = 1.0
    return np.array([
        [-k, d, 0.0, 0.0, 0.0, 0.0],
        [-d, -k, -g, -g, 0.0, 0.0],
        [0.0, 0.0, 0.0, vs, wm, vc],
        [0.0, 0.0, -vs, 0.0, vc, wm],
        [-g, 0.0, -wm, -vc, -gm, vs],
        [-g, 0.0, -vc, -wm, -vs, -gm],
    ])


def single_mode_drift_matrix(params: SystemParams) -> np.ndarray:
    """4x4 drift matrix over (X_c, P_c, X_1, P_1) of a one-oscillator sensor."""
    k, gm, d, g = params.kappa, params.gamma, params.delta_eff, params.g_eff
    return np.array([
        [-k, d, 0.0, 0.0],
        [-d, -k, -g, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-g, 0.0, -1.0, -gm],
    ])


def exchange_permutation() -> np.ndarray:
    """Permutation matrix swapping oscillator 1 and 2 (X_1<->X_2, P_1<->P_2)."""
    perm = [XC, PC, X2, X1, P2, P1]
    return np.eye(6)[perm]


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    stable: bool
    margin: float


def stability_check(a: np.ndarray) -> StabilityReport:
    """Eigenvalues of the drift matrix and whether all decay.

    Real parts within round-off of zero are reported as exactly zero so a
    marginal system is never flagged stable by accident.
    """
    a = np.asarray(a, dtype=float)
    eig = np.linalg.eigvals(a)
    margin = float(np.max(eig.real))
    scale = max(float(np.linalg.norm(a, ord=np.inf)), 1.0)
    if abs(margin) <= 64 * np.finfo(float).eps * scale:
        margin = 0.0
    order = np.lexsort((eig.imag, eig.real))
    return StabilityReport(eigenvalues=eig[order], stable=margin < 0.0, margin=margin)


@dataclass(frozen=True)
class HybridModes:
    g_plus: complex
    g_minus: complex
    omega_plus: float
    omega_minus: float
    dark_label: str
    force_factor_plus: complex
    force_factor_minus: complex


def hybrid_modes(params: SystemParams) -> HybridModes:
    """Bright/dark decomposition of the two oscillators under hopping phase phi.

    Couplings below ``DARK_EPS * G`` are set to exactly zero; they only occur
    at phi = n*pi where the cancellation is exact in exact arithmetic.
    """
    g = params.g_lin
    phi = params.phi
    ff_plus = 1.0 + np.exp(-1j * phi)
    ff_minus = 1.0 - np.exp(1j * phi)
    g_plus = complex(g * ff_plus / math.sqrt(2.0))
    g_minus = complex(g * ff_minus / math.sqrt(2.0))

    # relative to |G|; with G = 0 nothing is coupled and no mode is dark
    plus_dark = g != 0 and abs(g_plus) < DARK_EPS * abs(g)
    minus_dark = g != 0 and abs(g_minus) < DARK_EPS * abs(g)
    # the phase factors vanish on the same condition, independent of G
    if abs(ff_plus) < DARK_EPS:
        ff_plus, g_plus = 0j, 0j
    if abs(ff_minus) < DARK_EPS:
        ff_minus, g_minus = 0j, 0j

    if minus_dark:
        label = "minus-dark"
    elif plus_dark:
        label = "plus-dark"
    else:
        label = "none"
    return HybridModes(
        g_plus=g_plus,
        g_minus=g_minus,
        omega_plus=1.0 + params.v_hop,
        omega_minus=1.0 - params.v_hop,
        dark_label=label,
        force_factor_plus=complex(ff_plus),
        force_factor_minus=complex(ff_minus),
    )
