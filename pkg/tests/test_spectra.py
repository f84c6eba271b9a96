import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from optosense.model import SystemParams, drift_matrix, reference_params
from optosense.spectra import (SQL, OutputCoefficients, SingularSolveError, UnstableParametersWarning,
                               added_noise, intracavity_coefficients, mechanical_response,
                               output_coefficients, single_mode_reference, susceptibility,
                               thermal_noise, total_spectrum)

mpmath = pytest.importorskip("mpmath")

# 40-digit mpmath inverse at phi=3pi/4, V=0.02 (reference point, G'=4.5e-3), frozen
R_M_098 = 2.4325154568402139
R_M_102 = 0.066152953686083391


def mp_susceptibility(a, omega):
    """High-precision inverse; an eigendecomposition is useless here because
    the eigenvector matrix has condition number ~1e12."""
    mpmath.mp.dps = 40
    m = (-1j * mpmath.mpf(omega) * mpmath.eye(6) - mpmath.matrix(a.tolist())) ** -1
    return np.array([[complex(m[i, j]) for j in range(6)] for i in range(6)])


def scalar_oracle(p, omega):
    """Closed scalar algebra valid for sin(phi)=0, delta=0, theta=pi/2.

    The symmetric mechanical mode sees frequency 1 + V cos(phi); the
    antisymmetric one decouples.
    """
    k, g, gm = p.kappa, p.g_eff, p.gamma
    wb = 1.0 + p.v_hop * math.cos(p.phi)
    chi_b = wb / (wb**2 - omega**2 - 1j * gm * omega)
    cav = 1.0 / (k - 1j * omega)
    sk, sg = math.sqrt(2 * k), math.sqrt(2 * gm)
    a3 = sk * (-g) * chi_b * sg * cav
    a1 = sk * (-g) * chi_b * (-2 * g) * sk * cav**2
    a2 = (k + 1j * omega) / (k - 1j * omega)
    return a1, a2, a3, a3


class TestSusceptibility:
    def test_decoupled_cavity(self):
        p = SystemParams(n_bar=0, g_eff=0.0, delta_eff=0.0, kappa=0.1)
        for w in (0.0, 0.5, 1.0, 3.0):
            assert susceptibility(p, w).matrix[0, 0] == pytest.approx(1 / (0.1 - 1j * w), rel=1e-13)

    def test_zero_frequency(self, ref):
        m = susceptibility(ref, 0.0).matrix
        np.testing.assert_allclose(m, np.linalg.inv(-drift_matrix(ref)), rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("phi", [0.0, 0.4, math.pi / 2, 3 * math.pi / 4, math.pi])
    def test_high_precision_oracle(self, ref, phi):
        p = ref.replace(phi=phi, v_hop=0.02)
        for w in (0.97, 0.98, 1.0, 1.013, 1.02):
            m = susceptibility(p, w).matrix
            ref = mp_susceptibility(drift_matrix(p), w)
            assert np.max(np.abs(m - ref)) <= 1e-10 * np.max(np.abs(ref))

    def test_residual(self, ref):
        for w in np.linspace(0.9, 1.1, 41):
            assert susceptibility(ref, w).residual <= 1e-10

    def test_non_finite_omega(self, ref):
        with pytest.raises(ValueError):
            susceptibility(ref, math.nan)

    def test_singular(self):
        # marginal mechanics (gamma would have to be 0), emulate with an exact pole
        p = SystemParams(n_bar=0, g_eff=0.0, v_hop=0.0, gamma=1e-300)
        with pytest.raises(SingularSolveError) as exc:
            from optosense.spectra import _solve
            a = drift_matrix(p)
            a[4, 4] = a[5, 5] = 0.0
            _solve(a, 1.0)
        assert exc.value.omega == 1.0


class TestOutputCoefficients:
    def test_decoupled(self):
        p = SystemParams(n_bar=0, g_eff=0.0, delta_eff=0.0)
        for w in (0.3, 1.0, 1.7):
            c = output_coefficients(p, w)
            assert c.a3 == 0 and c.a4 == 0
            assert abs(c.a1) ** 2 + abs(c.a2) ** 2 == pytest.approx(1.0, rel=1e-13)
            # independent: reflected field (kappa + i w)/(kappa - i w) in the P quadrature
            assert c.a2 == pytest.approx((0.1 + 1j * w) / (0.1 - 1j * w), rel=1e-13)

    @pytest.mark.parametrize("phi, v", [(0.0, 0.0), (0.0, 0.01), (math.pi, 0.01), (0.0, 0.02)])
    def test_scalar_oracle(self, ref, phi, v):
        p = ref.replace(phi=phi, v_hop=v)
        for w in np.linspace(0.96, 1.04, 17):
            c = output_coefficients(p, w)
            ref = scalar_oracle(p, w)
            for got, want in zip(c.as_array(), ref):
                assert abs(got - want) <= 1e-9 * max(abs(want), 1e-30)

    def test_uncoupled_peak_value(self, uncoupled):
        # 16 kappa G'^2 / (gamma (1 + kappa^2)) from the scalar oracle
        k, g, gm = uncoupled.kappa, uncoupled.g_eff, uncoupled.gamma
        c = output_coefficients(uncoupled, 1.0)
        assert mechanical_response(c) == pytest.approx(16 * k * g**2 / (gm * (1 + k**2)), rel=1e-6)

    @pytest.mark.parametrize("phi", [0.0, math.pi])
    def test_exchange_equal_a3_a4(self, ref, phi):
        for w in np.linspace(0.95, 1.05, 11):
            c = output_coefficients(ref.replace(phi=phi), w)
            assert abs(c.a3 - c.a4) <= 1e-10 * abs(c.a3)

    def test_theta_zero_uses_x_row(self, ref):
        p = ref.replace(theta=0.0)
        k = intracavity_coefficients(p, 1.0)
        c = output_coefficients(p, 1.0)
        sk = math.sqrt(2 * p.kappa)
        assert c.a1 == pytest.approx(sk * k[0] - 1.0)
        assert c.a3 == pytest.approx(sk * k[2])

    def test_n_add_uncoupled(self, uncoupled):
        assert added_noise(output_coefficients(uncoupled, 1.0)) == pytest.approx(0.25, abs=0.05)

    def test_n_add_phi_pi_low_branch(self, ref):
        n = added_noise(output_coefficients(ref.replace(phi=math.pi), 0.99))
        assert abs(n - 0.25) <= 0.2 * 0.25


class TestSpectrumPieces:
    def test_zero_response(self):
        c = OutputCoefficients(1.0, 1.0, 0.0, 0.0, 0.0)
        assert mechanical_response(c) == 0.0
        assert thermal_noise(c, 3.0) == math.inf
        assert added_noise(c) == math.inf

    def test_equal_forces_halves_thermal(self):
        c = OutputCoefficients(1.0, 0.3, 0.2, 0.7 - 0.1j, 0.7 - 0.1j)
        assert thermal_noise(c, 10.0) == pytest.approx(10.5 / 2, rel=1e-15)

    def test_single_force(self):
        c = OutputCoefficients(1.0, 0.3, 0.2, 0.7 - 0.1j, 0.0)
        assert thermal_noise(c, 10.0) == pytest.approx(10.5, rel=1e-15)

    def test_thermal_peak_at_half_pi(self, ref):
        p = ref.replace(phi=math.pi / 2)
        assert thermal_noise(output_coefficients(p, 1.0), p.n_bar) > (p.n_bar + 0.5) / 2

    def test_g_to_zero_diverges(self, ref):
        values = [added_noise(output_coefficients(ref.replace(g_eff=g), 1.0))
                  for g in (1e-3, 1e-5, 1e-7)]
        assert values[0] < values[1] < values[2] and values[2] > 1e6
        assert added_noise(output_coefficients(ref.replace(g_eff=0.0), 1.0)) == math.inf

    def test_total_composition(self, uncoupled):
        s = total_spectrum(uncoupled, 1.0, s_fex=1.0)
        assert s.s_total / s.r_m - (s.s_th + s.n_add) == pytest.approx(1.0, rel=1e-9)
        s0 = total_spectrum(uncoupled, 1.0)
        assert s0.s_total == pytest.approx(s0.r_m * (s0.s_th + s0.n_add), rel=1e-12)
        assert s0.sql_margin == SQL - s0.n_add

    def test_total_zero_response(self):
        s = total_spectrum(SystemParams(n_bar=0, g_eff=0.0), 1.0, s_fex=2.0)
        assert s.r_m == 0 and s.s_total == 0 and s.n_add == math.inf

    def test_bad_s_fex(self, ref):
        for bad in (-1.0, math.nan):
            with pytest.raises(ValueError):
                total_spectrum(ref, 1.0, s_fex=bad)

    def test_unstable_warns(self, ref):
        p = ref.replace(delta_eff=-1.0, g_eff=0.05)
        with pytest.warns(UnstableParametersWarning):
            s = total_spectrum(p, 1.0)
        assert math.isfinite(s.r_m)

    def test_stable_does_not_warn(self, ref):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            total_spectrum(ref, 1.0)


class TestSingleModeReference:
    @pytest.mark.parametrize("w", [0.95, 1.0, 1.03])
    def test_thermal_is_n_bar_half(self, ref, w):
        s = single_mode_reference(ref, w)
        assert s.s_th == ref.n_bar + 0.5

    def test_g_zero(self, ref):
        assert single_mode_reference(ref.replace(g_eff=0.0), 1.0).n_add == math.inf

    def test_two_mode_halves_thermal(self, uncoupled):
        ref = single_mode_reference(uncoupled, 1.0)
        two = total_spectrum(uncoupled, 1.0)
        assert two.s_th == pytest.approx(ref.s_th / 2, rel=1e-12)


def test_response_values_at_three_quarter_pi(ref):
    p = ref.replace(phi=3 * math.pi / 4, v_hop=0.02)
    for w, frozen in ((0.98, R_M_098), (1.02, R_M_102)):
        m = mp_susceptibility(drift_matrix(p), w)
        sk, sg = math.sqrt(2 * p.kappa), math.sqrt(2 * p.gamma)
        a3 = sk * sg * m[1, 4]
        a4 = sk * sg * m[1, 5]
        assert abs(a3 + a4) ** 2 == pytest.approx(frozen, rel=1e-8)
        assert mechanical_response(output_coefficients(p, w)) == pytest.approx(frozen, rel=1e-9)


@pytest.mark.xfail(strict=True, reason="target response values are not reproduced by the model; "
                                       "the high-precision oracle gives 2.43 and 0.066")
def test_target_response_values(ref):
    p = ref.replace(phi=3 * math.pi / 4, v_hop=0.02)
    assert abs(mechanical_response(output_coefficients(p, 0.98)) - 3.6) <= 0.5
    assert abs(mechanical_response(output_coefficients(p, 1.02)) - 0.04) <= 0.02


phis = st.floats(-2 * math.pi, 2 * math.pi)
omegas = st.floats(0.9, 1.1)


@settings(max_examples=80, deadline=None)
@given(phis, omegas, st.floats(0.0, 0.05))
def test_phi_parity(phi, w, v):
    p = reference_params(phi=phi, v_hop=v)
    a = total_spectrum(p, w)
    b = total_spectrum(p.replace(phi=-phi), w)
    for x, y in ((a.r_m, b.r_m), (a.s_th, b.s_th), (a.n_add, b.n_add)):
        assert abs(x - y) <= 1e-10 * abs(y)


@settings(max_examples=80, deadline=None)
@given(phis, omegas, st.floats(0.0, 0.05), st.floats(1e-4, 0.02), st.floats(0.0, 1e3))
def test_bounds(phi, w, v, g, n_bar):
    p = SystemParams(n_bar=n_bar, phi=phi, v_hop=v, g_eff=g)
    s = total_spectrum(p, w, s_fex=0.5)
    assert s.r_m >= 0 and s.n_add >= 0
    assert s.s_th >= (n_bar + 0.5) / 2 * (1 - 1e-12)
    assert s.s_total == pytest.approx(s.r_m * (s.s_th + s.n_add) + s.r_m * 0.5, rel=1e-12)
    assert susceptibility(p, w).residual <= 1e-10


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([0.0, math.pi]), omegas, st.floats(0.0, 0.05))
def test_thermal_half_when_sin_phi_zero(phi, w, v):
    p = reference_params(phi=phi, v_hop=v)
    s = total_spectrum(p, w)
    assert s.s_th == pytest.approx((p.n_bar + 0.5) / 2, rel=1e-10)
