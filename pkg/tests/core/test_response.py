"""
Tests for the linearized sideband response and conversion efficiency.
"""
import cmath
import math
import random

import numpy as np
import pytest

from src.core.errors import Diverges, ParameterValidationError
from src.core.models.params import scaled_frequencies, validate
from src.core.services.presets import fig2_params
from src.core.services.response import (
    C_PLUS,
    assemble_response_system,
    closed_form_tac,
    operating_point,
    optimal_coupling,
    resonant_tac,
    solve_response,
    stokes_closed_form,
)
from src.core.services.stability import stability_report
from src.core.services.steady_state import solve_self_consistent


def _at(ga: float, delta: float = -30.0, **updates):
    return validate(fig2_params(ga_thz=ga, delta_thz=delta).model_copy(update=updates))


def test_resonant_efficiency_fig2(fig2):
    """|G_a| = 3.48 THz at omega_ir = nu_b gives T_ac of about 12."""
    response = solve_response(fig2)
    assert response.omega_ir == 30.0
    assert response.T_ac == pytest.approx(11.94, rel=2e-3)


@pytest.mark.parametrize("ga", [0.5, 1.0, 2.0, 3.0, 3.48, 4.5])
def test_exact_solve_matches_resonant_formula(ga):
    """On resonance (nu_b = nu_c = -Delta) the formula is exact, phase included."""
    vp = _at(ga)
    exact = solve_response(vp).t_ac
    formula = resonant_tac(vp, complex(ga))
    assert abs(exact - formula) <= 1e-8 * abs(formula)


@pytest.mark.parametrize("omega", [28.0, 29.5, 29.9, 30.2, 31.0, 32.5])
def test_exact_solve_matches_closed_form_off_resonance(omega, fig2):
    exact = solve_response(fig2, omega_ir=omega)
    closed = stokes_closed_form(fig2, complex(3.48), omega)
    assert abs(exact.a_minus - closed) <= 1e-8 * abs(closed)
    assert closed_form_tac(fig2, complex(3.48), omega) == pytest.approx(exact.T_ac, rel=1e-8)


def test_matches_numpy_solve(fig2):
    matrix, drive = assemble_response_system(fig2, None, 29.7)
    u = np.linalg.solve(np.array(matrix.to_rows()), -np.array(drive))
    response = solve_response(fig2, omega_ir=29.7)
    assert np.isclose(response.a_plus, u[0], rtol=1e-9)
    assert np.isclose(response.a_minus, np.conj(u[1]), rtol=1e-9)
    assert np.isclose(response.c_plus, u[2], rtol=1e-9)


def test_drive_enters_ir_mode(fig2):
    _, drive = assemble_response_system(fig2, None, 30.0)
    assert drive[C_PLUS] == pytest.approx(1e-6)
    assert sum(1 for f in drive if f != 0) == 1


@pytest.mark.parametrize("eps_ir", [1e-6, 1e-5, 1e-4, 1e-3, 2e-3, 1e-2, 1e-1, 1.0])
def test_efficiency_independent_of_signal_strength(eps_ir):
    reference = solve_response(_at(3.0, eps_ir=1e-3)).T_ac
    assert solve_response(_at(3.0, eps_ir=eps_ir)).T_ac == pytest.approx(reference, rel=1e-9)


@pytest.mark.parametrize("params", [fig2_params(ga_thz=3.47), fig2_params(ga_thz=None)], ids=["prescribed", "fixed"])
def test_efficiency_independent_of_angular_units(params):
    """Scaling every frequency by 2pi leaves the dimensionless efficiency unchanged."""
    in_hz = solve_response(validate(params)).T_ac
    angular = solve_response(validate(scaled_frequencies(params, 2.0 * math.pi))).T_ac
    assert angular == pytest.approx(in_hz, rel=1e-12)


@pytest.mark.parametrize("ga", [3.0, 5.0])
def test_coupling_phase_is_irrelevant(ga):
    """Only |G_a| matters: the phase of the enhanced coupling is a gauge choice."""
    vp = _at(ga)
    real_response = solve_response(vp, calG_a=complex(ga))
    real_report = stability_report(vp, calG_a=complex(ga))

    rng = random.Random(23)
    for _ in range(10):
        calG_a = ga * cmath.exp(1j * rng.uniform(0.0, 2.0 * math.pi))
        if real_report.stable:
            assert solve_response(vp, calG_a=calG_a).T_ac == pytest.approx(real_response.T_ac, rel=1e-10)
        report = stability_report(vp, calG_a=calG_a)
        assert report.stable == real_report.stable
        assert report.routh_stable == real_report.routh_stable
        assert report.spectral_abscissa == pytest.approx(real_report.spectral_abscissa, rel=1e-8, abs=1e-10)


def test_output_fields(fig2):
    response = solve_response(fig2)
    assert response.a_out_minus == pytest.approx((2.0 * 30.0) ** 0.5 * response.a_minus)


def test_zero_signal_rejected():
    with pytest.raises(ParameterValidationError) as exc:
        solve_response(_at(3.0, eps_ir=0.0))
    assert exc.value.codes == ["NonPositiveAmplitude"]


def test_lab_frame_frequencies():
    response = solve_response(_at(3.0, nu_p=563.5), omega_ir=29.0)
    assert response.stokes_frequency_thz == pytest.approx(534.5)
    assert response.antistokes_frequency_thz == pytest.approx(592.5)


def test_no_lab_frame_without_pump_frequency(fig2):
    assert solve_response(fig2).stokes_frequency_thz is None


def test_steady_state_coupling_is_used(fig2_fixed_delta):
    """FixedDelta takes G_a <a>ss from the steady state; |t_ac| only depends on its modulus."""
    state = solve_self_consistent(fig2_fixed_delta)
    response = solve_response(fig2_fixed_delta, ss=state)
    expected = abs(resonant_tac(fig2_fixed_delta, complex(abs(state.calG_a)))) ** 2
    assert response.T_ac == pytest.approx(expected, rel=1e-8)


def test_coupling_override(fig2):
    overridden = solve_response(fig2, calG_a=2.0)
    assert overridden.T_ac == pytest.approx(abs(resonant_tac(fig2, 2.0)) ** 2, rel=1e-8)


def test_operating_point_of_prescribed_mode(fig2):
    point = operating_point(fig2)
    assert point.calG_a == complex(3.48)
    assert point.delta == -30.0


class TestOptimalCoupling:
    def test_fig2_value(self, fig2):
        assert optimal_coupling(fig2) == pytest.approx(3.475, abs=1e-3)

    def test_maximizes_resonant_efficiency(self, fig2):
        optimum = optimal_coupling(fig2)
        best = abs(resonant_tac(fig2, complex(optimum))) ** 2
        for offset in (-0.05, -0.01, 0.01, 0.05):
            assert abs(resonant_tac(fig2, complex(optimum + offset))) ** 2 < best

    def test_efficiency_at_optimum(self, fig2):
        optimum = optimal_coupling(fig2)
        assert abs(resonant_tac(fig2, complex(optimum))) ** 2 == pytest.approx(11.94, rel=2e-3)

    @pytest.mark.parametrize(
        "kappa_c, expected",
        [(0.1, 3309.0), (0.5, 2470.0), (1.0, 1886.0), (3.0, 953.0)],
    )
    def test_narrow_vis_cavity(self, kappa_c, expected):
        """kappa_a = 2 THz: T_ac at the optimal coupling grows as kappa_c shrinks."""
        vp = validate(fig2_params().model_copy(update={"kappa_a": 2.0, "kappa_c": kappa_c}))
        optimum = optimal_coupling(vp)
        t_max = abs(resonant_tac(vp, complex(optimum))) ** 2
        assert t_max == pytest.approx(expected, rel=1.5e-2)

    def test_narrow_vis_cavity_coupling(self):
        vp = validate(fig2_params().model_copy(update={"kappa_a": 2.0}))
        assert optimal_coupling(vp) == pytest.approx(0.849, abs=2e-3)


def test_zero_detuning_diverges(fig2):
    with pytest.raises(Diverges):
        resonant_tac(fig2, complex(3.0), delta=0.0)


def test_red_detuned_pump_does_not_amplify():
    """Delta = +nu_b drives the beam-splitter process: the Stokes efficiency stays below 1."""
    response = solve_response(_at(3.48, delta=30.0))
    assert response.T_ac < 1.0
