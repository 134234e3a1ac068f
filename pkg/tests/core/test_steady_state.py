"""
Tests for the steady-state solver.
"""
import random

import pytest

from src.core.errors import StaticCouplingLimit, UnsupportedMode
from src.core.models.params import FixedDelta, FixedDelta0, validate
from src.core.services import steady_state
from src.core.services.presets import fig2_params
from src.core.services.response import operating_point, solve_response
from src.core.services.stability import stability_report
from src.core.services.steady_state import (
    cavity_amplitude,
    default_branch,
    residuals,
    solve_cubic_branches,
    solve_self_consistent,
    steady_state_for,
)


def _bistable(eps_p: float = 500.0):
    """Red-detuned (Delta0 = +30 THz), narrow VIS cavity: three branches for eps_p roughly in (334, 800) THz."""
    params = fig2_params(ga_thz=None).model_copy(
        update={
            "kappa_a": 5.0,
            "g_a": 0.1,
            "eps_p": eps_p,
            "detuning_mode": FixedDelta0(delta0_thz=30.0),
        }
    )
    return validate(params)


def test_cavity_amplitude():
    assert cavity_amplitude(-30.0, 500.0, 30.0) == pytest.approx(500.0 / complex(30.0, -30.0))


def test_cavity_amplitude_needs_positive_decay():
    with pytest.raises(ValueError):
        cavity_amplitude(0.0, 1.0, 0.0)


def test_fixed_delta_enhanced_coupling(fig2_fixed_delta):
    """g_a = 0.08 GHz, N = 1e7, Delta = -30 THz: |G_a <a>ss| is about 2.98 THz."""
    state = solve_self_consistent(fig2_fixed_delta)

    assert abs(state.calG_a) == pytest.approx(2.981, rel=1e-3)
    assert abs(state.a_ss) == pytest.approx(500.0 / (2**0.5 * 30.0))
    assert state.delta_eff == -30.0
    assert state.converged


def test_fixed_delta_residuals(fig2_fixed_delta):
    state = solve_self_consistent(fig2_fixed_delta)
    assert max(residuals(fig2_fixed_delta, state).values()) < 1e-10
    assert state.residual < 1e-10


def test_vibration_is_displaced_by_radiation_pressure(fig2_fixed_delta):
    """X_B < 0 for positive g_a and nu_b."""
    assert solve_self_consistent(fig2_fixed_delta).X_B < 0.0


def test_prescribed_ga_has_no_steady_state(fig2):
    with pytest.raises(UnsupportedMode):
        solve_self_consistent(fig2)


def test_cubic_branches_need_fixed_delta0(fig2_fixed_delta):
    with pytest.raises(UnsupportedMode):
        solve_cubic_branches(fig2_fixed_delta)


class TestStaticLimit:
    """g_c = 10 GHz puts 1 - k_B k_c G_c below zero."""

    def _params(self, mode=None):
        params = fig2_params(ga_thz=None).model_copy(update={"g_c": 10.0})
        if mode is not None:
            params = params.model_copy(update={"detuning_mode": mode})
        return validate(params)

    def test_fixed_delta_is_still_solved(self, log_messages):
        vp = self._params()
        state = solve_self_consistent(vp)

        assert state.X_B > 0.0
        assert max(residuals(vp, state).values()) < 1e-10
        assert any("static equilibrium" in m for m in log_messages)

    def test_equilibrium_is_unstable(self):
        assert not stability_report(self._params()).stable

    def test_fixed_delta0_takes_default_branch(self):
        vp = self._params(FixedDelta0(delta0_thz=-30.0))
        state = solve_self_consistent(vp)
        chosen = default_branch(solve_cubic_branches(vp))

        assert state.X_B == chosen.X_B
        assert state.residual < 1e-10

    def test_vanishing_static_response(self, monkeypatch):
        monkeypatch.setattr(steady_state, "STATIC_LIMIT_TOLERANCE", 1e3)
        with pytest.raises(StaticCouplingLimit) as exc:
            solve_self_consistent(validate(fig2_params(ga_thz=None)))
        assert exc.value.exit_code == 2


class TestBistability:
    def test_three_branches(self):
        states = solve_cubic_branches(_bistable())

        assert len(states) == 3
        x_values = [s.X_B for s in states]
        assert x_values == sorted(x_values)
        assert [s.branch_id for s in states] == [0, 1, 2]

    def test_every_branch_satisfies_the_relations(self):
        vp = _bistable()
        for state in solve_cubic_branches(vp):
            values = residuals(vp, state)
            assert set(values) == {"cavity", "vibration", "ir", "detuning"}
            assert max(values.values()) < 1e-10

    def test_default_branch_is_smallest_displacement(self):
        states = solve_cubic_branches(_bistable())
        chosen = default_branch(states)

        assert chosen.branch_id == 2
        assert abs(chosen.X_B) == min(abs(s.X_B) for s in states)
        # Weakly shifted from Delta0 = 30 THz
        assert 25.0 < chosen.delta_eff < 30.0

    def test_fixed_point_lands_on_default_branch(self):
        vp = _bistable()
        iterated = solve_self_consistent(vp)
        chosen = default_branch(solve_cubic_branches(vp))

        assert iterated.X_B == pytest.approx(chosen.X_B, rel=1e-9)
        assert iterated.delta_eff == pytest.approx(chosen.delta_eff, rel=1e-9)

    @pytest.mark.parametrize("eps_p, count", [(100.0, 1), (500.0, 3), (1000.0, 1)])
    def test_branch_count_along_pump(self, eps_p, count):
        assert len(solve_cubic_branches(_bistable(eps_p))) == count

    def test_scan_over_pump_stays_consistent(self):
        for eps_p in range(100, 1001, 20):
            vp = _bistable(float(eps_p))
            states = solve_cubic_branches(vp)
            assert states
            assert len(states) in (1, 3)
            for state in states:
                assert state.residual < 1e-9


def test_weak_pump_keeps_bare_detuning():
    vp = validate(
        fig2_params(ga_thz=None).model_copy(
            update={"eps_p": 1e-3, "detuning_mode": FixedDelta0(delta0_thz=-30.0)}
        )
    )
    state = solve_self_consistent(vp)
    assert state.delta_eff == pytest.approx(-30.0, abs=1e-9)


def test_monostable_fixed_point_matches_cubic():
    """Blue-detuned Delta0 has a single branch; the iteration must find it."""
    rng = random.Random(2024)
    for _ in range(100):
        params = fig2_params(ga_thz=None).model_copy(
            update={
                "eps_p": rng.uniform(1.0, 100.0),
                "g_a": rng.uniform(0.01, 0.1),
                "n_molecules": rng.uniform(1e5, 1e7),
                "kappa_a": rng.uniform(10.0, 50.0),
                "detuning_mode": FixedDelta0(delta0_thz=-30.0),
            }
        )
        vp = validate(params)
        branches = solve_cubic_branches(vp)
        iterated = solve_self_consistent(vp)

        assert len(branches) == 1
        assert iterated.X_B == pytest.approx(branches[0].X_B, rel=1e-9, abs=1e-14)
        assert iterated.residual < 1e-10


def test_steady_state_for_fixed_delta(fig2_fixed_delta):
    state = steady_state_for(fig2_fixed_delta)
    assert isinstance(fig2_fixed_delta.params.detuning_mode, FixedDelta)
    assert abs(state.calG_a) == pytest.approx(2.981, rel=1e-3)


def test_steady_state_to_dict(fig2_fixed_delta):
    data = solve_self_consistent(fig2_fixed_delta).to_dict()
    assert data["abs_calg_a_thz"] == pytest.approx(2.981, rel=1e-3)
    assert {"a_ss_re", "a_ss_im", "b_ss_re", "x_b", "residual"} <= set(data)


@pytest.mark.parametrize("delta0, eps_p", [(-30.0, 500.0), (30.0, 500.0), (-12.0, 80.0), (45.0, 300.0)])
def test_fixed_delta_reproduces_fixed_delta0(delta0, eps_p):
    """Feeding Delta_eff of a FixedDelta0 solve back as FixedDelta gives the same operating point."""
    base = fig2_params(ga_thz=None).model_copy(update={"kappa_a": 5.0, "g_a": 0.1, "eps_p": eps_p})
    shifted = validate(base.model_copy(update={"detuning_mode": FixedDelta0(delta0_thz=delta0)}))
    state = solve_self_consistent(shifted)
    fixed = validate(base.model_copy(update={"detuning_mode": FixedDelta(delta_thz=state.delta_eff)}))

    assert solve_self_consistent(fixed).X_B == pytest.approx(state.X_B, rel=1e-9)
    point_shifted, point_fixed = operating_point(shifted), operating_point(fixed)
    assert point_fixed.delta == pytest.approx(point_shifted.delta, rel=1e-12)
    assert abs(point_fixed.calG_a - point_shifted.calG_a) <= 1e-9 * abs(point_shifted.calG_a)
    assert solve_response(fixed).T_ac == pytest.approx(solve_response(shifted).T_ac, rel=1e-9)
