"""
Linear response of the cavity to a weak IR signal.

The fluctuation equations are solved exactly as a 6x6 complex system for the
sideband amplitudes; the closed forms for the Stokes amplitude, the resonant
conversion coefficient and the optimal coupling are evaluated alongside.
"""
import cmath
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from src.config.settings import DIVERGENCE_RELATIVE_THRESHOLD
from src.core.errors import (
    Diverges,
    ParameterValidationError,
    SingularMatrix,
    Violation,
)
from src.core.models.params import (
    FixedDelta0,
    PrescribedGa,
    SystemParams,
    ValidatedParams,
    ensure_validated,
)
from src.core.models.results import ResponseComponents, SteadyState
from src.core.services.steady_state import steady_state_for
from src.core.utils.numerics import ComplexMatrix, solve_complex_linear

# Unknown ordering of the response system: (a+, a-*, c+, c-*, B+, B-*)
A_PLUS, A_MINUS_CONJ, C_PLUS, C_MINUS_CONJ, B_PLUS, B_MINUS_CONJ = range(6)


@dataclass(frozen=True)
class OperatingPoint:
    """Linearization point: enhanced coupling G_a <a>ss (THz) and effective detuning (THz)."""

    calG_a: complex
    delta: float


def operating_point(
    params: Union[SystemParams, ValidatedParams],
    ss: Optional[SteadyState] = None,
    calG_a: Optional[complex] = None,
) -> OperatingPoint:
    """
    Resolves the linearization point.

    PrescribedGa takes |G_a| with zero phase and the prescribed Delta. The other
    modes use the given steady state, or solve the default one. An explicit
    calG_a overrides the coupling but keeps the detuning.
    """
    vp = ensure_validated(params)
    mode = vp.params.detuning_mode
    if isinstance(mode, PrescribedGa):
        point = OperatingPoint(complex(mode.ga_thz), mode.delta_thz)
    else:
        state = ss if ss is not None else steady_state_for(vp)
        point = OperatingPoint(state.calG_a, state.delta_eff)
    if calG_a is not None:
        point = OperatingPoint(complex(calG_a), point.delta)
    return point


def effective_delta(params: Union[SystemParams, ValidatedParams]) -> float:
    vp = ensure_validated(params)
    mode = vp.params.detuning_mode
    if isinstance(mode, FixedDelta0):
        return steady_state_for(vp).delta_eff
    return mode.delta_thz


def drift_matrix_complex(params: Union[SystemParams, ValidatedParams], point: OperatingPoint) -> ComplexMatrix:
    """
    Drift of (da, da+, dc, dc+, dB, dB+) in the linearized fluctuation equations.

    No rotating-wave approximation: every counter-rotating coupling is kept.
    """
    vp = ensure_validated(params)
    p = vp.params
    G = point.calG_a
    Gs = G.conjugate()
    Gc = vp.couplings.G_c
    delta = point.delta
    i = 1j

    rows = [
        [-(i * delta + p.kappa_a), 0, 0, 0, -i * G, -i * G],
        [0, i * delta - p.kappa_a, 0, 0, i * Gs, i * Gs],
        [0, 0, -(i * p.nu_c + p.kappa_c), 0, -i * Gc, -i * Gc],
        [0, 0, 0, i * p.nu_c - p.kappa_c, i * Gc, i * Gc],
        [-i * Gs, -i * G, -i * Gc, -i * Gc, -(i * p.nu_b + p.gamma_B), 0],
        [i * Gs, i * G, i * Gc, i * Gc, 0, i * p.nu_b - p.gamma_B],
    ]
    return ComplexMatrix.from_rows(rows)


def assemble_response_system(
    params: Union[SystemParams, ValidatedParams],
    ss: Optional[SteadyState],
    omega_ir: float,
    calG_a: Optional[complex] = None,
) -> Tuple[ComplexMatrix, List[complex]]:
    """
    Builds M(omega_ir) and the drive f so that M u + f = 0.

    Substituting <do> = o+ e^{-i w t} + o- e^{i w t} into the fluctuation
    equations and their conjugates and matching e^{-i w t} terms gives
    M = D + i w I over u = (a+, a-*, c+, c-*, B+, B-*); f carries eps_ir in the c+ row.

    Returns:
        Tuple of the 6x6 matrix and the drive vector
    """
    vp = ensure_validated(params)
    point = operating_point(vp, ss, calG_a)
    drift = drift_matrix_complex(vp, point).to_rows()
    for k in range(6):
        drift[k][k] += 1j * omega_ir
    drive = [0j] * 6
    drive[C_PLUS] = complex(vp.params.eps_ir_thz)
    return ComplexMatrix.from_rows(drift), drive


def _require_signal(vp: ValidatedParams) -> None:
    if vp.params.eps_ir <= 0:
        raise ParameterValidationError(
            [Violation("NonPositiveAmplitude", "eps_ir", "eps_ir must be > 0 to define T_ac")]
        )


def solve_response(
    params: Union[SystemParams, ValidatedParams],
    ss: Optional[SteadyState] = None,
    omega_ir: Optional[float] = None,
    calG_a: Optional[complex] = None,
) -> ResponseComponents:
    """
    Sideband amplitudes, output fields and conversion efficiencies at omega_ir.

    Args:
        params: Parameter set
        ss: Steady state to linearize around (solved when omitted)
        omega_ir: IR signal frequency in THz (defaults to nu_b)
        calG_a: Optional override of the enhanced coupling

    Raises:
        Diverges: The response matrix is singular (gain pole) at omega_ir
    """
    vp = ensure_validated(params)
    _require_signal(vp)
    p = vp.params
    w = p.nu_b if omega_ir is None else omega_ir

    matrix, drive = assemble_response_system(vp, ss, w, calG_a)
    try:
        u = solve_complex_linear(matrix, [-f for f in drive])
    except SingularMatrix as e:
        raise Diverges(w, str(e)) from e

    a_plus = u[A_PLUS]
    a_minus = u[A_MINUS_CONJ].conjugate()
    norm = 2.0 * math.sqrt(p.kappa_a * p.kappa_c) / p.eps_ir_thz
    t_ac = norm * a_minus
    out = math.sqrt(2.0 * p.kappa_a)

    components = ResponseComponents(
        omega_ir=w,
        a_plus=a_plus,
        a_minus=a_minus,
        c_plus=u[C_PLUS],
        c_minus=u[C_MINUS_CONJ].conjugate(),
        B_plus=u[B_PLUS],
        B_minus=u[B_MINUS_CONJ].conjugate(),
        a_out_plus=out * a_plus,
        a_out_minus=out * a_minus,
        t_ac=t_ac,
        T_ac=abs(t_ac) ** 2,
        T_ac_antistokes=abs(norm * a_plus) ** 2,
        stokes_frequency_thz=None if p.nu_p is None else p.nu_p - w,
        antistokes_frequency_thz=None if p.nu_p is None else p.nu_p + w,
    )
    if not all(cmath.isfinite(z) for z in (a_plus, a_minus, t_ac)):
        raise Diverges(w, "non-finite response")
    return components


def stokes_closed_form(
    params: Union[SystemParams, ValidatedParams],
    calG_a: complex,
    omega_ir: float,
    delta: Optional[float] = None,
) -> complex:
    """
    Closed-form Stokes amplitude a- for the near-resonant case.

    a- = 2i eps_ir G G_c D (D - w + i k_a)(D - w + i k_c) / A(w) with
    A(w) = {[D^2 - (w - i k_c)^2][D^2 - (w - i g_B)^2] - 4 G_c^2 D^2}[D^2 - (w - i k_a)^2]
           + 4 |G|^2 D^2 [D^2 - (w - i k_c)^2].

    Raises:
        Diverges: |A(w)| is below 1e-12 of its largest term
    """
    vp = ensure_validated(params)
    p = vp.params
    d = effective_delta(vp) if delta is None else delta
    Gc = vp.couplings.G_c
    G = complex(calG_a)
    w = omega_ir
    d2 = d * d

    lorentz_c = d2 - (w - 1j * p.kappa_c) ** 2
    lorentz_b = d2 - (w - 1j * p.gamma_B) ** 2
    lorentz_a = d2 - (w - 1j * p.kappa_a) ** 2
    term_cb = lorentz_c * lorentz_b * lorentz_a
    term_bilinear = -4.0 * Gc * Gc * d2 * lorentz_a
    term_pump = 4.0 * abs(G) ** 2 * d2 * lorentz_c
    denominator = term_cb + term_bilinear + term_pump

    scale = max(abs(term_cb), abs(term_bilinear), abs(term_pump))
    if scale == 0.0 or abs(denominator) < DIVERGENCE_RELATIVE_THRESHOLD * scale:
        raise Diverges(w, "closed-form denominator vanishes")

    numerator = (
        2j * p.eps_ir_thz * G * Gc * d * (d - w + 1j * p.kappa_a) * (d - w + 1j * p.kappa_c)
    )
    return numerator / denominator


def closed_form_tac(
    params: Union[SystemParams, ValidatedParams],
    calG_a: complex,
    omega_ir: float,
    delta: Optional[float] = None,
) -> float:
    """T_ac = |2 sqrt(k_a k_c) a- / eps_ir|^2 from the closed-form Stokes amplitude."""
    vp = ensure_validated(params)
    _require_signal(vp)
    p = vp.params
    a_minus = stokes_closed_form(vp, calG_a, omega_ir, delta)
    return abs(2.0 * math.sqrt(p.kappa_a * p.kappa_c) * a_minus / p.eps_ir_thz) ** 2


def _etas(p: SystemParams, delta: float) -> Tuple[complex, complex, complex]:
    if delta == 0.0:
        raise Diverges(p.nu_b, "eta factors need a nonzero detuning")
    return (
        1.0 + 1j * p.kappa_a / (2.0 * delta),
        1.0 + 1j * p.kappa_c / (2.0 * delta),
        1.0 + 1j * p.gamma_B / (2.0 * delta),
    )


def resonant_tac(
    params: Union[SystemParams, ValidatedParams],
    calG_a: complex,
    delta: Optional[float] = None,
) -> complex:
    """
    Conversion coefficient for omega_ir = nu_b = nu_c:

    t_ac = 2 sqrt(k_a k_c) G G_c / (G_c^2 k_a / eta_c - |G|^2 k_c / eta_a + k_a k_c g_B eta_B)
    with eta_x = 1 + i k_x / (2 Delta).
    """
    vp = ensure_validated(params)
    p = vp.params
    d = effective_delta(vp) if delta is None else delta
    eta_a, eta_c, eta_b = _etas(p, d)
    Gc = vp.couplings.G_c
    G = complex(calG_a)

    denominator = (
        Gc * Gc * p.kappa_a / eta_c
        - abs(G) ** 2 * p.kappa_c / eta_a
        + p.kappa_a * p.kappa_c * p.gamma_B * eta_b
    )
    scale = max(Gc * Gc * p.kappa_a, abs(G) ** 2 * p.kappa_c, p.kappa_a * p.kappa_c * p.gamma_B)
    if abs(denominator) < DIVERGENCE_RELATIVE_THRESHOLD * scale:
        raise Diverges(p.nu_b, "resonant conversion coefficient has a vanishing denominator")
    return 2.0 * math.sqrt(p.kappa_a * p.kappa_c) * G * Gc / denominator


def optimal_coupling(params: Union[SystemParams, ValidatedParams], delta: Optional[float] = None) -> float:
    """
    |G_a*| = sqrt((G_c^2 |1/eta_c| + k_c g_B |eta_B|) k_a |eta_a| / k_c), in THz.
    """
    vp = ensure_validated(params)
    p = vp.params
    d = effective_delta(vp) if delta is None else delta
    eta_a, eta_c, eta_b = _etas(p, d)
    Gc = vp.couplings.G_c
    return math.sqrt(
        (Gc * Gc / abs(eta_c) + p.kappa_c * p.gamma_B * abs(eta_b)) * p.kappa_a * abs(eta_a) / p.kappa_c
    )
