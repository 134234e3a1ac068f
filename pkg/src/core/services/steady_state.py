"""
Steady-state mean values of the pumped cavity.

The IR mode and the imaginary part of the vibrational amplitude are eliminated
analytically, which leaves one real unknown X_B = <B> + <B>*. Given X_B every
other mean value follows in closed form.
"""
from dataclasses import dataclass, replace
from typing import Dict, List, Union

from loguru import logger

from src.config.settings import (
    FIXED_POINT_DAMPING,
    FIXED_POINT_MAX_ITERATIONS,
    FIXED_POINT_TOLERANCE,
    STATIC_LIMIT_TOLERANCE,
    STEADY_STATE_RESIDUAL_TOLERANCE,
)
from src.core.errors import NoConvergence, StaticCouplingLimit, UnsupportedMode
from src.core.models.params import (
    FixedDelta,
    FixedDelta0,
    SystemParams,
    ValidatedParams,
    ensure_validated,
)
from src.core.models.results import SteadyState
from src.core.utils.numerics import real_cubic_roots

POLISH_STEPS = 3


def cavity_amplitude(delta: float, eps_p: float, kappa_a: float) -> complex:
    """<a>ss = eps_p / (i*delta + kappa_a)."""
    if kappa_a <= 0:
        raise ValueError(f"kappa_a must be positive, got {kappa_a}")
    return eps_p / complex(kappa_a, delta)


@dataclass(frozen=True)
class _Reduction:
    """Constants of the scalar reduction X_c = -k_c X_B, s X_B = -k_B G_a |a|^2."""

    G_a: float
    G_c: float
    k_c: float
    k_B: float
    s: float


def _reduction(vp: ValidatedParams) -> _Reduction:
    p = vp.params
    G_a, G_c = vp.couplings.G_a, vp.couplings.G_c
    k_c = 2.0 * G_c * p.nu_c / (p.kappa_c**2 + p.nu_c**2)
    k_B = 2.0 * p.nu_b / (p.gamma_B**2 + p.nu_b**2)
    s = 1.0 - k_B * k_c * G_c
    if abs(s) < STATIC_LIMIT_TOLERANCE:
        raise StaticCouplingLimit(s)
    if s < 0.0:
        logger.warning(f"1 - k_B k_c G_c = {s:.3e} < 0: the static equilibrium of vibration and IR mode is unstable")
    return _Reduction(G_a, G_c, k_c, k_B, s)


def _build_state(
    vp: ValidatedParams,
    red: _Reduction,
    x_b: float,
    delta: float,
    branch_id: int = 0,
    converged: bool = True,
    iterations: int = 0,
) -> SteadyState:
    p = vp.params
    a_ss = cavity_amplitude(delta, p.eps_p, p.kappa_a)
    n_a = abs(a_ss) ** 2
    x_c = -red.k_c * x_b
    B_ss = -1j * (red.G_a * n_a + red.G_c * x_c) / complex(p.gamma_B, p.nu_b)
    c_ss = -1j * red.G_c * x_b / complex(p.kappa_c, p.nu_c)
    state = SteadyState(
        a_ss=a_ss,
        B_ss=B_ss,
        c_ss=c_ss,
        delta_eff=delta,
        calG_a=red.G_a * a_ss,
        branch_id=branch_id,
        converged=converged,
        iterations=iterations,
    )
    worst = max(residuals(vp, state).values())
    if worst > STEADY_STATE_RESIDUAL_TOLERANCE:
        logger.warning(f"steady state branch {branch_id} has relative residual {worst:.2e}")
    return replace(state, residual=worst)


def _relative(terms: List[complex]) -> float:
    scale = sum(abs(t) for t in terms)
    if scale == 0.0:
        return 0.0
    return abs(sum(terms)) / scale


def residuals(params: Union[SystemParams, ValidatedParams], state: SteadyState) -> Dict[str, float]:
    """
    Relative residuals of the steady-state relations.

    Each relation is written as a sum of terms equal to zero; its residual is
    |sum| / sum(|term|). FixedDelta0 adds the detuning relation Delta = Delta0 + G_a X_B.
    """
    vp = ensure_validated(params)
    p = vp.params
    G_a, G_c = vp.couplings.G_a, vp.couplings.G_c
    a, B, c = state.a_ss, state.B_ss, state.c_ss
    x_b = 2.0 * B.real
    x_c = 2.0 * c.real

    result = {
        "cavity": _relative([a * complex(p.kappa_a, state.delta_eff), -p.eps_p]),
        "vibration": _relative(
            [B * complex(p.gamma_B, p.nu_b), 1j * G_a * abs(a) ** 2, 1j * G_c * x_c]
        ),
        "ir": _relative([c * complex(p.kappa_c, p.nu_c), 1j * G_c * x_b]),
    }
    mode = p.detuning_mode
    if isinstance(mode, FixedDelta0):
        result["detuning"] = _relative([state.delta_eff, -mode.delta0_thz, -G_a * x_b])
    return result


def _cubic_coefficients(vp: ValidatedParams, red: _Reduction, delta0: float) -> List[float]:
    p = vp.params
    return [
        red.k_B * red.G_a * p.eps_p**2,
        red.s * (delta0**2 + p.kappa_a**2),
        2.0 * red.s * delta0 * red.G_a,
        red.s * red.G_a**2,
    ]


def _polish(coefficients: List[float], x: float) -> float:
    """A few guarded Newton steps on the steady-state cubic."""
    c0, c1, c2, c3 = coefficients
    for _ in range(POLISH_STEPS):
        value = ((c3 * x + c2) * x + c1) * x + c0
        slope = (3.0 * c3 * x + 2.0 * c2) * x + c1
        if value == 0.0 or slope == 0.0:
            break
        candidate = x - value / slope
        if abs(((c3 * candidate + c2) * candidate + c1) * candidate + c0) >= abs(value):
            break
        x = candidate
    return x


def solve_self_consistent(params: Union[SystemParams, ValidatedParams]) -> SteadyState:
    """
    Solves the steady state for the FixedDelta and FixedDelta0 modes.

    FixedDelta evaluates the relations directly. FixedDelta0 iterates
    X <- (1 - d) X + d F(X) from X = 0 with damping d = 0.5; past the static
    limit (s < 0) the default cubic branch is returned instead.

    Raises:
        UnsupportedMode: PrescribedGa has no steady state to solve
        StaticCouplingLimit: s = 1 - k_B k_c G_c vanishes
        NoConvergence: The fixed-point iteration hit its cap
    """
    vp = ensure_validated(params)
    p = vp.params
    mode = p.detuning_mode
    red = _reduction(vp)

    if isinstance(mode, FixedDelta):
        n_a = abs(cavity_amplitude(mode.delta_thz, p.eps_p, p.kappa_a)) ** 2
        x_b = -red.k_B * red.G_a * n_a / red.s
        return _build_state(vp, red, x_b, mode.delta_thz)

    if not isinstance(mode, FixedDelta0):
        raise UnsupportedMode("solve_self_consistent", mode.type)

    if red.s < 0.0:
        return default_branch(solve_cubic_branches(vp))

    delta0 = mode.delta0_thz
    drive = -red.k_B * red.G_a * p.eps_p**2 / red.s

    def update(x: float) -> float:
        detuning = delta0 + red.G_a * x
        return drive / (detuning * detuning + p.kappa_a**2)

    x_b = 0.0
    for iteration in range(1, FIXED_POINT_MAX_ITERATIONS + 1):
        x_next = (1.0 - FIXED_POINT_DAMPING) * x_b + FIXED_POINT_DAMPING * update(x_b)
        step = abs(x_next - x_b)
        x_b = x_next
        if step < FIXED_POINT_TOLERANCE * (1.0 + abs(x_b)):
            break
    else:
        raise NoConvergence(
            "damped fixed-point iteration on X_B did not converge",
            best=x_b,
            residual=abs(update(x_b) - x_b),
            iterations=FIXED_POINT_MAX_ITERATIONS,
        )

    x_b = _polish(_cubic_coefficients(vp, red, delta0), x_b)
    logger.debug(f"fixed point converged after {iteration} iterations, X_B = {x_b:.6e}")
    return _build_state(vp, red, x_b, delta0 + red.G_a * x_b, iterations=iteration)


def solve_cubic_branches(params: Union[SystemParams, ValidatedParams]) -> List[SteadyState]:
    """
    All steady-state branches in FixedDelta0 mode, ascending in X_B.

    Clearing denominators in s X_B ((Delta0 + G_a X_B)^2 + kappa_a^2) = -k_B G_a eps_p^2
    gives a real cubic; every real root is one branch.
    """
    vp = ensure_validated(params)
    mode = vp.params.detuning_mode
    if not isinstance(mode, FixedDelta0):
        raise UnsupportedMode("solve_cubic_branches", mode.type)

    red = _reduction(vp)
    coefficients = _cubic_coefficients(vp, red, mode.delta0_thz)
    roots = real_cubic_roots(*coefficients)
    logger.debug(f"steady-state cubic has {len(roots)} real root(s)")

    states = []
    for branch_id, root in enumerate(roots):
        x_b = _polish(coefficients, root)
        states.append(_build_state(vp, red, x_b, mode.delta0_thz + red.G_a * x_b, branch_id))
    return states


def default_branch(states: List[SteadyState]) -> SteadyState:
    """The branch continuously connected to X_B = 0 at zero pump: smallest |X_B|."""
    if not states:
        raise ValueError("no steady-state branches")
    return min(states, key=lambda s: (abs(s.X_B), s.branch_id))


def steady_state_for(params: Union[SystemParams, ValidatedParams]) -> SteadyState:
    """Default steady state, falling back to the cubic branches when the iteration stalls."""
    vp = ensure_validated(params)
    try:
        return solve_self_consistent(vp)
    except NoConvergence as e:
        if not isinstance(vp.params.detuning_mode, FixedDelta0):
            raise
        logger.warning(f"{e}; falling back to the cubic branches")
        return default_branch(solve_cubic_branches(vp))
