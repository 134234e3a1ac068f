"""
Physical parameter set, detuning modes and derived collective couplings.

All frequencies are ordinary frequencies (nu = omega / 2pi) in THz; the
single-molecule couplings g_a, g_c and the signal amplitude eps_ir are given
in GHz and converted on use.
"""
import math
from dataclasses import dataclass
from typing import Annotated, List, Literal, Optional, Tuple, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from src.config.settings import LINEARIZATION_WARNING_RATIO
from src.core.errors import ParameterValidationError, Violation

GHZ_TO_THZ = 1e-3

UNIT_NOTE = (
    "All internal computation uses ordinary frequencies nu = omega/2pi in THz "
    + "(g_a, g_c and eps_ir are entered in GHz and converted). Every implemented "
    + "formula is homogeneous in frequency, so conversion efficiencies are "
    + "identical in nu- and omega-units and stability margins are reported in THz."
)


class FixedDelta(BaseModel):
    """Effective detuning Delta prescribed; the steady state follows directly."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    type: Literal["fixed_delta"] = "fixed_delta"
    delta_thz: float = Field(..., description="Effective detuning Delta/2pi, THz")


class FixedDelta0(BaseModel):
    """Bare detuning Delta0 prescribed; Delta is solved self-consistently."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    type: Literal["fixed_delta0"] = "fixed_delta0"
    delta0_thz: float = Field(..., description="Bare pump detuning Delta0/2pi, THz")


class PrescribedGa(BaseModel):
    """Enhanced coupling |G_a| and Delta prescribed; the steady state is bypassed."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    type: Literal["prescribed_ga"] = "prescribed_ga"
    ga_thz: float = Field(..., description="Enhanced collective coupling |G_a|/2pi, THz")
    delta_thz: float = Field(..., description="Effective detuning Delta/2pi, THz")


DetuningMode = Annotated[
    Union[FixedDelta, FixedDelta0, PrescribedGa], Field(discriminator="type")
]


class SystemParams(BaseModel):
    """Complete parameter set of the molecular optomechanical cavity."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    nu_b: float = Field(..., description="Molecular vibrational frequency, THz")
    nu_c: float = Field(..., description="IR mode frequency, THz")
    kappa_a: float = Field(..., description="VIS mode decay rate, THz")
    kappa_c: float = Field(..., description="IR mode decay rate, THz")
    gamma_B: float = Field(..., description="Collective vibrational decay rate, THz")
    g_a: float = Field(..., description="Single-molecule optomechanical coupling, GHz")
    g_c: float = Field(..., description="Single-molecule bilinear coupling, GHz")
    n_molecules: float = Field(..., description="Number of molecules N (real-valued for sweeps)")
    eps_p: float = Field(..., description="Pump amplitude, THz")
    eps_ir: float = Field(..., description="IR signal amplitude, GHz")
    detuning_mode: DetuningMode = Field(..., description="Operating mode of the detuning")
    nu_p: Optional[float] = Field(None, description="Pump frequency for lab-frame reporting, THz")

    @property
    def eps_ir_thz(self) -> float:
        return self.eps_ir * GHZ_TO_THZ

    @property
    def mode_name(self) -> str:
        return self.detuning_mode.type


@dataclass(frozen=True)
class CollectiveCouplings:
    """Collective couplings G = g * sqrt(N), in THz."""

    G_a: float
    G_c: float


@dataclass(frozen=True)
class ValidatedParams:
    """SystemParams whose invariants have been checked."""

    params: SystemParams
    couplings: CollectiveCouplings
    warnings: Tuple[str, ...] = ()


def _check(params: SystemParams) -> List[Violation]:
    violations: List[Violation] = []

    numbers = {
        name: getattr(params, name)
        for name in (
            "nu_b", "nu_c", "kappa_a", "kappa_c", "gamma_B", "g_a", "g_c",
            "n_molecules", "eps_p", "eps_ir",
        )
    }
    mode = params.detuning_mode
    for name, value in mode.model_dump(exclude={"type"}).items():
        numbers[f"detuning_mode.{name}"] = value
    if params.nu_p is not None:
        numbers["nu_p"] = params.nu_p

    for name, value in numbers.items():
        if not math.isfinite(value):
            violations.append(Violation("NonFiniteValue", name, f"{name} must be finite, got {value}"))
    non_finite = {v.field for v in violations}

    def positive(code: str, *names: str) -> None:
        for name in names:
            if name not in non_finite and numbers[name] <= 0:
                violations.append(Violation(code, name, f"{name} must be > 0, got {numbers[name]}"))

    positive("NonPositiveDecayRate", "kappa_a", "kappa_c", "gamma_B")
    positive("NonPositiveFrequency", "nu_b", "nu_c")

    if "n_molecules" not in non_finite and params.n_molecules < 1:
        violations.append(
            Violation(
                "NonPositiveMoleculeCount",
                "n_molecules",
                f"n_molecules must be >= 1, got {params.n_molecules}",
            )
        )

    for name in ("eps_p", "eps_ir"):
        if name not in non_finite and numbers[name] < 0:
            violations.append(
                Violation("NegativeAmplitude", name, f"{name} must be >= 0, got {numbers[name]}")
            )

    coupling_names = ["g_a", "g_c"]
    if isinstance(mode, PrescribedGa):
        coupling_names.append("detuning_mode.ga_thz")
    for name in coupling_names:
        if name not in non_finite and numbers[name] < 0:
            violations.append(
                Violation("NegativeCoupling", name, f"{name} must be >= 0, got {numbers[name]}")
            )

    return violations


def collective_couplings(params: Union[SystemParams, ValidatedParams]) -> CollectiveCouplings:
    """
    Collective couplings G_a = g_a * sqrt(N), G_c = g_c * sqrt(N) with GHz to THz conversion.

    Args:
        params: Parameter set (validated or not)

    Returns:
        CollectiveCouplings in THz
    """
    p = params.params if isinstance(params, ValidatedParams) else params
    root_n = math.sqrt(p.n_molecules)
    return CollectiveCouplings(
        G_a=p.g_a * GHZ_TO_THZ * root_n,
        G_c=p.g_c * GHZ_TO_THZ * root_n,
    )


def validate(params: SystemParams) -> ValidatedParams:
    """
    Checks every parameter invariant.

    Raises:
        ParameterValidationError: One Violation per failed invariant
    """
    violations = _check(params)
    if violations:
        raise ParameterValidationError(violations)

    warnings: List[str] = []
    if params.eps_ir_thz > LINEARIZATION_WARNING_RATIO * params.eps_p:
        message = (
            f"eps_ir = {params.eps_ir} GHz exceeds {LINEARIZATION_WARNING_RATIO} * eps_p "
            + f"({params.eps_p} THz); the linearized response may not be valid"
        )
        logger.warning(message)
        warnings.append(message)

    return ValidatedParams(params, collective_couplings(params), tuple(warnings))


def ensure_validated(params: Union[SystemParams, ValidatedParams]) -> ValidatedParams:
    if isinstance(params, ValidatedParams):
        return params
    return validate(params)


def unit_note() -> str:
    return UNIT_NOTE


def replace_mode(params: SystemParams, mode: Union[FixedDelta, FixedDelta0, PrescribedGa]) -> SystemParams:
    return params.model_copy(update={"detuning_mode": mode})


def prescribe_ga(params: SystemParams, ga_thz: float) -> SystemParams:
    """
    Switches to PrescribedGa at the given |G_a|, keeping the effective detuning.

    FixedDelta0 has no prescribed effective detuning, so Delta0 is used.
    """
    return replace_mode(params, PrescribedGa(ga_thz=ga_thz, delta_thz=mode_delta(params)))


def mode_delta(params: SystemParams) -> float:
    """Detuning value carried by the mode (Delta, or Delta0 for FixedDelta0)."""
    mode = params.detuning_mode
    if isinstance(mode, FixedDelta0):
        return mode.delta0_thz
    return mode.delta_thz


def with_delta(params: SystemParams, delta_thz: float) -> SystemParams:
    mode = params.detuning_mode
    if isinstance(mode, FixedDelta0):
        return replace_mode(params, FixedDelta0(delta0_thz=delta_thz))
    return replace_mode(params, mode.model_copy(update={"delta_thz": delta_thz}))


def scaled_frequencies(params: SystemParams, factor: float) -> SystemParams:
    """Multiplies every frequency-valued parameter by factor (e.g. 2pi for angular units)."""
    mode = params.detuning_mode
    mode_values = {k: v * factor for k, v in mode.model_dump(exclude={"type"}).items()}
    update = {
        name: getattr(params, name) * factor
        for name in ("nu_b", "nu_c", "kappa_a", "kappa_c", "gamma_B", "g_a", "g_c", "eps_p", "eps_ir")
    }
    update["detuning_mode"] = mode.model_copy(update=mode_values)
    if params.nu_p is not None:
        update["nu_p"] = params.nu_p * factor
    return params.model_copy(update=update)
