"""
Named presets: fixed sweeps and spectra over the resonant reference set.

Parameters follow the resonance case omega_ir = nu_b = nu_c = 30 THz with
Delta = -nu_b, kappa_a = 30, kappa_c = 0.5, gamma_B = 0.16, eps_p = 500 THz,
g_c = 0.1 GHz and N = 1e7. Grids are fixed here so outputs stay comparable
between runs.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from loguru import logger

from src.config.settings import PRESET_POINTS_1D, PRESET_POINTS_2D, PRESET_SPECTRUM_POINTS
from src.core.errors import UnknownCommand
from src.core.models.params import FixedDelta, PrescribedGa, SystemParams, validate
from src.core.models.results import SpectrumCurve, SweepAxis, SweepRecord, SweepResult
from src.core.services.analysis import (
    amplification_band,
    linspace,
    logspace,
    refine_peak,
    sweep,
    tac_spectrum,
)

PRESET_NAMES = ("fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "red2a")

FIG2A_GA_RANGE = (0.0, 4.0)
FIG2B_LOG10_N_RANGE = (3.0, 10.0)
FIG3_KAPPA_A_RANGE = (2.0, 30.0)
FIG3_KAPPA_C_RANGE = (0.1, 3.0)
FIG4A_GA_VALUES = (3.0, 3.2, 3.4)
FIG4A_OMEGA_RANGE = (29.0, 31.0)
FIG4B_GA_RANGE = (0.1, 4.0)

FIG2B_G_A_GHZ = 0.08
# g_a only enters through N in the fig2b sweep; elsewhere |G_a| is prescribed
DEFAULT_G_A_GHZ = 0.08
DEFAULT_EPS_IR_GHZ = 1e-3


def fig2_params(ga_thz: Optional[float] = 3.48, delta_thz: float = -30.0) -> SystemParams:
    """The resonant reference set, in PrescribedGa mode unless ga_thz is None (then FixedDelta)."""
    mode = (
        FixedDelta(delta_thz=delta_thz)
        if ga_thz is None
        else PrescribedGa(ga_thz=ga_thz, delta_thz=delta_thz)
    )
    return SystemParams(
        nu_b=30.0,
        nu_c=30.0,
        kappa_a=30.0,
        kappa_c=0.5,
        gamma_B=0.16,
        g_a=DEFAULT_G_A_GHZ,
        g_c=0.1,
        n_molecules=1e7,
        eps_p=500.0,
        eps_ir=DEFAULT_EPS_IR_GHZ,
        detuning_mode=mode,
    )


@dataclass(frozen=True)
class PresetBundle:
    """Everything a figure preset produces."""

    name: str
    sweeps: Tuple[SweepResult, ...] = ()
    spectra: Tuple[SpectrumCurve, ...] = ()
    params: Dict[str, object] = field(default_factory=dict)

    @property
    def primary(self) -> Optional[SweepResult]:
        return self.sweeps[0] if self.sweeps else None


def _select(result: SweepResult, name: str, columns: Tuple[str, ...]) -> SweepResult:
    return SweepResult(name, result.axes, columns, result.records)


def _fig2a(points: int, workers: int, method: str, delta: float = -30.0, name: str = "fig2a") -> PresetBundle:
    params = fig2_params(delta_thz=delta)
    result = sweep(
        params,
        [("ga", linspace(*FIG2A_GA_RANGE, points))],
        metrics=("t_ac", "stability"),
        method=method,
        workers=workers,
        name=name,
    )
    return PresetBundle(name, (result,), params=params.model_dump(mode="json"))


def _fig2b(points: int, workers: int, method: str) -> PresetBundle:
    params = fig2_params(ga_thz=None).model_copy(update={"g_a": FIG2B_G_A_GHZ})
    result = sweep(
        params,
        [("N", logspace(*FIG2B_LOG10_N_RANGE, points))],
        metrics=("t_ac", "stability"),
        method=method,
        workers=workers,
        name="fig2b",
    )
    return PresetBundle("fig2b", (result,), params=params.model_dump(mode="json"))


def _fig3(name: str, points: int, workers: int, method: str, reoptimize: bool) -> PresetBundle:
    params = fig2_params()
    full = sweep(
        params,
        [
            ("kappa_a", linspace(*FIG3_KAPPA_A_RANGE, points)),
            ("kappa_c", linspace(*FIG3_KAPPA_C_RANGE, points)),
        ],
        metrics=("optimal", "t_ac", "stability"),
        method=method,
        workers=workers,
        reoptimize=reoptimize,
        name=name,
    )
    extra = ("ga_opt_numeric_thz", "t_ac_max_numeric") if reoptimize else ()
    if name == "fig3a":
        columns = ("kappa_a_thz", "kappa_c_thz", "t_ac", "optimal_coupling_thz") + extra
    else:
        columns = ("kappa_a_thz", "kappa_c_thz", "optimal_coupling_thz") + extra
    columns += ("stable", "spectral_abscissa_thz", "error")
    return PresetBundle(name, (_select(full, name, columns),), params=params.model_dump(mode="json"))


def _fig4a(points: int, workers: int, method: str) -> PresetBundle:
    params = fig2_params()
    vp = validate(params)
    spectra: List[SpectrumCurve] = []
    records: List[SweepRecord] = []
    for i, ga in enumerate(FIG4A_GA_VALUES):
        curve = tac_spectrum(
            vp, complex(ga), omega_range=FIG4A_OMEGA_RANGE, points=points, method=method, workers=workers
        )
        spectra.append(curve)
        omega_peak, t_peak = refine_peak(vp, complex(ga), curve, method=method)
        band = amplification_band(curve)
        records.append(
            SweepRecord(
                (i,),
                {
                    "ga_thz": ga,
                    "omega_at_max_thz": omega_peak,
                    "t_ac_max": t_peak,
                    "band_low_thz": band[0] if band else None,
                    "band_high_thz": band[1] if band else None,
                    "stable": curve.stable,
                },
            )
        )
        logger.info(f"fig4a |G_a| = {ga} THz: peak T_ac = {t_peak:.6g} at {omega_peak:.6g} THz")

    peaks = SweepResult(
        "fig4a_peaks",
        (SweepAxis("ga", FIG4A_GA_VALUES),),
        ("ga_thz", "omega_at_max_thz", "t_ac_max", "band_low_thz", "band_high_thz", "stable"),
        tuple(records),
    )
    return PresetBundle("fig4a", (peaks,), tuple(spectra), params=params.model_dump(mode="json"))


def _fig4b(points: int, workers: int, method: str) -> PresetBundle:
    params = fig2_params()
    result = sweep(
        params,
        [("ga", linspace(*FIG4B_GA_RANGE, points))],
        metrics=("stability", "bandwidth"),
        method=method,
        workers=workers,
        name="fig4b",
    )
    columns = ("ga_thz", "bandwidth_thz", "stable", "spectral_abscissa_thz", "error")
    return PresetBundle("fig4b", (_select(result, "fig4b", columns),), params=params.model_dump(mode="json"))


def figure_preset(
    name: str,
    points: Optional[int] = None,
    workers: int = 1,
    method: Optional[str] = None,
    reoptimize: bool = False,
) -> PresetBundle:
    """
    Runs the sweep or spectra behind a figure.

    Args:
        name: One of PRESET_NAMES
        points: Grid resolution override (per axis for 2D presets)
        workers: Worker processes
        method: Spectrum method override; fig4b uses the closed form by default
        reoptimize: Also maximize T_ac numerically in each fig3 cell

    Raises:
        UnknownCommand: Unknown preset name
    """
    if name not in PRESET_NAMES:
        raise UnknownCommand(name)
    logger.info(f"running preset {name}")

    if name == "fig2a":
        return _fig2a(points or PRESET_POINTS_1D, workers, method or "exact")
    if name == "red2a":
        return _fig2a(points or PRESET_POINTS_1D, workers, method or "exact", delta=30.0, name="red2a")
    if name == "fig2b":
        return _fig2b(points or PRESET_POINTS_1D, workers, method or "exact")
    if name in ("fig3a", "fig3b"):
        return _fig3(name, points or PRESET_POINTS_2D, workers, method or "exact", reoptimize)
    if name == "fig4a":
        return _fig4a(points or PRESET_SPECTRUM_POINTS, workers, method or "exact")
    return _fig4b(points or PRESET_POINTS_1D, workers, method or "closed_form")
