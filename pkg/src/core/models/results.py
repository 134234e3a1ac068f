"""
Immutable result types produced by the solvers and consumed by the writers.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from src.core.utils.numerics import RealPolynomial

CellValue = Optional[Any]


def complex_parts(prefix: str, value: complex) -> Dict[str, float]:
    return {f"{prefix}_re": value.real, f"{prefix}_im": value.imag}


@dataclass(frozen=True)
class SteadyState:
    """
    Self-consistent mean values of the three modes.

    calG_a is the pump-enhanced coupling G_a * <a>ss in THz; residual is the largest
    relative residual of the three steady-state relations.
    """

    a_ss: complex
    B_ss: complex
    c_ss: complex
    delta_eff: float
    calG_a: complex
    branch_id: int = 0
    converged: bool = True
    iterations: int = 0
    residual: float = 0.0

    @property
    def X_B(self) -> float:
        return 2.0 * self.B_ss.real

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "branch_id": self.branch_id,
            "delta_eff_thz": self.delta_eff,
            "abs_a_ss": abs(self.a_ss),
            "abs_calg_a_thz": abs(self.calG_a),
            "x_b": self.X_B,
            "converged": self.converged,
            "iterations": self.iterations,
            "residual": self.residual,
        }
        data.update(complex_parts("a_ss", self.a_ss))
        data.update(complex_parts("b_ss", self.B_ss))
        data.update(complex_parts("c_ss", self.c_ss))
        data.update(complex_parts("calg_a_thz", self.calG_a))
        return data


@dataclass(frozen=True)
class ResponseComponents:
    """Sideband amplitudes of the linear response at one IR frequency."""

    omega_ir: float
    a_plus: complex
    a_minus: complex
    c_plus: complex
    c_minus: complex
    B_plus: complex
    B_minus: complex
    a_out_plus: complex
    a_out_minus: complex
    t_ac: complex
    T_ac: float
    T_ac_antistokes: float
    stokes_frequency_thz: Optional[float] = None
    antistokes_frequency_thz: Optional[float] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "omega_ir_thz": self.omega_ir,
            "t_ac_abs2": self.T_ac,
            "t_ac_antistokes_abs2": self.T_ac_antistokes,
            "stokes_frequency_thz": self.stokes_frequency_thz,
            "antistokes_frequency_thz": self.antistokes_frequency_thz,
        }
        for name in ("a_plus", "a_minus", "c_plus", "c_minus", "B_plus", "B_minus",
                     "a_out_plus", "a_out_minus", "t_ac"):
            data.update(complex_parts(name.lower(), getattr(self, name)))
        return data


@dataclass(frozen=True)
class StabilityReport:
    """
    Verdict of the linearized fluctuation dynamics d/dt v = A v.

    routh_stable is None when the Routh array is inconclusive (a whole row vanishes).
    """

    quadrature_matrix: Tuple[Tuple[float, ...], ...]
    char_poly: RealPolynomial
    eigenvalues: Tuple[complex, ...]
    routh_stable: Optional[bool]
    spectral_abscissa: float
    methods_agree: bool
    margin_note: bool

    @property
    def stable(self) -> bool:
        if self.routh_stable is not None and not self.margin_note:
            return self.routh_stable
        return self.spectral_abscissa < 0.0

    @property
    def verdict(self) -> str:
        if self.margin_note:
            return "MARGINAL"
        return "STABLE" if self.stable else "UNSTABLE"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "routh_stable": self.routh_stable,
            "spectral_abscissa_thz": self.spectral_abscissa,
            "methods_agree": self.methods_agree,
            "margin_note": self.margin_note,
            "char_poly": list(self.char_poly.coefficients),
            "eigenvalues": [[z.real, z.imag] for z in self.eigenvalues],
            "quadrature_matrix": [list(row) for row in self.quadrature_matrix],
        }


@dataclass(frozen=True)
class SpectrumCurve:
    """T_ac over an ascending omega_ir grid; None marks a pole (divergence)."""

    omega_ir: Tuple[float, ...]
    T_ac: Tuple[Optional[float], ...]
    ga_thz: float
    stable: Optional[bool] = None
    label: str = ""
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.omega_ir) != len(self.T_ac):
            raise ValueError("grid and values differ in length")
        if any(b <= a for a, b in zip(self.omega_ir, self.omega_ir[1:])):
            raise ValueError("omega_ir grid must be strictly ascending")

    @property
    def poles(self) -> List[float]:
        return [w for w, t in zip(self.omega_ir, self.T_ac) if t is None]

    def finite_points(self) -> Tuple[List[float], List[float]]:
        xs = [w for w, t in zip(self.omega_ir, self.T_ac) if t is not None]
        ys = [t for t in self.T_ac if t is not None]
        return xs, ys

    def peak(self) -> Tuple[int, float, float]:
        """Grid maximum as (index, omega_ir, T_ac), ignoring poles."""
        best = -1
        for i, t in enumerate(self.T_ac):
            if t is not None and (best < 0 or t > self.T_ac[best]):  # type: ignore[operator]
                best = i
        if best < 0:
            raise ValueError("spectrum has no finite samples")
        return best, self.omega_ir[best], float(self.T_ac[best])  # type: ignore[arg-type]

    def to_rows(self) -> List[Dict[str, CellValue]]:
        return [
            {
                "ga_thz": self.ga_thz,
                "omega_ir_thz": w,
                "t_ac": t,
                "pole": t is None,
                "stable": self.stable,
            }
            for w, t in zip(self.omega_ir, self.T_ac)
        ]


@dataclass(frozen=True)
class SweepRecord:
    """One grid point: axis coordinates, computed metrics and an optional error."""

    index: Tuple[int, ...]
    values: Dict[str, CellValue]
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class SweepResult:
    """Records of a 1D or 2D sweep in grid-index (row-major) order."""

    name: str
    axes: Tuple[SweepAxis, ...]
    columns: Tuple[str, ...]
    records: Tuple[SweepRecord, ...]

    def __post_init__(self):
        expected = 1
        for axis in self.axes:
            expected *= len(axis.values)
        if expected != len(self.records):
            raise ValueError(f"sweep grid has {expected} points but {len(self.records)} records")

    def column(self, name: str) -> List[CellValue]:
        return [r.values.get(name) for r in self.records]

    @property
    def errors(self) -> Dict[str, int]:
        summary: Dict[str, int] = {}
        for record in self.records:
            if record.error:
                kind = record.error.split(":", 1)[0]
                summary[kind] = summary.get(kind, 0) + 1
        return summary

    def stable_peak(self, metric: str = "t_ac") -> Optional[SweepRecord]:
        """
        Record with the largest metric among error-free points flagged stable.

        Unstable points stay in the result but a gain past the instability is not physical.
        """
        candidates = [
            r for r in self.records
            if r.error is None and r.values.get("stable") is True and isinstance(r.values.get(metric), float)
        ]
        if not candidates:
            return None
        return max(candidates, key=lambda r: r.values[metric])

    def to_rows(self) -> List[Dict[str, CellValue]]:
        rows = []
        for record in self.records:
            row = {name: record.values.get(name) for name in self.columns if name != "error"}
            if "error" in self.columns:
                row["error"] = record.error
            rows.append(row)
        return rows


@dataclass(frozen=True)
class RunManifest:
    """Sidecar describing how an output file was produced."""

    command: str
    params: Dict[str, Any]
    tool_version: str
    outputs: Tuple[str, ...]
    errors: Dict[str, int] = field(default_factory=dict)
    options: Dict[str, Any] = field(default_factory=dict)
    created_at: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "tool_version": self.tool_version,
            "params": self.params,
            "options": self.options,
            "outputs": list(self.outputs),
            "errors": self.errors,
            "created_at": self.created_at,
        }
