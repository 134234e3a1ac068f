"""
Text rendering of results for the terminal.
"""
from typing import Iterable, List, Optional, Sequence, Tuple

from src.core.models.params import ValidatedParams, unit_note
from src.core.models.results import ResponseComponents, StabilityReport, SteadyState, SweepResult


def format_number(value: Optional[float], digits: int = 6) -> str:
    if value is None:
        return "-"
    return f"{value:.{digits}g}"


def format_complex(value: complex, digits: int = 6) -> str:
    sign = "+" if value.imag >= 0 else "-"
    return f"{value.real:.{digits}g} {sign} {abs(value.imag):.{digits}g}i"


def format_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    """Left-aligned columns separated by two spaces."""
    body = [list(map(str, row)) for row in rows]
    widths = [len(h) for h in header]
    for row in body:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def format_params(vp: ValidatedParams) -> str:
    """
    Resolved parameter set with the collective couplings.

    Args:
        vp: Validated parameters

    Returns:
        str: Multi-line listing
    """
    p = vp.params
    mode = p.detuning_mode
    mode_fields = ", ".join(
        f"{k}={format_number(v)}" for k, v in mode.model_dump().items() if k != "type"
    )
    lines: List[Tuple[str, str]] = [
        ("nu_b", f"{format_number(p.nu_b)} THz"),
        ("nu_c", f"{format_number(p.nu_c)} THz"),
        ("kappa_a", f"{format_number(p.kappa_a)} THz"),
        ("kappa_c", f"{format_number(p.kappa_c)} THz"),
        ("gamma_B", f"{format_number(p.gamma_B)} THz"),
        ("g_a", f"{format_number(p.g_a)} GHz"),
        ("g_c", f"{format_number(p.g_c)} GHz"),
        ("N", format_number(p.n_molecules)),
        ("eps_p", f"{format_number(p.eps_p)} THz"),
        ("eps_ir", f"{format_number(p.eps_ir)} GHz"),
        ("detuning mode", f"{mode.type} ({mode_fields})"),
    ]
    if p.nu_p is not None:
        lines.append(("nu_p", f"{format_number(p.nu_p)} THz"))
    lines += [
        ("G_a", f"{format_number(vp.couplings.G_a)} THz"),
        ("G_c", f"{format_number(vp.couplings.G_c)} THz"),
    ]
    width = max(len(name) for name, _ in lines)
    text = "\n".join(f"{name.ljust(width)} : {value}" for name, value in lines)
    for warning in vp.warnings:
        text += f"\nwarning: {warning}"
    return f"{text}\n\n{unit_note()}"


def format_steady_states(states: Sequence[SteadyState], default_id: Optional[int] = None) -> str:
    header = ("branch", "Delta [THz]", "|<a>ss|", "<B>ss", "|G_a<a>ss| [THz]", "residual")
    rows = []
    for s in states:
        marker = "*" if s.branch_id == default_id and len(states) > 1 else ""
        rows.append(
            (
                f"{s.branch_id}{marker}",
                format_number(s.delta_eff, 9),
                format_number(abs(s.a_ss)),
                format_complex(s.B_ss),
                format_number(abs(s.calG_a)),
                format_number(s.residual, 2),
            )
        )
    text = format_table(header, rows)
    if len(states) > 1:
        text += "\n* default branch (smallest |X_B|)"
    return text


def format_response(
    response: ResponseComponents,
    closed_form: Optional[float] = None,
    resonant: Optional[float] = None,
) -> str:
    lines = [
        f"omega_ir            : {format_number(response.omega_ir, 9)} THz",
        f"t_ac                : {format_complex(response.t_ac)}",
        f"T_ac (Stokes)       : {format_number(response.T_ac)}",
        f"T_ac (anti-Stokes)  : {format_number(response.T_ac_antistokes)}",
    ]
    if closed_form is not None:
        lines.append(f"T_ac closed form    : {format_number(closed_form)}")
    if resonant is not None:
        lines.append(f"T_ac resonant       : {format_number(resonant)}")
    if response.stokes_frequency_thz is not None:
        lines.append(f"Stokes line         : {format_number(response.stokes_frequency_thz, 9)} THz")
        lines.append(f"anti-Stokes line    : {format_number(response.antistokes_frequency_thz, 9)} THz")
    return "\n".join(lines)


def format_stability(report: StabilityReport) -> str:
    """One-line verdict, e.g. 'UNSTABLE, spectral abscissa +0.0123 THz'."""
    text = f"{report.verdict}, spectral abscissa {report.spectral_abscissa:+.6g} THz"
    if report.routh_stable is None:
        text += " (Routh array inconclusive)"
    elif not report.methods_agree:
        text += " (Routh-Hurwitz and eigenvalues disagree)"
    return text


def format_sweep_summary(result: SweepResult, paths: Sequence[str]) -> str:
    lines = [f"{result.name}: {len(result.records)} record(s)"]
    for kind, count in sorted(result.errors.items()):
        lines.append(f"  {count} point(s) with {kind}")
    if "t_ac" in result.columns and "stable" in result.columns:
        unstable = sum(1 for r in result.records if r.values.get("stable") is False)
        peak = result.stable_peak()
        if peak is not None:
            coords = ", ".join(f"{axis.name}={axis.values[i]:g}" for axis, i in zip(result.axes, peak.index))
            lines.append(f"  stable peak T_ac = {peak.values['t_ac']:.6g} at {coords}")
        if unstable:
            lines.append(f"  {unstable} unstable point(s) flagged, excluded from the peak")
    lines += [f"  -> {path}" for path in paths]
    return "\n".join(lines)
