"""
Argument parsing and subcommand handlers.

Every handler takes the parsed namespace and returns an exit code; library errors
propagate to run(), which maps them to 1 (validation) or 2 (numeric failure).
"""
import argparse
import re
from pathlib import Path
from typing import Any, Callable, Dict, List, NoReturn, Optional, Sequence, Tuple

from loguru import logger

from src.config.settings import KNOWN_LOG_LEVELS, LOG_LEVEL, OUTPUT_DIR, get_default_workers
from src.cli.config_loader import apply_overrides, load_config
from src.cli.formatters import (
    format_number,
    format_params,
    format_response,
    format_stability,
    format_steady_states,
    format_sweep_summary,
)
from src.cli.writers import Writable, write_csv, write_json, write_manifest
from src.core.errors import BadFlag, Diverges, UnknownCommand
from src.core.models.params import FixedDelta0, ValidatedParams, validate
from src.core.services.analysis import (
    AXIS_COLUMNS,
    METHODS,
    METRIC_COLUMNS,
    amplification_band,
    bandwidth,
    linspace,
    logspace,
    refine_peak,
    sweep,
    tac_spectrum,
)
from src.core.services.presets import PRESET_NAMES, figure_preset
from src.core.services.response import closed_form_tac, operating_point, solve_response
from src.core.services.stability import stability_report
from src.core.services.steady_state import default_branch, solve_cubic_branches, solve_self_consistent

_ARGUMENT_RE = re.compile(r"argument ([^:]+): (.*)")
_CHOICE_RE = re.compile(r"invalid choice: '([^']*)'")


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises library errors instead of exiting."""

    def error(self, message: str) -> NoReturn:
        if message.startswith("unrecognized arguments:"):
            token = message.split(":", 1)[1].split()[0]
            raise BadFlag(token, "unrecognized argument")
        match = _ARGUMENT_RE.match(message)
        if match:
            name, reason = match.groups()
            choice = _CHOICE_RE.search(reason)
            if name == "command" and choice:
                raise UnknownCommand(choice.group(1))
            raise BadFlag(name.split("/")[0], reason)
        if "required" in message and "command" in message:
            raise BadFlag("command", "missing subcommand")
        raise BadFlag(" ".join(message.split()[-1:]), message)


def _common_options() -> argparse.ArgumentParser:
    common = CliParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON parameter file")
    common.add_argument("--out", type=Path, help="Output directory for CSV/JSON files")
    common.add_argument("--json", action="store_true", help="Also write a JSON mirror of each CSV")
    common.add_argument("--ga", type=float, help="Prescribe |G_a<a>ss| in THz")
    common.add_argument("--delta", type=float, help="Override the detuning (Delta or Delta0) in THz")
    common.add_argument("--omega-ir", dest="omega_ir", type=float, help="IR signal frequency in THz")
    common.add_argument("--points", type=int, help="Grid resolution")
    common.add_argument("--workers", type=int, default=get_default_workers(), help="Worker processes")
    common.add_argument("--method", choices=METHODS, default=None, help="Spectrum evaluation method")
    common.add_argument("--log-level", dest="log_level", type=str.upper, choices=KNOWN_LOG_LEVELS, default=LOG_LEVEL)
    common.add_argument("--log-dir", dest="log_dir", type=Path, default=None, help="Directory for log files")
    return common


def build_parser() -> CliParser:
    common = _common_options()
    parser = CliParser(prog="molopt", description="Molecular optomechanical up-conversion amplifier")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("steady", parents=[common], help="Steady-state branches")
    sub.add_parser("response", parents=[common], help="Linear response at one IR frequency")

    spectrum = sub.add_parser("spectrum", parents=[common], help="T_ac over an omega_ir grid")
    spectrum.add_argument("--omega-min", dest="omega_min", type=float)
    spectrum.add_argument("--omega-max", dest="omega_max", type=float)

    sub.add_parser("bandwidth", parents=[common], help="FWHM of the conversion spectrum")
    sub.add_parser("stability", parents=[common], help="Routh-Hurwitz and eigenvalue stability verdict")

    sweep_cmd = sub.add_parser("sweep", parents=[common], help="1D or 2D parameter sweep")
    sweep_cmd.add_argument(
        "--axis",
        action="append",
        default=[],
        help="NAME:LO:HI:POINTS[:log]; axes: " + ", ".join(AXIS_COLUMNS),
    )
    sweep_cmd.add_argument("--metrics", default="t_ac,stability", help="Comma list of " + ", ".join(METRIC_COLUMNS))
    sweep_cmd.add_argument("--name", default="sweep", help="Output file stem")
    sweep_cmd.add_argument("--reoptimize", action="store_true")

    fig = sub.add_parser("fig", parents=[common], help="Figure preset")
    fig.add_argument("--preset", required=True, help="One of " + ", ".join(PRESET_NAMES))
    fig.add_argument("--reoptimize", action="store_true", help="Numeric re-optimization for fig3a/fig3b")

    sub.add_parser("params", parents=[common], help="Print the resolved parameters")
    return parser


def _load(args: argparse.Namespace) -> ValidatedParams:
    if args.config is None:
        raise BadFlag("--config", "required for this command")
    params = apply_overrides(load_config(args.config), ga=args.ga, delta=args.delta)
    return validate(params)


def _emit(
    args: argparse.Namespace,
    stem: str,
    result: Writable,
    params: Dict[str, Any],
    columns: Optional[Sequence[str]] = None,
    errors: Optional[Dict[str, int]] = None,
    default_dir: Optional[Path] = None,
) -> List[Path]:
    """Writes <stem>.csv (plus .json with --json) and the manifest; nothing without an output directory."""
    directory = args.out or default_dir
    if directory is None:
        return []
    paths = [write_csv(result, directory / f"{stem}.csv", columns)]
    if args.json:
        paths.append(write_json(result, directory / f"{stem}.json", columns))
    options = {
        key: (str(value) if isinstance(value, Path) else value)
        for key, value in sorted(vars(args).items())
        if key not in ("config", "out", "log_dir", "log_level")
    }
    write_manifest(args.command, params, paths, errors, options)
    return paths


def cmd_params(args: argparse.Namespace) -> int:
    print(format_params(_load(args)))
    return 0


def cmd_steady(args: argparse.Namespace) -> int:
    vp = _load(args)
    default_id: Optional[int] = None
    if isinstance(vp.params.detuning_mode, FixedDelta0):
        states = solve_cubic_branches(vp)
        default_id = default_branch(states).branch_id
    else:
        states = [solve_self_consistent(vp)]
    print(format_steady_states(states, default_id))
    _emit(args, "steady", [s.to_dict() for s in states], vp.params.model_dump(mode="json"))
    return 0


def cmd_response(args: argparse.Namespace) -> int:
    vp = _load(args)
    response = solve_response(vp, omega_ir=args.omega_ir)
    point = operating_point(vp)
    try:
        closed: Optional[float] = closed_form_tac(vp, point.calG_a, response.omega_ir, point.delta)
    except Diverges:
        closed = None
    print(format_response(response, closed_form=closed))
    _emit(args, "response", [response.to_dict()], vp.params.model_dump(mode="json"))
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    vp = _load(args)
    nu_b = vp.params.nu_b
    lo = args.omega_min if args.omega_min is not None else nu_b - 5.0
    hi = args.omega_max if args.omega_max is not None else nu_b + 5.0
    if hi <= lo:
        raise BadFlag("--omega-max", f"must exceed --omega-min ({lo})")
    method = args.method or "exact"
    kwargs = {"points": args.points} if args.points else {}
    curve = tac_spectrum(vp, omega_range=(lo, hi), method=method, workers=args.workers, **kwargs)

    lines = [f"|G_a| = {format_number(curve.ga_thz)} THz, stable = {curve.stable}"]
    if curve.finite_points()[0]:
        omega_peak, t_peak = refine_peak(vp, None, curve, method=method)
        lines.append(f"peak T_ac = {format_number(t_peak)} at {format_number(omega_peak, 9)} THz")
    band = amplification_band(curve)
    if band is not None:
        lines.append(f"amplification band [{format_number(band[0], 9)}, {format_number(band[1], 9)}] THz")
    if curve.poles:
        lines.append(f"{len(curve.poles)} pole(s), first at {format_number(curve.poles[0], 9)} THz")
    print("\n".join(lines))
    _emit(args, "spectrum", curve, curve.params)
    return 0


def cmd_bandwidth(args: argparse.Namespace) -> int:
    vp = _load(args)
    width = bandwidth(vp, method=args.method or "exact")
    print(f"bandwidth {format_number(width)} THz")
    _emit(args, "bandwidth", [{"bandwidth_thz": width}], vp.params.model_dump(mode="json"))
    return 0


def cmd_stability(args: argparse.Namespace) -> int:
    vp = _load(args)
    report = stability_report(vp)
    print(format_stability(report))
    _emit(args, "stability", [report.to_dict()], vp.params.model_dump(mode="json"),
          columns=("verdict", "routh_stable", "spectral_abscissa_thz", "methods_agree", "margin_note"))
    return 0


def parse_axis(spec: str, default_points: Optional[int] = None) -> Tuple[str, List[float]]:
    """
    Parses NAME:LO:HI:POINTS[:log]; with :log, LO and HI are base-10 exponents.

    Raises:
        BadFlag: Malformed axis string or unknown axis
    """
    parts = spec.split(":")
    if len(parts) == 3 and default_points:
        parts.append(str(default_points))
    log = len(parts) == 5 and parts[4] == "log"
    if len(parts) not in (4, 5) or (len(parts) == 5 and not log):
        raise BadFlag(spec, "expected NAME:LO:HI:POINTS[:log]")
    name = parts[0]
    if name not in AXIS_COLUMNS:
        raise BadFlag(name, "unknown sweep axis")
    try:
        lo, hi, points = float(parts[1]), float(parts[2]), int(parts[3])
    except ValueError as e:
        raise BadFlag(spec, "axis bounds must be numbers and POINTS an integer") from e
    if points < 1:
        raise BadFlag(spec, "POINTS must be at least 1")
    return name, (logspace(lo, hi, points) if log else linspace(lo, hi, points))


def cmd_sweep(args: argparse.Namespace) -> int:
    vp = _load(args)
    if not args.axis:
        raise BadFlag("--axis", "at least one axis is required")
    axes = [parse_axis(spec, args.points) for spec in args.axis]
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    result = sweep(
        vp,
        axes,
        metrics=metrics,
        omega_ir=args.omega_ir,
        method=args.method or "exact",
        workers=args.workers,
        reoptimize=args.reoptimize,
        name=args.name,
    )
    paths = _emit(args, args.name, result, vp.params.model_dump(mode="json"),
                  errors=result.errors, default_dir=OUTPUT_DIR)
    print(format_sweep_summary(result, [str(p) for p in paths]))
    return 0


def cmd_fig(args: argparse.Namespace) -> int:
    bundle = figure_preset(
        args.preset,
        points=args.points,
        workers=args.workers,
        method=args.method,
        reoptimize=args.reoptimize,
    )
    paths: List[Path] = []
    if bundle.spectra:
        errors = {"pole": sum(len(c.poles) for c in bundle.spectra)} if any(c.poles for c in bundle.spectra) else {}
        paths += _emit(args, bundle.name, bundle.spectra, bundle.params, errors=errors, default_dir=OUTPUT_DIR)
    for result in bundle.sweeps:
        stem = bundle.name if not bundle.spectra else result.name
        paths += _emit(args, stem, result, bundle.params, errors=result.errors, default_dir=OUTPUT_DIR)
    for result in bundle.sweeps:
        print(format_sweep_summary(result, []))
    print("\n".join(f"  -> {p}" for p in paths))
    return 0


HANDLERS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "steady": cmd_steady,
    "response": cmd_response,
    "spectrum": cmd_spectrum,
    "bandwidth": cmd_bandwidth,
    "stability": cmd_stability,
    "sweep": cmd_sweep,
    "fig": cmd_fig,
    "params": cmd_params,
}


def dispatch(args: argparse.Namespace) -> int:
    handler = HANDLERS.get(args.command)
    if handler is None:
        raise UnknownCommand(args.command)
    logger.debug(f"running '{args.command}'")
    return handler(args)
