"""
Spectrum scans, bandwidth, coupling optimization and parameter sweeps.

Per-point work is done by top-level functions of picklable arguments, so the
same grid gives identical records whether it runs sequentially or on a
process pool.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

from loguru import logger

from src.config.settings import (
    BANDWIDTH_HALF_SPAN_THZ,
    BANDWIDTH_MAX_REFINEMENTS,
    BANDWIDTH_REFINE_FACTOR,
    BANDWIDTH_RELATIVE_CHANGE,
    BANDWIDTH_START_POINTS,
    BRACKET_SCAN_POINTS,
    PRESET_SPECTRUM_POINTS,
)
from src.core.errors import (
    AllUnstable,
    BadFlag,
    Diverges,
    HalfMaxNotBracketed,
    MoloptError,
    PoleInBand,
)
from src.core.models.params import (
    PrescribedGa,
    SystemParams,
    ValidatedParams,
    ensure_validated,
    prescribe_ga,
    replace_mode,
    validate,
    with_delta,
)
from src.core.models.results import (
    SpectrumCurve,
    SteadyState,
    SweepAxis,
    SweepRecord,
    SweepResult,
)
from src.core.services.response import (
    OperatingPoint,
    closed_form_tac,
    operating_point,
    optimal_coupling,
    solve_response,
)
from src.core.services.stability import stability_report
from src.core.utils.numerics import golden_section_max, half_max_crossings

METHODS = ("exact", "closed_form")
BANDWIDTH_MAX_WIDENINGS = 3
MAX_REFINED_POINTS = 20001

# Sweep axis -> output column
AXIS_COLUMNS: Dict[str, str] = {
    "ga": "ga_thz",
    "N": "n_molecules",
    "kappa_a": "kappa_a_thz",
    "kappa_c": "kappa_c_thz",
    "gamma_B": "gamma_b_thz",
    "g_a": "g_a_ghz",
    "g_c": "g_c_ghz",
    "eps_p": "eps_p_thz",
    "delta": "delta_thz",
    "omega_ir": "omega_ir_thz",
}

# Plain SystemParams fields behind an axis
AXIS_FIELDS: Dict[str, str] = {
    "N": "n_molecules",
    "kappa_a": "kappa_a",
    "kappa_c": "kappa_c",
    "gamma_B": "gamma_B",
    "g_a": "g_a",
    "g_c": "g_c",
    "eps_p": "eps_p",
}

METRIC_COLUMNS: Dict[str, Tuple[str, ...]] = {
    "optimal": ("optimal_coupling_thz",),
    "t_ac": ("t_ac", "t_ac_antistokes"),
    "t_ac_max": ("t_ac_max", "omega_at_max_thz"),
    "stability": ("stable", "spectral_abscissa_thz"),
    "bandwidth": ("bandwidth_thz",),
    "reoptimize": ("ga_opt_numeric_thz", "t_ac_max_numeric"),
}

T = TypeVar("T")
R = TypeVar("R")


def linspace(lo: float, hi: float, points: int) -> List[float]:
    if points < 1:
        raise ValueError("a grid needs at least one point")
    if points == 1:
        return [lo]
    step = (hi - lo) / (points - 1)
    return [lo + k * step for k in range(points - 1)] + [hi]


def logspace(lo_exp: float, hi_exp: float, points: int) -> List[float]:
    return [10.0**e for e in linspace(lo_exp, hi_exp, points)]


def parallel_map(fn: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """Maps fn over items, on a process pool when workers > 1; order is preserved."""
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunksize = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunksize))


def _check_method(method: str) -> None:
    if method not in METHODS:
        raise BadFlag(method, f"unknown method (expected one of {', '.join(METHODS)})")


def pin_operating_point(vp: ValidatedParams, point: OperatingPoint) -> ValidatedParams:
    """Same parameters in PrescribedGa mode at the given operating point."""
    pinned = replace_mode(vp.params, PrescribedGa(ga_thz=abs(point.calG_a), delta_thz=point.delta))
    return ValidatedParams(pinned, vp.couplings, vp.warnings)


@dataclass(frozen=True)
class _SpectrumTask:
    vp: ValidatedParams
    calG_a: complex
    delta: float
    omega_ir: float
    method: str


def _spectrum_point(task: _SpectrumTask) -> Optional[float]:
    try:
        if task.method == "closed_form":
            return closed_form_tac(task.vp, task.calG_a, task.omega_ir, task.delta)
        return solve_response(task.vp, omega_ir=task.omega_ir, calG_a=task.calG_a).T_ac
    except Diverges:
        return None


def _evaluate_curve(
    vp: ValidatedParams, point: OperatingPoint, grid: Sequence[float], method: str, workers: int
) -> List[Optional[float]]:
    pinned = pin_operating_point(vp, point)
    tasks = [_SpectrumTask(pinned, point.calG_a, point.delta, w, method) for w in grid]
    return parallel_map(_spectrum_point, tasks, workers)


def tac_spectrum(
    params: Union[SystemParams, ValidatedParams],
    calG_a: Optional[complex] = None,
    omega_range: Optional[Tuple[float, float]] = None,
    points: int = PRESET_SPECTRUM_POINTS,
    ss: Optional[SteadyState] = None,
    method: str = "exact",
    workers: int = 1,
    check_stability: bool = True,
) -> SpectrumCurve:
    """
    T_ac over an omega_ir grid at one operating point.

    Args:
        params: Parameter set
        calG_a: Enhanced coupling override (otherwise taken from the mode / steady state)
        omega_range: Grid bounds in THz, nu_b +/- 5 THz by default
        points: Number of grid points
        ss: Steady state to linearize around
        method: "exact" (6x6 solve) or "closed_form"
        workers: Worker processes for the per-point evaluation
        check_stability: Mark the curve with the stability verdict of the operating point

    Returns:
        SpectrumCurve; divergent points are stored as None
    """
    _check_method(method)
    vp = ensure_validated(params)
    point = operating_point(vp, ss, calG_a)
    nu_b = vp.params.nu_b
    lo, hi = omega_range or (nu_b - BANDWIDTH_HALF_SPAN_THZ, nu_b + BANDWIDTH_HALF_SPAN_THZ)
    grid = linspace(lo, hi, points)

    stable: Optional[bool] = None
    if check_stability:
        stable = stability_report(pin_operating_point(vp, point), calG_a=point.calG_a).stable
        if not stable:
            logger.warning(f"spectrum requested at an unstable operating point |G_a| = {abs(point.calG_a):.6g} THz")

    values = _evaluate_curve(vp, point, grid, method, workers)
    curve = SpectrumCurve(
        omega_ir=tuple(grid),
        T_ac=tuple(values),
        ga_thz=abs(point.calG_a),
        stable=stable,
        params=vp.params.model_dump(mode="json"),
    )
    if curve.poles:
        logger.warning(f"{len(curve.poles)} pole(s) in spectrum, first at {curve.poles[0]:.9g} THz")
    return curve


def refine_peak(
    params: Union[SystemParams, ValidatedParams],
    calG_a: Optional[complex],
    curve: SpectrumCurve,
    method: str = "exact",
    ss: Optional[SteadyState] = None,
) -> Tuple[float, float]:
    """
    Polishes the grid maximum of a spectrum with golden-section search
    between the neighbouring samples.

    Returns:
        (omega_ir, T_ac) at the refined peak
    """
    _check_method(method)
    vp = ensure_validated(params)
    point = operating_point(vp, ss, calG_a)
    pinned = pin_operating_point(vp, point)
    index, _, t_grid = curve.peak()
    lo = curve.omega_ir[max(index - 1, 0)]
    hi = curve.omega_ir[min(index + 1, len(curve.omega_ir) - 1)]

    def objective(w: float) -> float:
        value = _spectrum_point(_SpectrumTask(pinned, point.calG_a, point.delta, w, method))
        if value is None:
            raise Diverges(w, "pole inside the peak bracket")
        return value

    w_star, t_star = golden_section_max(objective, lo, hi, tol=(hi - lo) * 1e-7)
    if t_star < t_grid:
        return curve.omega_ir[index], t_grid
    return w_star, t_star


def amplification_band(curve: SpectrumCurve, threshold: float = 1.0) -> Optional[Tuple[float, float]]:
    """
    Outermost omega_ir where T_ac crosses threshold, by linear interpolation.

    Returns None when T_ac never exceeds the threshold; a side that stays above it reports the grid edge.
    """
    xs, ys = curve.finite_points()
    above = [i for i, y in enumerate(ys) if y > threshold]
    if not above:
        return None
    first, last = above[0], above[-1]

    if first == 0:
        left = xs[0]
    else:
        x0, x1, y0, y1 = xs[first - 1], xs[first], ys[first - 1], ys[first]
        left = x0 + (threshold - y0) * (x1 - x0) / (y1 - y0)
    if last == len(xs) - 1:
        right = xs[-1]
    else:
        x0, x1, y0, y1 = xs[last], xs[last + 1], ys[last], ys[last + 1]
        right = x0 + (y0 - threshold) * (x1 - x0) / (y0 - y1)
    return left, right


def _scan_width(
    vp: ValidatedParams, point: OperatingPoint, lo: float, hi: float, points: int, method: str
) -> Tuple[float, float, float, bool, bool]:
    grid = linspace(lo, hi, points)
    values = _evaluate_curve(vp, point, grid, method, workers=1)
    for w, t in zip(grid, values):
        if t is None:
            raise PoleInBand(w)
    left, right, lt, rt = half_max_crossings(grid, values)  # type: ignore[arg-type]
    return right - left, left, right, lt, rt


def bandwidth(
    params: Union[SystemParams, ValidatedParams],
    calG_a: Optional[complex] = None,
    ss: Optional[SteadyState] = None,
    method: str = "exact",
) -> float:
    """
    Full width at half maximum of T_ac(omega_ir), in THz.

    Starts from nu_b +/- 5 THz with 4001 points, then repeatedly rescans around the
    half-maximum crossings with a 4x finer step until the width changes by less than 0.1%.

    Raises:
        PoleInBand: The efficiency diverges inside the scanned band
        HalfMaxNotBracketed: The half maximum is not reached even on a widened scan
    """
    _check_method(method)
    vp = ensure_validated(params)
    point = operating_point(vp, ss, calG_a)
    nu_b = vp.params.nu_b

    half_span = BANDWIDTH_HALF_SPAN_THZ
    points = BANDWIDTH_START_POINTS
    for widening in range(BANDWIDTH_MAX_WIDENINGS + 1):
        lo, hi = nu_b - half_span, nu_b + half_span
        width, left, right, lt, rt = _scan_width(vp, point, lo, hi, points, method)
        if not (lt or rt):
            break
        if widening == BANDWIDTH_MAX_WIDENINGS:
            raise HalfMaxNotBracketed(width, lt, rt)
        logger.debug(f"half maximum not bracketed on +/-{half_span} THz, widening")
        half_span *= 2.0
    step = (hi - lo) / (points - 1)

    for refinement in range(BANDWIDTH_MAX_REFINEMENTS):
        step /= BANDWIDTH_REFINE_FACTOR
        margin = max(0.5 * width, 8.0 * step)
        lo, hi = max(lo, left - margin), min(hi, right + margin)
        points = min(int(round((hi - lo) / step)) + 1, MAX_REFINED_POINTS)
        new_width, new_left, new_right, lt, rt = _scan_width(vp, point, lo, hi, points, method)
        if lt or rt:
            # The refined window lost the crossings; keep the previous estimate
            break
        change = abs(new_width - width) / width if width > 0 else 0.0
        width, left, right = new_width, new_left, new_right
        if change < BANDWIDTH_RELATIVE_CHANGE:
            logger.debug(f"bandwidth converged after {refinement + 1} refinement(s): {width:.6g} THz")
            break
    return width


def _resonant_efficiency(pinned: ValidatedParams, ga: float) -> float:
    return solve_response(pinned, omega_ir=pinned.params.nu_b, calG_a=complex(ga)).T_ac


def max_tac_over_ga(
    params: Union[SystemParams, ValidatedParams],
    ga_range: Tuple[float, float],
    scan_points: int = BRACKET_SCAN_POINTS,
) -> Tuple[float, float]:
    """
    Maximum of the resonant T_ac over |G_a| in ga_range, restricted to stable points.

    A coarse scan brackets the best stable sample and golden-section search refines it.

    Returns:
        (|G_a| at the maximum in THz, maximal T_ac)

    Raises:
        AllUnstable: No stable operating point on the scan
    """
    vp = ensure_validated(params)
    lo, hi = ga_range
    delta = operating_point(vp).delta
    pinned = pin_operating_point(vp, OperatingPoint(0j, delta))

    grid = linspace(lo, hi, scan_points)
    efficiencies: List[Optional[float]] = []
    for ga in grid:
        try:
            if not stability_report(pinned, calG_a=complex(ga)).stable:
                efficiencies.append(None)
                continue
            efficiencies.append(_resonant_efficiency(pinned, ga))
        except MoloptError as e:
            logger.debug(f"skipping |G_a| = {ga:.6g}: {e}")
            efficiencies.append(None)

    stable = [i for i, t in enumerate(efficiencies) if t is not None]
    if not stable:
        raise AllUnstable(lo, hi)
    best = max(stable, key=lambda i: efficiencies[i])  # type: ignore[arg-type,return-value]
    if len(grid) == 1:
        return grid[0], float(efficiencies[0])  # type: ignore[arg-type]

    left = grid[max(best - 1, 0)]
    right = grid[min(best + 1, len(grid) - 1)]
    ga_star, t_star = golden_section_max(lambda g: _resonant_efficiency(pinned, g), left, right, tol=1e-9)

    t_grid = float(efficiencies[best])  # type: ignore[arg-type]
    if t_star < t_grid or not stability_report(pinned, calG_a=complex(ga_star)).stable:
        return grid[best], t_grid
    return ga_star, t_star


@dataclass(frozen=True)
class _PointTask:
    index: Tuple[int, ...]
    params: SystemParams
    coords: Tuple[Tuple[str, float], ...]
    metrics: Tuple[str, ...]
    omega_ir: Optional[float]
    method: str


def _apply_coords(params: SystemParams, coords: Sequence[Tuple[str, float]]) -> Tuple[SystemParams, Optional[float]]:
    omega_ir = None
    ga = None
    for axis, value in coords:
        if axis == "omega_ir":
            omega_ir = value
        elif axis == "ga":
            ga = value
        elif axis == "delta":
            params = with_delta(params, value)
        else:
            params = params.model_copy(update={AXIS_FIELDS[axis]: value})
    if ga is not None:
        params = prescribe_ga(params, ga)
    return params, omega_ir


def _evaluate_point(task: _PointTask) -> SweepRecord:
    values: Dict[str, object] = {AXIS_COLUMNS[axis]: value for axis, value in task.coords}
    try:
        params, omega_ir = _apply_coords(task.params, task.coords)
        vp = validate(params)
        point = operating_point(vp)
        if "optimal" in task.metrics:
            optimum = optimal_coupling(vp, delta=point.delta)
            values["optimal_coupling_thz"] = optimum
            point = OperatingPoint(complex(optimum), point.delta)
        values["calg_abs_thz"] = abs(point.calG_a)
        values["delta_eff_thz"] = point.delta
        pinned = pin_operating_point(vp, point)
        w = task.omega_ir if omega_ir is None else omega_ir
        w = vp.params.nu_b if w is None else w

        stable: Optional[bool] = None
        if "stability" in task.metrics or "bandwidth" in task.metrics:
            report = stability_report(pinned, calG_a=point.calG_a)
            stable = report.stable
            if "stability" in task.metrics:
                values["stable"] = stable
                values["spectral_abscissa_thz"] = report.spectral_abscissa

        if "t_ac" in task.metrics:
            response = solve_response(pinned, omega_ir=w, calG_a=point.calG_a)
            values["t_ac"] = response.T_ac
            values["t_ac_antistokes"] = response.T_ac_antistokes

        if "t_ac_max" in task.metrics:
            curve = tac_spectrum(
                pinned, point.calG_a, points=BANDWIDTH_START_POINTS, method=task.method, check_stability=False
            )
            values["omega_at_max_thz"], values["t_ac_max"] = refine_peak(
                pinned, point.calG_a, curve, method=task.method
            )

        if "reoptimize" in task.metrics:
            upper = 2.0 * optimal_coupling(vp, delta=point.delta)
            values["ga_opt_numeric_thz"], values["t_ac_max_numeric"] = max_tac_over_ga(
                pinned, (0.0, upper)
            )

        # Bandwidth is left empty at unstable points
        if "bandwidth" in task.metrics and stable:
            values["bandwidth_thz"] = bandwidth(pinned, point.calG_a, method=task.method)
    except MoloptError as e:
        return SweepRecord(task.index, values, f"{type(e).__name__}: {e}")
    return SweepRecord(task.index, values)


def sweep(
    params: Union[SystemParams, ValidatedParams],
    axes: Sequence[Tuple[str, Sequence[float]]],
    metrics: Sequence[str] = ("t_ac", "stability"),
    omega_ir: Optional[float] = None,
    method: str = "exact",
    workers: int = 1,
    reoptimize: bool = False,
    name: str = "sweep",
) -> SweepResult:
    """
    Evaluates metrics over a 1D or 2D parameter grid.

    Axes are chosen from AXIS_COLUMNS. A "ga" axis switches to PrescribedGa; every
    other axis keeps the mode, so FixedDelta sweeps over N recompute G_a from the
    steady state. Per-point errors are stored on the record and never abort the sweep.

    Returns:
        SweepResult with records in row-major grid order
    """
    _check_method(method)
    if not 1 <= len(axes) <= 2:
        raise BadFlag(str(len(axes)), "a sweep takes one or two axes")
    for axis, _ in axes:
        if axis not in AXIS_COLUMNS:
            raise BadFlag(axis, "unknown sweep axis")
    metrics = tuple(metrics) + (("reoptimize",) if reoptimize and "reoptimize" not in metrics else ())
    for metric in metrics:
        if metric not in METRIC_COLUMNS:
            raise BadFlag(metric, "unknown sweep metric")

    base = ensure_validated(params).params
    sweep_axes = tuple(SweepAxis(axis, tuple(float(v) for v in values)) for axis, values in axes)

    tasks: List[_PointTask] = []
    if len(sweep_axes) == 1:
        (axis,) = sweep_axes
        for i, value in enumerate(axis.values):
            tasks.append(_PointTask((i,), base, ((axis.name, value),), metrics, omega_ir, method))
    else:
        outer, inner = sweep_axes
        for i, u in enumerate(outer.values):
            for j, v in enumerate(inner.values):
                coords = ((outer.name, u), (inner.name, v))
                tasks.append(_PointTask((i, j), base, coords, metrics, omega_ir, method))

    logger.info(f"sweep '{name}': {len(tasks)} point(s), metrics {', '.join(metrics)}, workers={workers}")
    records = parallel_map(_evaluate_point, tasks, workers)

    columns: List[str] = [AXIS_COLUMNS[a.name] for a in sweep_axes]
    columns += ["calg_abs_thz", "delta_eff_thz"]
    for metric in metrics:
        columns += [c for c in METRIC_COLUMNS[metric] if c not in columns]
    columns.append("error")

    result = SweepResult(name, sweep_axes, tuple(columns), tuple(records))
    failed = sum(1 for r in records if r.error)
    if failed:
        logger.warning(f"sweep '{name}': {failed} point(s) recorded errors {result.errors}")
    logger.info(f"sweep '{name}' finished")
    return result
