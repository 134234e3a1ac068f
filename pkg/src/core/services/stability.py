"""
Stability of the linearized fluctuation dynamics.

The drift is written for the real quadratures (x_a, p_a, x_c, p_c, x_B, p_B) so
the characteristic polynomial has real coefficients. The verdict comes from the
Routh array and is cross-checked against the roots of the same polynomial.
"""
import math
from typing import List, Optional, Sequence, Tuple, Union

from loguru import logger

from src.config.settings import BORDERLINE_BAND_THZ, ROUTH_EPSILON
from src.core.errors import InconclusiveBorderline
from src.core.models.params import SystemParams, ValidatedParams, ensure_validated
from src.core.models.results import StabilityReport, SteadyState
from src.core.services.response import OperatingPoint, operating_point
from src.core.utils.numerics import ComplexMatrix, RealPolynomial, determinant, poly_roots

RealMatrix = List[List[float]]

ROW_VANISH_TOLERANCE = 1e-12
CONSTANT_TERM_TOLERANCE = 1e-9


def drift_matrix(
    params: Union[SystemParams, ValidatedParams],
    ss: Optional[SteadyState] = None,
    calG_a: Optional[complex] = None,
    point: Optional[OperatingPoint] = None,
) -> RealMatrix:
    """
    Real drift A with d/dt v = A v for v = (x_a, p_a, x_c, p_c, x_B, p_B).

    x = (d + d+)/sqrt(2), p = -i (d - d+)/sqrt(2) for each mode.
    """
    vp = ensure_validated(params)
    p = vp.params
    op = point if point is not None else operating_point(vp, ss, calG_a)
    re_g, im_g = op.calG_a.real, op.calG_a.imag
    gc = vp.couplings.G_c
    d = op.delta

    return [
        [-p.kappa_a, d, 0.0, 0.0, 2.0 * im_g, 0.0],
        [-d, -p.kappa_a, 0.0, 0.0, -2.0 * re_g, 0.0],
        [0.0, 0.0, -p.kappa_c, p.nu_c, 0.0, 0.0],
        [0.0, 0.0, -p.nu_c, -p.kappa_c, -2.0 * gc, 0.0],
        [0.0, 0.0, 0.0, 0.0, -p.gamma_B, p.nu_b],
        [-2.0 * re_g, -2.0 * im_g, -2.0 * gc, 0.0, -p.nu_b, -p.gamma_B],
    ]


def _matmul(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> RealMatrix:
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def char_poly(matrix: Sequence[Sequence[float]]) -> RealPolynomial:
    """
    det(lambda I - A) by the Faddeev-LeVerrier recursion.

    M_0 = 0, c_n = 1; M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k.
    Returns the coefficients in ascending order.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("char_poly needs a square matrix")

    coefficients = [0.0] * (n + 1)
    coefficients[n] = 1.0
    m = [[0.0] * n for _ in range(n)]
    for k in range(1, n + 1):
        m = _matmul(matrix, m)
        for i in range(n):
            m[i][i] += coefficients[n - k + 1]
        am = _matmul(matrix, m)
        coefficients[n - k] = -sum(am[i][i] for i in range(n)) / k
    return RealPolynomial(tuple(coefficients))


def constant_term_agrees(matrix: Sequence[Sequence[float]], poly: RealPolynomial) -> bool:
    """
    Checks p(0) = det(-A) against an LU determinant of A.

    The mismatch is measured against the Hadamard bound of A.
    """
    n = len(matrix)
    expected = (-1.0) ** n * determinant(ComplexMatrix.from_rows(matrix)).real
    bound = math.prod(math.sqrt(sum(v * v for v in row)) for row in matrix)
    if abs(poly.coefficients[0] - expected) <= CONSTANT_TERM_TOLERANCE * bound:
        return True
    logger.warning(f"char_poly constant term {poly.coefficients[0]:.6e} differs from det(-A) = {expected:.6e}")
    return False


def routh_table(poly: RealPolynomial) -> List[List[float]]:
    """
    Routh array of a real polynomial, highest power first.

    A zero leading entry is replaced by a small positive epsilon.

    Raises:
        InconclusiveBorderline: A whole row vanishes (roots symmetric about the imaginary axis)
    """
    monic = poly.normalized()
    desc = list(reversed(monic.coefficients))
    n = len(desc) - 1
    width = n // 2 + 1

    def padded(values: List[float]) -> List[float]:
        return values + [0.0] * (width - len(values))

    table = [padded(desc[0::2]), padded(desc[1::2])]
    if n >= 1 and all(v == 0.0 for v in table[1]):
        raise InconclusiveBorderline(1)

    for i in range(2, n + 1):
        above, prev = table[i - 2], table[i - 1]
        if prev[0] == 0.0:
            prev[0] = ROUTH_EPSILON
        row = [
            (prev[0] * above[j + 1] - above[0] * prev[j + 1]) / prev[0] for j in range(width - 1)
        ] + [0.0]
        scale = max(max(abs(v) for v in above), max(abs(v) for v in prev))
        if all(abs(v) <= ROW_VANISH_TOLERANCE * scale for v in row):
            raise InconclusiveBorderline(i)
        table.append(row)

    if table[-1][0] == 0.0:
        table[-1][0] = ROUTH_EPSILON
    return table


def routh_stable(poly: RealPolynomial) -> bool:
    """True iff the first Routh column has no sign change (all roots in the open left half-plane)."""
    first_column = [row[0] for row in routh_table(poly)]
    return all(v > 0.0 for v in first_column) or all(v < 0.0 for v in first_column)


def stability_report(
    params: Union[SystemParams, ValidatedParams],
    ss: Optional[SteadyState] = None,
    calG_a: Optional[complex] = None,
) -> StabilityReport:
    """
    Routh verdict, spectral abscissa and their cross-check at one operating point.

    Raises:
        NoConvergence: Propagated from the root finder
    """
    vp = ensure_validated(params)
    matrix = drift_matrix(vp, ss, calG_a)
    poly = char_poly(matrix)
    constant_term_agrees(matrix, poly)
    roots = poly_roots(poly)
    abscissa = max(z.real for z in roots)
    margin = abs(abscissa) < BORDERLINE_BAND_THZ

    routh: Optional[bool]
    try:
        routh = routh_stable(poly)
    except InconclusiveBorderline as e:
        logger.info(f"{e}; spectral abscissa {abscissa:.3e} THz")
        routh = None

    if margin:
        agree = True
    else:
        agree = routh is not None and routh == (abscissa < 0.0)
    if not agree:
        logger.warning(
            f"Routh verdict {routh} disagrees with spectral abscissa {abscissa:.6e} THz"
        )

    quadrature: Tuple[Tuple[float, ...], ...] = tuple(tuple(row) for row in matrix)
    return StabilityReport(
        quadrature_matrix=quadrature,
        char_poly=poly,
        eigenvalues=tuple(roots),
        routh_stable=routh,
        spectral_abscissa=abscissa,
        methods_agree=agree,
        margin_note=margin,
    )
