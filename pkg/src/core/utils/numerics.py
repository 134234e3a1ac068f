"""
Dense complex linear algebra and scalar numerics.

Matrices here are at most 12x12 and polynomials at most degree 6, so everything
is written directly in Python on lists of complex numbers.
"""
import cmath
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple

from loguru import logger

from src.config.settings import (
    PIVOT_RELATIVE_THRESHOLD,
    ROOTS_MAX_ITERATIONS,
    ROOTS_RESIDUAL_TOLERANCE,
    ROOTS_STEP_TOLERANCE,
    SOLVE_MAX_DIM,
)
from src.core.errors import (
    DegenerateAllZero,
    HalfMaxNotBracketed,
    InvalidBracket,
    NoConvergence,
    SingularMatrix,
)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


@dataclass(frozen=True)
class ComplexMatrix:
    """Row-major dense complex matrix."""

    rows: int
    cols: int
    entries: Tuple[complex, ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"matrix shape must be positive, got {self.rows}x{self.cols}")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} "
                + f"entries, got {len(self.entries)}"
            )
        if not all(cmath.isfinite(z) for z in self.entries):
            raise ValueError("matrix entries must be finite")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]]) -> "ComplexMatrix":
        n_rows = len(rows)
        n_cols = len(rows[0]) if n_rows else 0
        if any(len(row) != n_cols for row in rows):
            raise ValueError("ragged rows")
        return cls(n_rows, n_cols, tuple(complex(z) for row in rows for z in row))

    @classmethod
    def identity(cls, n: int) -> "ComplexMatrix":
        return cls(n, n, tuple(1.0 + 0j if i == j else 0j for i in range(n) for j in range(n)))

    def __getitem__(self, index: Tuple[int, int]) -> complex:
        i, j = index
        return self.entries[i * self.cols + j]

    def to_rows(self) -> List[List[complex]]:
        return [list(self.entries[i * self.cols : (i + 1) * self.cols]) for i in range(self.rows)]

    def matvec(self, x: Sequence[complex]) -> List[complex]:
        if len(x) != self.cols:
            raise ValueError(f"vector length {len(x)} does not match {self.cols} columns")
        return [
            sum(self.entries[i * self.cols + j] * x[j] for j in range(self.cols))
            for i in range(self.rows)
        ]

    def conjugate(self) -> "ComplexMatrix":
        return ComplexMatrix(self.rows, self.cols, tuple(z.conjugate() for z in self.entries))

    def max_modulus(self) -> float:
        return max(abs(z) for z in self.entries)

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols


@dataclass(frozen=True)
class RealPolynomial:
    """Real polynomial with coefficients in ascending degree order."""

    coefficients: Tuple[float, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ValueError("polynomial coefficients must be finite")

    @classmethod
    def from_coefficients(cls, coefficients: Iterable[float]) -> "RealPolynomial":
        return cls(tuple(float(c) for c in coefficients))

    @property
    def degree(self) -> int:
        for k in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[k] != 0.0:
                return k
        return 0

    def trimmed(self) -> "RealPolynomial":
        return RealPolynomial(self.coefficients[: self.degree + 1])

    def normalized(self) -> "RealPolynomial":
        """Monic version; raises DegenerateAllZero for the zero polynomial."""
        trimmed = self.trimmed()
        lead = trimmed.coefficients[-1]
        if lead == 0.0:
            raise DegenerateAllZero()
        return RealPolynomial(tuple(c / lead for c in trimmed.coefficients))

    def __call__(self, x: complex) -> complex:
        return horner(self.coefficients, x)

    def derivative(self) -> "RealPolynomial":
        if len(self.coefficients) == 1:
            return RealPolynomial((0.0,))
        return RealPolynomial(tuple(k * c for k, c in enumerate(self.coefficients) if k > 0))


def horner(coefficients: Sequence[complex], x: complex) -> complex:
    """Evaluates an ascending-order coefficient list at x."""
    result: complex = 0.0
    for c in reversed(coefficients):
        result = result * x + c
    return result


def _eliminate(a: List[List[complex]], b: List[complex], threshold: float) -> int:
    """
    Forward elimination with partial pivoting, in place.

    Returns the number of row swaps. Raises SingularMatrix when a pivot falls below threshold.
    """
    n = len(a)
    swaps = 0
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i][k]))
        if abs(a[p][k]) < threshold or a[p][k] == 0:
            raise SingularMatrix(k, abs(a[p][k]), threshold)
        if p != k:
            a[k], a[p] = a[p], a[k]
            b[k], b[p] = b[p], b[k]
            swaps += 1
        pivot = a[k][k]
        row_k = a[k]
        for i in range(k + 1, n):
            if a[i][k] != 0:
                lam = a[i][k] / pivot
                row_i = a[i]
                for j in range(k + 1, n):
                    row_i[j] -= lam * row_k[j]
                row_i[k] = 0j
                b[i] -= lam * b[k]
    return swaps


def solve_complex_linear(matrix: ComplexMatrix, rhs: Sequence[complex]) -> List[complex]:
    """
    Solves A x = b by Gaussian elimination with partial pivoting.

    Args:
        matrix: Square complex matrix, at most 12x12
        rhs: Right-hand side of matching length

    Returns:
        Solution vector x

    Raises:
        SingularMatrix: A pivot modulus is below 1e-14 times the largest entry of A
    """
    n = matrix.rows
    if not matrix.is_square:
        raise ValueError(f"matrix must be square, got {matrix.rows}x{matrix.cols}")
    if n > SOLVE_MAX_DIM:
        raise ValueError(f"matrix dimension {n} exceeds {SOLVE_MAX_DIM}")
    if len(rhs) != n:
        raise ValueError(f"right-hand side has length {len(rhs)}, expected {n}")

    threshold = PIVOT_RELATIVE_THRESHOLD * matrix.max_modulus()
    a = matrix.to_rows()
    b = [complex(v) for v in rhs]
    _eliminate(a, b, threshold)

    x = [0j] * n
    for k in range(n - 1, -1, -1):
        acc = b[k]
        row = a[k]
        for j in range(k + 1, n):
            acc -= row[j] * x[j]
        x[k] = acc / row[k]
    return x


def determinant(matrix: ComplexMatrix) -> complex:
    """Determinant via LU elimination; exact zero for singular matrices."""
    if not matrix.is_square:
        raise ValueError("determinant needs a square matrix")
    a = matrix.to_rows()
    b = [0j] * matrix.rows
    try:
        swaps = _eliminate(a, b, threshold=0.0)
    except SingularMatrix:
        return 0j
    det: complex = -1.0 if swaps % 2 else 1.0
    for k in range(matrix.rows):
        det *= a[k][k]
    return det


def _cbrt(x: float) -> float:
    return math.copysign(abs(x) ** (1.0 / 3.0), x)


def _newton_polish(coeffs: Sequence[float], root: float) -> float:
    poly = RealPolynomial.from_coefficients(coeffs)
    value = poly(root).real
    slope = poly.derivative()(root).real
    if slope == 0.0:
        return root
    candidate = root - value / slope
    if abs(horner(coeffs, candidate).real) <= abs(value):
        return candidate
    return root


def _distinct_sorted(roots: Iterable[float]) -> List[float]:
    result: List[float] = []
    for r in sorted(roots):
        if result and abs(r - result[-1]) <= 1e-9 * max(1.0, abs(r)):
            continue
        result.append(r)
    return result


def real_cubic_roots(c0: float, c1: float, c2: float, c3: float) -> List[float]:
    """
    All real roots of c3 x^3 + c2 x^2 + c1 x + c0, ascending.

    Uses the discriminant-based closed form (trigonometric for three real roots,
    Cardano otherwise), then one Newton step per root. Lower-degree inputs are
    handled when the leading coefficients vanish; repeated roots are reported once.
    """
    coeffs = [float(c0), float(c1), float(c2), float(c3)]
    if all(c == 0.0 for c in coeffs):
        raise DegenerateAllZero()

    if c3 == 0.0:
        if c2 == 0.0:
            if c1 == 0.0:
                return []
            return [-c0 / c1]
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0.0:
            return []
        if disc == 0.0:
            return [-c1 / (2.0 * c2)]
        q = -0.5 * (c1 + math.copysign(math.sqrt(disc), c1))
        roots = [q / c2]
        if q != 0.0:
            roots.append(c0 / q)
        else:
            roots.append(-c1 / c2 - roots[0])
        return _distinct_sorted(_newton_polish(coeffs, r) for r in roots)

    a = c2 / c3
    b = c1 / c3
    c = c0 / c3
    shift = a / 3.0
    # Depressed cubic t^3 + p t + q with x = t - a/3
    p = b - a * a / 3.0
    q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
    scale = 4.0 * abs(p) ** 3 + 27.0 * q * q
    disc = -(4.0 * p**3 + 27.0 * q * q)

    if scale == 0.0:
        depressed = [0.0]
    elif abs(disc) <= 1e-12 * scale:
        # Double root at -3q/(2p), simple root at 3q/p
        depressed = [3.0 * q / p, -1.5 * q / p]
    elif disc > 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)
        theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        depressed = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) for k in range(3)]
    else:
        half_q = q / 2.0
        root_d = math.sqrt(half_q * half_q + (p / 3.0) ** 3)
        # Pick the branch without cancellation, the other cube root follows from u*v = -p/3
        u = _cbrt(-half_q + root_d) if half_q <= 0.0 else _cbrt(-half_q - root_d)
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        depressed = [u + v]

    return _distinct_sorted(_newton_polish(coeffs, t - shift) for t in depressed)


def _root_scale(coeffs: Sequence[complex], z: complex) -> float:
    r = abs(z)
    return sum(abs(c) * r**k for k, c in enumerate(coeffs))


def poly_roots(poly: RealPolynomial) -> List[complex]:
    """
    All complex roots of a real polynomial via Durand-Kerner iteration.

    Starts from a perturbed circle around the root centroid and updates in place
    until every step is below 1e-12 * (1 + |r|).

    Raises:
        NoConvergence: The iteration cap is reached and some residual is still large
    """
    monic = poly.normalized()
    coeffs = list(monic.coefficients)
    n = len(coeffs) - 1
    if n < 1:
        raise ValueError("poly_roots needs a polynomial of degree >= 1")
    if n == 1:
        return [complex(-coeffs[0])]

    centre = -coeffs[n - 1] / n
    radius = 2.0 * max(abs(coeffs[n - k]) ** (1.0 / k) for k in range(1, n + 1))
    radius = max(radius, 1e-3)
    roots = [
        centre + radius * cmath.exp(1j * (2.0 * math.pi * j / n + 0.4)) for j in range(n)
    ]

    converged = False
    iteration = 0
    for iteration in range(1, ROOTS_MAX_ITERATIONS + 1):
        converged = True
        for i in range(n):
            zi = roots[i]
            denom: complex = 1.0
            for j in range(n):
                if j != i:
                    diff = zi - roots[j]
                    denom *= diff if diff != 0 else 1e-300
            step = horner(coeffs, zi) / denom
            roots[i] = zi - step
            if abs(step) >= ROOTS_STEP_TOLERANCE * (1.0 + abs(roots[i])):
                converged = False
        if converged:
            break

    residuals = [abs(horner(coeffs, z)) / max(_root_scale(coeffs, z), 1e-300) for z in roots]
    worst = max(residuals)
    if not converged:
        if worst > ROOTS_RESIDUAL_TOLERANCE:
            raise NoConvergence(
                "Durand-Kerner iteration did not converge",
                best=list(roots),
                residual=worst,
                iterations=iteration,
            )
        # Clustered roots stall the step criterion while residuals are already tiny
        logger.warning(
            f"Durand-Kerner hit {ROOTS_MAX_ITERATIONS} iterations; "
            + f"accepting roots with relative residual {worst:.2e}"
        )
    else:
        logger.debug(f"Durand-Kerner converged in {iteration} iterations")

    return sorted(roots, key=lambda z: (z.real, z.imag))


def golden_section_max(
    f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-8
) -> Tuple[float, float]:
    """
    Golden-section search for the maximum of a unimodal function on [lo, hi].

    Returns (x_star, f(x_star)) with x_star within tol of the argmax.
    """
    if not lo < hi:
        raise InvalidBracket(lo, hi)

    a, b = lo, hi
    h = b - a
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc = f(c)
    yd = f(d)

    while h > tol:
        if yc > yd:
            b = d
            d = c
            yd = yc
            h = INV_PHI * h
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
        else:
            a = c
            c = d
            yc = yd
            h = INV_PHI * h
            d = a + INV_PHI * h
            yd = f(d)

    x_star = (a + b) / 2.0
    return x_star, f(x_star)


def half_max_crossings(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float, bool, bool]:
    """
    Outermost crossings of half the global maximum.

    Returns:
        (left, right, left_truncated, right_truncated); a truncated side reports the grid edge
    """
    n = len(xs)
    if n != len(ys):
        raise ValueError(f"grid has {n} points but {len(ys)} values")
    if n < 3:
        raise ValueError("fwhm needs at least 3 samples")
    if any(xs[i + 1] <= xs[i] for i in range(n - 1)):
        raise ValueError("grid must be strictly ascending")

    peak = max(ys)
    if peak <= 0.0:
        return xs[0], xs[-1], True, True
    half = peak / 2.0

    above = [i for i in range(n) if ys[i] >= half]
    first, last = above[0], above[-1]

    left_truncated = first == 0
    if left_truncated:
        left = xs[0]
    else:
        x0, x1, y0, y1 = xs[first - 1], xs[first], ys[first - 1], ys[first]
        left = x0 + (half - y0) * (x1 - x0) / (y1 - y0)

    right_truncated = last == n - 1
    if right_truncated:
        right = xs[-1]
    else:
        x0, x1, y0, y1 = xs[last], xs[last + 1], ys[last], ys[last + 1]
        right = x0 + (y0 - half) * (x1 - x0) / (y0 - y1)

    return left, right, left_truncated, right_truncated


def fwhm(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Full width at half maximum between the outermost half-maximum crossings.

    Raises:
        HalfMaxNotBracketed: The curve stays above half maximum up to a grid edge;
            the exception carries the width measured to that edge.
    """
    left, right, left_truncated, right_truncated = half_max_crossings(xs, ys)
    width = right - left
    if left_truncated or right_truncated:
        raise HalfMaxNotBracketed(width, left_truncated, right_truncated)
    return width
