"""
Tests for the dense linear algebra and scalar numerics.
"""
import math
import random

import numpy as np
import pytest

from src.core.errors import DegenerateAllZero, HalfMaxNotBracketed, InvalidBracket, SingularMatrix
from src.core.utils.numerics import (
    ComplexMatrix,
    RealPolynomial,
    determinant,
    fwhm,
    golden_section_max,
    half_max_crossings,
    horner,
    poly_roots,
    real_cubic_roots,
    solve_complex_linear,
)


def _from_roots(roots) -> RealPolynomial:
    """Monic real polynomial with the given roots; complex roots come in conjugate pairs."""
    coeffs = [1.0 + 0j]
    for r in roots:
        shifted = [0j] + coeffs
        for k in range(len(coeffs)):
            shifted[k] -= r * coeffs[k]
        coeffs = shifted
    return RealPolynomial(tuple(c.real for c in coeffs))


def _random_matrix(rng: random.Random, n: int) -> ComplexMatrix:
    return ComplexMatrix.from_rows(
        [[complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)] for _ in range(n)]
    )


class TestComplexMatrix:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ComplexMatrix(2, 2, (1j, 2j, 3j))

    def test_non_finite_entries_rejected(self):
        with pytest.raises(ValueError):
            ComplexMatrix.from_rows([[1.0, float("nan")], [0.0, 1.0]])

    def test_indexing_and_matvec(self):
        m = ComplexMatrix.from_rows([[1, 2j], [3, 4]])
        assert m[0, 1] == 2j
        assert m.matvec([1, 1]) == [1 + 2j, 7 + 0j]

    def test_identity(self):
        assert ComplexMatrix.identity(3).to_rows()[1] == [0j, 1 + 0j, 0j]


class TestSolveComplexLinear:
    def test_identity(self):
        assert solve_complex_linear(ComplexMatrix.identity(4), [1, 2j, 3, -4j]) == [1, 2j, 3, -4j]

    @pytest.mark.parametrize("n", [1, 2, 6, 12])
    def test_matches_numpy(self, n):
        rng = random.Random(1000 + n)
        m = _random_matrix(rng, n)
        b = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)]

        x = solve_complex_linear(m, b)
        expected = np.linalg.solve(np.array(m.to_rows()), np.array(b))
        assert np.allclose(x, expected, rtol=1e-9, atol=1e-12)

    def test_random_residuals_small(self):
        """A x - b stays below 1e-10 relative for random well-conditioned systems."""
        rng = random.Random(7)
        for _ in range(200):
            n = rng.randint(2, 6)
            m = _random_matrix(rng, n)
            if abs(np.linalg.cond(np.array(m.to_rows()))) > 1e4:
                continue
            b = [complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(n)]
            x = solve_complex_linear(m, b)
            residual = max(abs(r - bi) for r, bi in zip(m.matvec(x), b))
            assert residual <= 1e-10 * max(1.0, max(abs(bi) for bi in b))

    def test_singular_matrix(self):
        m = ComplexMatrix.from_rows([[1, 2], [2, 4]])
        with pytest.raises(SingularMatrix) as exc:
            solve_complex_linear(m, [1, 1])
        assert exc.value.column == 1

    def test_zero_matrix_is_singular(self):
        with pytest.raises(SingularMatrix):
            solve_complex_linear(ComplexMatrix.from_rows([[0, 0], [0, 0]]), [0, 0])

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            solve_complex_linear(ComplexMatrix.identity(13), [0j] * 13)

    def test_non_square(self):
        with pytest.raises(ValueError):
            solve_complex_linear(ComplexMatrix(2, 3, (1j,) * 6), [1, 1])


def test_determinant_matches_numpy():
    rng = random.Random(3)
    for n in (1, 3, 6):
        m = _random_matrix(rng, n)
        assert np.isclose(determinant(m), np.linalg.det(np.array(m.to_rows())), rtol=1e-9)


def test_determinant_of_singular_matrix_is_zero():
    assert determinant(ComplexMatrix.from_rows([[1, 2], [2, 4]])) == 0


class TestRealPolynomial:
    def test_degree_and_trim(self):
        poly = RealPolynomial((1.0, 2.0, 0.0, 0.0))
        assert poly.degree == 1
        assert poly.trimmed().coefficients == (1.0, 2.0)

    def test_normalized(self):
        assert RealPolynomial((2.0, 4.0)).normalized().coefficients == (0.5, 1.0)

    def test_all_zero(self):
        with pytest.raises(DegenerateAllZero):
            RealPolynomial((0.0, 0.0, 0.0)).normalized()

    def test_evaluation_and_derivative(self):
        poly = RealPolynomial((1.0, 0.0, 3.0))
        assert poly(2.0) == 13.0
        assert poly.derivative().coefficients == (0.0, 6.0)
        assert horner([1, 1], 1j) == 1 + 1j


class TestRealCubicRoots:
    def test_three_real_roots(self):
        roots = real_cubic_roots(-6.0, 11.0, -6.0, 1.0)
        assert roots == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)

    def test_one_real_root(self):
        # x^3 + x + 1
        roots = real_cubic_roots(1.0, 1.0, 0.0, 1.0)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(-0.6823278038280193, abs=1e-12)

    def test_double_root_reported_once(self):
        # (x - 1)^2 (x + 2)
        roots = real_cubic_roots(2.0, -3.0, 0.0, 1.0)
        assert roots == pytest.approx([-2.0, 1.0], abs=1e-7)

    def test_triple_root(self):
        roots = real_cubic_roots(-1.0, 3.0, -3.0, 1.0)
        assert roots == pytest.approx([1.0], abs=1e-6)

    def test_degenerate_quadratic(self):
        assert real_cubic_roots(-4.0, 0.0, 1.0, 0.0) == pytest.approx([-2.0, 2.0])

    def test_degenerate_linear(self):
        assert real_cubic_roots(3.0, -1.5, 0.0, 0.0) == pytest.approx([2.0])

    def test_all_zero(self):
        with pytest.raises(DegenerateAllZero):
            real_cubic_roots(0.0, 0.0, 0.0, 0.0)

    def test_matches_constructed_roots(self):
        rng = random.Random(11)
        for _ in range(100):
            roots = sorted(rng.sample(range(-20, 21), 3))
            scale = rng.choice([0.5, 1.0, 4.0])
            poly = _from_roots([float(r) for r in roots])
            coeffs = [scale * c for c in poly.coefficients]
            assert real_cubic_roots(*coeffs) == pytest.approx(roots, abs=1e-9)

    def test_vieta_relations(self):
        rng = random.Random(13)
        for _ in range(100):
            lead = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 5.0)
            centre = rng.uniform(-10, 10)
            poly = _from_roots([centre - rng.uniform(1, 5), centre, centre + rng.uniform(1, 5)])
            c0, c1, c2, c3 = (lead * c for c in poly.coefficients)
            roots = real_cubic_roots(c0, c1, c2, c3)

            assert len(roots) == 3
            assert sum(roots) == pytest.approx(-c2 / c3, rel=1e-6, abs=1e-6)
            assert math.prod(roots) == pytest.approx(-c0 / c3, rel=1e-6, abs=1e-6)

    def test_single_real_root_with_complex_pair(self):
        rng = random.Random(12)
        for _ in range(100):
            real = rng.uniform(-10, 10)
            pair = complex(rng.uniform(-10, 10), rng.uniform(0.5, 5))
            poly = _from_roots([real, pair, pair.conjugate()])
            assert real_cubic_roots(*poly.coefficients) == pytest.approx([real], rel=1e-9, abs=1e-9)


class TestPolyRoots:
    def test_known_roots(self):
        poly = _from_roots([-1.0, -2.0, complex(-0.5, 3.0), complex(-0.5, -3.0)])
        roots = poly_roots(poly)
        assert len(roots) == 4
        for z in (-1.0, -2.0, complex(-0.5, 3.0), complex(-0.5, -3.0)):
            assert min(abs(z - r) for r in roots) < 1e-9

    def test_linear(self):
        assert poly_roots(RealPolynomial((4.0, 2.0))) == [complex(-2.0)]

    def test_matches_numpy_on_degree_six(self):
        rng = random.Random(5)
        for _ in range(20):
            coeffs = [rng.uniform(-5, 5) for _ in range(6)] + [1.0]
            roots = poly_roots(RealPolynomial(tuple(coeffs)))
            expected = np.roots(coeffs[::-1])
            # Every numpy root has a match
            for z in expected:
                assert min(abs(z - r) for r in roots) < 1e-6 * max(1.0, abs(z))

    def test_vieta_relations_on_degree_six(self):
        rng = random.Random(6)
        for _ in range(50):
            coeffs = [rng.uniform(-5, 5) for _ in range(6)] + [rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 3.0)]
            roots = poly_roots(RealPolynomial(tuple(coeffs)))

            expected_sum = -coeffs[5] / coeffs[6]
            expected_product = coeffs[0] / coeffs[6]
            assert abs(sum(roots) - expected_sum) <= 1e-6 * max(1.0, abs(expected_sum))
            assert abs(math.prod(roots) - expected_product) <= 1e-6 * max(1.0, abs(expected_product))

    def test_complex_roots_come_in_conjugate_pairs(self):
        rng = random.Random(7)
        for _ in range(20):
            roots = poly_roots(RealPolynomial(tuple([rng.uniform(-5, 5) for _ in range(6)] + [1.0])))
            for z in roots:
                assert min(abs(z.conjugate() - r) for r in roots) < 1e-8 * max(1.0, abs(z))

    def test_clustered_roots_accepted(self):
        """A fourfold root stalls the step test but the residual is tiny."""
        roots = poly_roots(_from_roots([2.0, 2.0, 2.0, 2.0]))
        assert all(abs(z - 2.0) < 1e-2 for z in roots)

    def test_sorted_by_real_part(self):
        roots = poly_roots(_from_roots([3.0, -1.0, 1.0]))
        assert [z.real for z in roots] == pytest.approx([-1.0, 1.0, 3.0])


class TestGoldenSection:
    def test_parabola(self):
        x, y = golden_section_max(lambda t: -(t - 1.3) ** 2 + 4.0, 0.0, 3.0, tol=1e-10)
        assert x == pytest.approx(1.3, abs=1e-8)
        assert y == pytest.approx(4.0)

    def test_maximum_at_edge(self):
        x, _ = golden_section_max(lambda t: t, 0.0, 1.0, tol=1e-9)
        assert x == pytest.approx(1.0, abs=1e-8)

    def test_invalid_bracket(self):
        with pytest.raises(InvalidBracket):
            golden_section_max(lambda t: t, 2.0, 1.0)


class TestFwhm:
    def test_lorentzian(self):
        gamma = 0.3
        xs = [i * 0.001 for i in range(-5000, 5001)]
        ys = [1.0 / (1.0 + (x / gamma) ** 2) for x in xs]
        assert fwhm(xs, ys) == pytest.approx(2 * gamma, rel=1e-4)

    def test_triangle_interpolation(self):
        xs = [0.0, 1.0, 2.0, 3.0, 4.0]
        ys = [0.0, 0.5, 1.0, 0.5, 0.0]
        assert fwhm(xs, ys) == pytest.approx(2.0)

    def test_truncated_side(self):
        xs = [0.0, 1.0, 2.0, 3.0]
        ys = [1.0, 0.9, 0.2, 0.1]
        with pytest.raises(HalfMaxNotBracketed) as exc:
            fwhm(xs, ys)
        assert exc.value.truncated
        assert exc.value.left_truncated and not exc.value.right_truncated
        assert exc.value.width == pytest.approx(1.0 + 0.4 / 0.7)

    def test_crossings(self):
        left, right, lt, rt = half_max_crossings([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
        assert (left, right, lt, rt) == (0.5, 1.5, False, False)

    @pytest.mark.parametrize("factor", [1e-6, 0.37, 1.0, 42.0, 1e9])
    def test_invariant_under_positive_scaling(self, factor):
        xs = [i * 0.01 for i in range(-300, 301)]
        ys = [1.0 / (1.0 + ((x - 0.2) / 0.4) ** 2) for x in xs]
        assert fwhm(xs, [factor * y for y in ys]) == pytest.approx(fwhm(xs, ys), rel=1e-12)

    def test_two_equal_peaks_span_the_outer_crossings(self):
        xs = [float(i) for i in range(11)]
        ys = [0.0, 0.4, 1.6, 2.0, 1.6, 0.4, 1.6, 2.0, 1.6, 0.4, 0.0]
        left, right, lt, rt = half_max_crossings(xs, ys)
        assert left == pytest.approx(1.5)
        assert right == pytest.approx(8.5)
        assert not (lt or rt)
        assert fwhm(xs, ys) == pytest.approx(7.0)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            fwhm([0.0, 1.0], [1.0, 0.0])


def test_lorentzian_width_is_grid_independent():
    gamma = 0.05
    widths = []
    for step in (0.01, 0.005, 0.001):
        n = int(round(1.0 / step))
        xs = [k * step for k in range(-n, n + 1)]
        ys = [1.0 / (1.0 + (x / gamma) ** 2) for x in xs]
        widths.append(fwhm(xs, ys))
    assert all(math.isclose(w, 2 * gamma, rel_tol=2e-2) for w in widths)
