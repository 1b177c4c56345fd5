"""
Tests for estimators module.
"""

import math
import unittest

import numpy as np
from hypothesis import given, settings as hypothesis_settings
from hypothesis import strategies as st
from scipy import integrate as scipy_integrate

from dilatio.convex_geometry import EuclideanBall, interval
from dilatio.estimators import (
    coarea_integral,
    dilation_area,
    entropy,
    entropy_dual_lower_bound,
    entropy_variational,
    fisher_information,
    levy_mean,
    log_certificate,
    lp_norm,
    one_sided_interval_dilation_area,
    orlicz_norm,
    perimeter,
    w2_distance_1d,
)
from dilatio.exceptions import DegenerateInputError, DomainError, UnsupportedOperationError
from dilatio.measures import (
    ExponentialOneSided,
    ExponentialSymmetric,
    GaussianMeasure,
    GaussianStd,
    UniformOnBody,
)
from dilatio.qc_functions import Affine, Constant, MaxFloor, Radial, ShiftedRadial
from dilatio.schemas import EstimationBudget

QUAD = EstimationBudget(method="quadrature")


def gaussian_dilation_area(t):
    return 4.0 / math.sqrt(2.0 * math.pi) * t * math.exp(-0.5 * t * t)


class TestEntropy(unittest.TestCase):
    def test_gaussian_square(self):
        result = entropy(Radial(2.0), GaussianStd(1), QUAD)
        self.assertAlmostEqual(result.value, 0.72963, delta=1e-4)
        self.assertEqual(result.method, "quadrature")

    def test_constant_has_zero_entropy(self):
        self.assertAlmostEqual(entropy(Constant(3.0), ExponentialSymmetric(), QUAD).value, 0.0, delta=1e-8)

    def test_variational_form_agrees(self):
        f, m = ShiftedRadial(1.0, 1.0), GaussianStd(1)
        direct = entropy(f, m, QUAD)
        variational = entropy_variational(f, m, QUAD)
        self.assertAlmostEqual(variational.details["r_star"], 2.0, places=8)
        self.assertAlmostEqual(direct.value, variational.value, places=8)

    def test_dual_bound_from_log_certificate(self):
        f, m = ShiftedRadial(1.0, 1.0), GaussianStd(1)
        exact = entropy(f, m, QUAD).value
        bound = entropy_dual_lower_bound(f, m, [log_certificate(f), lambda X: X[:, 0] ** 2 / 4.0], QUAD)
        self.assertIn("lower-bound", bound.flags)
        self.assertLessEqual(bound.value, exact + 1e-8)
        self.assertAlmostEqual(bound.value, exact, delta=1e-6)
        self.assertEqual(bound.details["best"], 0)

    def test_domain_errors(self):
        with self.assertRaises(DomainError):
            entropy(Affine(Radial(1.0), 1.0, -1.0), GaussianStd(1), QUAD)
        with self.assertRaises(DegenerateInputError):
            entropy(Constant(0.0), GaussianStd(1), QUAD)
        with self.assertRaises(DomainError):
            entropy(Radial(1.0, 2), GaussianStd(1), QUAD)
        with self.assertRaises(DomainError):
            entropy_dual_lower_bound(Radial(1.0), GaussianStd(1), [], QUAD)

    @hypothesis_settings(max_examples=8, deadline=None)
    @given(c=st.floats(min_value=0.1, max_value=50.0))
    def test_entropy_is_one_homogeneous(self, c):
        m = ExponentialSymmetric()
        base = entropy(Radial(1.0), m, QUAD).value
        scaled = entropy(Affine(Radial(1.0), c), m, QUAD).value
        self.assertAlmostEqual(scaled, c * base, delta=1e-8 * max(1.0, c))


class TestFisherAndNorms(unittest.TestCase):
    def test_fisher_against_scipy(self):
        f = ShiftedRadial(1.0, 1.0)
        expected, _ = scipy_integrate.quad(
            lambda x: 4.0 * x * x / (x * x + 1.0) * math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi),
            -np.inf, np.inf)
        result = fisher_information(f, GaussianStd(1), QUAD)
        self.assertAlmostEqual(result.value, expected, places=7)
        self.assertNotIn("singular", result.flags)

    def test_singular_fisher_is_flagged(self):
        result = fisher_information(Radial(0.5), GaussianStd(1), QUAD)
        self.assertIn("singular", result.flags)
        self.assertTrue(result.inconclusive)

    def test_lp_norms(self):
        m = ExponentialSymmetric()
        self.assertAlmostEqual(lp_norm(Radial(1.0), m, 2.0, QUAD).value, math.sqrt(2.0), places=8)
        self.assertAlmostEqual(lp_norm(Radial(1.0), m, 3.0, QUAD).value, 6.0 ** (1.0 / 3.0), places=8)
        self.assertAlmostEqual(lp_norm(Constant(2.0), m, -1.0, QUAD).value, 2.0, places=10)
        with self.assertRaises(DomainError):
            lp_norm(Radial(1.0), m, 0.0, QUAD)
        with self.assertRaises(DomainError):
            lp_norm(Radial(1.0), m, -0.5, QUAD)

    @hypothesis_settings(max_examples=8, deadline=None)
    @given(p=st.floats(min_value=0.5, max_value=4.0), dq=st.floats(min_value=0.0, max_value=4.0))
    def test_holder_monotonicity(self, p, dq):
        m, f = GaussianStd(1), ShiftedRadial(1.0, 1.0)
        self.assertLessEqual(lp_norm(f, m, p, QUAD).value, lp_norm(f, m, p + dq, QUAD).value * (1.0 + 1e-8))

    def test_psi1_norm_of_abs_under_laplace(self):
        result = orlicz_norm(Radial(1.0), ExponentialSymmetric(), 1.0, QUAD)
        self.assertAlmostEqual(result.value, 2.0, delta=1e-6)
        self.assertGreater(result.details["ratio"], 1.0 / 8.0)
        self.assertLess(result.details["ratio"], 8.0)

    def test_orlicz_exponent_domain(self):
        with self.assertRaises(DomainError):
            orlicz_norm(Radial(1.0), GaussianStd(1), 0.5, QUAD)


class TestLevyMean(unittest.TestCase):
    def test_medians(self):
        self.assertAlmostEqual(levy_mean(Radial(1.0), ExponentialSymmetric(), QUAD).value, math.log(2.0), places=9)
        self.assertAlmostEqual(levy_mean(Radial(1.0), GaussianStd(1), QUAD).value, 0.6744897501960817, places=9)

    def test_median_at_the_floor(self):
        result = levy_mean(MaxFloor(Radial(1.0), 1.0), ExponentialSymmetric(), QUAD)
        self.assertEqual(result.value, 1.0)
        self.assertEqual(result.std_error, 0.0)

    def test_monte_carlo_median(self):
        budget = EstimationBudget(method="monte-carlo", samples=100_000, seed=3)
        result = levy_mean(Radial(1.0), ExponentialSymmetric(), budget)
        self.assertLess(abs(result.value - math.log(2.0)), 5.0 * result.std_error)
        lo, hi = result.details["ci"]
        self.assertLess(lo, hi)


class TestDilationArea(unittest.TestCase):
    def test_gaussian_closed_form(self):
        for t in (0.5, 1.0, 2.0):
            result = dilation_area(GaussianStd(1), interval(t), budget=QUAD)
            self.assertEqual(result.flags, [])
            self.assertAlmostEqual(result.value / gaussian_dilation_area(t), 1.0, delta=1e-8)

    def test_gaussian_disk(self):
        result = dilation_area(GaussianStd(2), EuclideanBall(2), budget=QUAD)
        self.assertAlmostEqual(result.value, 2.0 * math.exp(-0.5), delta=1e-6)

    def test_monte_carlo_ball(self):
        budget = EstimationBudget(method="monte-carlo", samples=200_000, seed=11)
        result = dilation_area(GaussianStd(3), EuclideanBall(3), budget=budget)
        expected = 2.0 * math.sqrt(2.0 / math.pi) * math.exp(-0.5)
        self.assertEqual(result.method, "monte-carlo+coupled-ladder")
        self.assertLess(abs(result.value - expected), 5.0 * result.std_error)

    def test_uniform_support_clips_body(self):
        m = UniformOnBody(interval(1.0))
        self.assertAlmostEqual(dilation_area(m, interval(0.5), budget=QUAD).value, 1.0, delta=1e-9)
        self.assertAlmostEqual(dilation_area(m, interval(3.0), budget=QUAD).value, 0.0, delta=1e-12)

    def test_shells_stop_at_the_support_edge(self):
        """Test that intervals just inside a uniform support keep their full dilation area"""
        m = UniformOnBody(interval(1.0))
        for t in (0.999, 0.9999):
            result = dilation_area(m, interval(t), budget=QUAD)
            self.assertAlmostEqual(result.value, 2.0 * t, places=6)
            self.assertNotIn("inconclusive", result.flags)
            self.assertLess(result.details["ladder"][0], (1.0 - t) / (1.0 + t))

    def test_ladder_validation(self):
        with self.assertRaises(DomainError):
            dilation_area(GaussianStd(1), interval(1.0), ladder=[0.1, 0.05], budget=QUAD)
        with self.assertRaises(DomainError):
            dilation_area(GaussianStd(2), interval(1.0), budget=QUAD)

    def test_one_sided_exponential(self):
        for x in (0.5, 1.0, 2.0):
            result = one_sided_interval_dilation_area(ExponentialOneSided(), x)
            self.assertAlmostEqual(result.value, x * math.exp(-x), delta=1e-9)
        with self.assertRaises(UnsupportedOperationError):
            one_sided_interval_dilation_area(GaussianStd(1), 1.0)
        with self.assertRaises(DomainError):
            one_sided_interval_dilation_area(ExponentialOneSided(), 0.0)


class TestPerimeter(unittest.TestCase):
    def test_gaussian_interval(self):
        result = perimeter(GaussianStd(1), interval(1.0), budget=QUAD)
        self.assertAlmostEqual(result.value, 2.0 * math.exp(-0.5) / math.sqrt(2.0 * math.pi), delta=1e-8)

    def test_gaussian_circle(self):
        result = perimeter(GaussianStd(2), EuclideanBall(2), budget=QUAD)
        self.assertEqual(result.method, "boundary-quadrature")
        self.assertAlmostEqual(result.value, math.exp(-0.5), delta=1e-6)

    def test_uniform_interval_near_the_edge(self):
        result = perimeter(UniformOnBody(interval(1.0)), interval(0.9999), budget=QUAD)
        self.assertAlmostEqual(result.value, 1.0, places=8)
        self.assertNotIn("inconclusive", result.flags)

    def test_ladder_validation(self):
        with self.assertRaises(DomainError):
            perimeter(GaussianStd(1), interval(1.0), ladder=[0.1, 0.01], budget=QUAD)
        with self.assertRaises(DomainError):
            perimeter(GaussianStd(1), interval(1.0), ladder=[0.5, 0.2, 0.1, 1.5], budget=QUAD)

    def test_monte_carlo_needs_two_samples(self):
        budget = EstimationBudget(method="monte-carlo", samples=1)
        with self.assertRaises(DomainError):
            perimeter(GaussianStd(3), EuclideanBall(3), budget=budget)


class TestTransport(unittest.TestCase):
    def test_gaussian_pair(self):
        result = w2_distance_1d(GaussianMeasure([0.0], 4.0), GaussianStd(1))
        self.assertEqual(result.method, "gaussian-closed-form")
        self.assertAlmostEqual(result.value, 1.0)

    def test_quantile_coupling(self):
        result = w2_distance_1d(UniformOnBody(interval(1.0)), UniformOnBody(interval(2.0)), QUAD)
        self.assertAlmostEqual(result.value, 1.0 / math.sqrt(3.0), places=8)

    def test_beyond_one_dimension(self):
        with self.assertRaises(UnsupportedOperationError):
            w2_distance_1d(UniformOnBody(EuclideanBall(2)), GaussianStd(2))


class TestCoarea(unittest.TestCase):
    def test_laplace_equality(self):
        lhs, rhs = coarea_integral(ExponentialSymmetric(), Radial(1.0), 1.0, "positive", QUAD)
        self.assertAlmostEqual(lhs.value, 2.0, delta=1e-6)
        self.assertAlmostEqual(rhs.value, 2.0, delta=1e-6)

    def test_uniform_equality_up_to_the_support_edge(self):
        """Test that levels next to a uniform support edge are not undercounted"""
        for radius, p, expected in ((1.5, 1.0, 1.5), (3.0, 2.0, 6.0)):
            lhs, rhs = coarea_integral(UniformOnBody(interval(radius)), Radial(1.0), p, "positive", QUAD)
            self.assertAlmostEqual(lhs.value, expected, delta=1e-6)
            self.assertAlmostEqual(rhs.value, expected, delta=1e-6)
            self.assertLessEqual(lhs.details["t_max"], radius)

    def test_argument_checks(self):
        m, f = GaussianStd(1), Radial(1.0)
        with self.assertRaises(DomainError):
            coarea_integral(m, f, 0.0, "positive", QUAD)
        with self.assertRaises(DomainError):
            coarea_integral(m, f, 1.0, "sideways", QUAD)
        with self.assertRaises(DomainError):
            coarea_integral(m, f, 1.0, "negative", QUAD)


if __name__ == "__main__":
    unittest.main()
