"""
Tests for measures module.
"""

import math
import unittest

import numpy as np
from scipy import special, stats

from dilatio.convex_geometry import EuclideanBall, HPolytope, interval
from dilatio.exceptions import ConstructionError, DomainError, UnsupportedOperationError
from dilatio.measures import (
    ExponentialOneSided,
    ExponentialSymmetric,
    GaussianMeasure,
    GaussianStd,
    LogConcaveCustom,
    Numeric1DMeasure,
    PerturbedMeasure,
    ProductMeasure,
    UniformOnBody,
    expect,
    mass_of_body,
    moment,
    quantile_1d,
    sample,
    total_mass,
)
from dilatio.schemas import EstimationBudget

QUAD = EstimationBudget(method="quadrature")
MC = EstimationBudget(method="monte-carlo", samples=200_000, seed=7)


class TestKappaClaims(unittest.TestCase):
    def test_default_claims(self):
        self.assertEqual(GaussianStd(3).kappa, 2.0)
        self.assertEqual(GaussianMeasure([1.0], 1.0).kappa, 1.0)
        self.assertEqual(ExponentialOneSided().kappa, 1.0)
        self.assertEqual(ExponentialSymmetric().kappa, 2.0)
        self.assertEqual(UniformOnBody(interval(1.0)).kappa, 2.0)
        self.assertEqual(UniformOnBody(EuclideanBall(2)).kappa, 1.0)
        self.assertEqual(ProductMeasure([ExponentialSymmetric(), ExponentialSymmetric()]).kappa, 1.0)
        self.assertEqual(LogConcaveCustom(3.0).kappa, 2.0)

    def test_perturbation_divides_by_bound_squared(self):
        m = PerturbedMeasure(GaussianStd(1), amplitude=0.2, frequency=1.0, bound=1.5)
        self.assertAlmostEqual(m.kappa, 8.0 / 9.0)
        self.assertAlmostEqual(m.normalizer, 1.0 + 0.2 * math.exp(-0.5))
        self.assertGreaterEqual(m.h_min, 1.0 / 1.5)
        self.assertLessEqual(m.h_max, 1.5)
        self.assertIn("perturbation", m.kappa_source)

    def test_perturbation_outside_bound(self):
        with self.assertRaises(ConstructionError):
            PerturbedMeasure(GaussianStd(1), amplitude=0.9, frequency=1.0, bound=1.2)
        with self.assertRaises(ConstructionError):
            PerturbedMeasure(GaussianStd(1), amplitude=0.2, frequency=1.0, bound=0.5)

    def test_claim_kappa(self):
        m = GaussianStd(1).claim_kappa(1.5)
        self.assertEqual(m.kappa, 1.5)
        self.assertEqual(m.kappa_source, "user")
        self.assertIs(m.claim_kappa(None), m)
        self.assertEqual(m.kappa, 1.5)
        with self.assertRaises(ConstructionError):
            m.claim_kappa(0.0)

    def test_invalid_constructions(self):
        with self.assertRaises(ConstructionError):
            GaussianMeasure([0.0, 0.0], [[1.0, 2.0], [2.0, 1.0]])
        with self.assertRaises(ConstructionError):
            LogConcaveCustom(0.5)
        with self.assertRaises(ConstructionError):
            ProductMeasure([GaussianStd(1)])
        with self.assertRaises(ConstructionError):
            Numeric1DMeasure(lambda x: -x ** 2, 1.0, -1.0)


class TestMass(unittest.TestCase):
    def test_gaussian_interval(self):
        mu = mass_of_body(GaussianStd(1), interval(1.0), QUAD)
        self.assertAlmostEqual(mu.value, special.erf(1.0 / math.sqrt(2.0)), places=12)
        self.assertEqual(mu.std_error, 0.0)

    def test_exponentials(self):
        self.assertAlmostEqual(mass_of_body(ExponentialSymmetric(), interval(1.0), QUAD).value, 1.0 - math.exp(-1.0),
                               places=12)
        self.assertAlmostEqual(mass_of_body(ExponentialOneSided(), interval(2.0), QUAD).value, 1.0 - math.exp(-2.0),
                               places=12)

    def test_gaussian_square_by_polar_quadrature(self):
        mu = mass_of_body(GaussianStd(2), HPolytope.box([1.0, 1.0]), QUAD)
        self.assertAlmostEqual(mu.value, special.erf(1.0 / math.sqrt(2.0)) ** 2, places=6)

    def test_gaussian_ball_closed_form(self):
        mu = mass_of_body(GaussianStd(3), EuclideanBall(3, 1.5), QUAD)
        self.assertAlmostEqual(mu.value, stats.chi2.cdf(2.25, 3), places=12)

    def test_monte_carlo_within_error(self):
        m = ProductMeasure([ExponentialSymmetric(), ExponentialSymmetric(), ExponentialSymmetric()])
        mu = mass_of_body(m, HPolytope.box([1.0, 1.0, 1.0]), MC)
        self.assertEqual(mu.method, "monte-carlo")
        self.assertLess(abs(mu.value - (1.0 - math.exp(-1.0)) ** 3), 5.0 * mu.std_error)

    def test_monte_carlo_is_seeded(self):
        m = ProductMeasure([ExponentialSymmetric()] * 3)
        K = HPolytope.box([1.0, 1.0, 1.0])
        self.assertEqual(mass_of_body(m, K, MC).value, mass_of_body(m, K, MC).value)

    def test_quadrature_beyond_two_dimensions(self):
        with self.assertRaises(UnsupportedOperationError):
            mass_of_body(ProductMeasure([ExponentialSymmetric()] * 3), HPolytope.box([1.0] * 3), QUAD)

    def test_dimension_mismatch(self):
        with self.assertRaises(DomainError):
            mass_of_body(GaussianStd(2), interval(1.0), QUAD)

    def test_total_mass(self):
        for m in (GaussianStd(2), ExponentialSymmetric(), UniformOnBody(EuclideanBall(2)), LogConcaveCustom(4.0, 2.0)):
            self.assertAlmostEqual(total_mass(m, QUAD).value, 1.0, places=8)


class TestMoments(unittest.TestCase):
    def test_analytic_moments(self):
        self.assertAlmostEqual(moment(GaussianStd(1), 2.0, QUAD).value, 1.0)
        self.assertAlmostEqual(moment(GaussianStd(2), 2.0, QUAD).value, 2.0)
        self.assertAlmostEqual(moment(ExponentialSymmetric(), 3.0, QUAD).value, 6.0)
        self.assertAlmostEqual(moment(UniformOnBody(interval(1.0)), 2.0, QUAD).value, 1.0 / 3.0)

    def test_numeric_moment_matches_gamma(self):
        m = ProductMeasure([GaussianStd(1), GaussianStd(1)])
        self.assertAlmostEqual(moment(m, 1.0, QUAD).value, math.sqrt(math.pi / 2.0), places=8)

    def test_order_must_be_positive(self):
        with self.assertRaises(DomainError):
            moment(GaussianStd(1), 0.0, QUAD)

    def test_expect_polynomial(self):
        result = expect(ExponentialSymmetric(), lambda X: X[:, 0] ** 4, QUAD)
        self.assertAlmostEqual(result.value, 24.0, places=7)

    def test_overflow_where_density_vanishes_is_ignored(self):
        def F(X):
            with np.errstate(over="ignore"):
                return np.exp(0.5 * np.abs(X[:, 0]))
        result = expect(ExponentialSymmetric(), F, QUAD)
        self.assertAlmostEqual(result.value, 2.0, places=7)
        self.assertNotIn("infinite", result.flags)

    def test_divergent_expectation_is_flagged(self):
        def F(X):
            with np.errstate(over="ignore"):
                return np.exp(X[:, 0] ** 2)
        result = expect(GaussianStd(1), F, QUAD)
        self.assertIn("infinite", result.flags)
        self.assertIn("inconclusive", result.flags)


class TestSamplingAndQuantiles(unittest.TestCase):
    def test_quantiles(self):
        self.assertAlmostEqual(quantile_1d(GaussianStd(1), 0.975), 1.959963984540054)
        self.assertAlmostEqual(quantile_1d(ExponentialSymmetric(), 0.75), math.log(2.0))
        self.assertAlmostEqual(quantile_1d(UniformOnBody(interval(2.0)), 0.25), -1.0)
        with self.assertRaises(DomainError):
            quantile_1d(GaussianStd(1), 1.0)
        with self.assertRaises(UnsupportedOperationError):
            quantile_1d(GaussianStd(2), 0.5)

    def test_numeric_quantile_inverts_cdf(self):
        m = LogConcaveCustom(4.0)
        for u in (0.1, 0.5, 0.9):
            self.assertAlmostEqual(float(m.cdf(m.quantile(u))), u, places=10)
        self.assertAlmostEqual(float(m.quantile(0.5)), 0.0, places=10)

    def test_samples_are_reproducible(self):
        a = sample(GaussianStd(2), 100, seed=3)
        b = sample(GaussianStd(2), 100, seed=3)
        np.testing.assert_array_equal(a, b)
        self.assertEqual(a.shape, (100, 2))

    def test_uniform_samples_stay_inside(self):
        K = HPolytope.box([1.0, 0.5])
        X = sample(UniformOnBody(K), 2000, seed=1)
        self.assertTrue(np.all(K.gauge(X) < 1.0))

    def test_perturbed_samples_follow_density(self):
        m = PerturbedMeasure(GaussianStd(1), amplitude=0.2, frequency=1.0, bound=1.5)
        X = sample(m, 20000, seed=11)[:, 0]
        result = stats.kstest(X, lambda x: np.asarray(m.cdf(x)))
        self.assertGreater(result.pvalue, 1e-4)

    def test_sample_count(self):
        with self.assertRaises(DomainError):
            sample(GaussianStd(1), 0, seed=0)


if __name__ == "__main__":
    unittest.main()
