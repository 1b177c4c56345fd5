"""
Tests for the inequality checks and their verdicts.
"""

import math
import unittest

from dilatio.convex_geometry import EuclideanBall, HPolytope, interval
from dilatio.exceptions import DomainError
from dilatio.measures import (
    ExponentialOneSided,
    ExponentialSymmetric,
    GaussianStd,
    PerturbedMeasure,
    UniformOnBody,
)
from dilatio.qc_functions import Constant, MaxFloor, Radial, ShiftedRadial
from dilatio.schemas import EstimationBudget, Estimate
from dilatio.verifiers import (
    check_borell_lemma,
    check_coarea,
    check_dilation,
    check_entropy_bounds,
    check_gaussian_suite,
    check_isoperimetry,
    check_lsi,
    check_moment_suite,
    check_negative_suite,
    check_one_sided_dilation,
    check_stability,
    harmonic_kappa,
    poincare_constant,
    reconstruct_dilation,
    resolve_kappa,
    sharpness_probes,
    verdict,
)
from dilatio.verifiers.base import worst
from dilatio.verifiers.dilation import borell_envelope

QUAD = EstimationBudget(method="quadrature")


def inconclusive(value):
    return Estimate(value=value, method="test", flags=["inconclusive"])


class TestVerdict(unittest.TestCase):
    def test_clear_pass_and_fail(self):
        passed = verdict("ok", Estimate.exact(1.0), Estimate.exact(2.0))
        self.assertEqual(passed.status, "pass")
        self.assertEqual(passed.margin, 1.0)
        self.assertEqual(verdict("bad", Estimate.exact(2.1), Estimate.exact(2.0)).status, "fail")

    def test_small_excess_is_inconclusive(self):
        self.assertEqual(verdict("close", Estimate.exact(2.0 + 1e-7), Estimate.exact(2.0)).status, "inconclusive")

    def test_noise_absorbs_small_excess(self):
        lhs = Estimate(value=2.01, std_error=0.01, method="monte-carlo")
        result = verdict("noisy", lhs, Estimate.exact(2.0))
        self.assertEqual(result.status, "pass")
        self.assertAlmostEqual(result.tolerance, 0.03)

    def test_flagged_inputs_never_fail(self):
        self.assertEqual(verdict("a", Estimate.exact(1.0), inconclusive(2.0)).status, "pass")
        self.assertEqual(verdict("b", Estimate.exact(1.9999), inconclusive(2.0)).status, "inconclusive")
        flagged = verdict("c", inconclusive(3.0), Estimate.exact(2.0))
        self.assertEqual(flagged.status, "inconclusive")
        self.assertIn("estimate flagged inconclusive", flagged.notes)

    def test_non_finite_sides(self):
        self.assertEqual(verdict("inf", Estimate.exact(1.0), Estimate.exact(math.inf)).status, "pass")
        self.assertEqual(verdict("nan", Estimate.exact(math.nan), Estimate.exact(1.0)).status, "inconclusive")

    def test_worst_orders_by_status_then_margin(self):
        results = [
            verdict("p", Estimate.exact(0.0), Estimate.exact(1.0)),
            verdict("i", Estimate.exact(2.0 + 1e-7), Estimate.exact(2.0)),
            verdict("f1", Estimate.exact(3.0), Estimate.exact(2.0)),
            verdict("f2", Estimate.exact(5.0), Estimate.exact(2.0)),
        ]
        self.assertEqual(worst(results).check_id, "f2")
        self.assertEqual(worst(results[:2]).check_id, "i")

    def test_resolve_kappa(self):
        self.assertEqual(resolve_kappa(GaussianStd(1))[0], 2.0)
        self.assertEqual(resolve_kappa(GaussianStd(1), 0.5), (0.5, "user"))
        with self.assertRaises(DomainError):
            resolve_kappa(GaussianStd(1), -1.0)


class TestDilationChecks(unittest.TestCase):
    def test_gaussian_interval_passes(self):
        result = check_dilation(GaussianStd(1), interval(1.0), budget=QUAD)
        self.assertEqual(result.status, "pass")
        self.assertGreater(result.margin, 0.0)
        self.assertEqual(result.kappa, 2.0)
        self.assertAlmostEqual(result.witness["mass"], math.erf(1.0 / math.sqrt(2.0)), places=12)

    def test_overclaimed_kappa_fails(self):
        result = check_dilation(GaussianStd(1), interval(0.01), kappa=5.0, budget=QUAD)
        self.assertEqual(result.status, "fail")
        self.assertEqual(result.kappa_source, "user")

    def test_full_mass_is_trivial(self):
        result = check_dilation(UniformOnBody(interval(1.0)), interval(2.0), budget=QUAD)
        self.assertEqual(result.status, "pass")
        self.assertEqual(result.margin, 0.0)
        self.assertTrue(result.notes)

    def test_exponential_equality_cases(self):
        symmetric = check_dilation(ExponentialSymmetric(), interval(1.0), 2.0, QUAD)
        self.assertEqual(symmetric.status, "pass")
        self.assertLess(abs(symmetric.margin), 1e-8)
        one_sided = check_one_sided_dilation(ExponentialOneSided(), 1.0, 1.0, QUAD)
        self.assertEqual(one_sided.status, "pass")
        self.assertLess(abs(one_sided.margin), 1e-8)

    def test_coarea_on_laplace(self):
        result = check_coarea(ExponentialSymmetric(), Radial(1.0), budget=QUAD)
        self.assertEqual(result.status, "pass")
        self.assertAlmostEqual(result.lhs.value, result.rhs.value, delta=1e-5)

    def test_borell_lemma(self):
        results = check_borell_lemma(GaussianStd(1), interval(1.5), budget=QUAD)
        self.assertEqual(len(results), 9)
        self.assertTrue(all(r.status == "pass" for r in results))
        with self.assertRaises(DomainError):
            check_borell_lemma(GaussianStd(1), interval(0.5), budget=QUAD)

    def test_borell_envelope_recovers_rate(self):
        grid = [1.0, 2.0, 3.0, 4.0]
        c, C = borell_envelope([3.0 * math.exp(-2.0 * t) for t in grid], grid)
        self.assertAlmostEqual(c, 3.0)
        self.assertAlmostEqual(C, 2.0)


class TestSharpness(unittest.TestCase):
    def test_probes_pass(self):
        results = sharpness_probes(QUAD)
        ids = [r.check_id for r in results]
        self.assertIn("sharpness.gaussian-limit", ids)
        self.assertIn("sharpness.borell-envelope", ids)
        self.assertEqual([r.check_id for r in results if r.status != "pass"], [])
        limit = next(r for r in results if r.check_id == "sharpness.gaussian-limit")
        self.assertGreaterEqual(limit.lhs.value, 1.0)
        self.assertLessEqual(limit.lhs.value, 1.01)


class TestEntropyChecks(unittest.TestCase):
    def test_variants_on_gaussian_square(self):
        for variant in ("master", "c1", "convex", "lipschitz"):
            result = check_entropy_bounds(GaussianStd(1), Radial(2.0), variant=variant, budget=QUAD)
            self.assertEqual(result.status, "pass", variant)
            self.assertAlmostEqual(result.lhs.value, 0.72963, delta=1e-4)
            self.assertAlmostEqual(result.rhs.value, 2.0, delta=1e-8)

    def test_variant_requirements(self):
        with self.assertRaises(DomainError):
            check_entropy_bounds(GaussianStd(1), Radial(1.0), variant="c1", budget=QUAD)
        with self.assertRaises(DomainError):
            check_entropy_bounds(GaussianStd(1), Radial(2.0), variant="sobolev", budget=QUAD)

    def test_lsi_forms(self):
        f = ShiftedRadial(1.0, 1.0)
        for variant in ("cauchy-schwarz", "defective"):
            self.assertEqual(check_lsi(GaussianStd(1), f, variant=variant, budget=QUAD).status, "pass", variant)
        uniform = UniformOnBody(interval(1.0))
        self.assertEqual(check_lsi(uniform, f, variant="bounded", budget=QUAD).status, "pass")
        one_dim = check_lsi(uniform, Radial(1.0), variant="one-dim", budget=QUAD)
        self.assertEqual(one_dim.status, "pass")
        self.assertAlmostEqual(one_dim.witness["poincare"], (math.pi / 2.0) ** 2)

    def test_lsi_domain(self):
        with self.assertRaises(DomainError):
            check_lsi(GaussianStd(1), Radial(1.0), variant="one-dim", budget=QUAD)
        with self.assertRaises(DomainError):
            check_lsi(GaussianStd(1), Radial(1.0), variant="bounded", budget=QUAD)

    def test_poincare_constant(self):
        self.assertEqual(poincare_constant(GaussianStd(1), 3.0), 3.0)
        self.assertAlmostEqual(poincare_constant(UniformOnBody(interval(1.0))), (math.pi / 2.0) ** 2)
        self.assertAlmostEqual(poincare_constant(GaussianStd(1)), 1.0 / (2.0 * math.pi))
        with self.assertRaises(DomainError):
            poincare_constant(GaussianStd(1), 0.0)


class TestIsoperimetry(unittest.TestCase):
    def test_gaussian_interval(self):
        results = check_isoperimetry(GaussianStd(1), interval(1.0), budget=QUAD)
        self.assertEqual([r.check_id for r in results],
                         ["isoperimetry.surface", "isoperimetry.direct", "isoperimetry.bridge"])
        self.assertTrue(all(r.status == "pass" for r in results))
        direct = results[1]
        self.assertAlmostEqual(direct.rhs.value, 0.48394, delta=1e-5)
        mu = math.erf(1.0 / math.sqrt(2.0))
        self.assertAlmostEqual(direct.lhs.value, -(1.0 - mu) * math.log1p(-mu), places=10)

    def test_gaussian_interval_bounds(self):
        surface, direct, bridge = check_isoperimetry(GaussianStd(1), interval(1.0), p=2.0, budget=QUAD)
        self.assertAlmostEqual(surface.lhs.value, 0.27428, delta=1e-4)
        self.assertAlmostEqual(surface.rhs.value, 0.48394, delta=1e-4)
        self.assertAlmostEqual(direct.lhs.value, 0.36432, delta=1e-4)
        self.assertLessEqual(bridge.lhs.value, bridge.rhs.value)

    def test_exponent_range(self):
        with self.assertRaises(DomainError):
            check_isoperimetry(GaussianStd(1), interval(1.0), p=3.0, budget=QUAD)


class TestMomentChecks(unittest.TestCase):
    def test_laplace_abs(self):
        results = check_moment_suite(ExponentialSymmetric(), Radial(1.0), budget=QUAD)
        by_id = {r.check_id: r for r in results}
        self.assertIn("moment[p=1,q=2]", by_id)
        self.assertIn("moment.orlicz", by_id)
        self.assertIn("moment.deviation", by_id)
        self.assertTrue(all(r.status == "pass" for r in results))
        self.assertAlmostEqual(by_id["moment.orlicz"].witness["psi_alpha"], 2.0, delta=1e-5)
        self.assertAlmostEqual(by_id["moment[p=1,q=2]"].witness["exponent"], 1.0, delta=1e-9)

    def test_every_integer_pair_up_to_eight(self):
        pairs = [(float(p), float(q)) for p in range(1, 9) for q in range(p, 9)]
        results = check_moment_suite(ExponentialSymmetric(), Radial(1.0), pairs=pairs, budget=QUAD)
        moments = [r for r in results if r.check_id.startswith("moment[")]
        self.assertEqual(len(moments), 36)
        self.assertTrue(all(r.status == "pass" for r in moments), [r.check_id for r in moments if r.status != "pass"])
        by_id = {r.check_id: r for r in moments}
        self.assertAlmostEqual(by_id["moment[p=1,q=8]"].lhs.value, math.factorial(8) ** 0.125, places=6)

    def test_bad_pairs(self):
        with self.assertRaises(DomainError):
            check_moment_suite(ExponentialSymmetric(), Radial(1.0), pairs=[(3.0, 2.0)], budget=QUAD)

    def test_negative_suite_on_floored_abs(self):
        results = check_negative_suite(ExponentialSymmetric(), MaxFloor(Radial(1.0), 1.0), budget=QUAD)
        ids = [r.check_id for r in results]
        self.assertEqual(ids[:3], ["negative.median[p=0.1]", "negative.median[p=0.3]", "negative.median[p=0.5]"])
        self.assertEqual(len(ids), 13)
        self.assertTrue(all(r.status == "pass" for r in results))
        self.assertEqual(results[0].witness["median"], 1.0)

    def test_negative_suite_constant_is_trivial(self):
        results = check_negative_suite(GaussianStd(1), Constant(2.0), budget=QUAD)
        self.assertEqual(len(results), 1)
        self.assertEqual(results[0].status, "pass")
        with self.assertRaises(DomainError):
            check_negative_suite(GaussianStd(1), Radial(1.0), budget=QUAD)


class TestGaussianSuite(unittest.TestCase):
    def test_constant_function(self):
        results = check_gaussian_suite(Constant(1.0), QUAD)
        self.assertEqual([r.check_id for r in results],
                         ["gaussian.entvar", "gaussian.wvar", "gaussian.varest", "gaussian.reverse-shannon",
                          "gaussian.cramer-rao", "gaussian.transport[sigma=0.5]", "gaussian.transport[sigma=2]"])
        self.assertTrue(all(r.status == "pass" for r in results))

    def test_rejects_nonpositive_constant(self):
        with self.assertRaises(DomainError):
            check_gaussian_suite(Constant(0.0), QUAD)

    def test_non_constant_functions(self):
        """Test the variance and uncertainty forms on densities other than the Gaussian itself"""
        for f, second_moment in ((Radial(2.0), 3.0), (Radial(1.0), 2.0), (ShiftedRadial(1.0, 1.0), 2.0)):
            results = check_gaussian_suite(f, QUAD)
            by_id = {r.check_id: r for r in results}
            self.assertTrue(all(r.status == "pass" for r in results),
                            [(f.kind, r.check_id) for r in results if r.status != "pass"])
            self.assertAlmostEqual(by_id["gaussian.varest"].rhs.value, second_moment, delta=1e-6)
            self.assertIn("gaussian.cramer-rao", by_id)

    def test_reverse_shannon_equality_in_two_dimensions(self):
        results = check_gaussian_suite(Constant(1.0, 2), QUAD)
        shannon = {r.check_id: r for r in results}["gaussian.reverse-shannon"]
        expected = -math.log(2.0 * math.pi * math.e)
        self.assertAlmostEqual(shannon.lhs.value, expected, delta=1e-9)
        self.assertAlmostEqual(shannon.rhs.value, expected, delta=1e-9)
        self.assertEqual(shannon.status, "pass")


class TestStability(unittest.TestCase):
    def test_perturbed_gaussian(self):
        measure = PerturbedMeasure(GaussianStd(1), 0.2, 1.0, 1.5)
        result = check_stability("perturbation", measure=measure, budget=QUAD)
        self.assertEqual(result.check_id, "stability")
        self.assertEqual(result.status, "pass")
        self.assertAlmostEqual(result.kappa, 8.0 / 9.0)
        self.assertTrue(any(note.startswith("worst of 5") for note in result.notes))

    def test_tensor_harmonic(self):
        result = check_stability("tensor-harmonic", bodies=[HPolytope.box([1.0, 1.0])],
                                 factors=[GaussianStd(1), ExponentialSymmetric()], budget=QUAD)
        self.assertEqual(result.status, "pass")
        self.assertAlmostEqual(result.kappa, 1.0)

    def test_tensor_entropy_subadditive(self):
        """Test that the joint entropy of |x|^2 stays below the sum of the conditional entropies"""
        result = check_stability("tensor-entropy", factors=[GaussianStd(1), GaussianStd(1)],
                                 function=Radial(2.0, 2), budget=QUAD)
        self.assertEqual(result.check_id, "stability")
        self.assertNotEqual(result.status, "fail")
        self.assertLess(result.lhs.value, result.rhs.value + 1e-9)
        self.assertGreater(result.lhs.value, 0.0)

    def test_tensor_entropy_needs_function(self):
        with self.assertRaises(DomainError):
            check_stability("tensor-entropy", factors=[GaussianStd(1), GaussianStd(1)], budget=QUAD)

    def test_explore_is_never_conclusive(self):
        budget = EstimationBudget(method="monte-carlo", samples=20_000, seed=5)
        self.assertEqual(check_stability("tensor-explore", budget=budget).status, "inconclusive")

    def test_mode_validation(self):
        with self.assertRaises(DomainError):
            check_stability("rotation")
        with self.assertRaises(DomainError):
            check_stability("perturbation", measure=GaussianStd(1))
        with self.assertRaises(DomainError):
            check_stability("tensor-harmonic", bodies=[EuclideanBall(2)], factors=[GaussianStd(1)])

    def test_harmonic_kappa(self):
        self.assertEqual(harmonic_kappa([2.0, 2.0]), 1.0)
        self.assertAlmostEqual(harmonic_kappa([2.0, 1.0]), 2.0 / 3.0)


class TestReconstruction(unittest.TestCase):
    def test_gaussian_interval(self):
        result, rows = reconstruct_dilation(GaussianStd(1), interval(1.0), kappa=2.0, budget=QUAD)
        self.assertEqual(len(rows), 9)
        self.assertTrue(all(row.holds for row in rows))
        self.assertIn(result.status, ("pass", "inconclusive"))
        mu = math.erf(1.0 / math.sqrt(2.0))
        self.assertAlmostEqual(result.witness["direct_lhs"], -2.0 * (1.0 - mu) * math.log1p(-mu), places=10)

    def test_full_mass_is_trivial(self):
        result, rows = reconstruct_dilation(UniformOnBody(interval(1.0)), interval(2.0), budget=QUAD)
        self.assertEqual(result.status, "pass")
        self.assertEqual(rows, [])


if __name__ == "__main__":
    unittest.main()
