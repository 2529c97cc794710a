import math
import unittest
from fractions import Fraction

import mpmath
import numpy as np

from app.models.asymptotics import AsymptoticsError
from app.models.catalog import MomentStatistic
from app.models.tree import DegreeModel
from app.services.asymptotics_service import AsymptoticsService
from app.services.enumeration_service import EnumerationService


class TestLabeledConstants(unittest.TestCase):
    """Pruebas para las constantes de árboles etiquetados."""

    @classmethod
    def setUpClass(cls):
        cls.constants = AsymptoticsService.labeled_constants()

    def test_alpha_inside_bracket(self):
        self.assertTrue(0.338 < float(self.constants.alpha) < 0.400)

    def test_reference_values(self):
        self.assertAlmostEqual(float(self.constants.A), 2.397678, delta=1e-4)
        self.assertAlmostEqual(float(self.constants.c_l), 0.354379, delta=1e-5)

    def test_slope_agrees_with_series(self):
        self.assertLess(float(self.constants.diagnostics["xi_prime_series_gap"]), 1e-8)

    def test_prediction_close_to_exact(self):
        errors = []
        for n in range(8, 13):
            exact = float(EnumerationService.exact_p_labeled(n))
            errors.append(abs(AsymptoticsService.predict_labeled(n, self.constants) / exact - 1))
        self.assertLess(errors[-1], 0.15)
        self.assertTrue(all(a > b for a, b in zip(errors, errors[1:])))

    def test_truncation_is_stable(self):
        report = AsymptoticsService.truncation_stability(
            lambda order: AsymptoticsService.labeled_constants(order).c_l, 48
        )
        self.assertTrue(report.stable)


class TestUnaryBinaryConstants(unittest.TestCase):
    """Pruebas para las constantes del modelo unario-binario."""

    @classmethod
    def setUpClass(cls):
        cls.constants = AsymptoticsService.unary_binary_constants()

    def test_reference_values(self):
        self.assertAlmostEqual(float(self.constants.C), 1.279101, delta=1e-4)
        self.assertAlmostEqual(float(self.constants.delta), 0.412681, delta=1e-5)

    def test_singularities_ordered(self):
        self.assertGreater(float(self.constants.x1), float(self.constants.x2))
        self.assertAlmostEqual(float(self.constants.x1), 1 / 3, delta=1e-10)

    def test_prediction_close_to_exact(self):
        model = DegreeModel.unary_binary()
        errors = []
        for n in range(8, 15):
            exact = float(EnumerationService.exact_p_gw(n, model))
            errors.append(abs(AsymptoticsService.predict_unary_binary(n, self.constants) / exact - 1))
        self.assertLess(errors[-1], 0.15)
        self.assertTrue(all(a > b for a, b in zip(errors, errors[1:])))


class TestDegreeMeans(unittest.TestCase):
    """Pruebas para las medias lineales de grados."""

    def test_leaf_mean_reference(self):
        self.assertAlmostEqual(float(AsymptoticsService.leaf_mean_constant()), 0.340252, delta=1e-4)

    def test_leaf_formulas_agree(self):
        """La fórmula de la marca y la serie M_0 dan la misma constante."""
        self.assertAlmostEqual(
            float(AsymptoticsService.leaf_mean_constant()),
            float(AsymptoticsService.degree_mean(0)),
            delta=1e-6,
        )

    def test_unit_exponent_recovers_labeled_trees(self):
        self.assertAlmostEqual(float(AsymptoticsService.degree_mean(0, t=1)), math.exp(-1), delta=1e-6)

    def test_labeled_degree_mean(self):
        self.assertAlmostEqual(float(AsymptoticsService.labeled_degree_mean(2)), math.exp(-1) / 2, places=12)

    def test_leaf_growth_matches_enumeration(self):
        """La pendiente de la media exacta en n se acerca a mu."""
        small = EnumerationService.exact_isomorphic_pair_moments(12).mean
        large = EnumerationService.exact_isomorphic_pair_moments(14).mean
        slope = float(large - small) / 2
        self.assertAlmostEqual(slope, 0.340252, delta=0.01)

    def test_labeled_exact_leaf_mean(self):
        n = 10
        moments = EnumerationService.exact_labeled_moments(n)
        self.assertEqual(moments.mean, n * Fraction(n - 1, n) ** (n - 1))


class TestCltConstants(unittest.TestCase):
    """Pruebas para las constantes de los teoremas centrales del límite."""

    def test_logweight_binary121(self):
        constants = AsymptoticsService.logweight_clt_constants(DegreeModel.binary121())
        self.assertAlmostEqual(float(constants.mu), 0.444518, delta=1e-4)
        self.assertAlmostEqual(float(constants.sigma2), 0.072413, delta=1e-3)

    def test_logweight_unary_binary(self):
        constants = AsymptoticsService.logweight_clt_constants(DegreeModel.unary_binary())
        self.assertAlmostEqual(float(constants.mu), 0.176278, delta=1e-4)
        self.assertAlmostEqual(float(constants.sigma2), 0.025865, delta=1e-3)

    def test_logweight_needs_finite_support(self):
        with self.assertRaises(AsymptoticsError):
            AsymptoticsService.logweight_clt_constants(DegreeModel.plane())

    def test_aut(self):
        constants = AsymptoticsService.aut_clt_constants()
        self.assertAlmostEqual(float(constants.mu), 0.137342, delta=1e-3)
        self.assertAlmostEqual(float(constants.sigma2), 0.196770, delta=1e-3)
        self.assertGreater(float(constants.sigma2), 0)

    def test_degree_clt_labeled_leaves(self):
        """Hojas de árboles etiquetados: media e^-1 y varianza (e-2)/e^2."""
        constants = AsymptoticsService.degree_clt_constants([0], model="labeled")
        self.assertAlmostEqual(float(constants.means[0]), math.exp(-1), places=10)
        self.assertAlmostEqual(float(constants.covariance[0][0]), (math.e - 2) / math.e ** 2, delta=1e-3)
        self.assertAlmostEqual(float(constants.reports["mean_0"].refined), math.exp(-1), delta=1e-4)

    def test_degree_clt_rejects_bad_input(self):
        with self.assertRaises(AsymptoticsError):
            AsymptoticsService.degree_clt_constants([], model="labeled")
        with self.assertRaises(AsymptoticsError):
            AsymptoticsService.degree_clt_constants([0], model="plane")

    def test_labelings_mean(self):
        n, mu = 100, 0.137342
        expected = n * math.log(n) - (mu + 1) * n + math.log(n) / 2
        self.assertAlmostEqual(AsymptoticsService.labelings_mean(n, mu), expected)
        with self.assertRaises(AsymptoticsError):
            AsymptoticsService.labelings_mean(0, mu)

    def test_second_difference_of_quadratic(self):
        h = mpmath.mpf("0.01")
        values = {k: (k * h) ** 2 for k in (-2, -1, 0, 1, 2)}
        self.assertAlmostEqual(float(AsymptoticsService.second_difference(values, h)), 2.0, places=10)
        self.assertAlmostEqual(float(AsymptoticsService.first_difference(values, h)), 0.0, places=10)


class TestExactMomentSlopes(unittest.TestCase):
    """Pendientes de los momentos exactos en n frente a las constantes lineales."""

    @staticmethod
    def slope(sizes, values):
        return np.polyfit(sizes, values, 1)[0]

    def test_logweight_slope(self):
        sizes = list(range(8, 15))
        for model in (DegreeModel.binary121(), DegreeModel.unary_binary()):
            with self.subTest(model=model.name):
                mu = float(AsymptoticsService.logweight_clt_constants(model).mu)
                means = [EnumerationService.exact_uniform_polya_moments(n, MomentStatistic.LOG_WEIGHT, model).mean
                         for n in sizes]
                self.assertLess(abs(self.slope(sizes, means) / mu - 1), 0.05)

    def test_aut_slope(self):
        sizes = list(range(8, 17))
        mu = float(AsymptoticsService.aut_clt_constants().mu)
        means = [EnumerationService.exact_uniform_polya_moments(n, MomentStatistic.LOG_AUT).mean for n in sizes]
        self.assertLess(abs(self.slope(sizes, means) / mu - 1), 0.05)

    def test_leaf_variance_slope(self):
        sizes = list(range(8, 15))
        sigma2 = float(AsymptoticsService.degree_clt_constants([0]).covariance[0][0])
        variances = [float(EnumerationService.exact_isomorphic_pair_moments(n, 0).variance) for n in sizes]
        self.assertLess(abs(self.slope(sizes, variances) / sigma2 - 1), 0.10)


if __name__ == '__main__':
    unittest.main()
