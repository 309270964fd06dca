import math

from django.test import SimpleTestCase

from linopt.optimize import bisect_root, golden_section_max, polish_maximum


class GoldenSectionTests(SimpleTestCase):
    def test_interior_maximum(self):
        result = golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0)
        self.assertTrue(result.converged)
        self.assertAlmostEqual(result.argmax, 0.3, delta=1e-7)
        self.assertGreater(result.iterations, 0)

    def test_boundary_maximum(self):
        result = golden_section_max(lambda x: x, 0.0, math.pi / 2)
        self.assertEqual(result.argmax, math.pi / 2)
        result = golden_section_max(lambda x: -x, 0.0, 1.0)
        self.assertEqual(result.argmax, 0.0)

    def test_degenerate_interval(self):
        result = golden_section_max(lambda x: x, 0.5, 0.5)
        self.assertEqual(result.argmax, 0.5)
        self.assertEqual(result.iterations, 0)

    def test_polish_sharpens_smooth_maximum(self):
        def f(x):
            return math.cos(x - 0.7)

        coarse = golden_section_max(f, 0.0, 1.5)
        self.assertAlmostEqual(polish_maximum(f, coarse.argmax, 0.0, 1.5), 0.7, delta=1e-9)

    def test_polish_leaves_boundary_alone(self):
        self.assertEqual(polish_maximum(lambda x: x, 1.0, 0.0, 1.0), 1.0)


class BisectionTests(SimpleTestCase):
    def test_root(self):
        self.assertAlmostEqual(bisect_root(lambda x: x * x - 2, 0.0, 2.0), math.sqrt(2), delta=1e-9)

    def test_root_at_lower_end(self):
        self.assertEqual(bisect_root(lambda x: x + 1, 0.0, 1.0), 0.0)

    def test_no_sign_change(self):
        with self.assertLogs('linopt.optimize', level='WARNING'):
            self.assertTrue(math.isnan(bisect_root(lambda x: x - 5, 0.0, 1.0)))
