import numpy as np
from django.test import SimpleTestCase

from linopt.circuits import (
    SplitterAngles,
    WCoefficients,
    angles_from_coefficients,
    bell_splitter,
    chain_splitter,
    coefficients_from_angles,
    generate_w,
    symmetric_angles,
    w_state,
)
from linopt.exceptions import InvalidParameterError
from linopt.models import MixingConvention


def single_photon(N, mode):
    return tuple(1 if k == mode else 0 for k in range(N))


class CoefficientTests(SimpleTestCase):
    def test_validation(self):
        with self.assertRaises(InvalidParameterError):
            WCoefficients((1.0,))
        with self.assertRaises(InvalidParameterError):
            WCoefficients((0.6, 0.7))
        with self.assertRaises(InvalidParameterError):
            SplitterAngles((2.0,))
        with self.assertRaises(InvalidParameterError):
            SplitterAngles((0.3,), phis=(0.0,))

    def test_symmetric(self):
        w = WCoefficients.symmetric(4)
        self.assertEqual(w.N, 4)
        np.testing.assert_allclose(w.as_array(), 0.5)

    def test_splitters_are_unitary(self):
        for theta in (0.0, 0.3, np.pi / 4, np.pi / 2):
            for u in (chain_splitter(theta), bell_splitter(theta)):
                np.testing.assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-15)


class AngleMapTests(SimpleTestCase):
    def test_symmetric_angles_give_equal_weights(self):
        for N in range(2, 9):
            coefficients = coefficients_from_angles(symmetric_angles(N))
            np.testing.assert_allclose(coefficients.as_array(), 1 / np.sqrt(N), atol=1e-12)

    def test_single_mode_photon(self):
        angles = angles_from_coefficients(WCoefficients((1.0, 0.0)))
        self.assertAlmostEqual(angles.thetas[0], np.pi / 2, places=12)

    def test_two_mode_angle(self):
        angles = angles_from_coefficients(WCoefficients((0.6, 0.8)))
        self.assertAlmostEqual(np.sin(angles.thetas[0]), 0.6, places=12)

    def test_round_trip_with_phases(self):
        rng = np.random.default_rng(7)
        for sample in range(1000):
            N = 2 + sample % 7
            vector = rng.normal(size=N) + 1j * rng.normal(size=N)
            coefficients = WCoefficients(tuple(vector / np.linalg.norm(vector)))
            recovered = coefficients_from_angles(angles_from_coefficients(coefficients))
            np.testing.assert_allclose(recovered.as_array(), coefficients.as_array(), atol=1e-10)

    def test_trailing_zero_weight(self):
        angles = angles_from_coefficients(WCoefficients((1.0, 0.0, 0.0)))
        self.assertAlmostEqual(angles.thetas[0], np.pi / 2)
        self.assertEqual(angles.thetas[1], 0.0)


class GenerationTests(SimpleTestCase):
    def test_symmetric_chain(self):
        for N in range(2, 9):
            state = generate_w(symmetric_angles(N))
            for mode in range(N):
                self.assertAlmostEqual(state.amplitude(single_photon(N, mode)), 1 / np.sqrt(N), places=12)
            self.assertAlmostEqual(state.norm_squared, 1.0, places=12)

    def test_chain_matches_closed_form_state(self):
        coefficients = WCoefficients((0.5, 0.5j, -0.5, 0.5 * np.exp(0.3j)))
        simulated = generate_w(angles_from_coefficients(coefficients))
        expected = w_state(coefficients)
        for counts, amplitude in expected.amplitudes.items():
            self.assertAlmostEqual(simulated.amplitude(counts), amplitude, places=12)

    def test_transposed_convention_keeps_weights(self):
        state = generate_w(symmetric_angles(5), convention=MixingConvention.TRANSPOSED)
        for mode in range(5):
            self.assertAlmostEqual(abs(state.amplitude(single_photon(5, mode))), 1 / np.sqrt(5), places=12)
