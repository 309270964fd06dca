import numpy as np
from django.test import SimpleTestCase

from linopt.circuits import WCoefficients, w_state
from linopt.detection import (
    DetectorModel,
    PovmElement,
    ancilla_moments,
    condition,
    counted_moments,
    ideal_moments,
    lossy_moments,
    outcome_probability,
    povm_family,
    povm_number,
    povm_onoff,
)
from linopt.exceptions import DimensionMismatchError, InvalidParameterError, InvalidStateError
from linopt.fock import PureState, vacuum
from linopt.models import DetectorKind
from linopt.witness import pair_state


class PovmTests(SimpleTestCase):
    def test_number_resolving_weights(self):
        eta = 0.7
        element = povm_number(1, DetectorModel(eta))
        np.testing.assert_allclose(element.diagonal, [0.0, eta, 2 * eta * (1 - eta)])

    def test_families_are_complete(self):
        for kind in DetectorKind:
            family = povm_family(kind, DetectorModel(0.4))
            np.testing.assert_allclose(sum(element.diagonal for _, element in family), 1.0, atol=1e-15)

    def test_onoff_is_complement_of_vacuum(self):
        det = DetectorModel(0.3)
        on = povm_onoff(True, det)
        np.testing.assert_allclose(on.diagonal, 1 - (1 - 0.3) ** np.arange(3))
        self.assertEqual(on.label, 'on')

    def test_invalid_inputs(self):
        with self.assertRaises(InvalidParameterError):
            DetectorModel(1.5)
        with self.assertRaises(InvalidStateError):
            PovmElement(np.array([0.5, 1.5]), label='bad')
        with self.assertRaises(InvalidParameterError):
            povm_number(3, DetectorModel(1.0))


class ConditioningTests(SimpleTestCase):
    def test_vacuum_outcome_on_w_state(self):
        eta = 0.6
        rho = w_state(WCoefficients.symmetric(3)).density()
        off = povm_number(0, DetectorModel(eta))
        conditioned = condition(rho, {2: off})
        self.assertEqual(conditioned.num_modes, 2)
        self.assertAlmostEqual(conditioned.trace, 1 - eta / 3, places=12)
        self.assertAlmostEqual(outcome_probability(rho, [(2, off)]), 1 - eta / 3, places=12)

    def test_measuring_every_mode_keeps_the_operator(self):
        rho = vacuum(2)
        off = povm_number(0, DetectorModel(1.0))
        conditioned = condition(rho, {0: off, 1: off})
        self.assertEqual(conditioned.num_modes, 2)
        self.assertAlmostEqual(conditioned.trace, 1.0)

    def test_empty_assignment_is_identity(self):
        rho = vacuum(2)
        self.assertIs(condition(rho, {}), rho)

    def test_duplicate_modes_rejected(self):
        off = povm_number(0, DetectorModel(1.0))
        with self.assertRaises(InvalidParameterError):
            condition(vacuum(2), [(0, off), (0, off)])

    def test_short_povm_rejected(self):
        element = PovmElement(np.array([1.0, 0.0]), label='0')
        with self.assertRaises(DimensionMismatchError):
            condition(vacuum(2), {0: element})


class MomentTests(SimpleTestCase):
    def setUp(self):
        self.psi_plus = PureState(2, {(1, 0): 1 / np.sqrt(2), (0, 1): 1 / np.sqrt(2)}).density()

    def test_ideal_moments_of_bell_pair(self):
        moments = ideal_moments(self.psi_plus)
        self.assertAlmostEqual(moments.var_jx, 0.0, places=14)
        self.assertAlmostEqual(moments.var_jy, 0.25, places=14)
        self.assertAlmostEqual(moments.n_plus, 1.0, places=14)

    def test_loss_transform(self):
        eta = 0.5
        moments = lossy_moments(self.psi_plus, DetectorModel(eta))
        self.assertAlmostEqual(moments.n_plus, eta, places=14)
        self.assertAlmostEqual(4 * moments.var_jx, eta * (1 - eta), places=14)
        self.assertAlmostEqual(4 * moments.var_jy, eta ** 2 + eta * (1 - eta), places=14)

    def test_ancilla_model_matches_loss_transform(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            alphas = rng.normal(size=3) + 1j * rng.normal(size=3)
            alphas /= np.linalg.norm(alphas)
            rho = pair_state(alphas[0], alphas[1])
            det = DetectorModel(float(rng.uniform(0.05, 1.0)))
            np.testing.assert_allclose(ancilla_moments(rho, det), lossy_moments(rho, det), atol=1e-12)

    def test_counting_backends_match_loss_transform(self):
        rho = pair_state(0.6, 0.8j * 0.5)
        det = DetectorModel(0.35)
        expected = lossy_moments(rho, det)
        for kind in DetectorKind:
            np.testing.assert_allclose(counted_moments(rho, det, kind), expected, atol=1e-12)

    def test_rejects_wrong_states(self):
        with self.assertRaises(DimensionMismatchError):
            ideal_moments(w_state(WCoefficients.symmetric(3)).density())
        branch = PureState(2, {(1, 0): 0.5}, branch=True).density()
        with self.assertRaises(InvalidStateError):
            ideal_moments(branch)
