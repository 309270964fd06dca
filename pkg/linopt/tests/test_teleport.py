import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, override_settings

from linopt import teleport
from linopt.detection import DetectorModel
from linopt.exceptions import InvalidParameterError, InvalidStateError
from linopt.fock import tensor
from linopt.models import BellEvent, BlochMethod, DetectorKind, EventSet, MixingConvention, TeleportParams
from linopt.teleport import UnknownQubit

QUARTER_PI = math.pi / 4
ONOFF = DetectorKind.ON_OFF


def random_qubit(rng):
    return UnknownQubit.from_bloch(np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi))


class ParamsTests(SimpleTestCase):
    def test_validation(self):
        for bad in ({'N': 1}, {'N': 3, 'm': 2}, {'N': 3, 'eta': 0.0}, {'N': 3, 'theta': 2.0}):
            with self.assertRaises(InvalidParameterError):
                TeleportParams(**bad)

    def test_choices_are_coerced(self):
        params = TeleportParams(3, event_set='both', detector_kind='onoff')
        self.assertIs(params.event_set, EventSet.BOTH)
        self.assertIs(params.detector_kind, ONOFF)

    def test_unknown_qubit_must_be_normalized(self):
        with self.assertRaises(InvalidStateError):
            UnknownQubit(1.0, 1.0)


class ResourceTests(SimpleTestCase):
    def test_closed_form_weights(self):
        rho = teleport.conditional_resource(TeleportParams(3, 1, 0.5))
        self.assertAlmostEqual(rho.trace, 5 / 6, places=14)
        rho = teleport.conditional_resource(TeleportParams(2, 0, 1.0))
        self.assertAlmostEqual(rho.trace, 1.0, places=14)

    def test_simulated_resource_matches(self):
        for N, m, eta in ((2, 0, 1.0), (3, 1, 0.5), (5, 2, 0.8), (6, 0, 0.3)):
            closed = teleport.conditional_resource(TeleportParams(N, m, eta))
            simulated = teleport.simulate_conditional_resource(N, m, eta)
            np.testing.assert_allclose(simulated.matrix, closed.matrix, atol=1e-12)

    def test_cutoff_setting_reaches_cached_resource(self):
        self.assertEqual(teleport.simulate_conditional_resource(3, 1, 0.5).cutoff, 2)
        with override_settings(LINOPT={'TOTAL_CUTOFF': 3}):
            resource = teleport.simulate_conditional_resource(3, 1, 0.5)
            self.assertEqual(resource.cutoff, 3)
            closed = teleport.conditional_resource(TeleportParams(3, 1, 0.5))
            np.testing.assert_allclose(resource.matrix, closed.matrix, atol=1e-12)
        self.assertEqual(teleport.simulate_conditional_resource(3, 1, 0.5).cutoff, 2)



class EventTests(SimpleTestCase):
    def test_event_vocabulary(self):
        self.assertEqual(len(teleport.bell_events()), 6)
        self.assertEqual(teleport.advantageous_events(), {BellEvent.D10, BellEvent.D01})
        self.assertEqual(teleport.events_for('both'), (BellEvent.D10, BellEvent.D01))
        self.assertEqual(teleport.events_for(EventSet.D01), (BellEvent.D01,))

    def test_onoff_cannot_resolve_two_photons(self):
        with self.assertRaises(InvalidParameterError):
            teleport.event_povms(BellEvent.D11, DetectorModel(0.5), ONOFF)


class BobStateTests(SimpleTestCase):
    def test_ideal_two_mode_photon_branch(self):
        bob = teleport.bob_state(BellEvent.D10, UnknownQubit(1.0, 0.0), TeleportParams(2, 0, 1.0, QUARTER_PI))
        self.assertAlmostEqual(bob.trace, 0.25, places=14)

    def test_closed_form_matches_circuit(self):
        rng = np.random.default_rng(17)
        for kind in DetectorKind:
            for event in (BellEvent.D10, BellEvent.D01):
                params = TeleportParams(4, 1, 0.65, 0.4, kind)
                qubit = random_qubit(rng)
                closed = teleport.bob_state(event, qubit, params)
                simulated = teleport.simulate_bob_state(event, qubit, params)
                np.testing.assert_allclose(simulated.matrix, closed.matrix, atol=1e-11)

    def test_no_closed_form_for_other_events(self):
        with self.assertRaises(InvalidParameterError):
            teleport.bob_state(BellEvent.D11, UnknownQubit(1.0, 0.0), TeleportParams(3))

    def test_channel_reproduces_circuit(self):
        params = TeleportParams(3, 1, 0.7, 0.4)
        channel = teleport.bob_channels(0.4, 3, 1, 0.7, [BellEvent.D10])[BellEvent.D10]
        qubit = random_qubit(np.random.default_rng(5))
        amplitudes = np.array([qubit.b, qubit.a])
        output = np.einsum('i,j,ijab->ab', amplitudes, amplitudes.conj(), channel)
        simulated = teleport.simulate_bob_state(BellEvent.D10, qubit, params, bob_phase=0.0)
        np.testing.assert_allclose(output, simulated.matrix, atol=1e-12)

    def test_channel_matches_circuit_for_each_convention(self):
        qubit = random_qubit(np.random.default_rng(9))
        amplitudes = np.array([qubit.b, qubit.a])
        for convention in MixingConvention:
            for kind in DetectorKind:
                params = TeleportParams(4, 1, 0.6, 1.1, kind)
                channel = teleport.bob_channels(1.1, 4, 1, 0.6, [BellEvent.D01], kind,
                                                convention=convention)[BellEvent.D01]
                output = np.einsum('i,j,ijab->ab', amplitudes, amplitudes.conj(), channel)
                simulated = teleport.simulate_bob_state(BellEvent.D01, qubit, params, bob_phase=0.0,
                                                        convention=convention)
                np.testing.assert_allclose(output, simulated.matrix, atol=1e-12)

    def test_theta_sweep_reuses_input_operators(self):
        teleport._channel_inputs.cache_clear()
        with mock.patch('linopt.teleport.tensor', wraps=tensor) as spy:
            for theta in np.linspace(0.0, math.pi / 2, 7):
                teleport.bob_channels(theta, 3, 0, 0.6, teleport.bell_events())
        self.assertEqual(spy.call_count, 4)



class BlochAverageTests(SimpleTestCase):
    def test_quadrature_moments(self):
        self.assertAlmostEqual(teleport.bloch_average(lambda q: q.weight_one), 0.5, places=14)
        self.assertAlmostEqual(teleport.bloch_average(lambda q: q.weight_one ** 2), 1 / 3, places=14)
        self.assertAlmostEqual(teleport.bloch_average(lambda q: q.weight_one * np.abs(q.b) ** 2), 1 / 6, places=14)
        self.assertAlmostEqual(teleport.bloch_moment(1, 1), 1 / 6, places=15)

    def test_moments_method_is_not_a_sampler(self):
        with self.assertRaises(InvalidParameterError):
            teleport.bloch_average(lambda q: q.weight_one, BlochMethod.MOMENTS)

    def test_monte_carlo_is_seeded(self):
        def f(q):
            return q.weight_one ** 2

        first = teleport.monte_carlo_average(f, samples=20000, seed=5)
        second = teleport.monte_carlo_average(f, samples=20000, seed=5)
        self.assertEqual(first, second)
        self.assertLessEqual(abs(first.mean - 1 / 3), 5 * first.stderr)

    def test_unnormalized_fidelity_average(self):
        N, m, eta, theta = 4, 1, 0.6, 0.5
        params = TeleportParams(N, m, eta, theta)
        average = teleport.bloch_average(
            lambda q: teleport.unnormalized_fidelity(teleport.simulate_bob_state(BellEvent.D10, q, params), q))
        expected = eta / (6 * N) * (2 + np.sin(2 * theta) + teleport.r_theta(N, m, eta, theta))
        self.assertAlmostEqual(average, expected, places=12)


class AverageTests(SimpleTestCase):
    def test_ideal_two_mode_network(self):
        report = teleport.averaged_fidelity_probability(TeleportParams(2, 0, 1.0, QUARTER_PI, event_set=EventSet.BOTH))
        self.assertAlmostEqual(report.avg_fidelity, 1.0, places=14)
        self.assertAlmostEqual(report.avg_probability, 0.5, places=14)

    def test_moments_match_closed_form(self):
        for kind in DetectorKind:
            params = TeleportParams(5, 2, 0.75, 0.6, kind)
            report = teleport.averaged_fidelity_probability(params)
            self.assertAlmostEqual(report.avg_fidelity, teleport.fidelity_formula(5, 2, 0.75, 0.6, kind), places=12)
            self.assertAlmostEqual(report.avg_probability,
                                   teleport.probability_formula(5, 2, 0.75, 0.6, kind), places=12)

    def test_quadrature_and_monte_carlo_paths(self):
        params = TeleportParams(4, 1, 0.8, 0.7)
        moments = teleport.averaged_fidelity_probability(params)
        quadrature = teleport.averaged_fidelity_probability(params, BlochMethod.QUADRATURE)
        sampled = teleport.averaged_fidelity_probability(params, BlochMethod.MONTE_CARLO, samples=20000, seed=1)
        self.assertAlmostEqual(quadrature.avg_fidelity, moments.avg_fidelity, places=12)
        self.assertAlmostEqual(sampled.avg_fidelity, moments.avg_fidelity, delta=0.01)

    def test_circuit_matches_closed_form(self):
        for params in (TeleportParams(3, 0, 0.9, 0.3),
                       TeleportParams(4, 2, 0.5, 1.1, ONOFF),
                       TeleportParams(3, 1, 0.7, QUARTER_PI, event_set=EventSet.BOTH),
                       TeleportParams(5, 1, 0.6, 0.9, event_set=EventSet.D01)):
            report = teleport.averaged_fidelity_probability(params)
            fidelity, probability = teleport.simulated_average(params)
            self.assertAlmostEqual(fidelity, report.avg_fidelity, places=10)
            self.assertAlmostEqual(probability, report.avg_probability, places=10)

    def test_reported_scalars_do_not_depend_on_convention(self):
        for params in (TeleportParams(3, 0, 0.9, 0.3),
                       TeleportParams(4, 2, 0.5, 1.1, ONOFF),
                       TeleportParams(5, 1, 0.6, 0.9, event_set=EventSet.BOTH)):
            fidelity, probability = teleport.simulated_average(params)
            transposed = teleport.simulated_average(params, convention=MixingConvention.TRANSPOSED)
            self.assertAlmostEqual(transposed[0], fidelity, places=12)
            self.assertAlmostEqual(transposed[1], probability, places=12)



class OptimumTests(SimpleTestCase):
    def test_perfect_detectors(self):
        for N in range(2, 9):
            for m in range(N - 1):
                expected = (1 + (N - m) / (N - m - 1)) / 3
                self.assertAlmostEqual(teleport.max_fidelity_formula(N, m, 1.0), expected, places=14)

    def test_optimal_angle(self):
        self.assertAlmostEqual(teleport.optimal_theta(3, 1, 1.0), QUARTER_PI, places=14)
        best = teleport.max_fidelity(3, 1, 1.0)
        self.assertAlmostEqual(best.fidelity, 1.0, places=14)

    def test_search_agrees_with_closed_form(self):
        for N, m, eta in ((3, 0, 0.8), (5, 2, 0.6), (8, 1, 0.95)):
            numeric = teleport.numeric_optimal_theta(N, m, eta)
            self.assertAlmostEqual(numeric.fidelity, teleport.max_fidelity_formula(N, m, eta), delta=1e-8)
            self.assertAlmostEqual(numeric.theta, teleport.optimal_theta(N, m, eta), delta=1e-5)
            self.assertAlmostEqual(numeric.probability, teleport.probability_at_optimum_formula(N, m, eta), delta=1e-8)

    def test_d01_optimum_mirrors_d10(self):
        d10 = teleport.max_fidelity(4, 1, 0.7)
        d01 = teleport.max_fidelity(4, 1, 0.7, event_set=EventSet.D01)
        self.assertAlmostEqual(d10.fidelity, d01.fidelity, places=14)
        self.assertAlmostEqual(d01.theta, math.pi / 2 - d10.theta, places=14)

    def test_combined_events_never_beat_a_single_event(self):
        for N in range(2, 9):
            for m in range(N - 1):
                for eta in np.linspace(0.05, 1.0, 20):
                    self.assertLessEqual(teleport.combined_fidelity_formula(N, m, eta),
                                         teleport.max_fidelity_formula(N, m, eta) + 1e-12)
        self.assertAlmostEqual(teleport.combined_fidelity_formula(2, 0, 0.6),
                               teleport.max_fidelity_formula(2, 0, 0.6), places=14)

    def test_cooperation_helps(self):
        for N in range(3, 9):
            for m in range(N - 2):
                for eta in (0.2, 0.5, 0.9):
                    self.assertGreater(teleport.max_fidelity_formula(N, m + 1, eta),
                                       teleport.max_fidelity_formula(N, m, eta))

    def test_onoff_detectors_lose_fidelity_inside_the_interval(self):
        for N, m, eta in ((2, 0, 0.3), (3, 1, 0.7), (6, 2, 1.0)):
            for theta in np.linspace(0.01, math.pi / 2 - 0.01, 25):
                self.assertLess(teleport.fidelity_formula(N, m, eta, theta, ONOFF),
                                teleport.fidelity_formula(N, m, eta, theta))
            for theta in (0.0, math.pi / 2):
                self.assertAlmostEqual(teleport.fidelity_formula(N, m, eta, theta, ONOFF),
                                       teleport.fidelity_formula(N, m, eta, theta), places=15)


    def test_onoff_optimum_against_grid(self):
        N, m, eta = 3, 0, 0.8
        best = teleport.max_fidelity(N, m, eta, ONOFF)
        grid = teleport.fidelity_formula(N, m, eta, np.linspace(0, math.pi / 2, 10001), ONOFF)
        self.assertGreaterEqual(best.fidelity, grid.max() - 1e-12)
        self.assertAlmostEqual(best.fidelity, grid.max(), delta=1e-7)
        self.assertLess(best.fidelity, teleport.max_fidelity_formula(N, m, eta))

    def test_optimized_report(self):
        report = teleport.optimized_report(5, 1, 0.9)
        self.assertTrue(report.optimal)
        self.assertEqual(report.optimal_theta, report.params.theta)
        self.assertAlmostEqual(report.avg_fidelity, teleport.max_fidelity_formula(5, 1, 0.9), places=14)


class CriticalEfficiencyTests(SimpleTestCase):
    def test_three_mode_constants(self):
        self.assertAlmostEqual(teleport.critical_eta(3, 0), (3 - math.sqrt(5)) / 2, places=14)
        self.assertAlmostEqual(teleport.critical_eta(3, 1), (2 - math.sqrt(2)) / 2, places=14)

    def test_full_cooperation_family(self):
        for N in range(3, 9):
            self.assertAlmostEqual(teleport.critical_eta_formula(N, N - 2), 1 - 1 / math.sqrt(N - 1), places=14)

    def test_classical_limit_at_threshold(self):
        for N in range(3, 7):
            for m in range(N - 1):
                eta = teleport.critical_eta_formula(N, m)
                self.assertAlmostEqual(teleport.max_fidelity_formula(N, m, eta), 2 / 3, places=12)
                self.assertAlmostEqual(teleport.critical_eta_bisection(N, m), eta, delta=1e-9)

    def test_onoff_thresholds(self):
        self.assertAlmostEqual(teleport.critical_eta(3, 0, ONOFF), 0.583, delta=0.005)
        self.assertAlmostEqual(teleport.critical_eta(3, 1, ONOFF), 0.435, delta=0.005)
        self.assertGreater(teleport.critical_eta(3, 0, ONOFF), teleport.critical_eta(3, 0))

    def test_grid_threshold_agrees(self):
        for N, m in ((3, 0), (4, 1), (6, 4)):
            self.assertAlmostEqual(teleport.critical_eta_grid(N, m), teleport.critical_eta_formula(N, m), delta=1e-7)
        for m in (0, 1):
            self.assertAlmostEqual(teleport.critical_eta_grid(3, m, ONOFF), teleport.critical_eta(3, m, ONOFF),
                                   delta=1e-7)


    def test_rejects_bad_cooperation(self):
        with self.assertRaises(InvalidParameterError):
            teleport.critical_eta(3, 2)

    def test_minimum_cooperation(self):
        self.assertEqual(teleport.minimum_cooperation(3, 1.0), 0)
        self.assertEqual(teleport.minimum_cooperation(3, 0.33), 1)
        self.assertIsNone(teleport.minimum_cooperation(3, 0.2))


class EventSearchTests(SimpleTestCase):
    def test_other_events_stay_classical(self):
        others = [BellEvent.D00, BellEvent.D20, BellEvent.D11, BellEvent.D02]
        for N, eta in ((2, 1.0), (3, 0.5)):
            best = teleport.best_event_fidelity(N, 0, eta, others, theta_points=31, phase_points=16)
            for event, fidelity in best.items():
                self.assertLessEqual(fidelity, 2 / 3 + 1e-9, f"{event} N={N} eta={eta}")

    def test_single_photon_events_reach_unit_fidelity(self):
        best = teleport.best_event_fidelity(2, 0, 1.0, [BellEvent.D10, BellEvent.D01], theta_points=3)
        self.assertAlmostEqual(best[BellEvent.D10], 1.0, places=9)
        self.assertAlmostEqual(best[BellEvent.D01], 1.0, places=9)
