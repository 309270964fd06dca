"""
Cross-checks between the closed forms and the simulated circuits.

Each claim is a function of a random generator returning a residual; it
passes when the residual is finite and at most the claim's tolerance.
Inequality claims report their worst violation (zero when the inequality
holds). Every claim draws from its own child of one ``SeedSequence``, so a
report depends only on the seed.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, List, Optional

import numpy as np

from linopt.circuits import (
    WCoefficients,
    angles_from_coefficients,
    coefficients_from_angles,
    generate_w,
    symmetric_angles,
    w_state,
)
from linopt.conf import get_config
from linopt.detection import DetectorModel
from linopt.exceptions import LinoptError
from linopt.models import BellEvent, BlochMethod, DetectorKind, EventSet, MixingConvention, TeleportParams
from linopt import teleport
from linopt.witness import pair_state, scan_all_pairs, witness_ratio_closed_form, witness_ratio_simulated

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Claim:
    name: str
    description: str
    tolerance: float
    check: Callable[[np.random.Generator], float]


@dataclass(frozen=True)
class ClaimResult:
    name: str
    description: str
    residual: float
    tolerance: float
    passed: bool


CLAIMS: List[Claim] = []


def claim(name: str, description: str, tolerance: float):
    def register(check):
        CLAIMS.append(Claim(name, description, tolerance, check))
        return check
    return register


def _worst(values: Iterable[float]) -> float:
    return float(max(values, default=0.0))


def _violation(values: Iterable[float]) -> float:
    return max(0.0, _worst(values))


def _random_pair(rng: np.random.Generator):
    """Two coefficients of a random normalized three-mode W vector."""
    vector = rng.normal(size=3) + 1j * rng.normal(size=3)
    vector /= np.linalg.norm(vector)
    return vector[0], vector[1]


def _random_qubit(rng: np.random.Generator) -> teleport.UnknownQubit:
    return teleport.UnknownQubit.from_bloch(np.arccos(rng.uniform(-1, 1)), rng.uniform(0, 2 * np.pi))


def _random_params(rng: np.random.Generator, max_modes: int = 6) -> TeleportParams:
    N = int(rng.integers(2, max_modes + 1))
    return TeleportParams(
        N=N,
        m=int(rng.integers(0, N - 1)),
        eta=float(rng.uniform(0.05, 1.0)),
        theta=float(rng.uniform(0.0, np.pi / 2)),
        detector_kind=str(rng.choice(DetectorKind.values)),
        event_set=str(rng.choice(EventSet.values)),
    )


# ---------------------------------------------------------------------------
# W states

@claim('symmetric_w_amplitudes',
       "symmetric angles tan^2 theta_k = 1/(N - k) give amplitude 1/sqrt(N) in every mode, N = 2..8", 1e-12)
def _symmetric_w_amplitudes(rng):
    residuals = []
    for N in range(2, 9):
        state = generate_w(symmetric_angles(N))
        target = WCoefficients.symmetric(N)
        residuals.append(max(abs(state.amplitude(counts) - w_state(target).amplitude(counts))
                             for counts in w_state(target).amplitudes))
    return _worst(residuals)


@claim('w_angle_round_trip',
       "alpha_k = e^{-i phi_k} sin(theta_k) prod_{j<k} cos(theta_j): angles <-> coefficients "
       "for 1000 random W vectors with N = 2..8, chain simulation on every tenth", 1e-10)
def _w_angle_round_trip(rng):
    residuals = []
    for sample in range(1000):
        N = 2 + sample % 7
        vector = rng.normal(size=N) + 1j * rng.normal(size=N)
        coefficients = WCoefficients(tuple(vector / np.linalg.norm(vector)))
        angles = angles_from_coefficients(coefficients)
        residuals.append(np.max(np.abs(coefficients_from_angles(angles).as_array() - coefficients.as_array())))
        if sample % 10 == 0:
            simulated = generate_w(angles)
            residuals.append(max(abs(simulated.amplitude(counts) - amplitude)
                                 for counts, amplitude in w_state(coefficients).amplitudes.items()))
    return _worst(residuals)



# ---------------------------------------------------------------------------
# witness

@claim('witness_closed_form',
       "ratio = (1 - 4 eta^2 Re^2[a_i* a_j]/(1 + eta p)) (1 - 4 eta^2 Im^2[a_i* a_j]/(1 + eta p)) "
       "vs [1 + 4 Var J_x][1 + 4 Var J_y] / (1 + <N_+>)^2 from the interferometer, 1000 random pairs", 1e-10)
def _witness_closed_form(rng):
    residuals = []
    for _ in range(1000):
        alpha_i, alpha_j = _random_pair(rng)
        det = DetectorModel(float(rng.uniform(0.05, 1.0)))
        simulated = witness_ratio_simulated(pair_state(alpha_i, alpha_j), det)
        residuals.append(abs(simulated.ratio - witness_ratio_closed_form(alpha_i, alpha_j, det)))
    return _worst(residuals)


@claim('witness_always_violated', "closed-form ratio < 1 for every a_i a_j != 0 and eta > 0 (worst ratio - 1)", 0.0)
def _witness_always_violated(rng):
    ratios = []
    for _ in range(1000):
        alpha_i, alpha_j = _random_pair(rng)
        ratios.append(witness_ratio_closed_form(alpha_i, alpha_j, DetectorModel(float(rng.uniform(0.05, 1.0)))))
    return _violation(ratio - 1 for ratio in ratios)


@claim('witness_symmetric_three', "a_i = a_j = 1/sqrt3, eta = 1: ratio 1 - (4/9)/(5/3) = 11/15 on every pair", 1e-12)
def _witness_symmetric_three(rng):
    report = scan_all_pairs(WCoefficients.symmetric(3), DetectorModel(1.0))
    if not report.all_violated:
        return math.inf
    return _worst(abs(result.ratio - 11 / 15) for result in report.pairs)


@claim('witness_detector_backends',
       "4 Var(J)_eta = 4 eta^2 Var(J) + eta (1 - eta) <N_+>, <N_+>_eta = eta <N_+>: "
       "vs number-resolving and on-off counting", 1e-12)
def _witness_detector_backends(rng):
    residuals = []
    for N, eta in product((3, 4, 5), (0.1, 0.5, 1.0)):
        det = DetectorModel(eta)
        reference = scan_all_pairs(WCoefficients.symmetric(N), det)
        for kind in DetectorKind:
            counted = scan_all_pairs(WCoefficients.symmetric(N), det, kind)
            residuals.extend(abs(a.ratio - b.ratio) for a, b in zip(reference.pairs, counted.pairs))
    return _worst(residuals)


# ---------------------------------------------------------------------------
# teleportation

@claim('conditional_resource',
       "post-selected W pair = (2/N)|Psi+><Psi+| + ((N - eta m - 2)/N)|00><00|, N <= 8", 1e-12)
def _conditional_resource(rng):
    residuals = []
    for N in range(2, 9):
        for m, eta in product(range(N - 1), (0.25, 0.5, 0.75, 1.0)):
            params = TeleportParams(N, m, eta)
            simulated = teleport.simulate_conditional_resource(N, m, eta)
            residuals.append(np.max(np.abs(simulated.matrix - teleport.conditional_resource(params).matrix)))
    return _worst(residuals)


@claim('bob_state',
       "rho_B = (eta/N)(|phi'><phi'| + |a|^2 (R + R')|0><0|), phi' = a cos theta|1> + b sin theta|0>: "
       "full circuit vs closed form, D10 and D01, both detector kinds", 1e-11)
def _bob_state(rng):
    residuals = []
    for _ in range(50):
        params = _random_params(rng)
        qubit = _random_qubit(rng)
        for event in (BellEvent.D10, BellEvent.D01):
            simulated = teleport.simulate_bob_state(event, qubit, params)
            closed = teleport.bob_state(event, qubit, params)
            residuals.append(np.max(np.abs(simulated.matrix - closed.matrix)))
    return _worst(residuals)


@claim('averaged_fidelity',
       "F = [1 + (1 + sin 2theta)/(1 + R + R')]/3, P = eta (1 + R + R')/2N "
       "vs simulated Bloch averages, 200 tuples", 1e-8)
def _averaged_fidelity(rng):
    residuals = []
    for _ in range(200):
        params = _random_params(rng)
        report = teleport.averaged_fidelity_probability(params)
        fidelity, probability = teleport.simulated_average(params)
        residuals.extend([abs(fidelity - report.avg_fidelity), abs(probability - report.avg_probability)])
    return _worst(residuals)


@claim('bloch_quadrature', "E[|a|^2p |b|^2q] = B(p+1, q+1) vs Gauss-Legendre quadrature", 1e-12)
def _bloch_quadrature(rng):
    residuals = []
    for _ in range(10):
        params = _random_params(rng)
        moments = teleport.averaged_fidelity_probability(params, BlochMethod.MOMENTS)
        quadrature = teleport.averaged_fidelity_probability(params, BlochMethod.QUADRATURE)
        residuals.append(abs(moments.avg_probability - quadrature.avg_probability))
        residuals.append(abs(moments.avg_fidelity - quadrature.avg_fidelity))
    return _worst(residuals)


@claim('bloch_monte_carlo', "E[|a|^2p |b|^2q] = B(p+1, q+1) vs seeded Monte Carlo, in standard errors", 5.0)
def _bloch_monte_carlo(rng):
    params = _random_params(rng)
    seed = int(rng.integers(2 ** 32))
    residuals = []
    for event in teleport.events_for(params.event_set):
        for terms in teleport.branch_integrands(event, params.N, params.m, params.eta, params.theta,
                                                params.detector_kind):
            estimate = teleport.monte_carlo_average(lambda qubit: teleport.evaluate_terms(terms, qubit), seed=seed)
            residuals.append(abs(estimate.mean - teleport.polynomial_average(terms)) / estimate.stderr)
    return _worst(residuals)


@claim('optimal_angle',
       "cos theta* = (2 - eta)/sqrt((2 - eta)^2 + (N - eta m - eta)^2) vs numeric maximization", 1e-8)
def _optimal_angle(rng):
    residuals = []
    for N in range(2, 7):
        for m, eta in product(range(N - 1), (0.3, 0.6, 1.0)):
            numeric = teleport.numeric_optimal_theta(N, m, eta)
            residuals.append(abs(numeric.theta - teleport.optimal_theta(N, m, eta)))
    return _worst(residuals)


@claim('optimum_values',
       "F* = [1 + (N - eta(m+2) + 2)/((2 - eta)(N - eta m - eta))]/3 and P* "
       "vs formulas and simulation at theta*", 1e-8)
def _optimum_values(rng):
    residuals = []
    for N, eta in product(range(2, 6), (0.4, 1.0)):
        for m in range(N - 1):
            theta = teleport.optimal_theta(N, m, eta)
            expected_f = teleport.max_fidelity_formula(N, m, eta)
            expected_p = teleport.probability_at_optimum_formula(N, m, eta)
            residuals.append(abs(teleport.fidelity_formula(N, m, eta, theta) - expected_f))
            residuals.append(abs(teleport.probability_formula(N, m, eta, theta) - expected_p))
            fidelity, probability = teleport.simulated_average(TeleportParams(N, m, eta, theta))
            residuals.extend([abs(fidelity - expected_f), abs(probability - expected_p)])
    return _worst(residuals)


@claim('ideal_two_mode',
       "combined F = [1 + 4/(N - eta(m+2) + 2)]/3 at N=2, eta=1, pi/4: fidelity 1, probability 1/2", 1e-12)
def _ideal_two_mode(rng):
    params = TeleportParams(2, 0, 1.0, math.pi / 4, event_set=EventSet.BOTH)
    report = teleport.averaged_fidelity_probability(params)
    fidelity, probability = teleport.simulated_average(params)
    return _worst([abs(report.avg_fidelity - 1), abs(report.avg_probability - 0.5),
                   abs(fidelity - 1), abs(probability - 0.5)])


@claim('d01_symmetry', "rho_B(D01, theta) = e^{-i pi n} rho_B(D10, theta + pi/2) e^{i pi n}", 1e-11)
def _d01_symmetry(rng):
    residuals = []
    for _ in range(20):
        params = _random_params(rng)
        qubit = _random_qubit(rng)
        d01 = teleport.simulate_bob_state(BellEvent.D01, qubit, params)
        resource = teleport.simulate_conditional_resource(params.N, params.m, params.eta)
        shifted = teleport._teleport_branch(qubit.state().density(), resource, BellEvent.D10,
                                            params.theta + math.pi / 2, params.eta, params.detector_kind,
                                            math.pi, MixingConvention.HEISENBERG)
        residuals.append(np.max(np.abs(d01.matrix - shifted.matrix)))
    return _worst(residuals)


@claim('critical_efficiency_constants',
       "eta_c = (N + m - sqrt((N-m-2)^2 + 4(m+1)))/2(m+1) for N=3: (3-sqrt5)/2 and (2-sqrt2)/2, "
       "closed form and bisection", 1e-9)
def _critical_efficiency_constants(rng):
    expected = {0: (3 - math.sqrt(5)) / 2, 1: (2 - math.sqrt(2)) / 2}
    residuals = []
    for m, value in expected.items():
        residuals.append(abs(teleport.critical_eta(3, m) - value))
        residuals.append(abs(teleport.critical_eta_bisection(3, m) - value))
    return _worst(residuals)


@claim('critical_efficiency_families',
       "eta_c = 1 - 1/sqrt(N-1) at m = N-2 and (2N - 3 - sqrt(4N - 7))/(2N - 4) at m = N-3, N = 3..12", 1e-12)
def _critical_efficiency_families(rng):
    residuals = []
    for N in range(3, 13):
        residuals.append(abs(teleport.critical_eta(N, N - 2) - (1 - 1 / math.sqrt(N - 1))))
        if N >= 4:
            family = (2 * N - 3 - math.sqrt(4 * N - 7)) / (2 * N - 4)
            residuals.append(abs(teleport.critical_eta(N, N - 3) - family))
    return _worst(residuals)


@claim('onoff_critical_efficiency',
       "on-off R' = 2 eta sin^2 cos^2: critical eta for N=3 about 0.583 (m=0) and 0.435 (m=1)", 5e-3)
def _onoff_critical_efficiency(rng):
    expected = {0: 0.583, 1: 0.435}
    residuals = []
    for m, value in expected.items():
        found = teleport.critical_eta(3, m, DetectorKind.ON_OFF)
        logger.info(f"On-off critical efficiency N=3 m={m}: {found:.12f}")
        residuals.append(abs(found - value))
    return _worst(residuals)


@claim('non_advantageous_events', "F <= 2/3 for D00, D20, D11, D02 over 1000 theta x 64 Bob phases", 1e-9)
def _non_advantageous_events(rng):
    events = sorted(set(BellEvent) - teleport.advantageous_events())
    best = []
    for N in (2, 3):
        for m, eta in product(range(N - 1), (0.5, 1.0)):
            best.extend(teleport.best_event_fidelity(N, m, eta, events).values())
    return _violation(value - teleport.CLASSICAL_LIMIT for value in best)


@claim('orderings', "combined <= single-event optimum; strictly: fidelity rises with m, on-off < number-resolving "
                    "for theta in (0, pi/2), critical eta rises with N and falls with m", 0.0)
def _orderings(rng):
    # a strict gap must sit below -slack, a weak one below +slack
    slack = get_config().tolerances.agreement
    weak, strict = [], []
    for N in range(2, 9):
        for m, eta in product(range(N - 1), (0.2, 0.5, 0.8, 1.0)):
            weak.append(teleport.combined_fidelity_formula(N, m, eta) - teleport.max_fidelity_formula(N, m, eta))
            if m + 1 <= N - 2:
                strict.append(teleport.max_fidelity_formula(N, m, eta) - teleport.max_fidelity_formula(N, m + 1, eta))
            for theta in np.linspace(0.05, np.pi / 2 - 0.05, 9):
                strict.append(teleport.fidelity_formula(N, m, eta, theta, DetectorKind.ON_OFF)
                              - teleport.fidelity_formula(N, m, eta, theta))
    for m in range(0, 10):
        for N in range(max(3, m + 2), 12):
            strict.append(teleport.critical_eta(N, m) - teleport.critical_eta(N + 1, m))
            if m + 1 <= N - 2:
                strict.append(teleport.critical_eta(N, m + 1) - teleport.critical_eta(N, m))
    return max(_violation(gap - slack for gap in weak), _violation(gap + slack for gap in strict))



def run_claims(seed: int = None, tolerance: float = None, names: Optional[Iterable[str]] = None,
               jobs: int = 1) -> List[ClaimResult]:
    """Run the claims in declaration order; ``tolerance`` replaces every claim's threshold."""
    seed = get_config().default_seed if seed is None else seed
    children = np.random.SeedSequence(seed).spawn(len(CLAIMS))
    selected = None if names is None else set(names)
    work = [(item, child) for item, child in zip(CLAIMS, children) if selected is None or item.name in selected]

    def run(entry) -> ClaimResult:
        item, child = entry
        threshold = item.tolerance if tolerance is None else tolerance
        try:
            residual = float(item.check(np.random.default_rng(child)))
        except LinoptError as e:
            logger.error(f"Claim {item.name} raised {e.__class__.__name__}: {e}")
            residual = math.inf
        passed = bool(np.isfinite(residual) and residual <= threshold)
        logger.debug(f"Claim {item.name}: residual {residual:.3e}, tolerance {threshold:.1e}, passed={passed}")
        return ClaimResult(item.name, item.description, residual, threshold, passed)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, work))
    return [run(entry) for entry in work]


def claim_names() -> List[str]:
    return [item.name for item in CLAIMS]
