"""
Conditional teleportation of a vacuum/single-photon qubit over a symmetric W network.

Modes 0 and 1 of the W state belong to Alice and Bob; modes 2..m+1 are the
cooperating parties, who report vacuum before the protocol runs, and the
remaining N-2-m modes are traced out. Alice mixes the unknown qubit (mode u)
with her mode on ``bell_splitter(theta)`` and counts photons at the outputs
(c, d); Bob can only apply a phase shift.

Every conditional operator is carried unnormalized, its trace being the
probability of the branch; fidelities are normalized only when reported.

With K = N - eta m - 2 the recurring quantities are::

    R(theta)  = K cos^2 theta + 1 - eta
    R'(theta) = 2 eta sin^2 theta cos^2 theta      (on-off detectors only)
    F(theta)  = [1 + (1 + sin 2theta) / (1 + R + R')] / 3
    P(theta)  = eta (1 + R + R') / 2N
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import beta

from linopt.circuits import bell_splitter, generate_w, symmetric_angles
from linopt.conf import get_config, get_tolerances
from linopt.detection import DetectorModel, condition, detection_factor, povm_number, povm_onoff
from linopt.exceptions import InvalidParameterError, InvalidStateError
from linopt.fock import (
    DensityOperator,
    FockSpace,
    PureState,
    apply_phase_shift,
    apply_two_mode_unitary,
    fock_unitary,
    overlap_fidelity,
    partial_trace,
    reduced_matrix,
    tensor,
)
from linopt.models import BellEvent, BlochMethod, DetectorKind, EventSet, MixingConvention, TeleportParams, TeleportReport
from linopt.optimize import bisect_root, golden_section_max, polish_maximum

logger = logging.getLogger(__name__)

ALICE, BOB = 0, 1
CLASSICAL_LIMIT = 2 / 3
HALF_PI = math.pi / 2

Number = Union[float, np.ndarray]


@dataclass(frozen=True)
class UnknownQubit:
    """a|1> + b|0> with a = cos(t/2) e^{-i p}, b = sin(t/2).

    ``a`` and ``b`` may be arrays of equal shape: a batch of inputs for
    vectorized integrands.
    """
    a: Union[complex, np.ndarray]
    b: Union[complex, np.ndarray]

    def __post_init__(self):
        norm_squared = np.abs(self.a) ** 2 + np.abs(self.b) ** 2
        if np.max(np.abs(norm_squared - 1)) > get_tolerances().normalization:
            raise InvalidStateError("unknown qubit must satisfy |a|^2 + |b|^2 = 1")

    @classmethod
    def from_bloch(cls, theta_i: Number, phi_i: Number) -> 'UnknownQubit':
        return cls(np.cos(theta_i / 2) * np.exp(-1j * phi_i), np.sin(theta_i / 2) + 0j)

    @property
    def weight_one(self) -> Number:
        """|a|^2, uniform on [0, 1] over the Bloch sphere."""
        return np.abs(self.a) ** 2

    def state(self, cutoff: int = None) -> PureState:
        amplitudes = {(1,): complex(self.a), (0,): complex(self.b)}
        if cutoff is None:
            return PureState(1, amplitudes)
        return PureState(1, amplitudes, cutoff)


class MaxFidelity(NamedTuple):
    fidelity: float
    probability: float
    theta: float


class MonteCarloEstimate(NamedTuple):
    mean: float
    stderr: float


# ---------------------------------------------------------------------------
# closed forms

def r_theta(N: int, m: int, eta: Number, theta: Number) -> Number:
    return (N - eta * m - 2) * np.cos(theta) ** 2 + 1 - eta


def rprime_theta(eta: Number, theta: Number) -> Number:
    return 2 * eta * np.sin(theta) ** 2 * np.cos(theta) ** 2


def _extra_term(kind: DetectorKind, eta: Number, theta: Number) -> Number:
    if DetectorKind(kind) == DetectorKind.ON_OFF:
        return rprime_theta(eta, theta)
    return 0.0


def fidelity_formula(N: int, m: int, eta: float, theta: float,
                     kind: DetectorKind = DetectorKind.NUMBER_RESOLVING) -> float:
    """Bloch-averaged fidelity of the D10 (or D_s0) branch at angle theta."""
    r = r_theta(N, m, eta, theta) + _extra_term(kind, eta, theta)
    return (1 + (1 + np.sin(2 * theta)) / (1 + r)) / 3


def probability_formula(N: int, m: int, eta: float, theta: float,
                        kind: DetectorKind = DetectorKind.NUMBER_RESOLVING) -> float:
    r = r_theta(N, m, eta, theta) + _extra_term(kind, eta, theta)
    return eta / (2 * N) * (1 + r)


def optimal_theta(N: int, m: int, eta: float) -> float:
    """Angle maximizing the number-resolving D10 fidelity."""
    return float(np.arccos((2 - eta) / np.sqrt((2 - eta) ** 2 + (N - eta * m - eta) ** 2)))


def max_fidelity_formula(N: int, m: int, eta: float) -> float:
    return (1 + (N - eta * (m + 2) + 2) / ((2 - eta) * (N - eta * m - eta))) / 3


def probability_at_optimum_formula(N: int, m: int, eta: float) -> float:
    spread = (2 - eta) ** 2 + (N - eta * m - eta) ** 2
    return eta * (2 - eta) / (2 * N) * (1 + (2 - eta) * (N - eta * m - 2) / spread)


def combined_fidelity_formula(N: int, m: int, eta: float) -> float:
    """D10 and D01 accepted together, theta = pi/4."""
    return (1 + 4 / (N - eta * (m + 2) + 2)) / 3


def combined_probability_formula(N: int, m: int, eta: float) -> float:
    return eta / (2 * N) * (N - eta * (m + 2) + 2)


def critical_eta_formula(N: int, m: int) -> float:
    return (N + m - math.sqrt((N - m - 2) ** 2 + 4 * (m + 1))) / (2 * (m + 1))


# ---------------------------------------------------------------------------
# resource and Bell measurement

def conditional_resource(params: TeleportParams, cutoff: int = None) -> DensityOperator:
    """(2/N)|Psi+><Psi+| + ((N - eta m - 2)/N)|00><00| on (Alice, Bob)."""
    cutoff = get_config().total_cutoff if cutoff is None else cutoff
    N, m, eta = params.N, params.m, params.eta
    space = FockSpace(2, cutoff)
    photon = np.zeros(space.dim, dtype=complex)
    photon[space.position((1, 0))] = photon[space.position((0, 1))] = 1 / np.sqrt(N)
    matrix = np.outer(photon, photon.conj())
    matrix[space.position((0, 0)), space.position((0, 0))] = (N - eta * m - 2) / N
    return DensityOperator(2, matrix, cutoff)


def simulate_conditional_resource(N: int, m: int, eta: float, cutoff: int = None,
                                  convention: MixingConvention = MixingConvention.HEISENBERG) -> DensityOperator:
    """Generate the symmetric W state on the splitter chain, post-select m vacua, trace the rest."""
    if not 0 <= m <= N - 2:
        raise InvalidParameterError(f"m must lie in [0, {N - 2}], got {m}")
    cutoff = get_config().total_cutoff if cutoff is None else cutoff
    return _simulated_resource(N, m, eta, cutoff, MixingConvention(convention))


@lru_cache(maxsize=256)
def _simulated_resource(N: int, m: int, eta: float, cutoff: int, convention: MixingConvention) -> DensityOperator:
    w = generate_w(symmetric_angles(N), cutoff, convention).density()
    off = povm_number(0, DetectorModel(eta), w.cutoff)
    conditioned = condition(w, {mode: off for mode in range(2, 2 + m)})
    return partial_trace(conditioned, (ALICE, BOB))



def bell_events() -> Tuple[BellEvent, ...]:
    return tuple(BellEvent)


def advantageous_events() -> FrozenSet[BellEvent]:
    return frozenset(event for event in BellEvent if event.advantageous)


def events_for(event_set: EventSet) -> Tuple[BellEvent, ...]:
    event_set = EventSet(event_set)
    if event_set == EventSet.BOTH:
        return BellEvent.D10, BellEvent.D01
    return (BellEvent(event_set.value),)


def event_povms(event: BellEvent, det: DetectorModel, kind: DetectorKind, cutoff: int = None):
    """Detector elements on (c, d); on-off detectors turn D10/D01/D00 into D_s0/D_0s/D_00."""
    count_c, count_d = BellEvent(event).counts
    if DetectorKind(kind) == DetectorKind.ON_OFF:
        if count_c + count_d > 1:
            raise InvalidParameterError(f"on-off detectors cannot register {event}")
        return povm_onoff(bool(count_c), det, cutoff), povm_onoff(bool(count_d), det, cutoff)
    return povm_number(count_c, det, cutoff), povm_number(count_d, det, cutoff)


def default_bob_phase(event: BellEvent) -> float:
    return math.pi if BellEvent(event) == BellEvent.D01 else 0.0


def _event_geometry(event: BellEvent, N: int, m: int, eta: Number, theta: Number, kind: DetectorKind):
    """Weights (c, s, r) of Bob's branch a c|1> + b s|0> plus |a|^2 r vacuum, after Bob's correction."""
    event = BellEvent(event)
    if event == BellEvent.D10:
        shifted = theta
    elif event == BellEvent.D01:
        shifted = theta + HALF_PI
    else:
        raise InvalidParameterError(f"no closed form for the {event} branch")
    c, s = np.abs(np.cos(shifted)), np.abs(np.sin(shifted))
    r = r_theta(N, m, eta, shifted) + _extra_term(kind, eta, shifted)
    return c, s, r


def bob_state(event: BellEvent, qubit: UnknownQubit, params: TeleportParams, cutoff: int = None) -> DensityOperator:
    """(eta/N)(|phi'><phi'| + |a|^2 R |0><0|), phi' = a cos(theta)|1> + b sin(theta)|0> for D10.

    D01 is the same with theta -> theta + pi/2 and Bob's pi phase shift;
    on-off detectors add R' to R.
    """
    cutoff = get_config().total_cutoff if cutoff is None else cutoff
    c, s, r = _event_geometry(event, params.N, params.m, params.eta, params.theta, params.detector_kind)
    space = FockSpace(1, cutoff)
    prime = np.zeros(space.dim, dtype=complex)
    prime[space.position((1,))] = qubit.a * c
    prime[space.position((0,))] = qubit.b * s
    matrix = np.outer(prime, prime.conj())
    matrix[space.position((0,)), space.position((0,))] += abs(qubit.a) ** 2 * r
    return DensityOperator(1, params.eta / params.N * matrix, cutoff)


def _teleport_branch(input_rho: DensityOperator, resource: DensityOperator, event: BellEvent, theta: float,
                     eta: float, kind: DetectorKind, bob_phase: float,
                     convention: MixingConvention) -> DensityOperator:
    joint = tensor(input_rho, resource)  # modes (u, A, B)
    joint = apply_two_mode_unitary(joint, (0, 1), bell_splitter(theta), convention)
    return _measure_alice(joint, event, eta, kind, bob_phase)


def _measure_alice(joint: DensityOperator, event: BellEvent, eta: float, kind: DetectorKind,
                   bob_phase: float) -> DensityOperator:
    element_c, element_d = event_povms(event, DetectorModel(eta), kind, joint.cutoff)
    bob = condition(joint, {0: element_c, 1: element_d})
    if bob_phase:
        bob = apply_phase_shift(bob, 0, bob_phase)
    return bob


def simulate_bob_state(event: BellEvent, qubit: UnknownQubit, params: TeleportParams,
                       bob_phase: Optional[float] = None, cutoff: int = None,
                       convention: MixingConvention = MixingConvention.HEISENBERG) -> DensityOperator:
    """Bob's unnormalized state from the full circuit: W chain, vacuum post-selection,
    Bell splitter, Alice's detectors, Bob's phase shift."""
    resource = simulate_conditional_resource(params.N, params.m, params.eta, cutoff, convention)
    bob_phase = default_bob_phase(event) if bob_phase is None else bob_phase
    return _teleport_branch(qubit.state(resource.cutoff).density(), resource, event, params.theta,
                            params.eta, params.detector_kind, bob_phase, convention)


def unnormalized_fidelity(bob: DensityOperator, qubit: UnknownQubit) -> float:
    """P F = <phi|rho_B|phi>."""
    return overlap_fidelity(bob, qubit.state(bob.cutoff))


# ---------------------------------------------------------------------------
# Bloch-sphere averages

def bloch_moment(p: int, q: int) -> float:
    """E[|a|^(2p) |b|^(2q)]: |a|^2 is uniform on [0, 1], so this is B(p+1, q+1)."""
    return float(beta(p + 1, q + 1))


def polynomial_average(terms: Mapping[Tuple[int, int], float]) -> float:
    """Average of sum c_pq |a|^(2p) |b|^(2q) over the Bloch sphere."""
    return float(sum(coefficient * bloch_moment(p, q) for (p, q), coefficient in terms.items()))


def _quadrature_nodes(nodes: int = None, phase_nodes: int = None):
    config = get_config()
    nodes = config.quadrature_nodes if nodes is None else nodes
    phase_nodes = config.phase_nodes if phase_nodes is None else phase_nodes
    x, weights = np.polynomial.legendre.leggauss(nodes)
    phis = 2 * np.pi * np.arange(phase_nodes) / phase_nodes
    theta_grid, phi_grid = np.meshgrid(np.arccos(x), phis, indexing='ij')
    weight_grid = np.repeat(weights[:, None] / 2 / phase_nodes, phase_nodes, axis=1)
    return theta_grid.ravel(), phi_grid.ravel(), weight_grid.ravel()


def bloch_average(f: Callable[[UnknownQubit], float], method: BlochMethod = BlochMethod.QUADRATURE,
                  nodes: int = None, phase_nodes: int = None, samples: int = None, seed: int = None) -> float:
    """(1/4pi) integral of f over the input Bloch sphere.

    Quadrature is Gauss-Legendre in cos(theta_i) times a uniform phase grid;
    it is exact for the low-order polynomial integrands of this protocol.
    The Monte Carlo path calls f once on a batched qubit.
    """
    method = BlochMethod(method)
    if method == BlochMethod.MONTE_CARLO:
        return monte_carlo_average(f, samples, seed).mean
    if method != BlochMethod.QUADRATURE:
        raise InvalidParameterError("closed-form moments need polynomial terms: use polynomial_average")
    return float(_quadrature_sum(f, nodes, phase_nodes))


def _quadrature_sum(f, nodes: int = None, phase_nodes: int = None):
    thetas, phis, weights = _quadrature_nodes(nodes, phase_nodes)
    return sum(weight * np.asarray(f(UnknownQubit.from_bloch(theta, phi)))
               for theta, phi, weight in zip(thetas, phis, weights))


def monte_carlo_average(f: Callable[[UnknownQubit], np.ndarray], samples: int = None, seed: int = None,
                        streams: int = 8) -> MonteCarloEstimate:
    """Uniform Bloch-sphere sampling from ``streams`` independent children of one seed.

    Each stream draws a fixed share of the samples, so the estimate does not
    depend on how the streams are scheduled.
    """
    config = get_config()
    samples = config.monte_carlo_samples if samples is None else samples
    seed = config.default_seed if seed is None else seed
    shares = np.full(streams, samples // streams)
    shares[: samples % streams] += 1

    def draw(args):
        child, share = args
        rng = np.random.default_rng(child)
        cos_theta = rng.uniform(-1.0, 1.0, share)
        phi = rng.uniform(0.0, 2 * np.pi, share)
        return np.asarray(f(UnknownQubit.from_bloch(np.arccos(cos_theta), phi)), dtype=float)

    children = np.random.SeedSequence(seed).spawn(streams)
    with ThreadPoolExecutor(max_workers=streams) as pool:
        values = np.concatenate(list(pool.map(draw, zip(children, shares))))
    return MonteCarloEstimate(float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size)))


def branch_integrands(event: BellEvent, N: int, m: int, eta: Number, theta: Number, kind: DetectorKind):
    """Polynomial terms of P and P F for one branch, in powers of |a|^2 and |b|^2."""
    c, s, r = _event_geometry(event, N, m, eta, theta, kind)
    scale = eta / N
    probability = {(1, 0): scale * (c ** 2 + r), (0, 1): scale * s ** 2}
    weighted_fidelity = {(2, 0): scale * c ** 2, (1, 1): scale * (2 * c * s + r), (0, 2): scale * s ** 2}
    return probability, weighted_fidelity


def evaluate_terms(terms: Mapping[Tuple[int, int], Number], qubit: UnknownQubit) -> Number:
    x = qubit.weight_one
    return sum(coefficient * x ** p * (1 - x) ** q for (p, q), coefficient in terms.items())


def _averages(N: int, m: int, eta: float, theta: float, kind: DetectorKind, events: Sequence[BellEvent],
              method: BlochMethod = BlochMethod.MOMENTS, samples: int = None, seed: int = None) -> Tuple[float, float]:
    """(averaged fidelity, averaged probability) over the accepted events."""
    method = BlochMethod(method)
    total_p = total_pf = 0.0
    for event in events:
        probability, weighted_fidelity = branch_integrands(event, N, m, eta, theta, kind)
        if method == BlochMethod.MOMENTS:
            total_p += polynomial_average(probability)
            total_pf += polynomial_average(weighted_fidelity)
        elif method == BlochMethod.QUADRATURE:
            total_p += bloch_average(lambda qubit: evaluate_terms(probability, qubit))
            total_pf += bloch_average(lambda qubit: evaluate_terms(weighted_fidelity, qubit))
        else:
            total_p += monte_carlo_average(lambda qubit: evaluate_terms(probability, qubit), samples, seed).mean
            total_pf += monte_carlo_average(lambda qubit: evaluate_terms(weighted_fidelity, qubit), samples, seed).mean
    return total_pf / total_p, total_p


def averaged_fidelity_probability(params: TeleportParams, method: BlochMethod = BlochMethod.MOMENTS,
                                  samples: int = None, seed: int = None) -> TeleportReport:
    fidelity, probability = _averages(params.N, params.m, params.eta, params.theta, params.detector_kind,
                                      events_for(params.event_set), method, samples, seed)
    return TeleportReport(
        params=params,
        avg_fidelity=float(fidelity),
        avg_probability=float(probability),
        r_theta=float(r_theta(params.N, params.m, params.eta, params.theta)),
        rprime_theta=float(_extra_term(params.detector_kind, params.eta, params.theta)),
    )


def simulated_average(params: TeleportParams, nodes: int = None, phase_nodes: int = None,
                      convention: MixingConvention = MixingConvention.HEISENBERG,
                      bob_phases: Optional[Mapping[BellEvent, float]] = None) -> Tuple[float, float]:
    """(fidelity, probability) of the fully simulated protocol, Bloch-averaged by quadrature."""
    total_p = total_pf = 0.0
    for event in events_for(params.event_set):
        phase = None if bob_phases is None else bob_phases[event]

        def branch(qubit, event=event, phase=phase):
            bob = simulate_bob_state(event, qubit, params, phase, convention=convention)
            return bob.trace, unnormalized_fidelity(bob, qubit)

        probability, weighted_fidelity = _quadrature_sum(branch, nodes, phase_nodes)
        total_p += probability
        total_pf += weighted_fidelity
    return float(total_pf / total_p), float(total_p)


# ---------------------------------------------------------------------------
# optimization and thresholds

def numeric_optimal_theta(N: int, m: int, eta: float, kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
                          event_set: EventSet = EventSet.D10) -> MaxFidelity:
    """Maximize the averaged fidelity over theta in [0, pi/2]."""
    events = events_for(event_set)

    def fidelity(theta: float) -> float:
        return _averages(N, m, eta, theta, kind, events)[0]

    search = golden_section_max(fidelity, 0.0, HALF_PI)
    theta = polish_maximum(fidelity, search.argmax, 0.0, HALF_PI)
    best, probability = _averages(N, m, eta, theta, kind, events)
    logger.debug(f"Optimized theta for N={N} m={m} eta={eta} {kind}/{event_set}: {theta:.12f} -> {best:.12f}")
    return MaxFidelity(float(best), float(probability), float(theta))


def max_fidelity(N: int, m: int, eta: float, kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
                 event_set: EventSet = EventSet.D10) -> MaxFidelity:
    kind, event_set = DetectorKind(kind), EventSet(event_set)
    if kind == DetectorKind.ON_OFF:
        return numeric_optimal_theta(N, m, eta, kind, event_set)
    if event_set == EventSet.BOTH:
        return MaxFidelity(combined_fidelity_formula(N, m, eta), combined_probability_formula(N, m, eta), math.pi / 4)
    theta = optimal_theta(N, m, eta)
    if event_set == EventSet.D01:
        theta = HALF_PI - theta
    return MaxFidelity(max_fidelity_formula(N, m, eta), probability_at_optimum_formula(N, m, eta), theta)


def optimized_report(N: int, m: int, eta: float, kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
                     event_set: EventSet = EventSet.D10) -> TeleportReport:
    best = max_fidelity(N, m, eta, kind, event_set)
    params = TeleportParams(N, m, eta, min(max(best.theta, 0.0), HALF_PI), kind, event_set)
    return TeleportReport(
        params=params,
        avg_fidelity=best.fidelity,
        avg_probability=best.probability,
        r_theta=float(r_theta(N, m, eta, params.theta)),
        rprime_theta=float(_extra_term(kind, eta, params.theta)),
        optimal=True,
        optimal_theta=params.theta,
    )


def critical_eta_bisection(N: int, m: int, kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
                           xtol: float = None) -> float:
    """Smallest eta whose optimized D10 fidelity reaches the classical limit."""
    if not 0 <= m <= N - 2:
        raise InvalidParameterError(f"m must lie in [0, {N - 2}], got {m}")
    xtol = get_config().bisection_xtol if xtol is None else xtol
    # eta = 0 never fires the branch, so the search starts one step above it
    return bisect_root(lambda eta: max_fidelity(N, m, eta, kind).fidelity - CLASSICAL_LIMIT, xtol, 1.0, xtol)


def critical_eta_grid(N: int, m: int, kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
                      points: int = 20001, xtol: float = None) -> float:
    """Critical efficiency from the largest D10 fidelity on a dense theta grid.

    Uses no optimizer, so it is an independent check of ``critical_eta``.
    """
    if not 0 <= m <= N - 2:
        raise InvalidParameterError(f"m must lie in [0, {N - 2}], got {m}")
    xtol = get_config().bisection_xtol if xtol is None else xtol
    thetas = np.linspace(0.0, HALF_PI, points)
    return bisect_root(lambda eta: float(np.max(fidelity_formula(N, m, eta, thetas, kind))) - CLASSICAL_LIMIT,
                       xtol, 1.0, xtol)


def critical_eta(N: int, m: int, kind: DetectorKind = DetectorKind.NUMBER_RESOLVING) -> float:
    if not 0 <= m <= N - 2:
        raise InvalidParameterError(f"m must lie in [0, {N - 2}], got {m}")
    if DetectorKind(kind) == DetectorKind.NUMBER_RESOLVING:
        return critical_eta_formula(N, m)
    return critical_eta_bisection(N, m, kind)


def minimum_cooperation(N: int, eta: float, kind: DetectorKind = DetectorKind.NUMBER_RESOLVING) -> Optional[int]:
    """Fewest cooperating parties for which the optimized fidelity beats 2/3; None if none suffice."""
    for m in range(N - 1):
        if max_fidelity(N, m, eta, kind).fidelity > CLASSICAL_LIMIT:
            return m
    return None


# ---------------------------------------------------------------------------
# linear-map view of the protocol, for grid searches

def _qubit_density(amplitudes: Sequence[complex], cutoff: int) -> DensityOperator:
    b, a = amplitudes
    return PureState(1, {(0,): b, (1,): a}, cutoff).density()


@lru_cache(maxsize=64)
def _channel_inputs(N: int, m: int, eta: float, cutoff: int, convention: MixingConvention) -> np.ndarray:
    """Joint (u, A, B) operators for the inputs |0>, |1>, |+>, |+i>, stacked on the first axis."""
    resource = _simulated_resource(N, m, eta, cutoff, convention)
    root = 1 / np.sqrt(2)
    qubits = [(1, 0), (0, 1), (root, root), (root, 1j * root)]
    inputs = np.stack([tensor(_qubit_density(amplitudes, cutoff), resource).matrix for amplitudes in qubits])
    inputs.setflags(write=False)
    return inputs


@lru_cache(maxsize=256)
def _event_factor(event: BellEvent, eta: float, kind: DetectorKind, cutoff: int) -> np.ndarray:
    """Detector weights of ``event`` on (c, d) = modes (0, 1) of the three-mode (u, A, B) space."""
    factor = detection_factor(FockSpace(3, cutoff), enumerate(event_povms(event, DetectorModel(eta), kind, cutoff)))
    factor.setflags(write=False)
    return factor


def bob_channels(theta: float, N: int, m: int, eta: float, events: Iterable[BellEvent],
                 kind: DetectorKind = DetectorKind.NUMBER_RESOLVING, cutoff: int = None,
                 convention: MixingConvention = MixingConvention.HEISENBERG) -> Dict[BellEvent, np.ndarray]:
    """For each event, E[i, j] = Bob's unnormalized output for the input operator |i><j| (i, j photons).

    Simulated on the inputs |0>, |1>, |+>, |+i> (Bob applies no phase) and
    reconstructed by linearity. The input operators are built once per
    (N, m, eta); each theta then costs one Fock unitary and one weighted
    partial trace per event.
    """
    if not 0 <= m <= N - 2:
        raise InvalidParameterError(f"m must lie in [0, {N - 2}], got {m}")
    cutoff = get_config().total_cutoff if cutoff is None else cutoff
    convention = MixingConvention(convention)
    inputs = _channel_inputs(N, m, eta, cutoff, convention)

    space = FockSpace(3, cutoff)
    u = bell_splitter(theta)
    if convention == MixingConvention.TRANSPOSED:
        u = u.T
    unitary = fock_unitary(space, (0, 1), u)
    joints = unitary @ inputs @ unitary.conj().T  # modes (u, A, B)

    channels = {}
    for event in events:
        factor = _event_factor(BellEvent(event), eta, DetectorKind(kind), cutoff)
        weighted = factor[:, None] * joints * factor[None, :]
        zero, one, plus, plus_i = reduced_matrix(weighted, 3, cutoff, (2,))
        symmetric = 2 * plus - zero - one
        antisymmetric = 2 * plus_i - zero - one
        channel = np.empty((2, 2) + zero.shape, dtype=complex)
        channel[0, 0], channel[1, 1] = zero, one
        channel[0, 1] = (symmetric + 1j * antisymmetric) / 2
        channel[1, 0] = (symmetric - 1j * antisymmetric) / 2
        channels[BellEvent(event)] = channel
    return channels


def channel_fidelities(channel: np.ndarray, bob_phases: Sequence[float], nodes: int = None,
                       phase_nodes: int = None) -> np.ndarray:
    """Bloch-averaged fidelity of one branch for each Bob phase (nan where the branch never fires)."""
    thetas, phis, weights = _quadrature_nodes(nodes, phase_nodes)
    qubits = UnknownQubit.from_bloch(thetas, phis)
    amplitudes = np.stack([qubits.b, qubits.a], axis=1)  # index = photon number
    outputs = np.einsum('ki,kj,ijab->kab', amplitudes, amplitudes.conj(), channel)
    dim = channel.shape[-1]
    target = np.zeros((len(weights), dim), dtype=complex)
    target[:, :2] = amplitudes
    probability = weights @ np.real(np.einsum('kaa->k', outputs))
    if probability <= get_tolerances().trace:
        return np.full(len(bob_phases), np.nan)

    rotation = np.exp(-1j * np.outer(bob_phases, np.arange(dim)))
    overlap = np.real(np.einsum('ka,pa,kab,pb,kb->pk', target.conj(), rotation, outputs, rotation.conj(), target))
    return overlap @ weights / probability


def best_event_fidelity(N: int, m: int, eta: float, events: Iterable[BellEvent],
                        theta_points: int = 1000, phase_points: int = 64,
                        kind: DetectorKind = DetectorKind.NUMBER_RESOLVING,
                        theta_range: Tuple[float, float] = (0.0, HALF_PI)) -> Dict[BellEvent, float]:
    """Largest Bloch-averaged fidelity of each event over a theta grid and a Bob phase grid."""
    events = tuple(BellEvent(event) for event in events)
    bob_phases = 2 * np.pi * np.arange(phase_points) / phase_points
    best = {event: -np.inf for event in events}
    for theta in np.linspace(*theta_range, theta_points):
        for event, channel in bob_channels(theta, N, m, eta, events, kind).items():
            fidelities = channel_fidelities(channel, bob_phases)
            if np.any(np.isfinite(fidelities)):
                best[event] = max(best[event], float(np.nanmax(fidelities)))
    return best
