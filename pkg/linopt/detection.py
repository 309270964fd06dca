"""
Nonideal photodetection.

A detector of efficiency eta is described by photon-number-diagonal POVM
elements: ``Pi_k`` (k photons registered) for number-resolving detectors and
``Pi_0`` / ``I - Pi_0`` for on-off detectors. Conditioning applies
sqrt(Pi) rho sqrt(Pi) and traces the measured modes away, so the trace of the
result is the probability of the outcome.

The witness moments J_x, J_y, N_+ are read out through the two-mode
interferometer (phase shifter on the second mode, balanced splitter, photon
number difference at the outputs). Loss enters through binomial thinning of
every detector::

    4 Var(J)_eta = 4 eta^2 Var(J)_o + eta (1 - eta) <N_+>_o
    <N_+>_eta    = eta <N_+>_o

which is what an ideal detector behind a transmittance-eta splitter with
vacuum in its other port measures (``ancilla_moments`` simulates exactly that).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Tuple, Union

import numpy as np
from scipy.stats import binom

from linopt.circuits import bell_splitter
from linopt.conf import get_config, get_tolerances
from linopt.exceptions import DimensionMismatchError, InvalidParameterError, InvalidStateError
from linopt.fock import (
    DensityOperator,
    FockSpace,
    apply_phase_shift,
    apply_two_mode_unitary,
    expectation,
    jz,
    n_plus,
    partial_trace,
    tensor,
    vacuum,
)
from linopt.models import DetectorKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DetectorModel:
    eta: float = 1.0

    def __post_init__(self):
        if not 0 <= self.eta <= 1:
            raise InvalidParameterError(f"quantum efficiency must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True, eq=False)
class PovmElement:
    """One detection outcome at one mode, stored as its photon-number diagonal."""
    diagonal: np.ndarray
    label: str

    def __post_init__(self):
        diagonal = np.array(self.diagonal, dtype=float)
        if diagonal.ndim != 1:
            raise InvalidStateError("a POVM element is stored as a one-dimensional diagonal")
        tol = get_tolerances().hermitian
        if diagonal.min() < -tol or diagonal.max() > 1 + tol:
            raise InvalidStateError(f"POVM weights must lie in [0, 1], got {diagonal}")
        diagonal = np.clip(diagonal, 0.0, 1.0)
        diagonal.setflags(write=False)
        object.__setattr__(self, 'diagonal', diagonal)

    @property
    def cutoff(self) -> int:
        return len(self.diagonal) - 1

    def sqrt(self) -> np.ndarray:
        return np.sqrt(self.diagonal)


class WitnessMoments(NamedTuple):
    var_jx: float
    var_jy: float
    n_plus: float


def _cutoff(cutoff: int = None) -> int:
    return get_config().total_cutoff if cutoff is None else cutoff


def povm_number(k: int, det: DetectorModel, cutoff: int = None) -> PovmElement:
    """Pi_k = sum_{l>=k} C(l,k) eta^k (1-eta)^(l-k) |l><l|, truncated at the cutoff."""
    cutoff = _cutoff(cutoff)
    if not 0 <= k <= cutoff:
        raise InvalidParameterError(f"photon count {k} outside [0, {cutoff}]")
    photons = np.arange(cutoff + 1)
    return PovmElement(binom.pmf(k, photons, det.eta), label=str(k))


def povm_onoff(on: bool, det: DetectorModel, cutoff: int = None) -> PovmElement:
    off = povm_number(0, det, cutoff)
    if on:
        return PovmElement(1.0 - off.diagonal, label='on')
    return PovmElement(off.diagonal, label='off')


def povm_family(kind: DetectorKind, det: DetectorModel, cutoff: int = None) -> Tuple[Tuple[int, PovmElement], ...]:
    """Complete outcome set of one detector, each element paired with the count it reports."""
    cutoff = _cutoff(cutoff)
    if DetectorKind(kind) == DetectorKind.ON_OFF:
        return (0, povm_onoff(False, det, cutoff)), (1, povm_onoff(True, det, cutoff))
    return tuple((k, povm_number(k, det, cutoff)) for k in range(cutoff + 1))


def detection_factor(space: FockSpace, pairs: Iterable[Tuple[int, PovmElement]]) -> np.ndarray:
    """sqrt(Pi) of every assigned detector, as one weight per canonical basis ket of ``space``."""
    factor = np.ones(space.dim)
    for mode, element in pairs:
        if not 0 <= mode < space.num_modes:
            raise InvalidParameterError(f"mode {mode} out of range for {space.num_modes} modes")
        if element.cutoff < space.cutoff:
            raise DimensionMismatchError(
                f"POVM element covers {element.cutoff} photons, state space needs {space.cutoff}")
        factor = factor * element.sqrt()[space.occupations[:, mode]]
    return factor


def condition(rho: DensityOperator,
              assignments: Union[Mapping[int, PovmElement], Iterable[Tuple[int, PovmElement]]]) -> DensityOperator:
    """sqrt(Pi) rho sqrt(Pi), traced over the measured modes.

    When every mode is measured nothing is traced and the conditioned operator
    is returned on the full space; its trace is still the outcome probability.
    """
    pairs = list(assignments.items()) if isinstance(assignments, Mapping) else list(assignments)
    modes = [mode for mode, _ in pairs]
    if len(set(modes)) != len(modes):
        raise InvalidParameterError(f"overlapping detector assignments on modes {modes}")
    if not pairs:
        return rho

    factor = detection_factor(rho.space, pairs)
    conditioned = DensityOperator(rho.num_modes, factor[:, None] * rho.matrix * factor[None, :], rho.cutoff)

    keep = [mode for mode in range(rho.num_modes) if mode not in modes]
    if keep:
        conditioned = partial_trace(conditioned, keep)
    logger.debug(f"Conditioned modes {modes} on {[e.label for _, e in pairs]}: probability {conditioned.trace:.6g}")
    return conditioned


def outcome_probability(rho: DensityOperator, assignments) -> float:
    return condition(rho, assignments).trace


def _check_two_mode_state(rho2: DensityOperator):
    if rho2.num_modes != 2:
        raise DimensionMismatchError(f"expected a two-mode state, got {rho2.num_modes} modes")
    if abs(rho2.trace - 1) > get_tolerances().trace:
        raise InvalidStateError(f"expected a normalized two-mode state, trace is {rho2.trace}")


def interferometer_output(rho2: DensityOperator, phi: float) -> DensityOperator:
    """Phase shift phi on the second mode, then a balanced splitter: outputs (c, d)."""
    shifted = apply_phase_shift(rho2, 1, phi) if phi else rho2
    return apply_two_mode_unitary(shifted, (0, 1), bell_splitter(np.pi / 4))


def _difference_moments(rho_cd: DensityOperator) -> Tuple[float, float]:
    half_difference = jz(2, (0, 1), rho_cd.cutoff)
    mean = expectation(rho_cd, half_difference).real
    second = expectation(rho_cd, half_difference @ half_difference).real
    return mean, second - mean ** 2


def ideal_moments(rho2: DensityOperator) -> WitnessMoments:
    """Var(J_x), Var(J_y), <N_+> as a perfect detector pair would read them."""
    _check_two_mode_state(rho2)
    _, var_jx = _difference_moments(interferometer_output(rho2, 0.0))
    _, var_jy = _difference_moments(interferometer_output(rho2, np.pi / 2))
    total = expectation(rho2, n_plus(2, (0, 1), rho2.cutoff)).real
    return WitnessMoments(var_jx, var_jy, total)


def lossy_moments(rho2: DensityOperator, det: DetectorModel) -> WitnessMoments:
    ideal = ideal_moments(rho2)
    eta = det.eta

    def measured_variance(variance: float) -> float:
        return eta ** 2 * variance + eta * (1 - eta) * ideal.n_plus / 4

    return WitnessMoments(measured_variance(ideal.var_jx), measured_variance(ideal.var_jy), eta * ideal.n_plus)


def loss_splitter(eta: float) -> np.ndarray:
    transmitted, reflected = np.sqrt(eta), np.sqrt(1 - eta)
    return np.array([[transmitted, -reflected], [reflected, transmitted]], dtype=complex)


def _lossy_channel(rho_cd: DensityOperator, eta: float) -> DensityOperator:
    # modes (c, d, vacuum_c, vacuum_d)
    joint = tensor(rho_cd, vacuum(2, rho_cd.cutoff))
    joint = apply_two_mode_unitary(joint, (0, 2), loss_splitter(eta))
    joint = apply_two_mode_unitary(joint, (1, 3), loss_splitter(eta))
    return partial_trace(joint, (0, 1))


def ancilla_moments(rho2: DensityOperator, det: DetectorModel) -> WitnessMoments:
    """Moments measured by ideal detectors behind transmittance-eta splitters fed with vacuum."""
    _check_two_mode_state(rho2)
    outputs = [_lossy_channel(interferometer_output(rho2, phi), det.eta) for phi in (0.0, np.pi / 2)]
    _, var_jx = _difference_moments(outputs[0])
    _, var_jy = _difference_moments(outputs[1])
    total = expectation(outputs[0], n_plus(2, (0, 1), rho2.cutoff)).real
    return WitnessMoments(var_jx, var_jy, total)


def counted_moments(rho2: DensityOperator, det: DetectorModel,
                    kind: DetectorKind = DetectorKind.NUMBER_RESOLVING) -> WitnessMoments:
    """Moments from the outcome statistics of the detector pair (on-off clicks count as one photon)."""
    _check_two_mode_state(rho2)
    family = povm_family(kind, det, rho2.cutoff)
    statistics = []
    for phi in (0.0, np.pi / 2):
        output = interferometer_output(rho2, phi)
        mean = second = total = 0.0
        for count_c, element_c in family:
            for count_d, element_d in family:
                probability = outcome_probability(output, {0: element_c, 1: element_d})
                difference = (count_c - count_d) / 2
                mean += probability * difference
                second += probability * difference ** 2
                total += probability * (count_c + count_d)
        statistics.append((second - mean ** 2, total))
    (var_jx, total), (var_jy, _) = statistics
    return WitnessMoments(var_jx, var_jy, total)
