"""
Pairwise entanglement witness for single-photon W states.

Any separable two-mode state satisfies

    [1 + 4 Var(J_x)] [1 + 4 Var(J_y)] >= (1 + <N_+>)^2

and the reduced pair of a W state, measured with detectors of efficiency
eta, gives the ratio lhs/rhs in closed form::

    (1 - 4 eta^2 Re^2[a_i* a_j] / (1 + eta p_ij)) (1 - 4 eta^2 Im^2[a_i* a_j] / (1 + eta p_ij))

which is below one whenever a_i a_j != 0 and eta > 0. Violation on every
one of the N(N-1)/2 pairs rules out every separable partition of the modes.
"""
from __future__ import annotations

import logging
from itertools import combinations
from typing import Optional

import numpy as np
from scipy import linalg

from linopt.circuits import WCoefficients, w_state
from linopt.conf import get_config, get_tolerances
from linopt.detection import DetectorModel, counted_moments, lossy_moments
from linopt.exceptions import ConsistencyError, DimensionMismatchError, InvalidParameterError
from linopt.fock import DensityOperator, FockSpace, PureState, expectation, n_plus, partial_trace
from linopt.models import DetectorKind, PairWitnessResult, WitnessScanReport

logger = logging.getLogger(__name__)


def pair_state(alpha_i: complex, alpha_j: complex, cutoff: int = None) -> DensityOperator:
    """p |Psi_ij><Psi_ij| + (1 - p) |00><00| with sqrt(p) Psi_ij = a_i|10> + a_j|01>."""
    cutoff = get_config().total_cutoff if cutoff is None else cutoff
    p = abs(alpha_i) ** 2 + abs(alpha_j) ** 2
    if p > 1 + get_tolerances().normalization:
        raise InvalidParameterError(f"|a_i|^2 + |a_j|^2 = {p} exceeds one")
    space = FockSpace(2, cutoff)
    photon = PureState(2, {(1, 0): alpha_i, (0, 1): alpha_j}, cutoff, branch=True).to_vector(space)
    matrix = np.outer(photon, photon.conj())
    matrix[space.position((0, 0)), space.position((0, 0))] += 1 - p
    return DensityOperator(2, matrix, cutoff, normalized=True)


def reduced_pair(w: WCoefficients, i: int, j: int, cutoff: int = None) -> DensityOperator:
    """Two-mode state of modes i and j (ascending) after tracing out the rest.

    Built from the closed form and checked against the partial trace of the
    full W state.
    """
    if i == j:
        raise InvalidParameterError(f"a pair needs two distinct modes, got ({i}, {j})")
    for mode in (i, j):
        if not 0 <= mode < w.N:
            raise InvalidParameterError(f"mode {mode} out of range for {w.N} modes")
    i, j = sorted((i, j))
    alpha_i, alpha_j = w.alphas[i], w.alphas[j]
    if abs(alpha_i) ** 2 + abs(alpha_j) ** 2 <= get_tolerances().normalization:
        raise InvalidParameterError(
            f"modes ({i}, {j}) carry no photon amplitude: the pair is vacuum and has nothing to witness")

    closed = pair_state(alpha_i, alpha_j, cutoff)
    traced = partial_trace(w_state(w, cutoff).density(), (i, j))
    mismatch = np.max(np.abs(closed.matrix - traced.matrix))
    if mismatch > get_tolerances().agreement:
        raise ConsistencyError(f"reduced pair ({i}, {j}) differs from the partial trace by {mismatch:.3e}")
    return closed


def negativity(rho2: DensityOperator) -> float:
    """Sum of the negative eigenvalues (in magnitude) of the partial transpose on the second mode."""
    if rho2.num_modes != 2:
        raise DimensionMismatchError(f"negativity needs a two-mode state, got {rho2.num_modes} modes")
    levels = rho2.cutoff + 1
    product = np.zeros((levels * levels, levels * levels), dtype=complex)
    grid = [na * levels + nb for na, nb in rho2.space.basis]
    product[np.ix_(grid, grid)] = rho2.matrix
    transposed = product.reshape(levels, levels, levels, levels).transpose(0, 3, 2, 1).reshape(levels ** 2, levels ** 2)
    eigenvalues = linalg.eigvalsh(transposed)
    return float(-eigenvalues[eigenvalues < 0].sum())


def witness_ratio_closed_form(alpha_i: complex, alpha_j: complex, det: DetectorModel) -> float:
    p = abs(alpha_i) ** 2 + abs(alpha_j) ** 2
    if p > 1 + get_tolerances().normalization:
        raise InvalidParameterError(f"|a_i|^2 + |a_j|^2 = {p} exceeds one")
    product = np.conj(alpha_i) * alpha_j
    eta = det.eta
    denominator = 1 + eta * p
    return float((1 - 4 * eta ** 2 * product.real ** 2 / denominator)
                 * (1 - 4 * eta ** 2 * product.imag ** 2 / denominator))


def witness_ratio_simulated(rho2: DensityOperator, det: DetectorModel,
                            detector_kind: Optional[DetectorKind] = None,
                            pair: tuple = (0, 1)) -> PairWitnessResult:
    """Evaluate the separability condition on simulated measurement moments.

    With no ``detector_kind`` the moments come from the interferometer plus
    the binomial loss transform; otherwise they are counted from the outcome
    statistics of the given POVM family.
    """
    if detector_kind is None:
        moments = lossy_moments(rho2, det)
    else:
        moments = counted_moments(rho2, det, detector_kind)
    lhs = (1 + 4 * moments.var_jx) * (1 + 4 * moments.var_jy)
    rhs = (1 + moments.n_plus) ** 2
    ratio = lhs / rhs
    p_ij = expectation(rho2, n_plus(2, (0, 1), rho2.cutoff)).real
    return PairWitnessResult(
        pair=tuple(pair),
        p_ij=p_ij,
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        violated=ratio < 1 - get_tolerances().violation,
    )


def scan_all_pairs(w: WCoefficients, det: DetectorModel,
                   detector_kind: Optional[DetectorKind] = None) -> WitnessScanReport:
    tol = get_tolerances()
    results = []
    for i, j in combinations(range(w.N), 2):
        alpha_i, alpha_j = w.alphas[i], w.alphas[j]
        closed = witness_ratio_closed_form(alpha_i, alpha_j, det)
        p = abs(alpha_i) ** 2 + abs(alpha_j) ** 2
        if p <= tol.normalization:
            results.append(PairWitnessResult(
                pair=(i, j), p_ij=p, lhs=1.0, rhs=1.0, ratio=1.0, violated=False,
                closed_form_ratio=closed, negativity=0.0,
                reason="both coefficients vanish: the pair is vacuum"))
            continue

        rho2 = reduced_pair(w, i, j)
        simulated = witness_ratio_simulated(rho2, det, detector_kind, pair=(i, j))
        reason = None
        if abs(alpha_i * alpha_j) <= tol.normalization:
            reason = "a coefficient vanishes: the pair is a product state"
        results.append(PairWitnessResult(
            pair=(i, j), p_ij=p, lhs=simulated.lhs, rhs=simulated.rhs, ratio=simulated.ratio,
            violated=simulated.violated and reason is None,
            closed_form_ratio=closed, negativity=negativity(rho2), reason=reason))

    report = WitnessScanReport(
        num_modes=w.N, eta=det.eta, pairs=tuple(results),
        all_violated=all(result.violated for result in results))
    logger.debug(f"Witness scan N={w.N} eta={det.eta}: {sum(r.violated for r in results)}/{len(results)} pairs violated")
    return report
