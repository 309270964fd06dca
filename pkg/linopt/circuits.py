"""
Single-photon W states from a chain of beam splitters, and the splitter
used in Alice's Bell measurement.

The chain acts on adjacent pairs (0,1), (1,2), ..., (N-2,N-1) in that order
with the photon injected in mode 0. Splitter j mixes its pair as::

    ( a'_j     )   ( sin t_j  -cos t_j ) ( a_j     )
    ( a'_{j+1} ) = ( cos t_j   sin t_j ) ( a_{j+1} )

so under the Heisenberg convention the output amplitudes are exactly
alpha_j = [prod_{i<j} cos t_i] sin t_j and alpha_N = prod cos t_i, with no
extra signs. Optional phase shifters at the outputs give alpha_j e^{-i phi_j}.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from linopt.conf import get_tolerances
from linopt.exceptions import InvalidParameterError
from linopt.fock import PureState, apply_phase_shift, apply_two_mode_unitary, basis_state
from linopt.models import MixingConvention

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WCoefficients:
    alphas: Tuple[complex, ...]

    def __post_init__(self):
        alphas = tuple(complex(alpha) for alpha in self.alphas)
        object.__setattr__(self, 'alphas', alphas)
        if len(alphas) < 2:
            raise InvalidParameterError(f"a W state needs at least two modes, got {len(alphas)}")
        norm_squared = sum(abs(alpha) ** 2 for alpha in alphas)
        if abs(norm_squared - 1) > get_tolerances().normalization:
            raise InvalidParameterError(f"W coefficients must be normalized, squared norm is {norm_squared}")

    @classmethod
    def symmetric(cls, N: int) -> 'WCoefficients':
        if N < 2:
            raise InvalidParameterError(f"a W state needs at least two modes, got {N}")
        return cls(tuple([1 / np.sqrt(N)] * N))

    @property
    def N(self) -> int:
        return len(self.alphas)

    def as_array(self) -> np.ndarray:
        return np.array(self.alphas, dtype=complex)


@dataclass(frozen=True)
class SplitterAngles:
    thetas: Tuple[float, ...]
    phis: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        thetas = tuple(float(theta) for theta in self.thetas)
        object.__setattr__(self, 'thetas', thetas)
        if not thetas:
            raise InvalidParameterError("a W chain needs at least one splitter")
        slack = get_tolerances().agreement
        for theta in thetas:
            if not -slack <= theta <= np.pi / 2 + slack:
                raise InvalidParameterError(f"preparation angles must lie in [0, pi/2], got {theta}")
        if self.phis is not None:
            phis = tuple(float(phi) for phi in self.phis)
            if len(phis) != len(thetas) + 1:
                raise InvalidParameterError(f"expected {len(thetas) + 1} phase shifts, got {len(phis)}")
            object.__setattr__(self, 'phis', phis)

    @property
    def N(self) -> int:
        return len(self.thetas) + 1


def chain_splitter(theta: float) -> np.ndarray:
    return np.array([[np.sin(theta), -np.cos(theta)],
                     [np.cos(theta), np.sin(theta)]], dtype=complex)


def bell_splitter(theta: float) -> np.ndarray:
    """Alice's splitter, (c, d) = [[cos, sin], [-sin, cos]] (u, a)."""
    return np.array([[np.cos(theta), np.sin(theta)],
                     [-np.sin(theta), np.cos(theta)]], dtype=complex)


def coefficients_from_angles(angles: SplitterAngles) -> WCoefficients:
    thetas = np.asarray(angles.thetas)
    prefix = np.concatenate([[1.0], np.cumprod(np.cos(thetas))])
    magnitudes = prefix * np.append(np.sin(thetas), 1.0)
    phis = np.zeros(angles.N) if angles.phis is None else np.asarray(angles.phis)
    return WCoefficients(tuple(magnitudes * np.exp(-1j * phis)))


def angles_from_coefficients(coefficients: WCoefficients) -> SplitterAngles:
    """Invert the chain. Once the remaining weight vanishes every later angle is 0."""
    alphas = coefficients.as_array()
    magnitudes = np.abs(alphas)
    # tails[j] = weight still travelling down the chain when it reaches splitter j
    tails = np.sqrt(np.cumsum(magnitudes[::-1] ** 2)[::-1])
    thetas = np.arctan2(magnitudes[:-1], tails[1:])
    phis = np.where(magnitudes > 0, -np.angle(alphas), 0.0)
    return SplitterAngles(tuple(thetas), tuple(phis))


def symmetric_angles(N: int) -> SplitterAngles:
    """Reflectivities sin t_j = 1/sqrt(N-j+1), j = 1..N-1: equal weight 1/N in every mode."""
    if N < 2:
        raise InvalidParameterError(f"a W state needs at least two modes, got {N}")
    j = np.arange(1, N)
    return SplitterAngles(tuple(np.arcsin(1 / np.sqrt(N - j + 1))))


def w_state(coefficients: WCoefficients, cutoff: int = None) -> PureState:
    N = coefficients.N
    amplitudes = {}
    for mode, alpha in enumerate(coefficients.alphas):
        counts = [0] * N
        counts[mode] = 1
        amplitudes[tuple(counts)] = alpha
    if cutoff is None:
        return PureState(N, amplitudes)
    return PureState(N, amplitudes, cutoff)


def generate_w(angles: SplitterAngles, cutoff: int = None,
               convention: MixingConvention = MixingConvention.HEISENBERG) -> PureState:
    """Inject one photon into mode 0 and run it through the splitter chain."""
    N = angles.N
    state = basis_state((1,) + (0,) * (N - 1), cutoff)
    for j, theta in enumerate(angles.thetas):
        state = apply_two_mode_unitary(state, (j, j + 1), chain_splitter(theta), convention)
    if angles.phis is not None:
        for mode, phi in enumerate(angles.phis):
            if phi:
                state = apply_phase_shift(state, mode, phi)
    logger.debug(f"Generated {N}-mode W state from angles {angles.thetas}")
    return state
