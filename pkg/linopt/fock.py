"""
Few-photon multimode Fock-space states and operators.

States live on the truncated space of ``num_modes`` modes holding at most
``cutoff`` photons in total. Basis kets are occupation tuples listed in
graded lexicographic order: ascending total photon number, then
lexicographic on the counts, e.g. for two modes and cutoff 2::

    (0,0) (0,1) (1,0) (0,2) (1,1) (2,0)

Two-mode unitaries are read in the Heisenberg picture, ``a_out = u a_in``,
so an input creation operator maps onto the columns of ``u``::

    a_i^+  ->  u[0,0] a_i^+ + u[1,0] a_j^+
    a_j^+  ->  u[0,1] a_i^+ + u[1,1] a_j^+

``MixingConvention.TRANSPOSED`` swaps in ``u.T``; every reported scalar is
invariant under that choice once the phase freedom is used.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Dict, Iterable, Mapping, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.special import factorial

from linopt.conf import get_config, get_tolerances
from linopt.exceptions import (
    CutoffOverflowError,
    DimensionMismatchError,
    InvalidParameterError,
    InvalidStateError,
    NonUnitaryError,
)
from linopt.models import MixingConvention

logger = logging.getLogger(__name__)

Occupation = Tuple[int, ...]


def _default_cutoff() -> int:
    return get_config().total_cutoff


@lru_cache(maxsize=None)
def canonical_basis(num_modes: int, total_cutoff: int) -> Tuple[Occupation, ...]:
    """Every occupation tuple with at most ``total_cutoff`` photons, graded lexicographic."""
    if num_modes < 1:
        raise InvalidParameterError(f"num_modes must be at least 1, got {num_modes}")
    if total_cutoff < 0:
        raise InvalidParameterError(f"total_cutoff must be non-negative, got {total_cutoff}")
    tuples = []
    for photons in range(total_cutoff + 1):
        for modes in combinations_with_replacement(range(num_modes), photons):
            counts = np.bincount(np.asarray(modes, dtype=int), minlength=num_modes)
            tuples.append(tuple(int(n) for n in counts))
    return tuple(sorted(tuples, key=lambda counts: (sum(counts), counts)))


@lru_cache(maxsize=None)
def _basis_index(num_modes: int, total_cutoff: int) -> Dict[Occupation, int]:
    return {counts: position for position, counts in enumerate(canonical_basis(num_modes, total_cutoff))}


@lru_cache(maxsize=None)
def _occupations(num_modes: int, total_cutoff: int) -> np.ndarray:
    occupations = np.array(canonical_basis(num_modes, total_cutoff), dtype=int)
    occupations.setflags(write=False)
    return occupations


@dataclass(frozen=True)
class FockSpace:
    num_modes: int
    cutoff: int

    @property
    def basis(self) -> Tuple[Occupation, ...]:
        return canonical_basis(self.num_modes, self.cutoff)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def occupations(self) -> np.ndarray:
        return _occupations(self.num_modes, self.cutoff)

    @property
    def photon_numbers(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def position(self, counts: Sequence[int]) -> int:
        counts = tuple(int(n) for n in counts)
        if len(counts) != self.num_modes:
            raise DimensionMismatchError(
                f"occupation {counts} has {len(counts)} entries, space has {self.num_modes} modes")
        if any(n < 0 for n in counts):
            raise InvalidStateError(f"negative photon number in {counts}")
        if sum(counts) > self.cutoff:
            raise CutoffOverflowError(f"occupation {counts} exceeds the total-photon cutoff {self.cutoff}")
        return _basis_index(self.num_modes, self.cutoff)[counts]


@dataclass(frozen=True, eq=False)
class PureState:
    """Sparse ket: occupation tuple -> amplitude.

    ``branch`` marks a post-selected, unnormalized branch; only then may the
    norm fall below one.
    """
    num_modes: int
    amplitudes: Mapping[Occupation, complex]
    cutoff: int = field(default_factory=_default_cutoff)
    branch: bool = False

    def __post_init__(self):
        space = self.space
        amplitudes = {}
        for counts, amplitude in self.amplitudes.items():
            space.position(counts)
            if amplitude != 0:
                amplitudes[tuple(int(n) for n in counts)] = complex(amplitude)
        object.__setattr__(self, 'amplitudes', amplitudes)

        tol = get_tolerances().normalization
        norm_squared = self.norm_squared
        if not 0 < norm_squared <= 1 + tol:
            raise InvalidStateError(f"squared norm {norm_squared} outside (0, 1]")
        if not self.branch and abs(norm_squared - 1) > tol:
            raise InvalidStateError(f"state is not normalized: squared norm {norm_squared}")

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.num_modes, self.cutoff)

    @property
    def norm_squared(self) -> float:
        return float(sum(abs(amplitude) ** 2 for amplitude in self.amplitudes.values()))

    def amplitude(self, counts: Sequence[int]) -> complex:
        return self.amplitudes.get(tuple(counts), 0j)

    def to_vector(self, space: FockSpace = None) -> np.ndarray:
        space = space or self.space
        if space.num_modes != self.num_modes:
            raise DimensionMismatchError(f"cannot embed {self.num_modes} modes into {space.num_modes}")
        vector = np.zeros(space.dim, dtype=complex)
        for counts, amplitude in self.amplitudes.items():
            vector[space.position(counts)] = amplitude
        return vector

    @classmethod
    def from_vector(cls, vector: np.ndarray, space: FockSpace, branch: bool = False) -> 'PureState':
        if len(vector) != space.dim:
            raise DimensionMismatchError(f"vector of length {len(vector)} for a space of dimension {space.dim}")
        amplitudes = {counts: vector[i] for i, counts in enumerate(space.basis) if vector[i] != 0}
        return cls(space.num_modes, amplitudes, space.cutoff, branch)

    def density(self) -> 'DensityOperator':
        vector = self.to_vector()
        return DensityOperator(self.num_modes, np.outer(vector, vector.conj()), self.cutoff,
                               normalized=not self.branch)


def basis_state(counts: Sequence[int], cutoff: int = None) -> PureState:
    cutoff = _default_cutoff() if cutoff is None else cutoff
    return PureState(len(counts), {tuple(counts): 1.0}, cutoff)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian PSD operator in the canonical basis, trace at most one.

    Unnormalized operators stand for post-selected branches: their trace is
    the probability of the selecting event.
    """
    num_modes: int
    matrix: np.ndarray
    cutoff: int = field(default_factory=_default_cutoff)
    normalized: bool = False

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = self.space.dim
        if matrix.shape != (dim, dim):
            raise DimensionMismatchError(
                f"matrix of shape {matrix.shape} for {self.num_modes} modes at cutoff {self.cutoff} (dim {dim})")
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

        tol = get_tolerances()
        skew = np.max(np.abs(matrix - matrix.conj().T))
        if skew > tol.hermitian:
            raise InvalidStateError(f"operator is not Hermitian (max deviation {skew:.3e})")
        lowest = linalg.eigvalsh(matrix)[0]
        if lowest < -tol.psd:
            raise InvalidStateError(f"operator is not positive semidefinite (min eigenvalue {lowest:.3e})")
        trace = self.trace
        if trace > 1 + tol.trace:
            raise InvalidStateError(f"trace {trace} exceeds one")
        if self.normalized and abs(trace - 1) > tol.trace:
            raise InvalidStateError(f"operator flagged normalized has trace {trace}")

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.num_modes, self.cutoff)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalize(self) -> 'DensityOperator':
        trace = self.trace
        if trace <= 0:
            raise InvalidStateError("cannot normalize an operator of zero trace")
        return DensityOperator(self.num_modes, self.matrix / trace, self.cutoff, normalized=True)

    def max_photons(self) -> int:
        """Largest total photon number carried with non-negligible weight."""
        weights = np.real(np.diag(self.matrix))
        support = self.space.photon_numbers[weights > get_tolerances().trace]
        return int(support.max()) if support.size else 0


def _hermitian(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.conj().T) / 2


def vacuum(num_modes: int, cutoff: int = None) -> DensityOperator:
    return basis_state((0,) * num_modes, cutoff).density()


@dataclass(frozen=True, eq=False)
class ModeOperator:
    num_modes: int
    matrix: np.ndarray
    cutoff: int = field(default_factory=_default_cutoff)

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=complex)
        dim = self.space.dim
        if matrix.shape != (dim, dim):
            raise DimensionMismatchError(f"operator of shape {matrix.shape} for a space of dimension {dim}")
        object.__setattr__(self, 'matrix', matrix)

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.num_modes, self.cutoff)

    def _check(self, other: 'ModeOperator'):
        if (self.num_modes, self.cutoff) != (other.num_modes, other.cutoff):
            raise DimensionMismatchError(
                f"operators act on different spaces: {self.space} and {other.space}")

    def __matmul__(self, other: 'ModeOperator') -> 'ModeOperator':
        self._check(other)
        return ModeOperator(self.num_modes, self.matrix @ other.matrix, self.cutoff)

    def __add__(self, other: 'ModeOperator') -> 'ModeOperator':
        self._check(other)
        return ModeOperator(self.num_modes, self.matrix + other.matrix, self.cutoff)

    def __sub__(self, other: 'ModeOperator') -> 'ModeOperator':
        self._check(other)
        return ModeOperator(self.num_modes, self.matrix - other.matrix, self.cutoff)

    def __mul__(self, scalar: complex) -> 'ModeOperator':
        return ModeOperator(self.num_modes, scalar * self.matrix, self.cutoff)

    __rmul__ = __mul__

    def dag(self) -> 'ModeOperator':
        return ModeOperator(self.num_modes, self.matrix.conj().T, self.cutoff)

    def is_hermitian(self) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= get_tolerances().hermitian)


def _check_mode(num_modes: int, mode: int):
    if not 0 <= mode < num_modes:
        raise InvalidParameterError(f"mode {mode} out of range for {num_modes} modes")


def annihilation(num_modes: int, mode: int, cutoff: int = None) -> ModeOperator:
    cutoff = _default_cutoff() if cutoff is None else cutoff
    _check_mode(num_modes, mode)
    space = FockSpace(num_modes, cutoff)
    matrix = np.zeros((space.dim, space.dim), dtype=complex)
    for column, counts in enumerate(space.basis):
        if counts[mode]:
            lowered = list(counts)
            lowered[mode] -= 1
            matrix[space.position(lowered), column] = np.sqrt(counts[mode])
    return ModeOperator(num_modes, matrix, cutoff)


def creation(num_modes: int, mode: int, cutoff: int = None) -> ModeOperator:
    return annihilation(num_modes, mode, cutoff).dag()


def number_operator(num_modes: int, mode: int, cutoff: int = None) -> ModeOperator:
    cutoff = _default_cutoff() if cutoff is None else cutoff
    _check_mode(num_modes, mode)
    space = FockSpace(num_modes, cutoff)
    return ModeOperator(num_modes, np.diag(space.occupations[:, mode].astype(complex)), cutoff)


def _hopping(num_modes: int, modes: Tuple[int, int], cutoff: int = None) -> ModeOperator:
    # a^+ b, normal ordered so the truncated ladder matrices stay exact
    i, j = modes
    return creation(num_modes, i, cutoff) @ annihilation(num_modes, j, cutoff)


def jx(num_modes: int = 2, modes: Tuple[int, int] = (0, 1), cutoff: int = None) -> ModeOperator:
    """J_x = (a^+ b + a b^+) / 2."""
    hop = _hopping(num_modes, modes, cutoff)
    return 0.5 * (hop + hop.dag())


def jy(num_modes: int = 2, modes: Tuple[int, int] = (0, 1), cutoff: int = None) -> ModeOperator:
    """J_y = (a^+ b - a b^+) / 2i."""
    hop = _hopping(num_modes, modes, cutoff)
    return (-0.5j) * (hop - hop.dag())


def jz(num_modes: int = 2, modes: Tuple[int, int] = (0, 1), cutoff: int = None) -> ModeOperator:
    i, j = modes
    return 0.5 * (number_operator(num_modes, i, cutoff) - number_operator(num_modes, j, cutoff))


def n_plus(num_modes: int = 2, modes: Tuple[int, int] = (0, 1), cutoff: int = None) -> ModeOperator:
    i, j = modes
    return number_operator(num_modes, i, cutoff) + number_operator(num_modes, j, cutoff)


def tensor(a: DensityOperator, b: DensityOperator, cutoff: int = None) -> DensityOperator:
    """a (x) b on the concatenated modes; overflow past the cutoff is an error, never a truncation."""
    cutoff = max(a.cutoff, b.cutoff) if cutoff is None else cutoff
    photons = a.max_photons() + b.max_photons()
    if photons > cutoff:
        raise CutoffOverflowError(f"tensor product carries {photons} photons, cutoff is {cutoff}")

    space = FockSpace(a.num_modes + b.num_modes, cutoff)
    left, right, target = [], [], []
    for i, counts_a in enumerate(a.space.basis):
        for k, counts_b in enumerate(b.space.basis):
            if sum(counts_a) + sum(counts_b) <= cutoff:
                left.append(i)
                right.append(k)
                target.append(space.position(counts_a + counts_b))

    matrix = np.zeros((space.dim, space.dim), dtype=complex)
    matrix[np.ix_(target, target)] = a.matrix[np.ix_(left, left)] * b.matrix[np.ix_(right, right)]
    return DensityOperator(space.num_modes, matrix, cutoff, normalized=a.normalized and b.normalized)


@lru_cache(maxsize=None)
def _trace_map(num_modes: int, cutoff: int, keep: Tuple[int, ...]):
    space = FockSpace(num_modes, cutoff)
    reduced = FockSpace(len(keep), cutoff)
    traced = [mode for mode in range(num_modes) if mode not in keep]
    occupations = space.occupations
    kept_position = np.array([reduced.position(row[list(keep)]) for row in occupations])
    labels = {}
    traced_label = np.array([labels.setdefault(tuple(row[traced]), len(labels)) for row in occupations])
    rows, columns = np.nonzero(traced_label[:, None] == traced_label[None, :])
    return reduced, kept_position[rows], kept_position[columns], rows, columns


def reduced_matrix(matrix: np.ndarray, num_modes: int, cutoff: int, keep: Tuple[int, ...]) -> np.ndarray:
    """Partial trace of a raw canonical-basis matrix onto the sorted modes ``keep``; no state checks."""
    reduced, target_rows, target_columns, rows, columns = _trace_map(num_modes, cutoff, keep)
    out = np.zeros(matrix.shape[:-2] + (reduced.dim, reduced.dim), dtype=complex)
    for index in np.ndindex(*matrix.shape[:-2]):
        np.add.at(out[index], (target_rows, target_columns), matrix[index][rows, columns])
    return out


def partial_trace(rho: DensityOperator, keep: Iterable[int]) -> DensityOperator:
    """Reduce ``rho`` onto the modes in ``keep`` (kept in ascending order)."""
    keep = tuple(sorted(set(keep)))
    if not keep:
        raise InvalidParameterError("partial trace needs at least one mode to keep")
    for mode in keep:
        _check_mode(rho.num_modes, mode)
    if len(keep) == rho.num_modes:
        return rho

    matrix = reduced_matrix(rho.matrix, rho.num_modes, rho.cutoff, keep)
    return DensityOperator(len(keep), _hermitian(matrix), rho.cutoff, rho.normalized)



def check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise DimensionMismatchError(f"two-mode unitary must be 2x2, got {u.shape}")
    deviation = np.max(np.abs(u @ u.conj().T - np.eye(2)))
    if deviation > get_tolerances().unitary:
        raise NonUnitaryError(f"matrix is not unitary (max deviation {deviation:.3e})")
    return u


def fock_unitary(space: FockSpace, modes: Tuple[int, int], u: np.ndarray) -> np.ndarray:
    # Number-conserving blocks: expand (u00 x + u10 y)^ni (u01 x + u11 y)^nj, x = a_i^+, y = a_j^+.
    i, j = modes
    matrix = np.zeros((space.dim, space.dim), dtype=complex)
    for column, counts in enumerate(space.basis):
        ni, nj = counts[i], counts[j]
        polynomial = np.ones(1, dtype=complex)
        for _ in range(ni):
            polynomial = np.convolve(polynomial, [u[1, 0], u[0, 0]])
        for _ in range(nj):
            polynomial = np.convolve(polynomial, [u[1, 1], u[0, 1]])
        total = ni + nj
        norm_in = np.sqrt(factorial(ni) * factorial(nj))
        for p, coefficient in enumerate(polynomial):
            if coefficient == 0:
                continue
            target = list(counts)
            target[i], target[j] = p, total - p
            matrix[space.position(target), column] += coefficient * np.sqrt(factorial(p) * factorial(total - p)) / norm_in
    return matrix


def apply_two_mode_unitary(state: Union[PureState, DensityOperator], modes: Tuple[int, int], u: np.ndarray,
                           convention: MixingConvention = MixingConvention.HEISENBERG):
    i, j = modes
    if i == j:
        raise InvalidParameterError(f"a two-mode unitary needs distinct modes, got {modes}")
    _check_mode(state.num_modes, i)
    _check_mode(state.num_modes, j)
    u = check_unitary(u)
    if MixingConvention(convention) == MixingConvention.TRANSPOSED:
        u = u.T

    space = state.space
    unitary = fock_unitary(space, (i, j), u)
    if isinstance(state, PureState):
        return PureState.from_vector(unitary @ state.to_vector(), space, state.branch)
    matrix = _hermitian(unitary @ state.matrix @ unitary.conj().T)
    return DensityOperator(state.num_modes, matrix, state.cutoff, state.normalized)


def apply_phase_shift(state: Union[PureState, DensityOperator], mode: int, phi: float):
    """Phase shifter on one mode: |n> -> exp(-i n phi) |n>."""
    _check_mode(state.num_modes, mode)
    space = state.space
    phases = np.exp(-1j * phi * space.occupations[:, mode])
    if isinstance(state, PureState):
        return PureState.from_vector(phases * state.to_vector(), space, state.branch)
    matrix = _hermitian(phases[:, None] * state.matrix * phases.conj()[None, :])
    return DensityOperator(state.num_modes, matrix, state.cutoff, state.normalized)


def expectation(rho: DensityOperator, op: ModeOperator) -> complex:
    if (rho.num_modes, rho.cutoff) != (op.num_modes, op.cutoff):
        raise DimensionMismatchError(f"state on {rho.space} but operator on {op.space}")
    return complex(np.trace(rho.matrix @ op.matrix))


def overlap_fidelity(rho: DensityOperator, psi: PureState) -> float:
    """<psi|rho|psi>; for an unnormalized rho this is probability times fidelity."""
    if rho.num_modes != psi.num_modes:
        raise DimensionMismatchError(f"state on {rho.num_modes} modes, target on {psi.num_modes}")
    if abs(psi.norm_squared - 1) > get_tolerances().normalization:
        raise InvalidStateError("target state for a fidelity must be normalized")
    vector = psi.to_vector(rho.space)
    return float(np.real(vector.conj() @ rho.matrix @ vector))
