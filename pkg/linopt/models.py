"""
Shared records and choice enumerations.

Nothing here is persisted: the ``TextChoices`` give the detector/event
vocabulary one spelling across the library, the commands and the output
files, and the frozen dataclasses are the result records that cross module
boundaries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from django.db import models

from linopt.exceptions import InvalidParameterError


class MixingConvention(models.TextChoices):
    # Heisenberg reading of the splitter matrix: a_out = u a_in.
    HEISENBERG = 'heisenberg', 'Heisenberg'
    TRANSPOSED = 'transposed', 'Transposed'


class DetectorKind(models.TextChoices):
    NUMBER_RESOLVING = 'number', 'Number-resolving'
    ON_OFF = 'onoff', 'On-off'


class EventSet(models.TextChoices):
    D10 = 'D10', 'D10'
    D01 = 'D01', 'D01'
    BOTH = 'both', 'D10 and D01'


class BellEvent(models.TextChoices):
    D00 = 'D00', 'D00'
    D10 = 'D10', 'D10'
    D01 = 'D01', 'D01'
    D20 = 'D20', 'D20'
    D11 = 'D11', 'D11'
    D02 = 'D02', 'D02'

    @property
    def counts(self) -> Tuple[int, int]:
        return int(self.value[1]), int(self.value[2])

    @property
    def advantageous(self) -> bool:
        return self.value in ('D10', 'D01')


class BlochMethod(models.TextChoices):
    MOMENTS = 'moments', 'Closed-form moments'
    QUADRATURE = 'quadrature', 'Gauss-Legendre quadrature'
    MONTE_CARLO = 'montecarlo', 'Monte Carlo'


@dataclass(frozen=True)
class PairWitnessResult:
    pair: Tuple[int, int]
    p_ij: float
    lhs: float
    rhs: float
    ratio: float
    violated: bool
    closed_form_ratio: Optional[float] = None
    negativity: Optional[float] = None
    reason: Optional[str] = None


@dataclass(frozen=True)
class WitnessScanReport:
    num_modes: int
    eta: float
    pairs: Tuple[PairWitnessResult, ...]
    all_violated: bool

    @property
    def conclusion(self) -> str:
        if self.all_violated:
            return (f"Every one of the {len(self.pairs)} pairs violates the separability "
                    f"condition at eta={self.eta}; no separable partition of the "
                    f"{self.num_modes} modes is consistent with this, so the state is "
                    f"fully inseparable.")
        failed = [f"({i + 1},{j + 1})" for (i, j) in (r.pair for r in self.pairs if not r.violated)]
        return (f"Full inseparability is not certified: pairs {', '.join(failed)} "
                f"show no violation at eta={self.eta}.")


@dataclass(frozen=True)
class TeleportParams:
    N: int
    m: int = 0
    eta: float = 1.0
    theta: float = math.pi / 4
    detector_kind: DetectorKind = DetectorKind.NUMBER_RESOLVING
    event_set: EventSet = EventSet.D10

    def __post_init__(self):
        if self.N < 2:
            raise InvalidParameterError(f"N must be at least 2, got {self.N}")
        if not 0 <= self.m <= self.N - 2:
            raise InvalidParameterError(f"m must lie in [0, N-2] = [0, {self.N - 2}], got {self.m}")
        if not 0 < self.eta <= 1:
            raise InvalidParameterError(f"eta must lie in (0, 1], got {self.eta}")
        if not -1e-12 <= self.theta <= math.pi / 2 + 1e-12:
            raise InvalidParameterError(f"theta must lie in [0, pi/2] radians, got {self.theta}")
        object.__setattr__(self, 'detector_kind', DetectorKind(self.detector_kind))
        object.__setattr__(self, 'event_set', EventSet(self.event_set))


@dataclass(frozen=True)
class TeleportReport:
    params: TeleportParams
    avg_fidelity: float
    avg_probability: float
    r_theta: float
    rprime_theta: float
    optimal: bool = False
    optimal_theta: Optional[float] = None

    def __post_init__(self):
        for name in ('avg_fidelity', 'avg_probability'):
            value = getattr(self, name)
            if not -1e-12 <= value <= 1 + 1e-12:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {value}")
