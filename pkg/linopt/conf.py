"""
Typed access to ``settings.LINOPT``.

Every tolerance and numeric default the simulator uses is read from here,
so one settings override changes them everywhere.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from functools import lru_cache

from django.conf import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-12
    psd: float = 1e-10
    trace: float = 1e-12
    unitary: float = 1e-12
    normalization: float = 1e-12
    violation: float = 1e-12
    agreement: float = 1e-12


@dataclass(frozen=True)
class SimulatorConfig:
    total_cutoff: int = 2
    tolerances: Tolerances = field(default_factory=Tolerances)
    quadrature_nodes: int = 4
    phase_nodes: int = 4
    monte_carlo_samples: int = 10 ** 6
    golden_tol: float = 1e-10
    bisection_xtol: float = 1e-10
    schema_version: str = '1.0'
    default_seed: int = 20061


def _from_settings(raw: dict) -> SimulatorConfig:
    config = SimulatorConfig()
    tolerances = replace(config.tolerances, **raw.get('TOLERANCES', {}))
    scalars = {
        key.lower(): value
        for key, value in raw.items()
        if key != 'TOLERANCES'
    }
    return replace(config, tolerances=tolerances, **scalars)


@lru_cache(maxsize=None)
def get_config() -> SimulatorConfig:
    if not settings.configured:
        return SimulatorConfig()
    config = _from_settings(getattr(settings, 'LINOPT', {}))
    logger.debug(f"Loaded simulator configuration: {config}")
    return config


def get_tolerances() -> Tolerances:
    return get_config().tolerances


def reset_config(*, setting, **kwargs):
    if setting == 'LINOPT':
        get_config.cache_clear()
