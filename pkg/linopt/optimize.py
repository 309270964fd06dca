"""
One-dimensional searches used for the splitter angle and the critical efficiencies.
"""
from __future__ import annotations

import logging
import math
from typing import Callable, NamedTuple

from scipy import optimize

from linopt.conf import get_config

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2  # 1 / phi
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2  # 1 / phi^2


class SearchResult(NamedTuple):
    argmax: float
    maximum: float
    iterations: int
    converged: bool


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float = None) -> SearchResult:
    """Golden-section search for the maximum of a unimodal f on [lo, hi].

    The end points are compared too, so a maximum sitting on the boundary is
    returned as the boundary itself.
    """
    tol = get_config().golden_tol if tol is None else tol
    a, b = min(lo, hi), max(lo, hi)
    h = b - a
    iterations = 0
    if h > tol:
        steps = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
        c = a + INV_PHI_SQUARE * h
        d = a + INV_PHI * h
        yc, yd = f(c), f(d)
        for iterations in range(1, steps):
            if yc > yd:
                b, d, yd = d, c, yc
                h = INV_PHI * h
                c = a + INV_PHI_SQUARE * h
                yc = f(c)
            else:
                a, c, yc = c, d, yd
                h = INV_PHI * h
                d = a + INV_PHI * h
                yd = f(d)
        a, b = (a, d) if yc > yd else (c, b)

    candidates = [((a + b) / 2, f((a + b) / 2)), (lo, f(lo)), (hi, f(hi))]
    argmax, maximum = max(candidates, key=lambda pair: pair[1])
    converged = abs(b - a) <= tol or h <= tol
    return SearchResult(argmax, maximum, iterations, converged)


def polish_maximum(f: Callable[[float], float], x: float, lo: float, hi: float,
                   width: float = 1e-5, step: float = 1e-6) -> float:
    """Refine an interior maximum as the root of the central-difference derivative.

    A comparison search cannot resolve a smooth maximum much finer than
    sqrt(machine epsilon); the derivative changes sign sharply there.
    """
    def slope(t: float) -> float:
        return (f(t + step) - f(t - step)) / (2 * step)

    left, right = max(lo, x - width), min(hi, x + width)
    if slope(left) > 0 > slope(right):
        return optimize.brentq(slope, left, right, xtol=1e-15)
    return x


def bisect_root(f: Callable[[float], float], lo: float, hi: float, xtol: float = None) -> float:
    """Root of an increasing f on [lo, hi]; lo if f(lo) >= 0, nan if f(hi) <= 0."""
    xtol = get_config().bisection_xtol if xtol is None else xtol
    f_lo, f_hi = f(lo), f(hi)
    if f_lo >= 0:
        return lo
    if f_hi <= 0:
        logger.warning(f"No sign change on [{lo}, {hi}]: f(lo)={f_lo:.6g}, f(hi)={f_hi:.6g}")
        return math.nan
    return optimize.bisect(f, lo, hi, xtol=xtol)
