"""
Characteristic (frequency, delay) pairs of perfect squeezing, their limiting
variances and the tunability bounds of the sideband frequency.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from cachetools import LRUCache, cached

from params_core import SystemParams
from shared.errors import ParameterDomainError
from shared.utils import sin_cos_exact
from spectrum_engine import spectrum_curve, squeezing_spectrum, squeezed_angle

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CriticalPoint:
    nu_c: float
    tau_c: float
    squeezed_floor: float
    valid: bool
    reason: str = ""


def _invalid(reason: str, nu_c: float = float('nan'), tau_c: float = float('nan'),
             floor: float = float('nan')) -> CriticalPoint:
    return CriticalPoint(nu_c, tau_c, floor, False, reason)


def effective_pump(p: SystemParams) -> float:
    """|eps_Delta| = sqrt(|eps|^2 - Delta^2)"""
    if abs(p.delta) > p.eps_mag:
        raise ParameterDomainError("|delta| must not exceed |eps|")
    return float(np.sqrt(p.eps_mag ** 2 - p.delta ** 2))


@cached(cache=LRUCache(maxsize=4096))
def characteristic_point(p: SystemParams) -> CriticalPoint:
    """
    Sideband frequency and delay at which m(nu) vanishes.

    Uses the loss-adjusted feedback strength, so the point moves with L.
    The phi = pi branch is computed but reported invalid: those points lie
    where the undelayed system is already unstable.
    """
    s, c = sin_cos_exact(p.phi)
    if s != 0.0:
        return _invalid("characteristic point needs sin(phi) = 0")
    if abs(p.delta) > p.eps_mag:
        return _invalid("|delta| exceeds |eps|")
    k = p.k
    if k <= 0.0:
        return _invalid("no feedback (k = 0)")

    eps_d = effective_pump(p)
    arg = c * (eps_d - p.kappa) / k
    nu_sq = k ** 2 - (p.kappa - eps_d) ** 2
    if abs(arg) > 1.0 or nu_sq <= 0.0:
        return _invalid(f"arccos argument {arg:.6g} outside (-1, 1)")

    nu_c = float(np.sqrt(nu_sq))
    tau_c = float(np.arccos(arg) / nu_c)
    floor = 0.25 * p.loss * p.kappa_c / p.eps_mag

    if c < 0.0:
        return _invalid("phi = pi: the point lies in an already unstable regime",
                        nu_c, tau_c, floor)
    return CriticalPoint(nu_c, tau_c, floor, True)


def squeezed_floor(p: SystemParams) -> float:
    """(1/4) L kappa_c / |eps| at the characteristic point."""
    point = characteristic_point(p)
    if not point.valid:
        raise ParameterDomainError(point.reason)
    return point.squeezed_floor


def antisqueezed_divergence_check(p: SystemParams, window: float = 0.05,
                                  points: int = 2001, threshold_db: float = 40.0) -> bool:
    """
    True if the theta' = theta spectrum exceeds threshold_db within
    |nu - nu_c| < window at the delay carried by p.
    """
    point = characteristic_point(p)
    if not point.valid:
        return False
    grid = np.linspace(point.nu_c - window, point.nu_c + window, points)
    curve = spectrum_curve(p, p.eps_phase, grid)
    return bool(np.any(curve.diverged | (curve.decibels > threshold_db)))


def feedback_strength_bounds(kappa: float, eps_mag: float) -> Tuple[float, float]:
    """|kappa - |eps|| <= k <= kappa"""
    if eps_mag < 0.0:
        raise ParameterDomainError("|eps| must be non-negative")
    return abs(kappa - eps_mag), kappa


def nu_c_range(kappa: float, eps_mag: float) -> Tuple[float, float]:
    """0 <= nu_c <= sqrt(|eps| (2 kappa - |eps|))"""
    if not 0.0 <= eps_mag <= kappa:
        raise ParameterDomainError("frequency range is stated for 0 <= |eps| <= kappa")
    return 0.0, float(np.sqrt(eps_mag * (2 * kappa - eps_mag)))


def pyragas_floor(p: SystemParams) -> float:
    """Squeezed variance on resonance for phi = pi (delay has no effect at nu = 0)."""
    _, c = sin_cos_exact(p.phi)
    if c != -1.0:
        raise ParameterDomainError("Pyragas-type feedback needs phi = pi")
    if p.kappa - p.k <= p.eps_mag:
        raise ParameterDomainError("outside the stable range kappa - k > |eps|")
    return squeezing_spectrum(p, squeezed_angle(p), 0.0).variance
