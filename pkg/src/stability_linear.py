"""
Stability of the linearized delayed amplifier (pump treated as fixed).

The characteristic function is the determinant of the 2x2 system for the
field and its conjugate; roots are found with the generic rectangle search
in root_finder.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from params_core import SystemParams
from root_finder import Region, find_roots
from shared.errors import ParameterDomainError
from shared.utils import sin_cos_exact

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CharacteristicRoot:
    lambda_re: float
    lambda_im: float
    residual: float
    multiplicity: int = 1

    @property
    def value(self) -> complex:
        return complex(self.lambda_re, self.lambda_im)


@dataclass(frozen=True)
class StabilityVerdict:
    """Root-based verdict plus the zeroth-order inequality for comparison."""

    stable: bool
    max_re: float
    heuristic_stable: bool
    dominant_frequency: float

    def __bool__(self) -> bool:
        return self.stable


def characteristic_function(p: SystemParams, lam):
    """(lam + kappa + k cos(phi) e^{-lam tau})^2 - |eps|^2 + (Delta + k sin(phi) e^{-lam tau})^2"""
    lam = np.asarray(lam, dtype=complex)
    s, c = sin_cos_exact(p.phi)
    k = p.k
    delayed = np.exp(-lam * p.tau)
    g = lam + p.kappa + k * c * delayed
    h = p.delta + k * s * delayed
    value = g ** 2 - p.eps_mag ** 2 + h ** 2
    return value if value.ndim else complex(value)


def characteristic_derivative(p: SystemParams, lam):
    lam = np.asarray(lam, dtype=complex)
    s, c = sin_cos_exact(p.phi)
    k = p.k
    delayed = np.exp(-lam * p.tau)
    g = lam + p.kappa + k * c * delayed
    h = p.delta + k * s * delayed
    value = 2 * g * (1 - k * c * p.tau * delayed) - 2 * h * k * s * p.tau * delayed
    return value if value.ndim else complex(value)


def _term_scale(p: SystemParams, lam: np.ndarray) -> np.ndarray:
    """Size of the individual terms of the characteristic function."""
    big = p.k * np.exp(-lam.real * p.tau)
    return (np.abs(lam) + p.kappa + big) ** 2 + p.eps_mag ** 2 + (abs(p.delta) + big) ** 2


def default_region(p: SystemParams) -> Region:
    """
    lambda_r in [-5 kappa, 2 kappa], |lambda_i| <= max(10 kappa, 6 pi / tau).

    The right edge is pushed out when |eps| + |Delta| + 2k could place a root
    beyond 2 kappa.
    """
    kappa = p.kappa
    span = 10 * kappa if p.tau == 0 else max(10 * kappa, 6 * np.pi / p.tau)
    right = max(2 * kappa, -kappa + 2 * p.k + p.eps_mag + abs(p.delta) + 0.5 * kappa)
    return Region(-5 * kappa, right, -span, span)


def _undelayed_roots(p: SystemParams) -> np.ndarray:
    s, c = sin_cos_exact(p.phi)
    disc = np.sqrt(complex(p.eps_mag ** 2 - (p.delta + p.k * s) ** 2))
    centre = -(p.kappa + p.k * c)
    return np.array([centre + disc, centre - disc])


def _no_feedback_roots(p: SystemParams) -> np.ndarray:
    disc = np.sqrt(complex(p.eps_mag ** 2 - p.delta ** 2))
    return np.array([-p.kappa + disc, -p.kappa - disc])


def rightmost_roots(p: SystemParams, region: Optional[Region] = None,
                    seed_step: Optional[float] = None) -> List[CharacteristicRoot]:
    """
    All characteristic roots in the region, sorted by descending real part.

    Args:
        p: System parameters
        region: Search rectangle (default_region when omitted)
        seed_step: Newton seed spacing, kappa/4 by default

    Raises:
        ContourHitsRoot, IncompleteRootSearch
    """
    if p.tau == 0.0 or p.k == 0.0:
        roots = _undelayed_roots(p)
        if region is not None:
            roots = roots[region.contains(roots)]
        values = np.abs(characteristic_function(p, roots)) if roots.size else roots.real
        out = [CharacteristicRoot(float(r.real), float(r.imag), float(v)) for r, v in zip(roots, values)]
        if len(out) == 2 and abs(roots[0] - roots[1]) < 1e-12 * p.kappa:
            out = [CharacteristicRoot(out[0].lambda_re, out[0].lambda_im, out[0].residual, 2)]
        return sorted(out, key=lambda r: (-r.lambda_re, -r.lambda_im))

    region = region or default_region(p)
    step = seed_step or p.kappa / 4
    search = find_roots(
        lambda z: characteristic_function(p, z),
        lambda z: characteristic_derivative(p, z),
        region,
        seed_step=step,
        extra_seeds=np.concatenate([_no_feedback_roots(p), _undelayed_roots(p)]),
        scale=lambda z: _term_scale(p, z),
        residual_tol=1e-12,
    )
    logger.debug(f"tau={p.tau:.6g}: {len(search.roots)} roots, winding {search.winding}")
    return [CharacteristicRoot(float(r.real), float(r.imag), float(res), m)
            for r, res, m in zip(search.roots, search.residuals, search.multiplicities)]


def max_real_part(p: SystemParams, region: Optional[Region] = None) -> float:
    roots = rightmost_roots(p, region)
    return roots[0].lambda_re if roots else float('-inf')


def stability_verdict(p: SystemParams, region: Optional[Region] = None) -> StabilityVerdict:
    """Sign of max lambda_r, with kappa + k cos(phi + nu tau) > |eps| at the rightmost frequency."""
    roots = rightmost_roots(p, region)
    if not roots:
        return StabilityVerdict(True, float('-inf'), True, 0.0)
    top = roots[0]
    nu = abs(top.lambda_im)
    heuristic = p.kappa + p.k * np.cos(p.phi + nu * p.tau) > p.eps_mag
    return StabilityVerdict(top.lambda_re < 0.0, top.lambda_re, bool(heuristic), nu)


def stability_boundary_phi0(p: SystemParams, region: Optional[Region] = None) -> StabilityVerdict:
    """Verdict for phi = 0 and zero detuning (truthy when stable)."""
    s, c = sin_cos_exact(p.phi)
    if s != 0.0 or c != 1.0 or p.delta != 0.0:
        raise ParameterDomainError("phi = 0 boundary needs phi = 0 and delta = 0")
    return stability_verdict(p, region)


def stability_boundary_phipi(p: SystemParams) -> bool:
    """kappa - k > |eps|, whatever the delay."""
    _, c = sin_cos_exact(p.phi)
    if c != -1.0 or p.delta != 0.0:
        raise ParameterDomainError("phi = pi boundary needs phi = pi and delta = 0")
    return bool(p.kappa - p.k > p.eps_mag)
