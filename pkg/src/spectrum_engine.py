"""
Output quadrature squeezing spectrum and the closed-form resonance results.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from params_core import SystemParams, loop_phase, response_at
from shared.errors import ParameterDomainError
from shared.utils import VACUUM_VARIANCE, sin_cos_exact, to_decibels

logger = logging.getLogger(__name__)

# |m|^2 / kappa^4 below this is treated as the singular point itself
DIVERGENCE_GUARD = 1e-18
# pump strengths within this relative distance of a threshold count as at threshold
THRESHOLD_RTOL = 1e-12


@dataclass(frozen=True)
class SpectrumPoint:
    nu: float
    theta_prime: float
    variance: float
    decibels: float
    diverged: bool


@dataclass(frozen=True)
class SpectrumCurve:
    """Spectrum on an ordered frequency grid at one quadrature angle."""

    theta_prime: float
    nu: np.ndarray
    variance: np.ndarray
    decibels: np.ndarray
    diverged: np.ndarray

    def __len__(self) -> int:
        return len(self.nu)

    def points(self) -> List[SpectrumPoint]:
        return [
            SpectrumPoint(float(n), self.theta_prime, float(v), float(d), bool(flag))
            for n, v, d, flag in zip(self.nu, self.variance, self.decibels, self.diverged)
        ]

    def minimum(self) -> SpectrumPoint:
        """Lowest non-diverged point."""
        masked = np.where(self.diverged, np.inf, self.variance)
        i = int(np.argmin(masked))
        return self.points()[i]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'nu': self.nu,
            'variance': self.variance,
            'decibels': self.decibels,
            'diverged': self.diverged,
        })


def _variance(p: SystemParams, theta_prime: float, nu) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quadrature variance from the input-output solution.

    The output is a linear combination of the two vacuum inputs (the right-hand
    input c_in and the loop-loss noise xi) at +nu and their conjugates at -nu;
    for vacuum inputs the spectrum is the summed squared modulus of the
    annihilation-operator coefficients of the measured quadrature.
    """
    nu = np.asarray(nu, dtype=float)
    kb, kc, loss = p.kappa_b, p.kappa_c, p.loss
    eps = p.eps
    kappa = p.kappa

    here = response_at(p, nu)
    mirror = response_at(p, -nu)
    loop = loop_phase(p, nu)
    loop_m = loop_phase(p, -nu)

    # f_b = sqrt(2 kb) h_b and f_c = sqrt(2 kc) g_c without dividing by kb, kc
    h_b = np.sqrt(2 * kb) + np.sqrt(2 * kc * (1 - loss)) * loop
    h_b_m = np.sqrt(2 * kb) + np.sqrt(2 * kc * (1 - loss)) * loop_m
    g_c = np.sqrt(2 * kc) + np.sqrt(2 * kb * (1 - loss)) * loop
    g_xi = np.sqrt(2 * kb * loss)

    m = np.asarray(here.m)
    m_m = np.asarray(mirror.m)
    diverged = np.minimum(np.abs(m) ** 2, np.abs(m_m) ** 2) / kappa ** 4 < DIVERGENCE_GUARD

    s_phi, _ = sin_cos_exact(p.phi)
    if s_phi == 0.0 and p.delta == 0.0:
        variance = _principal_variance(p, theta_prime, np.asarray(here.d_plus), h_b,
                                       ((np.sqrt(1 - loss) * loop, g_c), (np.sqrt(loss), g_xi)))
        return np.where(diverged, np.inf, variance), diverged

    with np.errstate(divide='ignore', invalid='ignore'):
        u_c = -h_b * here.d_plus * g_c / m + np.sqrt(1 - loss) * loop
        u_xi = -h_b * here.d_plus * g_xi / m + np.sqrt(loss)
        # conj(v_j(-nu)), the creation-operator coefficients seen from the mirrored sideband
        v_c = -np.conj(h_b_m) * np.conj(eps) * g_c / np.conj(m_m)
        v_xi = -np.conj(h_b_m) * np.conj(eps) * g_xi / np.conj(m_m)

        rot = np.exp(-0.5j * theta_prime)
        a_c = 0.5 * (rot * u_c + np.conj(rot) * v_c)
        a_xi = 0.5 * (rot * u_xi + np.conj(rot) * v_xi)
        variance = np.abs(a_c) ** 2 + np.abs(a_xi) ** 2

    variance = np.where(diverged, np.inf, variance)
    return variance, diverged


def _principal_variance(p: SystemParams, theta_prime: float, d, h_b, channels) -> np.ndarray:
    """
    Variance when sin(phi) = 0 and Delta = 0.

    Then d_+ = d_- = d and m = (d - |eps|)(d + |eps|), so each input's
    coefficient splits into an antisqueezed part over d - |eps| and a squeezed
    part over d + |eps|. Evaluating them separately keeps the squeezed
    quadrature accurate close to threshold.
    """
    s, c = sin_cos_exact(0.5 * (theta_prime - p.eps_phase))
    e = p.eps_mag
    total = np.zeros(np.shape(d))
    with np.errstate(divide='ignore', invalid='ignore'):
        for direct, g in channels:
            anti = direct - h_b * g / (d - e)
            squeezed = direct - h_b * g / (d + e)
            total = total + np.abs(c * anti - 1j * s * squeezed) ** 2
    return 0.25 * total


def squeezing_spectrum(p: SystemParams, theta_prime: float, nu: float) -> SpectrumPoint:
    """Quadrature variance of the left output at one sideband frequency."""
    variance, diverged = _variance(p, theta_prime, nu)
    variance = float(variance)
    return SpectrumPoint(float(nu), float(theta_prime), variance,
                         float(to_decibels(variance)), bool(diverged))


def spectrum_curve(p: SystemParams, theta_prime: float, nu_grid: Sequence[float]) -> SpectrumCurve:
    """
    Spectrum evaluated pointwise on a strictly increasing grid.

    Args:
        p: System parameters
        theta_prime: Homodyne quadrature angle
        nu_grid: Strictly increasing frequencies

    Returns:
        SpectrumCurve in grid order
    """
    nu = np.asarray(nu_grid, dtype=float)
    if nu.size == 0:
        raise ParameterDomainError("frequency grid is empty")
    if nu.ndim != 1 or np.any(np.diff(nu) <= 0):
        raise ParameterDomainError("frequency grid must be one-dimensional and strictly increasing")
    variance, diverged = _variance(p, theta_prime, nu)
    n_div = int(np.count_nonzero(diverged))
    if n_div:
        logger.debug(f"{n_div} grid points flagged as diverged")
    return SpectrumCurve(float(theta_prime), nu, variance, to_decibels(variance), diverged)


def squeezed_angle(p: SystemParams) -> float:
    """theta + pi, the squeezed quadrature of the figure captions."""
    return p.eps_phase + np.pi


def closed_form_variance(p: SystemParams, theta_prime: float, nu):
    """
    Closed expression for the spectrum, evaluated literally.

    Loss enters only through k here; squeezing_spectrum is the reference for L > 0.
    """
    if p.kappa_b <= 0.0:
        raise ParameterDomainError("closed form needs kappa_b > 0")
    nu = np.asarray(nu, dtype=float)
    here = response_at(p, nu)
    mirror = response_at(p, -nu)
    e = p.eps_mag
    cross = np.real(np.exp(1j * (p.eps_phase - theta_prime))
                    * (here.d_plus * mirror.d_plus + e ** 2) * here.f_b * mirror.f_b)
    direct = e * (np.real(here.d_minus) * np.abs(mirror.f_b) ** 2
                  + np.real(here.d_plus) * np.abs(here.f_b) ** 2)
    with np.errstate(divide='ignore', invalid='ignore'):
        result = e / (4 * p.kappa_b * np.abs(here.m) ** 2) * (cross + direct) + VACUUM_VARIANCE
    return result if np.ndim(result) else float(result)


def special_case_variances(p: SystemParams, nu) -> Tuple[np.ndarray, np.ndarray]:
    """
    (antisqueezed, squeezed) variances for sin(phi) = 0 and zero detuning.

    The loss terms are those of the symmetric cavity; for L = 0 the pair holds
    for any mirror ratio.
    """
    s, _ = sin_cos_exact(p.phi)
    if s != 0.0 or p.delta != 0.0:
        raise ParameterDomainError("special-case variances need sin(phi) = 0 and delta = 0")
    if p.loss > 0.0 and not np.isclose(p.kappa_b, p.kappa_c):
        raise ParameterDomainError("lossy special case is stated for a symmetric cavity")
    d = np.asarray(response_at(p, nu).d_plus)
    e = p.eps_mag
    loss_term = 4 * e * p.kappa_c * p.loss
    with np.errstate(divide='ignore', invalid='ignore'):
        anti = 0.25 * ((d.real + e) ** 2 + d.imag ** 2 - loss_term) / np.abs(d - e) ** 2
        squeezed = 0.25 * ((d.real - e) ** 2 + d.imag ** 2 + loss_term) / np.abs(d + e) ** 2
    return anti, squeezed


def resonance_variance_no_feedback(kappa: float, eps_mag: float) -> float:
    """Squeezed-quadrature variance on resonance of a one-sided cavity."""
    if eps_mag >= kappa:
        raise ParameterDomainError(f"|eps|={eps_mag} is at or above threshold kappa={kappa}")
    return 0.25 * (kappa - eps_mag) ** 2 / (kappa + eps_mag) ** 2


def effective_decay_beamsplitter(kappa: float, r: float) -> float:
    """kappa(r) = (1 - r) kappa / (1 + r)"""
    return (1.0 - r) * kappa / (1.0 + r)


def resonance_variance_beamsplitter(kappa: float, eps_mag: float, r: float) -> float:
    """On-resonance variance of the beamsplitter-feedback scheme (ideal one-sided cavity)."""
    if not 0.0 <= r < 1.0:
        raise ParameterDomainError(f"reflectivity must lie in [0, 1), got {r}")
    kappa_r = effective_decay_beamsplitter(kappa, r)
    if eps_mag >= kappa_r * (1.0 - THRESHOLD_RTOL):
        raise ParameterDomainError(f"|eps|={eps_mag} is at or above the threshold kappa(r)={kappa_r}")
    return 0.25 * ((kappa_r - eps_mag) / (kappa_r + eps_mag)) ** 2


def resonance_variance_feedback(p: SystemParams) -> float:
    """
    On-resonance squeezed variance with instantaneous lossless feedback.

    Detuning enters through |eps_Delta| = sqrt(|eps|^2 - Delta^2).
    """
    s, c = sin_cos_exact(p.phi)
    if s != 0.0:
        raise ParameterDomainError("resonance formula needs sin(phi) = 0")
    if p.loss != 0.0:
        raise ParameterDomainError("resonance formula needs a lossless loop")
    if p.tau != 0.0:
        raise ParameterDomainError("resonance formula needs tau = 0")
    if abs(p.delta) > p.eps_mag:
        raise ParameterDomainError("resonance formula needs |delta| <= |eps|")
    eps_delta = np.sqrt(p.eps_mag ** 2 - p.delta ** 2)
    decay = p.kappa + p.k * c
    if eps_delta > decay:
        raise ParameterDomainError(f"|eps_delta|={eps_delta} exceeds the threshold {decay}")
    return float(0.25 * ((decay - eps_delta) / (decay + eps_delta)) ** 2)


def optimal_quadrature_angle(p: SystemParams) -> float:
    """theta' = theta + pi - arcsin(Delta / |eps|)"""
    if abs(p.delta) > p.eps_mag:
        raise ParameterDomainError("optimal angle needs |delta| <= |eps|")
    shift = 0.0 if p.delta == 0.0 else float(np.arcsin(p.delta / p.eps_mag))
    return p.eps_phase + np.pi - shift


def quadrature_scan(p: SystemParams, nu: float, theta_grid: Sequence[float]) -> pd.DataFrame:
    """Spectrum at a fixed frequency as a function of the quadrature angle."""
    thetas = np.asarray(theta_grid, dtype=float)
    values = _quadrature_kernel(p, nu)(thetas)
    return pd.DataFrame({
        'theta_d': thetas - p.eps_phase,
        'variance': values,
        'decibels': to_decibels(values),
    })


def best_quadrature(p: SystemParams, nu: float, step: float = 1e-3,
                    lower: float = 0.0, upper: float = 2 * np.pi) -> Tuple[float, float]:
    """
    Grid argmin over theta' (relative grid, absolute angle returned).

    Returns:
        (theta_prime, variance) at the lowest grid value
    """
    thetas = p.eps_phase + np.arange(lower, upper, step)
    kernel = _quadrature_kernel(p, nu)
    values = kernel(thetas)
    i = int(np.argmin(values))
    return float(thetas[i]), float(values[i])


def _quadrature_kernel(p: SystemParams, nu: float):
    """Variance as a cheap function of theta' at fixed nu."""
    # V(theta') = A + Re(B exp(-i theta')) for fixed nu
    v0 = float(_variance(p, 0.0, nu)[0])
    v1 = float(_variance(p, np.pi / 2, nu)[0])
    v2 = float(_variance(p, np.pi, nu)[0])
    a = 0.5 * (v0 + v2)
    b_re = 0.5 * (v0 - v2)
    b_im = v1 - a
    return lambda theta: a + b_re * np.cos(theta) + b_im * np.sin(theta)


def no_feedback_params(kappa: float, eps_mag: float, one_sided: bool = True,
                       eps_phase: float = 0.0) -> SystemParams:
    """
    Reference amplifier without feedback.

    The symmetric cavity is expressed as a fully lossy loop (L = 1), which
    leaves the left input in vacuum and k = 0.
    """
    if one_sided:
        return SystemParams(kappa_b=kappa, kappa_c=0.0, eps_mag=eps_mag, eps_phase=eps_phase)
    return SystemParams(kappa_b=kappa / 2, kappa_c=kappa / 2, loss=1.0,
                        eps_mag=eps_mag, eps_phase=eps_phase)
