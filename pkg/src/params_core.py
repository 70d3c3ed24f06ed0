"""
Physical parameters of the fed-back parametric amplifier and the complex
response functions every other module is built on.

All rates are in units of the total field decay rate unless a caller
chooses otherwise; nothing here assumes kappa == 1.
"""

import logging
from dataclasses import dataclass
from typing import Any, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


class SystemParams(BaseModel):
    """Rates, phases, loss and delay of the cavity plus feedback loop."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    kappa_b: float = Field(0.5, ge=0.0, description="left mirror decay rate")
    kappa_c: float = Field(0.5, ge=0.0, description="right mirror decay rate")
    loss: float = Field(0.0, ge=0.0, le=1.0, description="feedback power loss L")
    phi: float = Field(0.0, description="feedback-loop phase shift")
    tau: float = Field(0.0, ge=0.0, description="feedback delay")
    delta: float = Field(0.0, description="detuning omega_a - omega_p/2")
    eps_mag: float = Field(0.0, ge=0.0, description="pump strength |eps|")
    eps_phase: float = Field(0.0, description="pump phase theta")

    @model_validator(mode='after')
    def _check_decay(self) -> 'SystemParams':
        if self.kappa_b + self.kappa_c <= 0.0:
            raise ValueError("kappa_b + kappa_c must be positive")
        for name in ('phi', 'tau', 'delta', 'eps_mag', 'eps_phase'):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self

    @property
    def kappa(self) -> float:
        return total_kappa(self)

    @property
    def k(self) -> float:
        return feedback_strength(self)

    @property
    def eps(self) -> complex:
        return self.eps_mag * np.exp(1j * self.eps_phase)

    def replace(self, **changes: Any) -> 'SystemParams':
        """Validated copy with some fields changed."""
        return SystemParams(**{**self.model_dump(), **changes})

    @classmethod
    def from_feedback_strength(cls, k: float, kappa: float = 1.0, loss: float = 0.0,
                               **kwargs: Any) -> 'SystemParams':
        """
        Cavity with kappa_b >= kappa_c whose loop gives feedback strength k.

        Solves kappa_b * kappa_c = k^2 / (4 (1 - L)) with kappa_b + kappa_c = kappa.
        """
        if k < 0.0:
            raise ValueError("feedback strength must be non-negative")
        if loss >= 1.0:
            if k > 0.0:
                raise ValueError("a fully lossy loop cannot carry feedback")
            return cls(kappa_b=kappa, kappa_c=0.0, loss=loss, **kwargs)
        disc = kappa ** 2 - k ** 2 / (1.0 - loss)
        if disc < -1e-14 * kappa ** 2:
            raise ValueError(f"k={k} exceeds the maximum kappa*sqrt(1-L) for this loss")
        root = np.sqrt(max(disc, 0.0))
        return cls(kappa_b=0.5 * (kappa + root), kappa_c=0.5 * (kappa - root),
                   loss=loss, **kwargs)


@dataclass(frozen=True)
class ResponseValues:
    """d_+, d_-, m, f_b, f_c at sideband frequency nu (scalars or arrays)."""

    nu: ArrayLike
    d_plus: ArrayLike
    d_minus: ArrayLike
    m: ArrayLike
    f_b: ArrayLike
    f_c: ArrayLike
    eps_mag: float

    def m_residual(self) -> ArrayLike:
        """Relative mismatch between stored m and d_+ d_- - |eps|^2."""
        recomputed = self.d_plus * self.d_minus - self.eps_mag ** 2
        scale = np.abs(self.d_plus * self.d_minus) + self.eps_mag ** 2
        return np.abs(recomputed - self.m) / np.where(scale > 0, scale, 1.0)


def total_kappa(p: SystemParams) -> float:
    """kappa = kappa_b + kappa_c"""
    return p.kappa_b + p.kappa_c


def feedback_strength(p: SystemParams) -> float:
    """k = 2 sqrt(kappa_b kappa_c (1 - L))"""
    return 2.0 * np.sqrt(p.kappa_b * p.kappa_c * (1.0 - p.loss))


def loop_phase(p: SystemParams, nu: ArrayLike) -> ArrayLike:
    """exp(i (phi + nu tau)): phase picked up by a sideband going round the loop."""
    return np.exp(1j * (p.phi + np.asarray(nu, dtype=float) * p.tau))


def response_at(p: SystemParams, nu: ArrayLike) -> ResponseValues:
    """
    Complex response functions at sideband frequency nu.

    Args:
        p: System parameters
        nu: Frequency or array of frequencies

    Returns:
        ResponseValues with d_+(nu), d_-(nu), m(nu), f_b(nu), f_c(nu)
    """
    nu = np.asarray(nu, dtype=float)
    kappa = p.kappa
    k = p.k
    d_plus = kappa - 1j * (nu + p.delta) + k * np.exp(-1j * (p.phi - nu * p.tau))
    d_minus = kappa - 1j * (nu - p.delta) + k * np.exp(1j * (p.phi + nu * p.tau))
    m = d_plus * d_minus - p.eps_mag ** 2
    loop = k * loop_phase(p, nu)
    f_b = 2.0 * p.kappa_b + loop
    f_c = 2.0 * p.kappa_c + loop

    if nu.ndim == 0:
        return ResponseValues(float(nu), complex(d_plus), complex(d_minus), complex(m),
                              complex(f_b), complex(f_c), p.eps_mag)
    return ResponseValues(nu, d_plus, d_minus, m, f_b, f_c, p.eps_mag)
