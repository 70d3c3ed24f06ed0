"""
Classical amplitude equations with pump depletion and delayed feedback.

    d eps/dt   = -(kappa + i Delta) eps + kappa eps* eps_p - e^{i phi} k eps(t - tau)
    d eps_p/dt = -kappa_p (eps_p + eps^2 - x)

States are carried as four real components [Re eps, Im eps, Re eps_p, Im eps_p].
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numba import jit
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.signal import find_peaks

from params_core import SystemParams
from root_finder import Region, find_roots, newton_polish
from shared.errors import IntegrationError, ParameterDomainError, UndecidableDynamics
from shared.utils import sin_cos_exact

logger = logging.getLogger(__name__)


class ClassicalParams(BaseModel):
    """Cavity, loop and pump settings of the classical model (x is the drive)."""

    model_config = ConfigDict(frozen=True, extra='forbid')

    kappa_b: float = Field(0.5, ge=0.0)
    kappa_c: float = Field(0.5, ge=0.0)
    loss: float = Field(0.0, ge=0.0, le=1.0)
    phi: float = 0.0
    tau: float = Field(0.0, ge=0.0)
    delta: float = 0.0
    kappa_p: float = Field(1.0, gt=0.0, description="pump decay rate, defaults to kappa")
    x: float = Field(0.0, ge=0.0, description="drive in units of kappa_p")

    @model_validator(mode='before')
    @classmethod
    def _default_pump_decay(cls, data: Any) -> Any:
        if isinstance(data, dict) and data.get('kappa_p') is None:
            data = dict(data)
            data['kappa_p'] = data.get('kappa_b', 0.5) + data.get('kappa_c', 0.5)
        return data

    @model_validator(mode='after')
    def _check_decay(self) -> 'ClassicalParams':
        if self.kappa_b + self.kappa_c <= 0.0:
            raise ValueError("kappa_b + kappa_c must be positive")
        return self

    @property
    def kappa(self) -> float:
        return self.kappa_b + self.kappa_c

    @property
    def k(self) -> float:
        return 2.0 * np.sqrt(self.kappa_b * self.kappa_c * (1.0 - self.loss))

    def replace(self, **changes: Any) -> 'ClassicalParams':
        return ClassicalParams(**{**self.model_dump(), **changes})

    def undepleted(self) -> SystemParams:
        """Linear-model counterpart with |eps| = kappa x."""
        return SystemParams(kappa_b=self.kappa_b, kappa_c=self.kappa_c, loss=self.loss,
                            phi=self.phi, tau=self.tau, delta=self.delta,
                            eps_mag=self.kappa * self.x)

    @classmethod
    def from_system(cls, p: SystemParams, x: float, kappa_p: Optional[float] = None) -> 'ClassicalParams':
        return cls(kappa_b=p.kappa_b, kappa_c=p.kappa_c, loss=p.loss, phi=p.phi,
                   tau=p.tau, delta=p.delta, kappa_p=kappa_p, x=x)


class Branch(str, Enum):
    TRIVIAL = 'trivial'
    UPPER = 'upper'
    LOWER = 'lower'


class Dynamics(str, Enum):
    CONVERGED = 'converged'
    OSCILLATING = 'oscillating'
    GROWING = 'growing'


@dataclass(frozen=True)
class SteadyState:
    eps: complex
    pump: complex
    branch: Branch
    x: float
    stable: Optional[bool] = None


@dataclass(frozen=True)
class HopfPoint:
    x: float
    tau: float
    omega_hopf: float
    residual: float


@dataclass(frozen=True)
class LongTimeBehaviour:
    verdict: Dynamics
    amplitude: float
    growth_rate: float
    period: Optional[float] = None


def _as_complex_pair(state: np.ndarray) -> Tuple[complex, complex]:
    return complex(state[0], state[1]), complex(state[2], state[3])


def _as_real_state(eps: complex, pump: complex) -> np.ndarray:
    return np.array([eps.real, eps.imag, pump.real, pump.imag], dtype=np.float64)


# --- integration kernel -----------------------------------------------------

@jit(nopython=True)
def _rhs(y, yd, kappa, delta, kappa_p, x, fr, fi):
    er, ei, pr, pim = y[0], y[1], y[2], y[3]
    dr, di = yd[0], yd[1]
    out = np.empty(4)
    out[0] = -kappa * er + delta * ei + kappa * (er * pr + ei * pim) - (fr * dr - fi * di)
    out[1] = -kappa * ei - delta * er + kappa * (er * pim - ei * pr) - (fr * di + fi * dr)
    out[2] = -kappa_p * (pr + er * er - ei * ei - x)
    out[3] = -kappa_p * (pim + 2.0 * er * ei)
    return out


@jit(nopython=True)
def _hermite(y0, f0, y1, f1, theta, h):
    t2 = theta * theta
    t3 = t2 * theta
    return ((2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + theta) * h * f0
            + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * h * f1)


@jit(nopython=True)
def _delayed(ys, fs, j, s, h, y0):
    # constant history before t = 0
    if s <= 0.0:
        return y0.copy()
    q = s / h
    node = np.floor(q + 0.5)
    if abs(q - node) < 1e-9:
        i = int(node)
        if i > j:
            i = j
        return ys[i].copy()
    i = int(np.floor(q))
    if i >= j:
        return ys[j].copy()
    return _hermite(ys[i], fs[i], ys[i + 1], fs[i + 1], q - i, h)


@jit(nopython=True)
def _rk4_kernel(y0, n_steps, h, h_last, tau, kappa, delta, kappa_p, x, fr, fi):
    # n_steps uniform steps of h, then one step of h_last when h_last > 0
    n_total = n_steps + 1 if h_last > 0.0 else n_steps
    ys = np.zeros((n_total + 1, 4))
    fs = np.zeros((n_total + 1, 4))
    ys[0] = y0
    for j in range(n_total):
        t = j * h
        dt = h if j < n_steps else h_last
        y = ys[j]
        d = _delayed(ys, fs, j, t - tau, h, y0) if tau > 0.0 else y
        k1 = _rhs(y, d, kappa, delta, kappa_p, x, fr, fi)
        fs[j] = k1
        y2 = y + 0.5 * dt * k1
        d = _delayed(ys, fs, j, t + 0.5 * dt - tau, h, y0) if tau > 0.0 else y2
        k2 = _rhs(y2, d, kappa, delta, kappa_p, x, fr, fi)
        y3 = y + 0.5 * dt * k2
        d = _delayed(ys, fs, j, t + 0.5 * dt - tau, h, y0) if tau > 0.0 else y3
        k3 = _rhs(y3, d, kappa, delta, kappa_p, x, fr, fi)
        y4 = y + dt * k3
        d = _delayed(ys, fs, j, t + dt - tau, h, y0) if tau > 0.0 else y4
        k4 = _rhs(y4, d, kappa, delta, kappa_p, x, fr, fi)
        y_next = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y_next)):
            return ys, fs, j + 1
        ys[j + 1] = y_next
    t = n_steps * h + h_last
    d = _delayed(ys, fs, n_total, t - tau, h, y0) if tau > 0.0 else ys[n_total]
    fs[n_total] = _rhs(ys[n_total], d, kappa, delta, kappa_p, x, fr, fi)
    return ys, fs, -1


def dde_rhs(state, delayed, p: ClassicalParams) -> np.ndarray:
    """Right-hand side for real four-component state and delayed state."""
    s, c = sin_cos_exact(p.phi)
    return _rhs(np.asarray(state, dtype=np.float64), np.asarray(delayed, dtype=np.float64),
                p.kappa, p.delta, p.kappa_p, p.x, p.k * c, p.k * s)


@dataclass
class ClassicalTrajectory:
    """Fixed-step solution (last step possibly shorter) with derivatives for dense output."""

    t: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    step: float
    tau: float

    @property
    def eps(self) -> np.ndarray:
        return self.states[:, 0] + 1j * self.states[:, 1]

    @property
    def pump(self) -> np.ndarray:
        return self.states[:, 2] + 1j * self.states[:, 3]

    def evaluate(self, when) -> np.ndarray:
        """Real states at arbitrary times; the initial state before t = 0."""
        when = np.atleast_1d(np.asarray(when, dtype=float))
        out = np.empty((when.size, 4))
        last = len(self.t) - 1
        for n, tq in enumerate(when):
            if tq <= 0.0:
                out[n] = self.states[0]
                continue
            i = min(int(np.searchsorted(self.t, tq, side='right')) - 1, last)
            if i == last or tq == self.t[i]:
                out[n] = self.states[i]
                continue
            # the final interval may be shorter than the step
            h = self.t[i + 1] - self.t[i]
            out[n] = _hermite(self.states[i], self.derivatives[i],
                              self.states[i + 1], self.derivatives[i + 1], (tq - self.t[i]) / h, h)
        return out

    def delayed(self, when) -> np.ndarray:
        return self.evaluate(np.asarray(when, dtype=float) - self.tau)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            't': self.t,
            'eps_re': self.states[:, 0],
            'eps_im': self.states[:, 1],
            'pump_re': self.states[:, 2],
            'pump_im': self.states[:, 3],
            'eps_abs': np.abs(self.eps),
        })


def default_step(p: ClassicalParams) -> float:
    """min(tau/40, 0.01/kappa), shrunk so that it divides tau."""
    base = 0.01 / p.kappa
    if p.tau == 0.0:
        return base
    per_delay = int(np.ceil(p.tau / min(p.tau / 40.0, base)))
    return p.tau / per_delay


def integrate(p: ClassicalParams, initial: Tuple[complex, complex] = (0.5, 0.0),
              t_end: float = 200.0, step: Optional[float] = None) -> ClassicalTrajectory:
    """
    Fourth-order Runge-Kutta solution with constant history on [-tau, 0].

    Args:
        p: Classical parameters
        initial: (eps(0), eps_p(0)), also the history
        t_end: Final time
        step: Fixed step, default_step(p) when omitted

    Raises:
        IntegrationError: step larger than tau or a non-finite state
    """
    h = default_step(p) if step is None else float(step)
    if h <= 0.0:
        raise IntegrationError("step must be positive")
    if p.tau > 0.0 and h > p.tau * (1 + 1e-12):
        raise IntegrationError(f"step {h} exceeds the delay {p.tau}")
    if t_end <= 0.0:
        raise IntegrationError("t_end must be positive")

    n_steps = int(np.floor(t_end / h + 1e-9))
    h_last = t_end - n_steps * h
    if h_last <= 1e-9 * h:
        h_last = 0.0
    y0 = _as_real_state(complex(initial[0]), complex(initial[1]))
    s, c = sin_cos_exact(p.phi)
    logger.debug(f"Integrating {n_steps} steps of {h:.6g} (tau={p.tau:.6g}, x={p.x:.6g})")
    ys, fs, failed = _rk4_kernel(y0, n_steps, h, h_last, p.tau, p.kappa, p.delta, p.kappa_p, p.x,
                                 p.k * c, p.k * s)
    if failed >= 0:
        raise IntegrationError(f"non-finite state at t={failed * h:.6g} (x={p.x}, tau={p.tau})")
    t = h * np.arange(len(ys), dtype=float)
    t[-1] = t_end
    return ClassicalTrajectory(t, ys, fs, h, p.tau)


# --- steady states ----------------------------------------------------------

def _loop_terms(p: ClassicalParams) -> Tuple[float, float]:
    """a = 1 + (k/kappa) cos(phi), b = (k/kappa) sin(phi) + Delta/kappa"""
    s, c = sin_cos_exact(p.phi)
    ratio = p.k / p.kappa
    return 1.0 + ratio * c, ratio * s + p.delta / p.kappa


def oscillation_threshold(p: ClassicalParams) -> float:
    """x_th = |1 + (k/kappa) e^{i phi}| (detuning adds Delta/kappa to the imaginary part)."""
    a, b = _loop_terms(p)
    return float(np.hypot(a, b))


def steady_states(p: ClassicalParams, assess_stability: bool = False) -> List[SteadyState]:
    """
    Trivial state, plus the two pitchfork branches above threshold.

    Above threshold |eps|^2 = zeta = xi - a with xi = sqrt(x^2 - b^2), and
    eps = +-sqrt(zeta/2) [sqrt(1 + xi/x) - i sgn(b) sqrt(1 - xi/x)].
    """
    states = [SteadyState(0j, complex(p.x), Branch.TRIVIAL, p.x)]
    a, b = _loop_terms(p)
    if p.x > oscillation_threshold(p):
        xi = np.sqrt(p.x ** 2 - b ** 2)
        zeta = xi - a
        ratio = xi / p.x
        eps = np.sqrt(zeta / 2.0) * complex(np.sqrt(1.0 + ratio), -np.sign(b) * np.sqrt(max(1.0 - ratio, 0.0)))
        for sign, branch in ((1.0, Branch.UPPER), (-1.0, Branch.LOWER)):
            value = sign * eps
            states.append(SteadyState(value, complex(p.x - value ** 2), branch, p.x))
    if assess_stability:
        states = [SteadyState(s.eps, s.pump, s.branch, s.x, linearize_at(p, s).max_real_part() < 0.0)
                  for s in states]
    return states


def steady_state_residual(p: ClassicalParams, ss: SteadyState) -> float:
    y = _as_real_state(ss.eps, ss.pump)
    return float(np.max(np.abs(dde_rhs(y, y, p))))


def steady_state_diagram(p: ClassicalParams, x_grid: Sequence[float],
                         assess_stability: bool = True) -> pd.DataFrame:
    """Branch table over the drive, one row per (x, branch)."""
    rows = []
    for x in x_grid:
        for ss in steady_states(p.replace(x=float(x)), assess_stability):
            rows.append({
                'x': float(x),
                'branch': ss.branch.value,
                'eps_re': ss.eps.real,
                'eps_im': ss.eps.imag,
                'eps_abs': abs(ss.eps),
                'pump_re': ss.pump.real,
                'pump_im': ss.pump.imag,
                'stable': ss.stable,
            })
    return pd.DataFrame(rows)


# --- linearization ----------------------------------------------------------

def _real_block(a: complex, b: complex = 0j) -> np.ndarray:
    """Matrix of z -> a z + b conj(z) acting on (Re z, Im z)."""
    return np.array([[a.real + b.real, -a.imag + b.imag],
                     [a.imag + b.imag, a.real - b.real]])


@dataclass
class DelayedLinearization:
    """d y/dt = A y(t) + B y(t - tau)"""

    A: np.ndarray
    B: np.ndarray
    tau: float
    kappa: float

    def characteristic(self, lam):
        """det(lam I - A - B e^{-lam tau})"""
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        eye = np.eye(self.A.shape[0])
        delayed = np.exp(-lam * self.tau)[:, None, None]
        mats = lam[:, None, None] * eye - self.A - delayed * self.B
        return np.linalg.det(mats)

    def derivative(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        h = 1e-6 * (1.0 + np.abs(lam))
        return (self.characteristic(lam + h) - self.characteristic(lam - h)) / (2 * h)

    def scale(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        grow = np.exp(-lam.real * self.tau)[:, None]
        rows = np.abs(lam)[:, None] + np.abs(self.A).sum(axis=1) + grow * np.abs(self.B).sum(axis=1)
        return np.prod(rows, axis=1)

    def region(self) -> Region:
        span = 10 * self.kappa if self.tau == 0 else max(10 * self.kappa, 6 * np.pi / self.tau)
        right = max(2 * self.kappa, np.abs(self.A).sum(axis=1).max() + np.abs(self.B).sum(axis=1).max())
        return Region(-5 * self.kappa, right, -span, span)

    def roots(self, region: Optional[Region] = None) -> np.ndarray:
        """Characteristic roots sorted by descending real part."""
        if self.tau == 0.0:
            values = np.linalg.eigvals(self.A + self.B)
            return values[np.lexsort((-values.imag, -values.real))]
        search = find_roots(self.characteristic, self.derivative, region or self.region(),
                            seed_step=self.kappa / 4, scale=self.scale, residual_tol=1e-11)
        return search.roots

    def max_real_part(self, region: Optional[Region] = None) -> float:
        roots = self.roots(region)
        return float(roots[0].real) if roots.size else float('-inf')

    def track(self, guesses: np.ndarray) -> np.ndarray:
        """Newton-refine known roots after a small parameter change."""
        if self.tau == 0.0:
            return self.roots()
        points, _ = newton_polish(self.characteristic, self.derivative, guesses, self.region())
        ok = np.abs(self.characteristic(points)) <= 1e-9 * np.maximum(self.scale(points), 1.0)
        points = points[ok]
        return points[np.lexsort((-points.imag, -points.real))]


def linearize_at(p: ClassicalParams, ss: SteadyState, pump_depletion: bool = True) -> DelayedLinearization:
    """
    Jacobian pair (A, B) about a steady state.

    With pump_depletion=False the pump is frozen at its steady value and only
    the 2x2 signal block remains.
    """
    if steady_state_residual(p, ss) > 1e-9 * max(1.0, p.x):
        raise ParameterDomainError(f"state {ss.eps} is not stationary for x={p.x}")
    kappa, kp = p.kappa, p.kappa_p
    z, w = ss.eps, ss.pump
    s, c = sin_cos_exact(p.phi)
    feedback = p.k * complex(c, s)

    a_zz = _real_block(complex(-kappa, -p.delta), kappa * w)
    b_zz = _real_block(-feedback)
    if not pump_depletion:
        return DelayedLinearization(a_zz, b_zz, p.tau, kappa)

    A = np.zeros((4, 4))
    B = np.zeros((4, 4))
    A[:2, :2] = a_zz
    A[:2, 2:] = _real_block(kappa * z.conjugate())
    A[2:, :2] = _real_block(-2.0 * kp * z)
    A[2:, 2:] = _real_block(complex(-kp))
    B[:2, :2] = b_zz
    return DelayedLinearization(A, B, p.tau, kappa)


# --- Hopf locus -------------------------------------------------------------

def _operating_state(p: ClassicalParams) -> SteadyState:
    states = steady_states(p)
    return states[1] if len(states) > 1 else states[0]


def hopf_locus(p: ClassicalParams, tau_values: Sequence[float], x_range: Tuple[float, float] = (0.2, 1.0),
               pump_depletion: bool = True, tol: float = 1e-6) -> List[HopfPoint]:
    """
    Drive at which the rightmost root crosses the imaginary axis, per delay.

    Below x_th the trivial state is linearized, above it the upper branch.
    Delays without a sign change of max lambda_r in x_range are omitted.
    """
    lo_x, hi_x = x_range
    if not 0.0 <= lo_x < hi_x:
        raise ParameterDomainError(f"invalid drive range {x_range}")
    points = []
    for tau in tau_values:
        if tau <= 0.0:
            raise ParameterDomainError("Hopf locus needs positive delays")
        point = _bisect_hopf(p.replace(tau=float(tau)), lo_x, hi_x, pump_depletion, tol)
        if point is None:
            logger.warning(f"No stability change for tau={tau:.6g} in x={x_range}; point omitted")
            continue
        points.append(point)
    logger.info(f"Located {len(points)} Hopf points over {len(tau_values)} delays")
    return points


def _linearization(p: ClassicalParams, x: float, pump_depletion: bool) -> DelayedLinearization:
    q = p.replace(x=x)
    return linearize_at(q, _operating_state(q), pump_depletion)


def _bisect_hopf(p: ClassicalParams, lo: float, hi: float, pump_depletion: bool,
                 tol: float) -> Optional[HopfPoint]:
    lin_lo = _linearization(p, lo, pump_depletion)
    lin_hi = _linearization(p, hi, pump_depletion)
    roots_lo, roots_hi = lin_lo.roots(), lin_hi.roots()
    if roots_lo.size == 0 or roots_hi.size == 0:
        return None
    if (roots_lo[0].real < 0.0) == (roots_hi[0].real < 0.0):
        return None
    unstable_above = roots_hi[0].real >= 0.0
    guesses = np.concatenate([roots_lo[:6], roots_hi[:6]])
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        tracked = _linearization(p, mid, pump_depletion).track(guesses)
        if tracked.size == 0:
            tracked = _linearization(p, mid, pump_depletion).roots()
        if (tracked[0].real >= 0.0) == unstable_above:
            hi = mid
        else:
            lo = mid
        guesses = np.concatenate([tracked[:6], guesses[:6]])
    x = 0.5 * (lo + hi)
    top = _linearization(p, x, pump_depletion).track(guesses)
    return HopfPoint(x, p.tau, float(abs(top[0].imag)), float(abs(top[0].real)))


# --- long-time classification -------------------------------------------------

def classify_longtime(traj: ClassicalTrajectory, rate_tol: float = 5e-4,
                      kappa: float = 1.0) -> LongTimeBehaviour:
    """
    Converged, oscillating or growing, judged on the final 20% of the run.

    Raises:
        UndecidableDynamics: run too short or too few oscillation peaks
    """
    span = traj.t[-1]
    required = 50.0 / kappa if traj.tau == 0.0 else min(10.0 * traj.tau, 50.0 / kappa)
    if span < required:
        raise UndecidableDynamics(f"run of {span:.4g} is shorter than {required:.4g}; integrate longer")

    amplitude = np.abs(traj.eps)
    start = int(0.8 * len(traj.t))
    t_tail, a_tail = traj.t[start:], amplitude[start:]
    initial = amplitude[0]
    ptp = float(np.ptp(a_tail))

    if ptp < 1e-6:
        return LongTimeBehaviour(Dynamics.CONVERGED, ptp, 0.0)
    if initial > 0.0 and a_tail.max() > 10.0 * initial:
        return LongTimeBehaviour(Dynamics.GROWING, ptp, float('inf'))

    tail = traj.states[start:, :2]
    component = tail[:, int(np.argmax(tail.std(axis=0)))]
    detrended = component - component.mean()
    peaks, _ = find_peaks(np.abs(detrended))
    if peaks.size < 4:
        steps = np.diff(a_tail)
        if np.all(steps <= 0.0):
            return LongTimeBehaviour(Dynamics.CONVERGED, ptp, float('-inf'))
        if np.all(steps >= 0.0):
            return LongTimeBehaviour(Dynamics.GROWING, ptp, float('inf'))
        raise UndecidableDynamics(f"only {peaks.size} peaks in the final window; integrate longer")

    rate = float(np.polyfit(t_tail[peaks], np.log(np.abs(detrended[peaks])), 1)[0])
    tol = rate_tol * kappa
    if rate < -tol:
        return LongTimeBehaviour(Dynamics.CONVERGED, ptp, rate)
    if rate > tol:
        return LongTimeBehaviour(Dynamics.GROWING, ptp, rate)

    signs = np.signbit(detrended)
    crossings = t_tail[1:][signs[1:] != signs[:-1]]
    period = float(2.0 * np.mean(np.diff(crossings))) if crossings.size > 1 else None
    return LongTimeBehaviour(Dynamics.OSCILLATING, ptp, rate, period)
