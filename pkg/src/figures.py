"""
Tabular data behind each published figure, regenerated from the caption
parameters. Every builder returns one or more named tables; writing them is
left to the caller.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

import numpy as np
import pandas as pd

from classical_dde import (ClassicalParams, classify_longtime, hopf_locus, integrate,
                           steady_state_diagram)
from critical_points import characteristic_point, pyragas_floor
from params_core import SystemParams
from shared.config import SolverConfig
from shared.errors import ConfigError, ParameterDomainError
from shared.utils import linear_grid, to_decibels
from spectrum_engine import (best_quadrature, no_feedback_params, optimal_quadrature_angle,
                             quadrature_scan, resonance_variance_no_feedback, spectrum_curve,
                             squeezed_angle, squeezing_spectrum)
from stability_linear import rightmost_roots

logger = logging.getLogger(__name__)

SYMMETRIC = dict(kappa_b=0.5, kappa_c=0.5)
FIG9_TAU = 1.8833
FIG13_TAU = 2.4358
SINGULAR_OFFSET = 1e-4


@dataclass
class FigureTable:
    name: str
    frame: pd.DataFrame
    metadata: Dict[str, object] = field(default_factory=dict)


def _meta(figure: str, params, **extra) -> Dict[str, object]:
    return {'figure': figure, **params.model_dump(), **extra}


def _nu_grid(cfg: SolverConfig) -> np.ndarray:
    return linear_grid(-cfg.grid_span, cfg.grid_span, cfg.grid_points)


def _theta_grid(cfg: SolverConfig) -> np.ndarray:
    return linear_grid(0.0, 2 * np.pi, max(cfg.grid_points // 2, 2))


def _spectrum_frame(p: SystemParams, theta_prime: float, nu: np.ndarray, **labels) -> pd.DataFrame:
    frame = spectrum_curve(p, theta_prime, nu).to_frame()
    for i, (key, value) in enumerate(labels.items()):
        frame.insert(i, key, value)
    return frame


def _scan_frame(p: SystemParams, nu: float, thetas: np.ndarray, /, **labels) -> pd.DataFrame:
    frame = quadrature_scan(p, nu, p.eps_phase + thetas)
    for i, (key, value) in enumerate(labels.items()):
        frame.insert(i, key, value)
    return frame


def _pyragas_params(loss: float, **kwargs) -> SystemParams:
    """Cavity with k = (kappa/2) sqrt(1 - L)."""
    return SystemParams.from_feedback_strength(0.5 * np.sqrt(1.0 - loss), loss=loss, **kwargs)


# --- spectra ----------------------------------------------------------------

def fig2(cfg: SolverConfig) -> List[FigureTable]:
    """Antisqueezed and squeezed spectra for five delays up to tau_c."""
    base = SystemParams(eps_mag=0.75, **SYMMETRIC)
    point = characteristic_point(base)
    nu = _nu_grid(cfg)
    taus = [0.0, 0.5, 1.0, 1.4, point.tau_c]
    tables = []
    for name, theta_prime in (('fig2_antisqueezed', base.eps_phase), ('fig2_squeezed', squeezed_angle(base))):
        frame = pd.concat([_spectrum_frame(base.replace(tau=t), theta_prime, nu, tau=t) for t in taus],
                          ignore_index=True)
        tables.append(FigureTable(name, frame, _meta(name, base, theta_prime=theta_prime,
                                                    nu_c=point.nu_c, tau_c=point.tau_c)))
    return tables


def _loss_comparison(name: str, eps: float, cfg: SolverConfig) -> List[FigureTable]:
    nu = _nu_grid(cfg)
    base = SystemParams(eps_mag=eps, **SYMMETRIC)
    theta_prime = squeezed_angle(base)
    frames = []
    extra = {}
    for loss in (0.0, 0.05):
        p = base.replace(loss=loss)
        point = characteristic_point(p)
        extra[f"tau_c_loss_{loss}"] = point.tau_c
        for tau in (0.0, 0.5 * point.tau_c, point.tau_c):
            frames.append(_spectrum_frame(p.replace(tau=tau), theta_prime, nu,
                                          series='feedback', loss=loss, tau=tau))
    for label, one_sided in (('one_sided', True), ('symmetric', False)):
        ref = no_feedback_params(1.0, eps, one_sided=one_sided)
        frames.append(_spectrum_frame(ref, theta_prime, nu, series=label, loss=ref.loss, tau=0.0))
    return [FigureTable(name, pd.concat(frames, ignore_index=True),
                        _meta(name, base, theta_prime=theta_prime, **extra))]


def fig3(cfg: SolverConfig) -> List[FigureTable]:
    return _loss_comparison('fig3', 0.25, cfg)


def fig4(cfg: SolverConfig) -> List[FigureTable]:
    return _loss_comparison('fig4', 0.5, cfg)


def fig5(cfg: SolverConfig) -> List[FigureTable]:
    """Squeezing floor at (nu_c, tau_c) against pump strength."""
    eps_grid = linear_grid(0.01, 0.99, 99)
    rows = []
    for loss in (0.02, 0.05, 0.1):
        for eps in eps_grid:
            point = characteristic_point(SystemParams(eps_mag=float(eps), loss=loss, **SYMMETRIC))
            floor = to_decibels(point.squeezed_floor) if point.valid else float('nan')
            rows.append({'series': 'feedback', 'loss': loss, 'eps': float(eps),
                         'floor_db': floor, 'valid': point.valid})
    for eps in eps_grid:
        rows.append({'series': 'one_sided', 'loss': 0.0, 'eps': float(eps),
                     'floor_db': to_decibels(resonance_variance_no_feedback(1.0, float(eps))), 'valid': True})
    return [FigureTable('fig5', pd.DataFrame(rows), _meta('fig5', SystemParams(**SYMMETRIC)))]


# --- classical model ----------------------------------------------------------

def fig7(cfg: SolverConfig) -> List[FigureTable]:
    """Steady-state branches without delay for four feedback settings."""
    x_grid = linear_grid(0.0, 3.0, 61)
    frames = []
    for panel, k, phi in (('a', 0.0, 0.0), ('b', 1.0, 0.0), ('c', 0.5, 0.0), ('d', 0.5, np.pi)):
        q = ClassicalParams.from_system(SystemParams.from_feedback_strength(k, phi=phi), x=0.0)
        frame = steady_state_diagram(q, x_grid)
        frame.insert(0, 'panel', panel)
        frame.insert(1, 'k', k)
        frame.insert(2, 'phi', phi)
        frames.append(frame)
    return [FigureTable('fig7', pd.concat(frames, ignore_index=True), {'figure': 'fig7', 'tau': 0.0})]


def fig8(cfg: SolverConfig) -> List[FigureTable]:
    """Steady-state branches with k = kappa and two delays."""
    x_grid = linear_grid(0.0, 3.0, 31)
    base = ClassicalParams(**SYMMETRIC)
    frames = []
    for tau in (0.6, 1.57):
        frame = steady_state_diagram(base.replace(tau=tau), x_grid)
        frame.insert(0, 'tau', tau)
        frames.append(frame)
    return [FigureTable('fig8', pd.concat(frames, ignore_index=True), _meta('fig8', base))]


def fig9(cfg: SolverConfig) -> List[FigureTable]:
    """Trajectories just below and above the Hopf point."""
    tables = []
    for label, x in (('fig9a', 0.745), ('fig9b', 0.78)):
        q = ClassicalParams(tau=FIG9_TAU, x=x, **SYMMETRIC)
        traj = integrate(q, (0.5, 0.0), cfg.evolve_t_end)
        extra = {'eps0': 0.5, 'pump0': 0.0, 't_end': cfg.evolve_t_end, 'step': traj.step}
        behaviour = classify_longtime(traj, kappa=q.kappa)
        extra['verdict'] = behaviour.verdict.value
        if behaviour.period is not None:
            extra['period'] = behaviour.period
        tables.append(FigureTable(label, traj.to_frame(), _meta(label, q, **extra)))
    return tables


def fig10(cfg: SolverConfig) -> List[FigureTable]:
    """Hopf locus with and without pump depletion."""
    count = int(round((4.1 - 1.6) / cfg.hopf_tau_step)) + 1
    taus = linear_grid(1.6, 4.1, count)
    base = ClassicalParams(**SYMMETRIC)
    rows = []
    for variant, depleted in (('depleted', True), ('undepleted', False)):
        for point in hopf_locus(base, taus, (0.2, 1.0), pump_depletion=depleted):
            rows.append({'variant': variant, 'tau': point.tau, 'x': point.x,
                         'omega_hopf': point.omega_hopf, 'residual': point.residual})
    return [FigureTable('fig10', pd.DataFrame(rows), _meta('fig10', base, x_min=0.2, x_max=1.0))]


# --- stability map ------------------------------------------------------------

def _fig11_point(task: Tuple[float, float]) -> Dict[str, float]:
    eps, tau = task
    p = SystemParams(eps_mag=eps, tau=tau, **SYMMETRIC)
    top = rightmost_roots(p)[0]
    nu = abs(top.lambda_im)
    db = squeezing_spectrum(p, squeezed_angle(p), nu).decibels
    return {'eps': eps, 'tau': tau, 'lambda_re': top.lambda_re, 'lambda_im': nu, 'decibels': db}


def fig11(cfg: SolverConfig) -> List[FigureTable]:
    """Rightmost root frequency over (|eps|, tau), with the squeezing found there."""
    tasks = [(float(e), float(t)) for e in linear_grid(0.05, 0.95, 19) for t in linear_grid(0.0, 6.0, 25)]
    if cfg.max_workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.max_workers) as executor:
            rows = list(executor.map(_fig11_point, tasks))
    else:
        rows = [_fig11_point(task) for task in tasks]
    return [FigureTable('fig11', pd.DataFrame(rows), _meta('fig11', SystemParams(**SYMMETRIC)))]


# --- detuning and loop phase --------------------------------------------------

def fig12(cfg: SolverConfig) -> List[FigureTable]:
    """Quadrature scans at the detuned characteristic points."""
    thetas = _theta_grid(cfg)
    base = SystemParams(eps_mag=0.5, loss=0.05, **SYMMETRIC)
    frames, optimum = [], []
    for delta in (0.0, 0.2, 0.4):
        point = characteristic_point(base.replace(delta=delta))
        p = base.replace(delta=delta, tau=point.tau_c)
        # m(nu_c) = 0 exactly, so evaluate just beside the singular point
        nu = point.nu_c * (1.0 + SINGULAR_OFFSET)
        frames.append(_scan_frame(p, nu, thetas, delta=delta, nu=nu, tau=point.tau_c))
        theta_best, variance = best_quadrature(p, nu)
        optimum.append({'delta': delta, 'theta_grid': theta_best,
                        'theta_formula': optimal_quadrature_angle(p), 'variance': variance,
                        'decibels': to_decibels(variance)})
    meta = _meta('fig12', base)
    return [FigureTable('fig12', pd.concat(frames, ignore_index=True), meta),
            FigureTable('fig12_optimum', pd.DataFrame(optimum), meta)]


def fig13(cfg: SolverConfig) -> List[FigureTable]:
    """Quadrature scans at nu_c (of phi = 0) for loop phases slightly below zero."""
    thetas = _theta_grid(cfg)
    base = SystemParams(eps_mag=0.5, loss=0.05, tau=FIG13_TAU, **SYMMETRIC)
    nu_c = characteristic_point(base).nu_c
    frames = [_scan_frame(base.replace(phi=phi), nu_c, thetas, phi=phi)
              for phi in (0.0, -0.05 * np.pi, -0.1 * np.pi)]
    return [FigureTable('fig13', pd.concat(frames, ignore_index=True), _meta('fig13', base, nu=nu_c))]


def fig14(cfg: SolverConfig) -> List[FigureTable]:
    """Spectrum over (theta_d, nu) for an asymmetric cavity and non-zero loop phase."""
    p = SystemParams(eps_mag=0.5, kappa_b=0.3, kappa_c=0.7, tau=2.0, phi=-0.3 * np.pi, loss=0.05)
    nu = linear_grid(-cfg.grid_span, cfg.grid_span, 241)
    frames = [_spectrum_frame(p, p.eps_phase + t, nu, theta_d=float(t)) for t in linear_grid(0.0, 2 * np.pi, 121)]
    return [FigureTable('fig14', pd.concat(frames, ignore_index=True), _meta('fig14', p))]


# --- Pyragas-type feedback ----------------------------------------------------

def fig15(cfg: SolverConfig) -> List[FigureTable]:
    """Spectra with phi = pi for three delays, lossless and lossy loops."""
    nu = _nu_grid(cfg)
    frames = []
    for loss in (0.0, 0.05):
        p = _pyragas_params(loss, phi=np.pi, eps_mag=0.45)
        for tau in (0.0, 2.0, 4.0):
            frames.append(_spectrum_frame(p.replace(tau=tau), squeezed_angle(p), nu,
                                          series='feedback', loss=loss, tau=tau))
    ref = no_feedback_params(1.0, 0.45)
    frames.append(_spectrum_frame(ref, squeezed_angle(ref), nu, series='one_sided', loss=0.0, tau=0.0))
    return [FigureTable('fig15', pd.concat(frames, ignore_index=True),
                        _meta('fig15', _pyragas_params(0.0, phi=np.pi, eps_mag=0.45)))]


def fig16(cfg: SolverConfig) -> List[FigureTable]:
    """On-resonance squeezing with phi = pi against pump strength."""
    eps_grid = linear_grid(0.0, 0.5, 51)
    rows = []
    for loss in (0.02, 0.05, 0.1):
        for eps in eps_grid:
            p = _pyragas_params(loss, phi=np.pi, eps_mag=float(eps))
            try:
                db = to_decibels(pyragas_floor(p))
            except ParameterDomainError:
                db = float('nan')
            rows.append({'series': 'feedback', 'loss': loss, 'eps': float(eps), 'floor_db': db})
    for eps in eps_grid:
        rows.append({'series': 'one_sided', 'loss': 0.0, 'eps': float(eps),
                     'floor_db': to_decibels(resonance_variance_no_feedback(1.0, float(eps)))})
    return [FigureTable('fig16', pd.DataFrame(rows), {'figure': 'fig16', 'phi': float(np.pi)})]


def fig17(cfg: SolverConfig) -> List[FigureTable]:
    """Quadrature scans at nu = 0 with phi = pi: detuning series and loop-phase series."""
    thetas = _theta_grid(cfg)
    base = _pyragas_params(0.05, phi=np.pi, eps_mag=0.45)
    detuning = pd.concat([_scan_frame(base.replace(delta=d), 0.0, thetas, delta=d) for d in (0.0, 0.2, 0.4)],
                         ignore_index=True)
    phase = pd.concat([_scan_frame(base.replace(phi=f * np.pi), 0.0, thetas, phi=f * np.pi)
                       for f in (1.0, 0.95, 0.9)], ignore_index=True)
    return [FigureTable('fig17_detuning', detuning, _meta('fig17_detuning', base, nu=0.0)),
            FigureTable('fig17_phase', phase, _meta('fig17_phase', base, nu=0.0))]


FIGURES: Dict[str, Callable[[SolverConfig], List[FigureTable]]] = {
    'fig2': fig2, 'fig3': fig3, 'fig4': fig4, 'fig5': fig5, 'fig7': fig7, 'fig8': fig8,
    'fig9': fig9, 'fig10': fig10, 'fig11': fig11, 'fig12': fig12, 'fig13': fig13,
    'fig14': fig14, 'fig15': fig15, 'fig16': fig16, 'fig17': fig17,
}


def run_figure(figure_id: str, cfg: SolverConfig) -> List[FigureTable]:
    """Tables for one figure id."""
    try:
        builder = FIGURES[figure_id]
    except KeyError:
        raise ConfigError(f"unknown figure '{figure_id}' (known: {', '.join(FIGURES)})")
    logger.info(f"Building {figure_id}")
    return builder(cfg)
