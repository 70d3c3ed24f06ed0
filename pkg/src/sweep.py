"""
Cartesian parameter sweeps of a named scalar quantity.
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Tuple

import pandas as pd

from classical_dde import hopf_locus, linearize_at, oscillation_threshold, steady_states
from critical_points import characteristic_point
from run_config import NUMERIC_KEYS, RunConfig
from shared.errors import ConfigError, ParameterDomainError
from shared.utils import to_decibels
from spectrum_engine import squeezing_spectrum
from stability_linear import max_real_part

logger = logging.getLogger(__name__)

QUANTITIES = ('variance', 'decibels', 'nu_c', 'tau_c', 'floor_db', 'max_re', 'x_th', 'omega_hopf')

# non-swept keys that never enter the physical parameters
_NOT_SWEEPABLE = ('t_end', 'step', 'eps0', 'pump0', 'kappa_hz')


def evaluate_quantity(quantity: str, values: Dict[str, float]) -> Dict[str, float]:
    """
    One sweep point.

    Returns:
        Output columns for the row; NaN where the quantity is undefined
    """
    config = RunConfig('sweep', dict(values))
    if quantity in ('variance', 'decibels'):
        p = config.system_params()
        point = squeezing_spectrum(p, config.theta_prime(p), config.number('nu', 0.0))
        return {'variance': point.variance, 'decibels': point.decibels, 'diverged': point.diverged}
    if quantity in ('nu_c', 'tau_c', 'floor_db'):
        point = characteristic_point(config.system_params())
        if not point.valid:
            return {'nu_c': float('nan'), 'tau_c': float('nan'), 'floor_db': float('nan'), 'valid': False}
        return {'nu_c': point.nu_c, 'tau_c': point.tau_c,
                'floor_db': to_decibels(point.squeezed_floor), 'valid': True}
    if quantity == 'max_re':
        if config.has('x'):
            q = config.classical_params()
            states = steady_states(q)
            rate = linearize_at(q, states[1] if len(states) > 1 else states[0]).max_real_part()
        else:
            rate = max_real_part(config.system_params())
        return {'max_re': rate, 'stable': rate < 0.0}
    if quantity == 'x_th':
        return {'x_th': oscillation_threshold(config.classical_params())}
    if quantity == 'omega_hopf':
        q = config.classical_params()
        points = hopf_locus(q, [q.tau])
        if not points:
            return {'x_hopf': float('nan'), 'omega_hopf': float('nan')}
        return {'x_hopf': points[0].x, 'omega_hopf': points[0].omega_hopf}
    raise ConfigError(f"unknown sweep quantity '{quantity}' (choose from {', '.join(QUANTITIES)})")


def _evaluate(task: Tuple[str, Dict[str, float]]) -> Dict[str, float]:
    quantity, values = task
    try:
        return evaluate_quantity(quantity, values)
    except ParameterDomainError as e:
        logger.warning(f"Point {values} failed: {e}")
        return {quantity: float('nan')}


def sweep_points(config: RunConfig) -> List[Dict[str, float]]:
    """Grid points in lexicographic order of the swept keys (first key slowest)."""
    swept = config.swept
    if len(swept) > 2:
        raise ConfigError(f"at most two swept keys are supported, got {swept}")
    for key in swept:
        if key not in NUMERIC_KEYS or key in _NOT_SWEEPABLE:
            raise ConfigError(f"'{key}' cannot be swept")
    fixed = {k: v for k, v in config.bindings.items() if isinstance(v, float)}
    grids = [config.grid(k) for k in swept]
    return [{**fixed, **dict(zip(swept, combo))} for combo in itertools.product(*grids)]


def run_sweep(config: RunConfig, max_workers: int = 1) -> pd.DataFrame:
    """
    Evaluate config's quantity on the Cartesian grid of its swept keys.

    Rows keep grid order whatever the number of workers.
    """
    quantity = config.text('quantity')
    if quantity not in QUANTITIES:
        raise ConfigError(f"unknown sweep quantity '{quantity}' (choose from {', '.join(QUANTITIES)})")
    points = sweep_points(config)
    tasks = [(quantity, point) for point in points]
    logger.info(f"Sweeping {quantity} over {len(points)} points with {max_workers} worker(s)")

    if max_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            results = list(executor.map(_evaluate, tasks))
    else:
        results = [_evaluate(task) for task in tasks]

    columns = config.swept
    return pd.DataFrame([{**{k: point[k] for k in columns}, **result}
                         for point, result in zip(points, results)])
