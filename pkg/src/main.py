"""
Analysis runner - dispatches each command-line subcommand to the numerical
modules and writes the resulting tables as CSV.
"""

import logging
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd

from classical_dde import (classify_longtime, hopf_locus, integrate, oscillation_threshold,
                           steady_state_diagram)
from critical_points import characteristic_point, feedback_strength_bounds
from figures import FigureTable, run_figure
from output_formatter import OutputFormatter
from run_config import RunConfig
from shared.config import SolverConfig
from shared.errors import ConfigError, NumericalError
from shared.utils import linear_grid, to_decibels
from spectrum_engine import spectrum_curve
from stability_linear import rightmost_roots, stability_verdict
from sweep import run_sweep

logger = logging.getLogger(__name__)


class AnalysisRunner:
    """Runs one subcommand against a parsed RunConfig."""

    def __init__(self, config: Optional[SolverConfig] = None):
        self.config = config or SolverConfig()
        self.output_formatter = OutputFormatter(kappa_hz=self.config.kappa_hz)
        self.commands: Dict[str, Callable[[RunConfig], List[FigureTable]]] = {
            'spectrum': self.spectrum,
            'critical-point': self.critical_point,
            'stability-roots': self.stability_roots,
            'steady-states': self.steady_states,
            'evolve': self.evolve,
            'hopf-locus': self.hopf_locus,
            'figure': self.figure,
            'sweep': self.sweep,
        }

    def run(self, command: str, run_config: RunConfig) -> List[Path]:
        """Build the tables for a command and save them; returns written paths."""
        if command not in self.commands:
            raise ConfigError(f"unknown command '{command}'")
        run_config.validate_for(command)
        logger.info(f"🚀 Running {command}")
        start_time = time.time()

        tables = self.commands[command](run_config)
        paths = self.save(tables, run_config.text('output'))

        logger.info(f"✅ {command} finished in {time.time() - start_time:.2f}s")
        logger.debug(self.output_formatter.create_summary_report({t.name: t.frame for t in tables}))
        return paths

    def save(self, tables: List[FigureTable], output: Optional[str]) -> List[Path]:
        paths = []
        for table in tables:
            path = self._output_path(table.name, output, len(tables))
            paths.append(self.output_formatter.save_csv(table.frame, path, table.metadata))
        return paths

    def _output_path(self, name: str, output: Optional[str], n_tables: int) -> Path:
        if output is None:
            return Path(self.config.output_dir) / f"{name}.csv"
        target = Path(output)
        if target.suffix != '.csv':
            return target / f"{name}.csv"
        if n_tables == 1:
            return target
        return target.with_name(f"{target.stem}_{name}.csv")

    # --- subcommands ------------------------------------------------------------

    def spectrum(self, rc: RunConfig) -> List[FigureTable]:
        p = rc.system_params()
        theta_prime = rc.theta_prime(p)
        default_nu = linear_grid(-self.config.grid_span, self.config.grid_span, self.config.grid_points)
        curve = spectrum_curve(p, theta_prime, rc.grid('nu', default_nu))
        return [FigureTable('spectrum', curve.to_frame(), {**rc.echo(), 'theta_prime': theta_prime})]

    def critical_point(self, rc: RunConfig) -> List[FigureTable]:
        p = rc.system_params()
        point = characteristic_point(p)
        k_min, k_max = feedback_strength_bounds(p.kappa, p.eps_mag)
        frame = pd.DataFrame([{
            'nu_c': point.nu_c,
            'tau_c': point.tau_c,
            'squeezed_floor': point.squeezed_floor,
            'floor_db': to_decibels(point.squeezed_floor) if point.valid else float('nan'),
            'valid': point.valid,
            'k': p.k,
            'k_min': k_min,
            'k_max': k_max,
        }])
        if not point.valid:
            logger.warning(f"No valid characteristic point: {point.reason}")
        return [FigureTable('critical_point', frame, {**rc.echo(), 'reason': point.reason or 'none'})]

    def stability_roots(self, rc: RunConfig) -> List[FigureTable]:
        p = rc.system_params()
        roots = rightmost_roots(p)
        verdict = stability_verdict(p)
        frame = pd.DataFrame([{'lambda_re': r.lambda_re, 'lambda_im': r.lambda_im,
                               'residual': r.residual, 'multiplicity': r.multiplicity} for r in roots])
        logger.info(f"{len(roots)} roots, max real part {verdict.max_re:.6g}")
        return [FigureTable('stability_roots', frame, {
            **rc.echo(), 'stable': verdict.stable, 'heuristic_stable': verdict.heuristic_stable})]

    def steady_states(self, rc: RunConfig) -> List[FigureTable]:
        q = rc.classical_params(x=0.0)
        frame = steady_state_diagram(q, rc.grid('x'))
        return [FigureTable('steady_states', frame, {**rc.echo(), 'x_th': oscillation_threshold(q)})]

    def evolve(self, rc: RunConfig) -> List[FigureTable]:
        q = rc.classical_params(x=rc.number('x'))
        t_end = rc.number('t_end', self.config.evolve_t_end)
        step = rc.number('step') if rc.has('step') else None
        traj = integrate(q, (rc.number('eps0', 0.5), rc.number('pump0', 0.0)), t_end, step)
        meta = {**rc.echo(), 'step': traj.step}
        try:
            behaviour = classify_longtime(traj, kappa=q.kappa)
            meta['verdict'] = behaviour.verdict.value
            if behaviour.period is not None:
                meta['period'] = behaviour.period
        except NumericalError:
            # keep the trajectory, then report the failure
            meta['verdict'] = 'undecidable'
            self.save([FigureTable('evolve', traj.to_frame(), meta)], rc.text('output'))
            raise
        return [FigureTable('evolve', traj.to_frame(), meta)]

    def hopf_locus(self, rc: RunConfig) -> List[FigureTable]:
        q = rc.classical_params(tau=0.0, x=0.0)
        taus = rc.grid('tau')
        x_values = rc.grid('x', np.array([0.2, 1.0]))
        x_range = (float(x_values.min()), float(x_values.max()))
        rows = []
        for variant, depleted in (('depleted', True), ('undepleted', False)):
            for point in hopf_locus(q, taus, x_range, pump_depletion=depleted):
                rows.append({'variant': variant, 'tau': point.tau, 'x': point.x,
                             'omega_hopf': point.omega_hopf, 'residual': point.residual})
        return [FigureTable('hopf_locus', pd.DataFrame(rows, columns=['variant', 'tau', 'x', 'omega_hopf', 'residual']),
                            rc.echo())]

    def figure(self, rc: RunConfig) -> List[FigureTable]:
        return run_figure(rc.text('figure'), self.config)

    def sweep(self, rc: RunConfig) -> List[FigureTable]:
        frame = run_sweep(rc, self.config.max_workers)
        return [FigureTable('sweep', frame, rc.echo())]
