import os
import json
import logging
from dataclasses import dataclass, fields
from typing import Optional
from pathlib import Path

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

load_dotenv()


@dataclass
class SolverConfig:
    """Solver and command-line settings."""

    # Processing settings
    max_workers: int = int(os.getenv('WORKERS', '1'))
    log_level: str = os.getenv('LOG_LEVEL', 'INFO')

    # Spectrum grids (nu/kappa in [-span, span])
    grid_points: int = int(os.getenv('GRID_POINTS', '2001'))
    grid_span: float = float(os.getenv('GRID_SPAN', '3.0'))

    # Classical model
    hopf_tau_step: float = float(os.getenv('HOPF_TAU_STEP', '0.05'))
    evolve_t_end: float = float(os.getenv('EVOLVE_T_END', '200.0'))

    # Output
    output_dir: str = os.getenv('OUTPUT_DIR', 'output')
    kappa_hz: Optional[float] = float(os.environ['KAPPA_HZ']) if os.getenv('KAPPA_HZ') else None


def load_config(name: str = "solver") -> SolverConfig:
    """Load configuration for a named profile from config/<name>.json"""

    config_dir = Path(__file__).parent.parent.parent / "config"
    config_file = config_dir / f"{name}.json"

    if config_file.exists():
        try:
            with open(config_file, 'r', encoding='utf-8') as f:
                config_data = json.load(f)
            known = {f.name for f in fields(SolverConfig)}
            unknown = sorted(set(config_data) - known)
            if unknown:
                logger.warning(f"Ignoring unknown config keys in {config_file}: {unknown}")
            return SolverConfig(**{k: v for k, v in config_data.items() if k in known})
        except Exception as e:
            logger.warning(f"Could not load config from {config_file}: {e}")

    return SolverConfig()
