import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.append(str(ROOT))

from classical_dde import ClassicalParams  # noqa: E402
from params_core import SystemParams  # noqa: E402
from shared.config import SolverConfig  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long integrations and root-search sweeps")


@pytest.fixture
def symmetric():
    """Symmetric lossless cavity, phi = 0, |eps| = 0.75 kappa."""
    return SystemParams(kappa_b=0.5, kappa_c=0.5, eps_mag=0.75)


@pytest.fixture
def lossy():
    return SystemParams(kappa_b=0.5, kappa_c=0.5, eps_mag=0.5, loss=0.05)


@pytest.fixture
def pyragas():
    """phi = pi with k = kappa/2 and |eps| = 0.45 kappa."""
    return SystemParams.from_feedback_strength(0.5, phi=np.pi, eps_mag=0.45)


@pytest.fixture
def fig9_params():
    return ClassicalParams(kappa_b=0.5, kappa_c=0.5, tau=1.8833)


@pytest.fixture
def small_solver_config(tmp_path):
    return SolverConfig(max_workers=1, log_level='WARNING', grid_points=201, grid_span=3.0,
                        hopf_tau_step=0.5, evolve_t_end=60.0, output_dir=str(tmp_path))
