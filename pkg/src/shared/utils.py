# src/shared/utils.py

import logging
from typing import Tuple

import numpy as np

VACUUM_VARIANCE = 0.25
DB_CLAMP = 200.0


def setup_logging(name: str = None, level: str = "INFO") -> logging.Logger:
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, level.upper()))
    if not logger.handlers:
        handler = logging.StreamHandler()
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    return logger


def to_decibels(variance, clamp: float = DB_CLAMP):
    """
    Noise relative to the vacuum level, 10*log10(V / (1/4)), clamped to +-clamp.
    """
    variance = np.asarray(variance, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        db = 10.0 * np.log10(variance / VACUUM_VARIANCE)
    db = np.where(np.isnan(db), clamp, db)
    db = np.clip(db, -clamp, clamp)
    return db if db.ndim else float(db)


def linear_grid(start: float, stop: float, count: int) -> np.ndarray:
    """Inclusive grid of `count` points; a single point sits at `start`."""
    if count < 1:
        raise ValueError("grid needs at least one point")
    if count == 1:
        return np.array([float(start)])
    return np.linspace(float(start), float(stop), int(count))


def sin_cos_exact(phi: float, tol: float = 1e-12) -> Tuple[float, float]:
    """sin and cos with values within tol of 0/+-1 snapped exactly."""
    s, c = np.sin(phi), np.cos(phi)
    s = 0.0 if abs(s) < tol else float(s)
    c = 0.0 if abs(c) < tol else float(c)
    if abs(abs(c) - 1.0) < tol:
        c = float(np.sign(c))
    if abs(abs(s) - 1.0) < tol:
        s = float(np.sign(s))
    return s, c
