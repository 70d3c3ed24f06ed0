"""
Run configuration files: one `key=value` per line, `#` starts a comment.

Values are plain numbers in kappa units, angles may carry a `pi` suffix
(`phi=-0.3pi`), and `start:stop:count` declares a swept grid.
"""

import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from classical_dde import ClassicalParams
from params_core import SystemParams
from shared.errors import ConfigError
from shared.utils import linear_grid

logger = logging.getLogger(__name__)

NUMERIC_KEYS = (
    'kappa_b', 'kappa_c', 'loss', 'phi', 'tau', 'delta', 'eps', 'theta', 'theta_prime',
    'nu', 'kappa_p', 'x', 't_end', 'step', 'eps0', 'pump0', 'kappa_hz',
)
TEXT_KEYS = ('quantity', 'output', 'figure')
ANGLE_KEYS = ('phi', 'theta', 'theta_prime')

REQUIRED_KEYS = {
    'spectrum': ('eps',),
    'critical-point': ('eps',),
    'stability-roots': ('eps',),
    'steady-states': ('x',),
    'evolve': ('x',),
    'hopf-locus': ('tau',),
    'sweep': ('quantity',),
    'figure': ('figure',),
}

_LINE = re.compile(r'^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$')


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return linear_grid(self.start, self.stop, self.count)

    def __str__(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.count}"


Value = Union[float, GridSpec, str]


@dataclass
class RunConfig:
    """Parsed bindings for one command."""

    command: Optional[str] = None
    bindings: Dict[str, Value] = field(default_factory=dict)

    def has(self, key: str) -> bool:
        return key in self.bindings

    def number(self, key: str, default: Optional[float] = None) -> float:
        value = self.bindings.get(key, default)
        if value is None:
            raise ConfigError(f"missing required key '{key}'")
        if isinstance(value, GridSpec):
            raise ConfigError(f"'{key}' is swept here but the command needs a single value")
        return float(value)

    def text(self, key: str, default: Optional[str] = None) -> Optional[str]:
        value = self.bindings.get(key, default)
        return None if value is None else str(value)

    def grid(self, key: str, default: Optional[np.ndarray] = None) -> np.ndarray:
        """Values of a key as a 1-D array (single values give one point)."""
        value = self.bindings.get(key)
        if value is None:
            if default is None:
                raise ConfigError(f"missing required key '{key}'")
            return np.asarray(default, dtype=float)
        if isinstance(value, GridSpec):
            return value.values()
        return np.array([float(value)])

    @property
    def swept(self) -> List[str]:
        return [k for k, v in self.bindings.items() if isinstance(v, GridSpec)]

    def system_params(self, **changes: float) -> SystemParams:
        """SystemParams from the scalar bindings, with optional overrides."""
        merged = {**self._scalars(), **changes}
        kwargs = {}
        for key, name in (('kappa_b', 'kappa_b'), ('kappa_c', 'kappa_c'), ('loss', 'loss'),
                          ('phi', 'phi'), ('tau', 'tau'), ('delta', 'delta'),
                          ('eps', 'eps_mag'), ('theta', 'eps_phase')):
            if key in merged:
                kwargs[name] = merged[key]
        return SystemParams(**kwargs)

    def classical_params(self, **changes: float) -> ClassicalParams:
        merged = {**self._scalars(), **changes}
        keys = ('kappa_b', 'kappa_c', 'loss', 'phi', 'tau', 'delta', 'kappa_p', 'x')
        return ClassicalParams(**{k: merged[k] for k in keys if k in merged})

    def theta_prime(self, p: SystemParams) -> float:
        """Measured quadrature, the squeezed one (theta + pi) unless bound."""
        return self.number('theta_prime') if self.has('theta_prime') else p.eps_phase + np.pi

    def echo(self) -> Dict[str, str]:
        """Bindings as text that parse_config reads back to the same values."""
        out = {}
        for key, value in self.bindings.items():
            out[key] = repr(value) if isinstance(value, float) else str(value)
        return out

    def validate_for(self, command: str) -> None:
        missing = [k for k in REQUIRED_KEYS.get(command, ()) if k not in self.bindings]
        if missing:
            raise ConfigError(f"'{command}' needs {', '.join(missing)}")

    def _scalars(self) -> Dict[str, float]:
        return {k: v for k, v in self.bindings.items() if isinstance(v, float)}


def parse_value(key: str, raw: str, line: Optional[int] = None) -> Value:
    if key in TEXT_KEYS:
        if not raw:
            raise ConfigError(f"empty value for '{key}'", line)
        return raw
    if ':' in raw:
        parts = raw.split(':')
        if len(parts) != 3:
            raise ConfigError(f"grid for '{key}' must be start:stop:count", line)
        start, stop = (_parse_number(key, part, line) for part in parts[:2])
        try:
            count = int(parts[2])
        except ValueError:
            raise ConfigError(f"grid count '{parts[2]}' for '{key}' is not an integer", line)
        if count < 1:
            raise ConfigError(f"grid for '{key}' needs at least one point", line)
        return GridSpec(start, stop, count)
    return _parse_number(key, raw, line)


def _parse_number(key: str, raw: str, line: Optional[int]) -> float:
    text = raw.strip()
    scale = 1.0
    if key in ANGLE_KEYS and text.endswith('pi'):
        text = text[:-2].strip()
        scale = np.pi
        if text in ('', '+', '-'):
            text += '1'
    try:
        value = float(text) * scale
    except ValueError:
        raise ConfigError(f"cannot read '{raw}' as a number for '{key}'", line)
    if not np.isfinite(value):
        raise ConfigError(f"'{key}' must be finite", line)
    return value


def _iter_lines(text: str) -> Iterable[Tuple[int, str, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split('#', 1)[0].strip()
        if not content:
            continue
        match = _LINE.match(content)
        if not match:
            raise ConfigError(f"expected key=value, got '{content}'", number)
        yield number, match.group(1), match.group(2)


def _bind(bindings: Dict[str, Value], key: str, value: Value, line: Optional[int]) -> None:
    if key not in NUMERIC_KEYS and key not in TEXT_KEYS:
        raise ConfigError(f"unknown key '{key}'", line)
    if key in bindings and bindings[key] != value:
        raise ConfigError(f"conflicting values for '{key}'", line)
    bindings[key] = value


def parse_config(text: str, overrides: Optional[Union[Mapping[str, str], Iterable[str]]] = None,
                 command: Optional[str] = None) -> RunConfig:
    """
    Parse configuration text, then apply command-line overrides.

    Args:
        text: File contents (may be empty)
        overrides: `key=value` strings or a mapping; these replace file values
        command: Subcommand whose required keys are checked

    Raises:
        ConfigError: malformed line, unknown key or conflicting duplicate
    """
    bindings: Dict[str, Value] = {}
    for number, key, raw in _iter_lines(text):
        _bind(bindings, key, parse_value(key, raw, number), number)

    if overrides:
        pairs = overrides.items() if isinstance(overrides, Mapping) else [_split_override(o) for o in overrides]
        flagged: Dict[str, Value] = {}
        for key, raw in pairs:
            _bind(flagged, key, parse_value(key, str(raw)), None)
        bindings.update(flagged)

    config = RunConfig(command, bindings)
    if command:
        config.validate_for(command)
    logger.debug(f"Parsed {len(bindings)} bindings ({len(config.swept)} swept)")
    return config


def _split_override(item: str) -> Tuple[str, str]:
    if '=' not in item:
        raise ConfigError(f"override '{item}' is not key=value")
    key, raw = item.split('=', 1)
    return key.strip(), raw.strip()
