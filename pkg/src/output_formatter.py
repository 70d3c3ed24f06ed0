"""
Output formatting module for CSV results.
"""

import io
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional

import pandas as pd

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.12g'


class OutputFormatter:
    """Formats result tables as CSV with a commented parameter block."""

    def __init__(self, kappa_hz: Optional[float] = None):
        self.kappa_hz = kappa_hz

    def metadata_lines(self, metadata: Mapping[str, object]) -> List[str]:
        """
        `# key=value` lines in insertion order.

        Floats are written with repr so they read back to the same value.
        """
        lines = []
        for key, value in metadata.items():
            text = repr(value) if isinstance(value, float) else str(value)
            lines.append(f"# {key}={text}")
        if self.kappa_hz is not None:
            lines.append(f"# kappa_hz={self.kappa_hz!r}")
        return lines

    def format_csv(self, frame: pd.DataFrame, metadata: Mapping[str, object]) -> str:
        """
        Metadata block, header row and data rows.

        Args:
            frame: Result table, independent variables first
            metadata: Parameters echoed in the comment block

        Returns:
            CSV text with '\\n' line endings
        """
        buffer = io.StringIO()
        for line in self.metadata_lines(metadata):
            buffer.write(line + '\n')
        frame.to_csv(buffer, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        return buffer.getvalue()

    def save_csv(self, frame: pd.DataFrame, output_path: Path, metadata: Mapping[str, object]) -> Path:
        """Write one table; parent directories are created."""
        output_path = Path(output_path)
        try:
            output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', encoding='utf-8', newline='') as f:
                f.write(self.format_csv(frame, metadata))
            logger.info(f"Saved {len(frame)} rows to {output_path}")
        except OSError as e:
            logger.error(f"Error saving CSV output: {str(e)}")
            raise
        return output_path

    def create_summary_report(self, tables: Dict[str, pd.DataFrame]) -> str:
        """Short human-readable listing of the written tables."""
        lines = ["=== RESULTS ==="]
        for name, frame in tables.items():
            lines.append(f"{name}: {len(frame)} rows, columns {', '.join(map(str, frame.columns))}")
        return "\n".join(lines)


def read_csv(path: Path) -> pd.DataFrame:
    """Read a table written by OutputFormatter (metadata lines skipped)."""
    return pd.read_csv(path, comment='#')


def read_metadata(path: Path) -> Dict[str, str]:
    out = {}
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if not line.startswith('# '):
                break
            key, _, value = line[2:].rstrip('\n').partition('=')
            out[key] = value
    return out
