"""Run documents, figure presets, sweeps and table output."""

from .config import Series, SweepSpec, load_config, parse_preparation, parse_run_config
from .emit import ResultTable, emit, read_table
from .presets import FIGURE_IDS, figure_preset
from .sweep import COLUMNS, run_sweep

__all__ = [
    "COLUMNS", "FIGURE_IDS", "ResultTable", "Series", "SweepSpec", "emit", "figure_preset",
    "load_config", "parse_preparation", "parse_run_config", "read_table", "run_sweep",
]
