"""Configuration handling, reproduction protocols and the command-line interface."""

from .config import ScenarioConfig, load_config, parse_lines
from .protocols import (SweepSeries, run_appendix_c, run_derive, run_fig2, run_fig3, run_fig4,
                        run_fig5, run_sweep)

__all__ = [
    "ScenarioConfig", "load_config", "parse_lines", "SweepSeries",
    "run_appendix_c", "run_derive", "run_fig2", "run_fig3", "run_fig4", "run_fig5", "run_sweep",
]
