"""Sweep orchestration, result tables and the command-line interface."""
from .config import ConfigError, RMTSettings, StateSpec, SweepConfig, TauGrid
from .emit import emit, format_csv, parse_csv
from .recipes import RECIPES, figure_recipe
from .sweep import SweepResult, run_sweep

__all__ = ["ConfigError", "RMTSettings", "StateSpec", "SweepConfig", "TauGrid", "emit", "format_csv",
           "parse_csv", "RECIPES", "figure_recipe", "SweepResult", "run_sweep"]
