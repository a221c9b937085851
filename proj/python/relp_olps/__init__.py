"""Python bindings for the relp portfolio-selection library."""

import json

import numpy as np

from ._core import (
    ConfigError,
    DataError,
    RelpError,
    SolverError,
    known_strategies,
    log_space,
    max_drawdown,
    net_proportion,
    relative_ranking,
    sharpe_daily,
    solve_relp,
)
from . import _core

__all__ = [
    "ConfigError",
    "DataError",
    "RelpError",
    "SolverError",
    "backtest",
    "known_strategies",
    "log_space",
    "max_drawdown",
    "net_proportion",
    "relative_ranking",
    "sharpe_daily",
    "solve_relp",
]


def backtest(relatives, strategy, gamma=0.0, **options):
    """Run one strategy over an (n, m) array of price relatives.

    Keyword options use the same keys as the CLI config file, e.g.
    ``kappa=0.5`` or ``kappa_count=7``. Returns a dict with the wealth path,
    the chosen portfolios, the net proportions and the metric report.
    """
    x = np.ascontiguousarray(relatives, dtype=float)
    if x.ndim != 2:
        raise ValueError("relatives must be a 2-d array (periods x assets)")
    config = json.dumps(options) if options else ""
    return _core.backtest(x, strategy, float(gamma), config)
