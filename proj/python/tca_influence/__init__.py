"""Influence analysis of market factors on trading performance."""

import json

from ._core import (
    ConfigError,
    DomainError,
    EngineConfig,
    ParseError,
    PortfolioSlice,
    SpecError,
    UndefinedError,
    binarize,
    enrich,
    factor_names,
    fit_two_sided,
    generate_synthetic,
    group_count,
    load_portfolio,
    mir,
    mir_from_rates,
    run_analysis,
    write_portfolio,
)
from . import _core


def analyze(portfolio, config=None):
    """Per-slice reports as dictionaries."""
    return [json.loads(text) for text in _core.analyze_reports(portfolio, config or EngineConfig())]


def evaluate(reports_dir, truth_path):
    """Recall and false-alarm summary of a report directory against ground truth."""
    return json.loads(_core.evaluate(str(reports_dir), str(truth_path)))


__all__ = [
    "ConfigError",
    "DomainError",
    "EngineConfig",
    "ParseError",
    "PortfolioSlice",
    "SpecError",
    "UndefinedError",
    "analyze",
    "binarize",
    "enrich",
    "evaluate",
    "factor_names",
    "fit_two_sided",
    "generate_synthetic",
    "group_count",
    "load_portfolio",
    "mir",
    "mir_from_rates",
    "run_analysis",
    "write_portfolio",
]
