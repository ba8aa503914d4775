"""Semiclassical toolkit for fractional Schrodinger groups (C++ core)."""

from ._fracwkb import (
    ConfigError,
    Error,
    classify_pair,
    cutoff,
    dispersive_fit,
    flow,
    phase,
    principal_symbol,
    propagate,
    resolve_config,
    run_suite,
    solve_nlfs,
    suite_keys,
    suite_names,
    tile_interval,
)

__all__ = [
    "ConfigError",
    "Error",
    "classify_pair",
    "cutoff",
    "dispersive_fit",
    "flow",
    "phase",
    "principal_symbol",
    "propagate",
    "resolve_config",
    "run_suite",
    "solve_nlfs",
    "suite_keys",
    "suite_names",
    "tile_interval",
]
