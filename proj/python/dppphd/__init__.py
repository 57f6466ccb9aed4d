"""Determinantal and Poisson PHD filters, exact small-grid oracle and tracking metrics."""

from ._core import (
    ConfigError,
    EmptySet,
    SpectrumError,
    UnknownPreset,
    build_id,
    determinantal_moments,
    hungarian,
    interaction_kernel,
    omat,
    oracle_equivalence_check,
    ospa,
    poisson_reduction_check,
    preset_config,
    preset_names,
    project_kernel,
    run_config,
)

__all__ = [
    "ConfigError",
    "EmptySet",
    "SpectrumError",
    "UnknownPreset",
    "build_id",
    "determinantal_moments",
    "hungarian",
    "interaction_kernel",
    "omat",
    "oracle_equivalence_check",
    "ospa",
    "poisson_reduction_check",
    "preset_config",
    "preset_names",
    "project_kernel",
    "run_config",
]
