"""Groundwater heat pump plume toolkit: geology sampling, Darcy flow and heat
transport simulation, an analytic plume baseline, and a learned convolutional
surrogate with training, evaluation, and serving utilities."""

__version__ = "0.1.0"

from .grid import Grid, ScalarField, VectorField, DEFAULT_GRID
from .geogen import GeologySpec, realize_geology, permeability_field, sample_pressure_gradient
from .simulate import (SimParams, WellSpec, TransportConfig, ScenarioSpec, Sample,
                       solve_pressure, darcy_velocity, advance_temperature,
                       run_scenario, generate_scenario)
from .lahm import LahmParams, lahm_delta_t, lahm_field
from .dataset import (NormStats, TrainingPair, DatasetSplit, fit_norm_stats,
                      preprocess, augment_rotate, build_splits)

__all__ = [
    "Grid", "ScalarField", "VectorField", "DEFAULT_GRID",
    "GeologySpec", "realize_geology", "permeability_field", "sample_pressure_gradient",
    "SimParams", "WellSpec", "TransportConfig", "ScenarioSpec", "Sample",
    "solve_pressure", "darcy_velocity", "advance_temperature", "run_scenario",
    "generate_scenario",
    "LahmParams", "lahm_delta_t", "lahm_field",
    "NormStats", "TrainingPair", "DatasetSplit", "fit_norm_stats", "preprocess",
    "augment_rotate", "build_splits",
    "__version__",
]
