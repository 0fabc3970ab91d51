"""Occupancy densities and Fisher Information estimators."""

from .density import DensityEstimate, analytic_branch_density, count_modes, estimate_density
from .fisher import (
    Estimator,
    FisherSeries,
    SweepPoint,
    fisher_from_density,
    fisher_series,
    fisher_time_average,
    omega_sweep,
)

__all__ = [
    "DensityEstimate",
    "Estimator",
    "FisherSeries",
    "SweepPoint",
    "analytic_branch_density",
    "count_modes",
    "estimate_density",
    "fisher_from_density",
    "fisher_series",
    "fisher_time_average",
    "omega_sweep",
]
