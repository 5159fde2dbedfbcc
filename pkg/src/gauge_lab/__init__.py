"""Gauge potentials, Aharonov-Bohm phases and causal propagation on 2D grids."""
from .analytic import GaugeChi, SolenoidSpec
from .fields import Disk, Grid2, PotentialState, ScalarField2, VectorField2
from .gauge import Label, apply_narrow, apply_wide, classify_equivalence, coulomb_project
from .interferometry import InterferometerSpec, LoopPath, OpenPath, line_integral_A
from .propagation import FDTDState, fdtd_lorenz_step, switch_on_scenario

__version__ = "0.1.0"

__all__ = [
    "Disk", "FDTDState", "GaugeChi", "Grid2", "InterferometerSpec", "Label", "LoopPath",
    "OpenPath", "PotentialState", "ScalarField2", "SolenoidSpec", "VectorField2",
    "apply_narrow", "apply_wide", "classify_equivalence", "coulomb_project",
    "fdtd_lorenz_step", "line_integral_A", "switch_on_scenario",
]
