"""Entanglement sudden death of two driven, dipole-coupled qubits with independent decay."""

__version__ = "0.1.0"

from .dynamics import (
    Generator,
    SystemParams,
    Trajectory,
    integrate,
    rhs_rotating_frame,
    rhs_secular,
    rhs_thermal_undriven,
)
from .entanglement import (
    ConcurrenceTrace,
    EsdReport,
    concurrence,
    concurrence_general,
    concurrence_x,
    detect_esd,
)
from .scan import ScanConfig, ScanResult, Status, compare_models, evaluate_cell, run_scan
from .xstate import EeGg, EgGe, Werner, XState, YE, closed_form, evolve_kinetic, make_initial

__all__ = [
    "Generator",
    "SystemParams",
    "Trajectory",
    "integrate",
    "rhs_rotating_frame",
    "rhs_secular",
    "rhs_thermal_undriven",
    "ConcurrenceTrace",
    "EsdReport",
    "concurrence",
    "concurrence_general",
    "concurrence_x",
    "detect_esd",
    "ScanConfig",
    "ScanResult",
    "Status",
    "compare_models",
    "evaluate_cell",
    "run_scan",
    "Werner",
    "YE",
    "EgGe",
    "EeGg",
    "XState",
    "closed_form",
    "evolve_kinetic",
    "make_initial",
]
