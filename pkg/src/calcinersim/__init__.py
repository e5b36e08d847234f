"""calcinersim: 1D finite-volume dynamic calciner simulator (index-1 DAE)."""

from .geometry import GeometrySpec, SegmentGeometry, segment_partition
from .kinetics import KineticsModel
from .model import BoundarySpec, CalcinerModel, Stream
from .scenario import (ScenarioError, ScenarioSpec, build_simulation,
                       load_scenario)
from .solver import (DaeIntegrator, SolverConfig, SolverFailure, Trajectory,
                     consistent_init)
from .species import (ALL_SPECIES, GASES, SOLIDS, PropertyDataError,
                      SpeciesTable, load_species_table, stoichiometry)
from .thermo import ThermoModel
from .transport import WSGGModel

__version__ = "0.1.0"

__all__ = [
    "ALL_SPECIES", "GASES", "SOLIDS",
    "BoundarySpec", "CalcinerModel", "DaeIntegrator", "GeometrySpec",
    "KineticsModel", "PropertyDataError", "ScenarioError", "ScenarioSpec",
    "SegmentGeometry", "SolverConfig", "SolverFailure", "SpeciesTable",
    "Stream", "ThermoModel", "Trajectory", "WSGGModel",
    "build_simulation", "consistent_init", "load_scenario",
    "load_species_table", "segment_partition", "stoichiometry",
]
