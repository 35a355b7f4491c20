"""Critical points of Gaussian mixture densities located through the ridgeline manifold."""

from .errors import (
    CoincidentMeans,
    DegenerateFit,
    DimensionTooLarge,
    InvalidModel,
    NumericalFailure,
    TopographyError,
)
from .model import Component, Mixture, load_example, load_mixture, save_mixture, validate_mixture
from .piplot import modality_bands, solve_pi_equation
from .ridgeline import CriticalKind, CriticalPoint, elevation_profile, ridgeline_point
from .topo import full_topography, linkage_graph, supercomponents

__version__ = "0.1.0"

__all__ = [
    "CoincidentMeans",
    "Component",
    "CriticalKind",
    "CriticalPoint",
    "DegenerateFit",
    "DimensionTooLarge",
    "InvalidModel",
    "Mixture",
    "NumericalFailure",
    "TopographyError",
    "elevation_profile",
    "full_topography",
    "linkage_graph",
    "load_example",
    "load_mixture",
    "modality_bands",
    "ridgeline_point",
    "save_mixture",
    "solve_pi_equation",
    "supercomponents",
    "validate_mixture",
]
