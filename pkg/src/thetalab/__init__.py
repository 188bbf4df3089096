"""Exact scattering diagrams, broken lines and theta functions for cluster algebras."""

from .broken_lines import BrokenLine, ThetaResult, enumerate_broken_lines, mutate_theta, theta, theta_closed
from .lattice import ExtendedExchangeMatrix, mutation_map
from .scattering import ScatteringDiagram, build_scattering_diagram, mutate_diagram
from .series import GradedElement, TruncatedSeries

__all__ = [
    "BrokenLine",
    "ExtendedExchangeMatrix",
    "GradedElement",
    "ScatteringDiagram",
    "ThetaResult",
    "TruncatedSeries",
    "build_scattering_diagram",
    "enumerate_broken_lines",
    "mutate_diagram",
    "mutate_theta",
    "mutation_map",
    "theta",
    "theta_closed",
]
