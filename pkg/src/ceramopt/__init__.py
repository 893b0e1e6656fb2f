"""Failure-probability shape optimisation of plane ceramic parts."""

from .adjoint import ShapeGradient, adjoint_contraction, dj_du, dj_dx_partial, shape_gradient, validate_fd
from .fem import ElasticState, LoadCase, Material, assemble_load, assemble_stiffness, element_stress, solve_state
from .mesh import Mesh, extract_theta, generate_joint, generate_rod, morph, morph_jacobian, volume, volume_gradient
from .objective import ObjectiveReport, WeibullParams, angular_integral, evaluate_objective, survival_curve

__all__ = [
    "ElasticState",
    "LoadCase",
    "Material",
    "Mesh",
    "ObjectiveReport",
    "ShapeGradient",
    "WeibullParams",
    "adjoint_contraction",
    "angular_integral",
    "assemble_load",
    "assemble_stiffness",
    "dj_du",
    "dj_dx_partial",
    "element_stress",
    "evaluate_objective",
    "extract_theta",
    "generate_joint",
    "generate_rod",
    "morph",
    "morph_jacobian",
    "shape_gradient",
    "solve_state",
    "survival_curve",
    "validate_fd",
    "volume",
    "volume_gradient",
]
