"""Numerical fractional Sobolev norms on intervals.

Two routes to the order-``s`` norm are provided: the real-interpolation
norm of a P1 function, computed from the generalized eigenproblem of the
Dirichlet stiffness and mass matrices, and the Slobodetskij double integral
plus its boundary-distance weighted term, computed by singularity-aware
quadrature. Around them sit partition and support experiments and a
boundary-element model of a screen problem with Schwarz preconditioning.
"""

from .errors import FracSobolevError
from .mesh import Interval, Mesh1D, Partition, align_partition, graded_mesh, uniform_mesh
from .funcspec import P1Function, interpolate_p1, parse_expr, u_eps
from .assembly import mass_matrix, restrict, stiffness_matrix, zero_extension
from .interpnorm import (
    interp_norm_sq,
    interp_norm_sq_tquad,
    k1_functional,
    k_functional,
    subdomain_interp_norm_sq,
)
from .slobodetskij import NormReport, seminorm_sq, tilde_norm_sq, weighted_sq

__version__ = "0.1.0"

__all__ = [
    "FracSobolevError",
    "Interval",
    "Mesh1D",
    "Partition",
    "uniform_mesh",
    "graded_mesh",
    "align_partition",
    "P1Function",
    "interpolate_p1",
    "parse_expr",
    "u_eps",
    "mass_matrix",
    "stiffness_matrix",
    "restrict",
    "zero_extension",
    "interp_norm_sq",
    "interp_norm_sq_tquad",
    "k_functional",
    "k1_functional",
    "subdomain_interp_norm_sq",
    "NormReport",
    "seminorm_sq",
    "weighted_sq",
    "tilde_norm_sq",
]
