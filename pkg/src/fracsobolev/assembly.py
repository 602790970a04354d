"""P1 finite-element matrices and subdomain restriction/extension."""

from __future__ import annotations

import numpy as np

from .errors import NonzeroTrace
from .funcspec import P1Function
from .mesh import Mesh1D, Partition

__all__ = [
    "mass_matrix",
    "stiffness_matrix",
    "restrict",
    "zero_extension",
]


def _assemble(mesh: Mesh1D, local: np.ndarray, scale: np.ndarray) -> np.ndarray:
    n = mesh.n_nodes
    mat = np.zeros((n, n))
    k = np.arange(mesh.n_elems)
    for a in range(2):
        for b in range(2):
            np.add.at(mat, (k + a, k + b), scale * local[a, b])
    return mat


def mass_matrix(mesh: Mesh1D, dirichlet: bool = False, lumped: bool = False) -> np.ndarray:
    """P1 mass matrix, element block ``h/6 [[2, 1], [1, 2]]``.

    ``lumped`` replaces it by its row sums (an M-matrix-friendly diagonal).
    ``dirichlet`` drops the first and last rows/columns.
    """
    mat = _assemble(mesh, np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0, mesh.h)
    if lumped:
        mat = np.diag(mat.sum(axis=1))
    return mat[1:-1, 1:-1] if dirichlet else mat


def stiffness_matrix(mesh: Mesh1D, dirichlet: bool = False) -> np.ndarray:
    """P1 stiffness matrix, element block ``1/h [[1, -1], [-1, 1]]``."""
    mat = _assemble(mesh, np.array([[1.0, -1.0], [-1.0, 1.0]]), 1.0 / mesh.h)
    return mat[1:-1, 1:-1] if dirichlet else mat


def restrict(u: P1Function, partition: Partition, j: int) -> P1Function:
    """``u`` restricted to subdomain ``j``, as a function on the subdomain mesh."""
    if u.mesh is not partition.mesh and not np.array_equal(u.mesh.nodes, partition.mesh.nodes):
        raise ValueError("function and partition live on different meshes")
    i0, i1 = partition.node_ranges[j]
    return P1Function(partition.submesh(j), u.values[i0 : i1 + 1])


def zero_extension(u_local: P1Function, partition: Partition, j: int, tol: float = 1e-12) -> P1Function:
    """Extend a subdomain function by zero to the whole mesh.

    The local function has to vanish at the subdomain end points, otherwise
    the extension would not be continuous.
    """
    i0, i1 = partition.node_ranges[j]
    if u_local.mesh.n_nodes != i1 - i0 + 1 or not np.allclose(
        u_local.mesh.nodes, partition.mesh.nodes[i0 : i1 + 1], rtol=0, atol=1e-14
    ):
        raise ValueError(f"local mesh does not match subdomain {j}")
    ends = (u_local.values[0], u_local.values[-1])
    if max(abs(ends[0]), abs(ends[1])) > tol:
        raise NonzeroTrace(f"function does not vanish on the boundary of subdomain {j}: {ends}")
    vals = np.zeros(partition.mesh.n_nodes)
    vals[i0 + 1 : i1] = u_local.values[1:-1]
    return P1Function(partition.mesh, vals)
