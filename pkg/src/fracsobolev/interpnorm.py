"""K-functional, restricted K-functional and discrete interpolation norms.

Everything is expressed in the mass-orthonormal eigenbasis of the Dirichlet
pair (stiffness, mass) of a P1 mesh. With coefficients ``c_i`` of ``u`` in
that basis::

    K(t, u)^2         = sum_i c_i^2 t^2 lam_i / (1 + t^2 lam_i)
    int_0^inf |t^-theta K(t, u)|^2 dt / t
                      = pi / (2 sin(pi theta)) * sum_i c_i^2 lam_i^theta
"""

from __future__ import annotations

import math
import threading
import warnings
from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .assembly import mass_matrix, restrict, stiffness_matrix
from .errors import (
    BasisMismatch,
    GridTooCoarse,
    NonzeroTrace,
    SolveFailure,
    ThetaOutOfRange,
)
from .funcspec import FunctionExpr, P1Function
from .mesh import Interval, Mesh1D, Partition
from .numerics import QuadSpec, SpectralBasis, adaptive_quad, generalized_eig

__all__ = [
    "KCurve",
    "Splitting",
    "SlowDecay",
    "dirichlet_basis",
    "k_functional",
    "k_minimizer",
    "k1_functional",
    "leakage",
    "k_curve",
    "interp_norm_sq",
    "interp_norm_sq_tquad",
    "subdomain_interp_norm_sq",
    "fourier_sine_norm_sq",
    "spectral_norm_factor",
]

TRACE_TOL = 1e-12


class SlowDecay(UserWarning):
    """The truncated sine series has not decayed far enough."""


@dataclass
class KCurve:
    t_values: np.ndarray
    K: np.ndarray
    K1: np.ndarray | None = None
    leakage: np.ndarray | None = None


@dataclass
class Splitting:
    u0: P1Function
    u1: P1Function


# --------------------------------------------------------------------------
# bases

_CACHE_SIZE = 32
_basis_cache: "OrderedDict[tuple, SpectralBasis]" = OrderedDict()
_cache_lock = threading.Lock()


def dirichlet_basis(mesh: Mesh1D, lumped: bool = False) -> SpectralBasis:
    """Mass-orthonormal eigenbasis of the Dirichlet pair on ``mesh`` (cached by node set)."""
    key = (mesh.nodes.tobytes(), bool(lumped))
    with _cache_lock:
        if key in _basis_cache:
            _basis_cache.move_to_end(key)
            return _basis_cache[key]
    if mesh.n_nodes < 3:
        raise BasisMismatch("a Dirichlet basis needs at least one interior node")
    basis = generalized_eig(stiffness_matrix(mesh, dirichlet=True),
                            mass_matrix(mesh, dirichlet=True, lumped=lumped))
    with _cache_lock:
        _basis_cache[key] = basis
        while len(_basis_cache) > _CACHE_SIZE:
            _basis_cache.popitem(last=False)
    return basis


def _interior(u: P1Function) -> np.ndarray:
    ends = (u.values[0], u.values[-1])
    if max(abs(ends[0]), abs(ends[1])) > TRACE_TOL:
        raise NonzeroTrace(f"u does not vanish at the mesh end points: {ends}")
    return u.values[1:-1]


def _coefficients(u: P1Function, basis: SpectralBasis | None, lumped: bool = False):
    if basis is None:
        basis = dirichlet_basis(u.mesh, lumped)
    if basis.size != u.mesh.n_nodes - 2:
        raise BasisMismatch(
            f"basis has {basis.size} modes but the mesh has {u.mesh.n_nodes - 2} interior nodes"
        )
    return basis.coefficients(_interior(u)), basis.eigenvalues


def _k_sq(t, coeffs: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """``K(t)^2`` for a scalar or an array of ``t`` values."""
    t2 = np.square(np.asarray(t, dtype=float))[..., None]
    c2 = coeffs ** 2
    return np.sum(c2 * (t2 * lam) / (1.0 + t2 * lam), axis=-1)


# --------------------------------------------------------------------------
# K-functionals


def k_functional(t: float, u: P1Function, basis: SpectralBasis | None = None,
                 lumped: bool = False) -> float:
    """``K(t, u)``: the minimal ``(||u0||^2 + t^2 |u1|_1^2)^(1/2)`` over ``u = u0 + u1``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    c, lam = _coefficients(u, basis, lumped)
    return float(np.sqrt(_k_sq(t, c, lam)))


def _tridiag_solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    ab = np.zeros((3, n))
    ab[0, 1:] = np.diagonal(mat, 1)
    ab[1] = np.diagonal(mat)
    ab[2, :-1] = np.diagonal(mat, -1)
    try:
        x = scipy.linalg.solve_banded((1, 1), ab, rhs)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolveFailure(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SolveFailure("non-finite solution of the minimiser system")
    return x


def k_minimizer(t: float, u: P1Function, mesh: Mesh1D | None = None,
                lumped: bool = False) -> Splitting:
    """The splitting that attains ``K(t, u)``.

    ``u1`` solves ``(M + t^2 A) u1 = M u`` on the interior nodes, which is
    the discrete weak form of ``-t^2 u1'' + u1 = u`` with ``u1 = 0`` on the
    boundary. With ``lumped=True`` the system matrix is an M-matrix, so a
    non-negative ``u`` gives a non-negative ``u1``.
    """
    mesh = u.mesh if mesh is None else mesh
    if mesh is not u.mesh and not np.array_equal(mesh.nodes, u.mesh.nodes):
        raise BasisMismatch("u is not defined on the given mesh")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    u_int = _interior(u)
    m = mass_matrix(mesh, dirichlet=True, lumped=lumped)
    a = stiffness_matrix(mesh, dirichlet=True)
    u1_int = _tridiag_solve(m + t * t * a, m @ u_int)
    u1 = np.zeros(mesh.n_nodes)
    u1[1:-1] = u1_int
    return Splitting(P1Function(mesh, u.values - u1), P1Function(mesh, u1))


def splitting_energy(t: float, split: Splitting, lumped: bool = False) -> float:
    """``||u0||^2 + t^2 |u1|_1^2`` for a splitting on a Dirichlet mesh."""
    mesh = split.u0.mesh
    m = mass_matrix(mesh, lumped=lumped)
    a = stiffness_matrix(mesh)
    u0, u1 = split.u0.values, split.u1.values
    return float(u0 @ m @ u0 + t * t * (u1 @ a @ u1))


def _check_supported(u: P1Function, partition: Partition, j: int):
    if u.mesh is not partition.mesh and not np.array_equal(u.mesh.nodes, partition.mesh.nodes):
        raise BasisMismatch("u and the partition live on different meshes")
    i0, i1 = partition.node_ranges[j]
    outside = np.concatenate([u.values[: i0 + 1], u.values[i1:]])
    if outside.size and np.max(np.abs(outside)) > TRACE_TOL:
        raise NonzeroTrace(f"u does not vanish outside the interior of subdomain {j}")


def k1_functional(t: float, u: P1Function, partition: Partition, j: int,
                  lumped: bool = False) -> float:
    """K-functional with both splitting parts supported in subdomain ``j``."""
    _check_supported(u, partition, j)
    local = restrict(u, partition, j)
    if local.mesh.n_nodes < 3:
        return 0.0
    return k_functional(t, local, dirichlet_basis(local.mesh, lumped))


def leakage(t: float, u: P1Function, partition: Partition, j: int, lumped: bool = True) -> float:
    """Largest ``|u1|`` of the unrestricted minimiser at nodes outside subdomain ``j``."""
    _check_supported(u, partition, j)
    u1 = k_minimizer(t, u, lumped=lumped).u1.values
    i0, i1 = partition.node_ranges[j]
    outside = np.concatenate([u1[:i0], u1[i1 + 1 :]])
    return float(np.max(np.abs(outside))) if outside.size else 0.0


def k_curve(u: P1Function, t_values: Sequence[float], partition: Partition | None = None,
            j: int | None = None, lumped: bool = False) -> KCurve:
    """``K`` on a t-grid, plus ``K1`` and leakage when a subdomain is given."""
    t = np.asarray(t_values, dtype=float)
    if t.ndim != 1 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ValueError("t_values must be ascending positive reals")
    c, lam = _coefficients(u, None, lumped)
    k = np.sqrt(_k_sq(t, c, lam))
    if partition is None:
        return KCurve(t, k)
    _check_supported(u, partition, j)
    local = restrict(u, partition, j)
    lc, llam = _coefficients(local, None, lumped)
    k1 = np.sqrt(_k_sq(t, lc, llam))
    leak = np.array([leakage(ti, u, partition, j, lumped=lumped) for ti in t])
    return KCurve(t, k, k1, leak)


# --------------------------------------------------------------------------
# interpolation norms


def _check_theta(theta: float):
    if not 0.0 < theta < 1.0:
        raise ThetaOutOfRange(f"theta must lie in (0, 1), got {theta}")


def spectral_norm_factor(theta: float) -> float:
    """``int_0^inf t^(1 - 2 theta) / (1 + t^2) dt = pi / (2 sin(pi theta))``."""
    _check_theta(theta)
    return math.pi / (2.0 * math.sin(math.pi * theta))


def interp_norm_sq(u: P1Function, theta: float, basis: SpectralBasis | None = None,
                   lumped: bool = False) -> float:
    """``int_0^inf |t^-theta K(t, u)|^2 dt / t`` evaluated mode by mode."""
    _check_theta(theta)
    c, lam = _coefficients(u, basis, lumped)
    return float(spectral_norm_factor(theta) * np.sum(c ** 2 * lam ** theta))


def _default_grid(lam: np.ndarray, points_per_decade: int) -> np.ndarray:
    lo = math.log10(0.01 / math.sqrt(lam[-1]))
    hi = math.log10(100.0 / math.sqrt(lam[0]))
    n = int(math.ceil((hi - lo) * points_per_decade)) + 1
    return np.logspace(lo, hi, n)


def interp_norm_sq_tquad(u: P1Function, theta: float, basis: SpectralBasis | None = None,
                         grid: Sequence[float] | None = None, points_per_decade: int = 64,
                         rel_tol: float = 1e-4) -> float:
    """The same norm by trapezoidal quadrature in ``log t`` with analytic tails.

    The grid must be log-uniform, cover ``[0.01/sqrt(lam_max), 100/sqrt(lam_min)]``
    and carry at least 64 points per decade. The result is compared with
    :func:`interp_norm_sq`; ``GridTooCoarse`` is raised if they differ by
    more than ``rel_tol``.
    """
    _check_theta(theta)
    c, lam = _coefficients(u, basis)
    if grid is None:
        if points_per_decade < 64:
            raise GridTooCoarse(f"{points_per_decade} points per decade is below 64")
        t = _default_grid(lam, points_per_decade)
    else:
        t = np.asarray(grid, dtype=float)
        if t.size < 2:
            raise GridTooCoarse("the t-grid needs at least two points")
        s = np.log(t)
        step = np.diff(s)
        if np.any(step <= 0) or np.ptp(step) > 1e-8 * step.mean():
            raise GridTooCoarse("the t-grid must be ascending and log-uniform")
        if step.mean() > math.log(10.0) / 64 * (1 + 1e-9):
            raise GridTooCoarse("the t-grid has fewer than 64 points per decade")
        if t[0] > 0.01 / math.sqrt(lam[-1]) * (1 + 1e-9) or t[-1] < 100.0 / math.sqrt(lam[0]) * (1 - 1e-9):
            raise GridTooCoarse("the t-grid does not span [0.01/sqrt(lam_max), 100/sqrt(lam_min)]")
    s = np.log(t)
    integrand = np.exp(-2.0 * theta * s) * _k_sq(t, c, lam)
    body = float(np.sum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(s)))
    c2 = c ** 2
    t_lo, t_hi = t[0], t[-1]
    small = float(np.sum(c2 * lam ** theta * (t_lo * np.sqrt(lam)) ** (2 - 2 * theta))) / (2 - 2 * theta)
    large = float(np.sum(c2)) * t_hi ** (-2 * theta) / (2 * theta)
    value = body + small + large
    exact = float(spectral_norm_factor(theta) * np.sum(c2 * lam ** theta))
    if abs(value - exact) > rel_tol * abs(exact):
        raise GridTooCoarse(
            f"t-quadrature {value!r} and closed form {exact!r} differ by more than {rel_tol:g}"
        )
    return value


def subdomain_interp_norm_sq(u: P1Function, theta: float, partition: Partition, j: int,
                             lumped: bool = False) -> float:
    """Norm of ``u`` restricted to subdomain ``j`` in that subdomain's own basis."""
    local = restrict(u, partition, j)
    if local.mesh.n_nodes < 3:
        return 0.0
    return interp_norm_sq(local, theta, dirichlet_basis(local.mesh, lumped))


# --------------------------------------------------------------------------
# continuous sine-series oracle


def fourier_sine_coefficients(expr, n_modes: int, spec: QuadSpec | None = None) -> np.ndarray:
    """``b_k = sqrt(2) int_0^1 f(x) sin(k pi x) dx`` for ``k = 1..n_modes``."""
    spec = QuadSpec(abs_tol=1e-14, rel_tol=1e-12) if spec is None else spec
    if isinstance(expr, FunctionExpr):
        expr = expr.on(Interval(0.0, 1.0))
        bps = [p for p in expr.breakpoints if 0.0 < p < 1.0]
    else:
        bps = []
    out = np.empty(n_modes)
    for k in range(1, n_modes + 1):
        # split at the zeros of the sine as well so each cell sees one hump
        pts = sorted({*bps, *(np.arange(1, k) / k).tolist()})
        res = adaptive_quad(lambda x, k=k: expr(x) * np.sin(k * np.pi * x), 0.0, 1.0, spec, points=pts)
        out[k - 1] = math.sqrt(2.0) * res.value
    return out


def fourier_sine_norm_sq(expr, theta: float, n_modes: int = 64, spec: QuadSpec | None = None) -> float:
    """Continuous interpolation norm on ``(0, 1)`` from the exact sine eigenpairs."""
    _check_theta(theta)
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    b = fourier_sine_coefficients(expr, n_modes, spec)
    k = np.arange(1, n_modes + 1)
    terms = b ** 2 * (k * k * math.pi ** 2) ** theta
    total = float(spectral_norm_factor(theta) * np.sum(terms))
    if total > 0 and spectral_norm_factor(theta) * terms[-1] > 1e-8 * total:
        warnings.warn(
            f"last sine mode contributes {terms[-1] / np.sum(terms):.2e} of the total",
            SlowDecay,
            stacklevel=2,
        )
    return total
