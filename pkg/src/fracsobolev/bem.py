"""Hypersingular Galerkin matrix on a 1-D screen and its preconditioning.

The screen is ``(-1, 1)`` and the bilinear form is the 2-D Laplace analogue::

    a(phi, psi) = 1/(2 pi) iint phi'(x) psi'(y) log(1 / |x - y|) dx dy

discretised with P1 hat functions on the interior nodes. Its energy space is
the tilde space of order 1/2, so the condition number grows like ``M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateInterval,
    MaxIterExceeded,
    NonzeroTrace,
    SingularBlock,
)
from .funcspec import P1Function, interpolate_p1, random_sine_sum
from .interpnorm import interp_norm_sq, subdomain_interp_norm_sq
from .mesh import Interval, Mesh1D, Partition, align_partition, uniform_mesh
from .numerics import as_sym_matrix, fit_loglog_slope, gauss_legendre

__all__ = [
    "SCREEN",
    "BemSystem",
    "PrecondSpec",
    "Preconditioner",
    "CgStats",
    "log_double_integral",
    "assemble_hypersingular",
    "screen_system",
    "condition_number",
    "condition_study",
    "build_preconditioner",
    "preconditioned_spectrum",
    "pcg",
    "load_vector",
    "galerkin_energies",
    "energy_norm_ratios",
    "decomposition_constants",
    "misconception_table",
]

SCREEN = Interval(-1.0, 1.0)


# --------------------------------------------------------------------------
# assembly


def _g(z):
    """Second antiderivative of ``log|z|``: ``z^2 log|z| / 2 - 3 z^2 / 4`` (0 at 0)."""
    z = np.asarray(z, dtype=np.longdouble)
    az = np.abs(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(az > 0, 0.5 * z * z * np.log(np.where(az > 0, az, 1)) - 0.75 * z * z, 0)
    return val


def log_double_integral(a, b, c, d):
    """``int_a^b int_c^d log|x - y| dy dx`` in closed form (broadcasts over arrays)."""
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    if np.any(b <= a) or np.any(d <= c):
        raise DegenerateInterval("each interval needs left < right")
    val = _g(b - c) - _g(a - c) - _g(b - d) + _g(a - d)
    out = val.astype(float)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class BemSystem:
    mesh: Mesh1D
    matrix: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def energy(self, x: np.ndarray) -> float:
        return float(x @ self.matrix @ x)


def _element_slopes(mesh: Mesh1D) -> np.ndarray:
    """``D[K, i]`` = derivative of interior hat ``i`` on element ``K``."""
    ne = mesh.n_elems
    h = mesh.h
    d = np.zeros((ne, ne - 1))
    k = np.arange(ne)
    left = k - 1  # hat at node K (interior index K-1) falls on element K
    right = k  # hat at node K+1 (interior index K) rises on element K
    ok = left >= 0
    d[k[ok], left[ok]] = -1.0 / h[ok]
    ok = right <= ne - 2
    d[k[ok], right[ok]] = 1.0 / h[ok]
    return d


def assemble_hypersingular(mesh: Mesh1D) -> BemSystem:
    """Dense Galerkin matrix on the interior hats of ``mesh``."""
    if mesh.n_elems < 2:
        raise ValueError("the screen mesh needs at least two elements")
    x = mesh.nodes
    a, b = x[:-1, None], x[1:, None]
    c, d = x[None, :-1], x[None, 1:]
    elem = -log_double_integral(
        np.broadcast_to(a, (a.size, c.size)), np.broadcast_to(b, (a.size, c.size)),
        np.broadcast_to(c, (a.size, c.size)), np.broadcast_to(d, (a.size, c.size)),
    ) / (2.0 * math.pi)
    elem = 0.5 * (elem + elem.T)
    slopes = _element_slopes(mesh)
    mat = slopes.T @ elem @ slopes
    mat = 0.5 * (mat + mat.T)
    return BemSystem(mesh, mat)


def screen_system(n_elems: int) -> BemSystem:
    """System on a uniform mesh of the screen with ``n_elems - 1`` unknowns."""
    return assemble_hypersingular(uniform_mesh(SCREEN, n_elems))


# --------------------------------------------------------------------------
# conditioning


def condition_number(matrix) -> float:
    """``lam_max / lam_min`` of a symmetric positive definite matrix."""
    lam = scipy.linalg.eigvalsh(as_sym_matrix(matrix))
    if lam[0] <= 0:
        raise np.linalg.LinAlgError("matrix is not positive definite")
    return float(lam[-1] / lam[0])


def condition_study(m_list: Sequence[int]):
    """``kappa(A_M)`` for each number of unknowns ``M`` and the fitted log-log slope."""
    m_list = [int(m) for m in m_list]
    if len(m_list) < 3 or any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("M_list must be ascending with at least three entries")
    records = []
    for m in m_list:
        system = screen_system(m + 1)
        lam = scipy.linalg.eigvalsh(system.matrix)
        records.append({"M": m, "lambda_min": float(lam[0]), "lambda_max": float(lam[-1]),
                        "kappa": float(lam[-1] / lam[0])})
    fit = fit_loglog_slope([(r["M"], r["kappa"]) for r in records])
    return records, fit


# --------------------------------------------------------------------------
# preconditioners


@dataclass(frozen=True)
class PrecondSpec:
    kind: str = "none"
    partition: Partition | None = None
    coarse: bool = False

    def __post_init__(self):
        if self.kind not in ("none", "jacobi", "additive_schwarz"):
            raise ValueError(f"unknown preconditioner kind {self.kind!r}")
        if self.kind == "additive_schwarz" and self.partition is None:
            raise ValueError("additive Schwarz needs a partition")


@dataclass(eq=False)
class Preconditioner:
    """``C^-1 = sum_j R_j^T A_j^-1 R_j`` as a list of (restriction, factor) pairs.

    ``none`` has no blocks and applies the identity.
    """

    kind: str
    size: int
    blocks: list = field(default_factory=list)

    def __post_init__(self):
        # 1x1 blocks are applied together as a diagonal scaling
        self._diag_idx = np.array([rows[0] for rows, _ in self.blocks if _is_singleton(rows)], dtype=int)
        self._diag_inv = np.array([1.0 / f[0][0, 0] ** 2 for rows, f in self.blocks if _is_singleton(rows)])
        self._multi = [(rows, f) for rows, f in self.blocks if not _is_singleton(rows)]

    def apply(self, r: np.ndarray) -> np.ndarray:
        if self.kind == "none":
            return np.array(r, dtype=float, copy=True)
        r = np.asarray(r, dtype=float)
        out = np.zeros(self.size)
        np.add.at(out, self._diag_idx, self._diag_inv * r[self._diag_idx])
        for rows, factor in self._multi:
            if isinstance(rows, np.ndarray) and rows.ndim == 1:
                out[rows] += scipy.linalg.cho_solve(factor, r[rows])
            else:
                out += rows.T @ scipy.linalg.cho_solve(factor, rows @ r)
        return out

    __call__ = apply

    def matrix(self) -> np.ndarray:
        """Dense ``C^-1``."""
        return np.column_stack([self.apply(e) for e in np.eye(self.size)])


def _is_singleton(rows) -> bool:
    return isinstance(rows, np.ndarray) and rows.ndim == 1 and rows.size == 1


def _factor(block: np.ndarray, label: str):
    try:
        return scipy.linalg.cho_factor(block, lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularBlock(f"{label} is not positive definite") from exc


def coarse_basis(partition: Partition) -> np.ndarray:
    """Rows are nodal values (interior nodes) of one hat per interface point.

    Each hat is piecewise linear on the mesh ``[left, breakpoints..., right]``.
    """
    mesh = partition.mesh
    coarse_nodes = np.array([mesh.domain.left, *partition.breakpoints, mesh.domain.right])
    rows = []
    for k in range(1, coarse_nodes.size - 1):
        vals = np.zeros(coarse_nodes.size)
        vals[k] = 1.0
        rows.append(np.interp(mesh.nodes, coarse_nodes, vals)[1:-1])
    return np.array(rows).reshape(len(rows), mesh.n_nodes - 2)


def build_preconditioner(system: BemSystem, spec: PrecondSpec) -> Preconditioner:
    a = system.matrix
    n = system.size
    if spec.kind == "none":
        return Preconditioner("none", n)
    if spec.kind == "jacobi":
        blocks = [(np.array([i]), _factor(a[i : i + 1, i : i + 1], f"diagonal entry {i}")) for i in range(n)]
        return Preconditioner("jacobi", n, blocks)
    part = spec.partition
    if part.mesh is not system.mesh and not np.array_equal(part.mesh.nodes, system.mesh.nodes):
        raise ValueError("partition and system use different meshes")
    blocks = []
    for j in range(part.n_sub):
        dofs = part.interior_nodes(j) - 1
        if dofs.size:
            blocks.append((dofs, _factor(a[np.ix_(dofs, dofs)], f"subdomain block {j}")))
    if spec.coarse:
        r0 = coarse_basis(part)
        if r0.shape[0]:
            blocks.append((r0, _factor(r0 @ a @ r0.T, "coarse block")))
    else:
        for i in part.interface_nodes - 1:
            blocks.append((np.array([i]), _factor(a[i : i + 1, i : i + 1], f"interface entry {i}")))
    return Preconditioner("additive_schwarz", n, blocks)


def preconditioned_spectrum(system: BemSystem, precond: Preconditioner) -> np.ndarray:
    """Eigenvalues of ``C^-1 A`` (via the symmetric form ``L^T A L``, ``C^-1 = L L^T``)."""
    cinv = precond.matrix()
    cinv = 0.5 * (cinv + cinv.T)
    low = scipy.linalg.cholesky(cinv, lower=True)
    return scipy.linalg.eigvalsh(low.T @ system.matrix @ low)


# --------------------------------------------------------------------------
# conjugate gradients


@dataclass
class CgStats:
    iterations: int
    residual_norms: list
    a_norm_errors: list | None = None
    kappa_estimate: float | None = None
    converged: bool = False
    bound_holds: bool | None = None
    sqrt_bound_holds: bool | None = None
    solution: np.ndarray | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual_norms": list(self.residual_norms),
            "a_norm_errors": None if self.a_norm_errors is None else list(self.a_norm_errors),
            "kappa_estimate": self.kappa_estimate,
            "converged": self.converged,
            "bound_holds": self.bound_holds,
            "sqrt_bound_holds": self.sqrt_bound_holds,
        }


def cg_bound(kappa: float, k, sqrt_form: bool = False):
    """``2 ((q - 1)/(q + 1))^k`` with ``q = kappa`` (or ``sqrt(kappa)``)."""
    q = math.sqrt(kappa) if sqrt_form else kappa
    return 2.0 * ((q - 1.0) / (q + 1.0)) ** np.asarray(k, dtype=float)


def pcg(system: BemSystem, b: np.ndarray, precond: Preconditioner | None = None,
        tol: float = 1e-10, max_iter: int | None = None,
        x_true: np.ndarray | None = None) -> CgStats:
    """Preconditioned conjugate gradients from ``x0 = 0``.

    Stops when ``||r_k|| <= tol ||b||``. With ``x_true`` the A-norm errors are
    recorded and compared against ``2((kappa-1)/(kappa+1))^k ||x_true||_A``,
    with ``kappa`` the spectral condition number of ``C^-1 A``.
    """
    a = system.matrix
    n = system.size
    precond = build_preconditioner(system, PrecondSpec()) if precond is None else precond
    max_iter = 10 * n if max_iter is None else max_iter
    b = np.asarray(b, dtype=float)
    x = np.zeros(n)
    r = b.copy()
    z = precond.apply(r)
    p = z.copy()
    rz = float(r @ z)
    b_norm = float(np.linalg.norm(b))
    residuals = [b_norm]
    errors = None
    if x_true is not None:
        errors = [math.sqrt(max(float(x_true @ a @ x_true), 0.0))]
    converged = b_norm == 0.0
    k = 0
    while not converged and k < max_iter:
        ap = a @ p
        alpha = rz / float(p @ ap)
        x += alpha * p
        r -= alpha * ap
        k += 1
        res = float(np.linalg.norm(r))
        residuals.append(res)
        if errors is not None:
            e = x_true - x
            errors.append(math.sqrt(max(float(e @ a @ e), 0.0)))
        if res <= tol * b_norm:
            converged = True
            break
        z = precond.apply(r)
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    stats = CgStats(k, residuals, errors, converged=converged, solution=x)
    if errors is not None:
        lam = preconditioned_spectrum(system, precond)
        kappa = float(lam[-1] / lam[0])
        stats.kappa_estimate = kappa
        steps = np.arange(len(errors))
        e = np.asarray(errors)
        slack = 1e-12 * e[0]
        stats.bound_holds = bool(np.all(e <= cg_bound(kappa, steps) * e[0] + slack))
        stats.sqrt_bound_holds = bool(np.all(e <= cg_bound(kappa, steps, sqrt_form=True) * e[0] + slack))
    if not converged:
        raise MaxIterExceeded(f"CG did not reach tol={tol:g} in {max_iter} iterations", stats)
    return stats


# --------------------------------------------------------------------------
# studies built on the system


def load_vector(mesh: Mesh1D, g: Callable[[np.ndarray], np.ndarray], n_gauss: int = 8) -> np.ndarray:
    """``b_i = -<g, phi_i>`` for the interior hats, by Gauss quadrature per element."""
    xi, w = gauss_legendre(n_gauss)
    x0, h = mesh.nodes[:-1], mesh.h
    pts = x0[:, None] + h[:, None] * xi
    gv = np.asarray(g(pts), dtype=float) * w * h[:, None]
    rising = gv @ xi  # hat of the right node
    falling = gv @ (1.0 - xi)  # hat of the left node
    b = np.zeros(mesh.n_nodes)
    b[1:] += rising
    b[:-1] += falling
    return -b[1:-1]


def galerkin_energies(levels: Sequence[int], g: Callable[[np.ndarray], np.ndarray]):
    """Discrete energy ``a(phi_M, phi_M)`` on nested uniform meshes of ``2^level`` elements."""
    out = []
    for lev in levels:
        system = screen_system(2 ** int(lev))
        b = load_vector(system.mesh, g)
        x = scipy.linalg.solve(system.matrix, b, assume_a="pos")
        out.append({"level": int(lev), "M": system.size, "energy": float(b @ x)})
    return out


def _random_dirichlet_function(rng, mesh: Mesh1D, zero_at=()) -> P1Function:
    expr = random_sine_sum(rng, mesh.domain)
    u = interpolate_p1(expr, mesh, dirichlet=True)
    vals = u.values.copy()
    vals[list(zero_at)] = 0.0
    return P1Function(mesh, vals)


def energy_norm_ratios(system: BemSystem, trials: int, rng) -> np.ndarray:
    """``a(u, u) / interp_norm_sq(u, 1/2)`` for seeded random ``u``."""
    ratios = []
    for _ in range(trials):
        u = _random_dirichlet_function(rng, system.mesh)
        x = u.values[1:-1]
        ratios.append(system.energy(x) / interp_norm_sq(u, 0.5))
    return np.array(ratios)


def decomposition_constants(system: BemSystem, partition: Partition, trials: int, rng) -> dict:
    """Empirical ratios ``a(u, u) / sum_j a(u_j, u_j)`` for interface-free ``u``.

    ``u_j`` is the zero extension of ``u`` restricted to subdomain ``j``.
    Because the splitting is unique, every ratio must lie inside the
    spectrum of ``C^-1 A`` for additive Schwarz without coarse space.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    a = system.matrix
    iface = partition.interface_nodes
    ratios = []
    for _ in range(trials):
        u = _random_dirichlet_function(rng, system.mesh, zero_at=iface)
        if np.any(np.abs(u.values[iface]) > 0):
            raise NonzeroTrace("random function does not vanish at the interface")
        x = u.values[1:-1]
        parts = 0.0
        for j in range(partition.n_sub):
            dofs = partition.interior_nodes(j) - 1
            xj = x[dofs]
            parts += float(xj @ a[np.ix_(dofs, dofs)] @ xj)
        ratios.append(float(x @ a @ x) / parts)
    ratios = np.array(ratios)
    precond = build_preconditioner(system, PrecondSpec("additive_schwarz", partition, coarse=False))
    lam = preconditioned_spectrum(system, precond)
    return {
        "n_sub": partition.n_sub,
        "trials": trials,
        "C1": float(ratios.min()),
        "C2": float(ratios.max()),
        "lambda_min": float(lam[0]),
        "lambda_max": float(lam[-1]),
        "kappa_precond": float(lam[-1] / lam[0]),
        "within_spectrum": bool(ratios.min() >= lam[0] * (1 - 1e-10) and ratios.max() <= lam[-1] * (1 + 1e-10)),
        "ratios": ratios,
    }


def misconception_table(n_elems: int, n_sub_list: Sequence[int], trials: int, rng, theta: float = 0.5):
    """Sum of subdomain norms in local bases vs global basis, as subdomains shrink.

    For each ``N`` the screen is cut into ``N`` equal pieces; ``u`` vanishes at
    the cuts. Reports the mean over trials of ``sum_local / global`` and
    ``sum_zero_ext / global``.
    """
    from .assembly import restrict, zero_extension

    mesh = uniform_mesh(SCREEN, n_elems)
    rows = []
    for n_sub in n_sub_list:
        bps = [SCREEN.left + SCREEN.diameter * k / n_sub for k in range(1, n_sub)]
        part = align_partition(mesh, bps)
        local_r, ext_r = [], []
        for _ in range(trials):
            u = _random_dirichlet_function(rng, mesh, zero_at=part.interface_nodes)
            whole = interp_norm_sq(u, theta)
            local = sum(subdomain_interp_norm_sq(u, theta, part, j) for j in range(n_sub))
            ext = sum(interp_norm_sq(zero_extension(restrict(u, part, j), part, j), theta)
                      for j in range(n_sub))
            local_r.append(local / whole)
            ext_r.append(ext / whole)
        rows.append({"N": n_sub, "local_over_global": float(np.mean(local_r)),
                     "zero_ext_over_global": float(np.mean(ext_r))})
    return rows
