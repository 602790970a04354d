"""Dense symmetric linear algebra and adaptive Gauss-Kronrod quadrature.

Everything here is a pure function of its inputs. Matrices are plain
``numpy.ndarray`` objects; :func:`as_sym_matrix` is the single gate that
checks the symmetric/finite contract before they are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Sequence

import numpy as np
import scipy.linalg
import scipy.special

from .errors import (
    DegenerateFit,
    DimensionMismatch,
    MaxDepthExceeded,
    NonFiniteSample,
    NotSPD,
)

__all__ = [
    "QuadSpec",
    "QuadResult",
    "SpectralBasis",
    "LogLogFit",
    "DEFAULT_QUAD",
    "as_sym_matrix",
    "generalized_eig",
    "adaptive_quad",
    "gauss_kronrod_cell",
    "fit_loglog_slope",
    "gauss_legendre",
    "power_weight_quad",
]

SYM_RTOL = 1e-14


def as_sym_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return ``a`` as a float array after checking it is square, finite and symmetric."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    scale = np.max(np.abs(a))
    if np.max(np.abs(a - a.T)) > SYM_RTOL * max(scale, 1e-300) * 10:
        raise ValueError(f"{name} is not symmetric")
    return a


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Eigenpairs of ``a x = lam m x``, orthonormal in the ``m`` inner product.

    ``modes[:, i]`` is the i-th eigenvector; ``gram`` is the matrix ``m``.
    """

    eigenvalues: np.ndarray
    modes: np.ndarray
    gram: np.ndarray

    @property
    def size(self) -> int:
        return self.eigenvalues.shape[0]

    def coefficients(self, u: np.ndarray) -> np.ndarray:
        """Mass-weighted projection ``modes.T @ gram @ u``."""
        u = np.asarray(u, dtype=float)
        if u.shape[0] != self.size:
            raise DimensionMismatch(f"vector of length {u.shape[0]} for a basis of size {self.size}")
        return self.modes.T @ (self.gram @ u)


def generalized_eig(a, m) -> SpectralBasis:
    """All eigenpairs of the symmetric-definite pencil ``(a, m)``.

    ``m`` is Cholesky-factored, the pencil is reduced to the standard problem
    ``L^-1 a L^-T`` and handed to LAPACK's symmetric solver.
    """
    a = as_sym_matrix(a, "a")
    m = as_sym_matrix(m, "m")
    if a.shape != m.shape:
        raise DimensionMismatch(f"a is {a.shape} but m is {m.shape}")
    try:
        chol = scipy.linalg.cholesky(m, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotSPD("m is not positive definite") from exc
    tmp = scipy.linalg.solve_triangular(chol, a, lower=True)
    reduced = scipy.linalg.solve_triangular(chol, tmp.T, lower=True)
    reduced = 0.5 * (reduced + reduced.T)
    lam, vecs = np.linalg.eigh(reduced)
    if lam[0] <= 0.0:
        raise NotSPD(f"a is not positive definite (smallest eigenvalue {lam[0]:.3e})")
    modes = scipy.linalg.solve_triangular(chol.T, vecs, lower=False)
    modes.setflags(write=False)
    lam.setflags(write=False)
    return SpectralBasis(eigenvalues=lam, modes=modes, gram=m)


# --------------------------------------------------------------------------
# Gauss-Kronrod 7/15 rule (QUADPACK abscissae and weights)

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1:7:2] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[9:14:2] = _WG[2::-1]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadSpec:
    abs_tol: float = 0.0
    rel_tol: float = 1e-10
    max_depth: int = 60
    singular_left: bool = False
    singular_right: bool = False

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0 or (self.abs_tol == 0 and self.rel_tol == 0):
            raise ValueError("tolerances must be non-negative and not both zero")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")

    def with_flags(self, left: bool, right: bool) -> "QuadSpec":
        return QuadSpec(self.abs_tol, self.rel_tol, self.max_depth, left, right)


DEFAULT_QUAD = QuadSpec()


class QuadResult(NamedTuple):
    value: float
    error: float


def _evaluate(f, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    return y


def gauss_kronrod_cell(f, a, b):
    """Apply the G7/K15 pair on each cell ``[a_i, b_i]`` in one call to ``f``.

    Returns ``(kronrod_value, error_estimate)`` arrays. The error estimate is
    the QUADPACK heuristic with its round-off floor.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    half = 0.5 * (b - a)
    centre = 0.5 * (a + b)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    fx = _evaluate(f, x.ravel()).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise NonFiniteSample(f"integrand is not finite at x = {bad!r}")
    res_k = fx @ _KRONROD
    res_g = fx @ _GAUSS
    mean = 0.5 * res_k
    resasc = np.abs(fx - mean[:, None]) @ _KRONROD
    resabs = np.abs(fx) @ _KRONROD
    diff = np.abs(res_k - res_g)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(resasc > 0, resasc * np.minimum(1.0, (200.0 * diff / resasc) ** 1.5), diff)
    floor = 50.0 * _EPS * resabs
    err = np.maximum(scaled, floor)
    return res_k * half, np.abs(half) * err


def _initial_cells(a: float, b: float, points: Sequence[float], spec: QuadSpec):
    cuts = sorted({a, b, *[p for p in points if a < p < b]})
    lefts, rights, depths = [], [], []
    n_grade = 16
    for i, (lo, hi) in enumerate(zip(cuts[:-1], cuts[1:])):
        grade_left = spec.singular_left and i == 0
        grade_right = spec.singular_right and i == len(cuts) - 2
        if not (grade_left or grade_right):
            lefts.append(lo)
            rights.append(hi)
            depths.append(0)
            continue
        # geometric cells with ratio 1/2 toward the flagged end(s)
        if grade_left and grade_right:
            mid = 0.5 * (lo + hi)
            pieces = [(lo, mid, True, False), (mid, hi, False, True)]
        else:
            pieces = [(lo, hi, grade_left, grade_right)]
        for p_lo, p_hi, gl, gr in pieces:
            length = p_hi - p_lo
            marks = [length * 0.5 ** k for k in range(n_grade + 1)]
            if gl:
                pts = [p_lo] + [p_lo + m for m in reversed(marks)]
            else:
                pts = [p_hi - m for m in marks] + [p_hi]
            for k, (c0, c1) in enumerate(zip(pts[:-1], pts[1:])):
                if c1 > c0:
                    lefts.append(c0)
                    rights.append(c1)
                    depths.append(min(n_grade, k + 1))
    return np.array(lefts), np.array(rights), np.array(depths, dtype=int)


def adaptive_quad(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spec: QuadSpec = DEFAULT_QUAD,
    points: Sequence[float] = (),
    max_cells: int = 200_000,
) -> QuadResult:
    """Globally adaptive G7/K15 quadrature of a vectorised integrand on ``[a, b]``.

    ``f`` receives 1-D arrays of abscissae. ``points`` lists interior
    locations where ``f`` is known to be non-smooth; no cell straddles them.
    Endpoint singularities flagged in ``spec`` get an initial geometric
    grading toward that end. Each round bisects the smallest set of
    worst cells whose removal would meet the tolerance
    ``abs_tol + rel_tol * |I|``.
    """
    if not a < b:
        raise ValueError(f"need a < b, got ({a}, {b})")
    lo, hi, depth = _initial_cells(float(a), float(b), points, spec)
    val, err = gauss_kronrod_cell(f, lo, hi)
    splits = np.zeros(lo.size, dtype=int)
    strikes = np.zeros(lo.size, dtype=int)
    while True:
        total = math.fsum(val)
        total_err = float(np.sum(err))
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= tol:
            return QuadResult(total, total_err)
        order = np.argsort(-err, kind="stable")
        excess = total_err - 0.5 * tol
        chosen = order[: int(np.searchsorted(np.cumsum(err[order]), excess)) + 1]
        splittable = chosen[depth[chosen] < spec.max_depth]
        if splittable.size == 0 or lo.size + splittable.size > max_cells:
            raise MaxDepthExceeded(
                f"adaptive_quad on ({a}, {b}) stalled at error {total_err:.3e} > {tol:.3e}",
                value=total,
                error=total_err,
            )
        mid = 0.5 * (lo[splittable] + hi[splittable])
        new_lo = np.concatenate([lo[splittable], mid])
        new_hi = np.concatenate([mid, hi[splittable]])
        new_val, new_err = gauss_kronrod_cell(f, new_lo, new_hi)
        new_depth = np.concatenate([depth[splittable], depth[splittable]]) + 1
        new_splits = np.concatenate([splits[splittable], splits[splittable]]) + 1
        # Round-off detection: when three generations in a row of a deep cell
        # reproduce its value without reducing its error estimate, the cell
        # has hit the noise floor and is not split again.
        k = splittable.size
        child_val = new_val[:k] + new_val[k:]
        stuck = (
            (new_err[:k] + new_err[k:] >= 0.9 * err[splittable])
            & (np.abs(child_val - val[splittable]) <= 1e-5 * np.abs(child_val))
            & (splits[splittable] >= 10)
        )
        child_strikes = np.where(stuck, strikes[splittable] + 1, 0)
        new_strikes = np.concatenate([child_strikes, child_strikes])
        new_depth[new_strikes >= 3] = spec.max_depth
        keep = np.ones(lo.size, dtype=bool)
        keep[splittable] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        val = np.concatenate([val[keep], new_val])
        err = np.concatenate([err[keep], new_err])
        depth = np.concatenate([depth[keep], new_depth])
        splits = np.concatenate([splits[keep], new_splits])
        strikes = np.concatenate([strikes[keep], new_strikes])


def gauss_legendre(n: int, a: float = 0.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights mapped to ``[a, b]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


@lru_cache(maxsize=64)
def _jacobi_rule(n: int, power: float):
    """Nodes/weights for ``int_0^1 g(t) t^power dt``."""
    x, w = scipy.special.roots_jacobi(n, 0.0, power)
    return 0.5 * (x + 1.0), w * 0.5 ** (power + 1.0)


def power_weight_quad(
    g: Callable[[np.ndarray], np.ndarray],
    length: float,
    power: float,
    spec: QuadSpec = DEFAULT_QUAD,
    points: Sequence[float] = (),
    max_halvings: int = 60,
) -> QuadResult:
    """``int_0^length g(t) t^power dt`` for ``g`` smooth near 0 and ``power > -1``.

    A first cell ``[0, c]`` is handled by Gauss-Jacobi rules that carry the
    power weight exactly, so ``g`` is never sampled extremely close to 0.
    ``c`` starts at the first entry of ``points`` (or ``length``) and is
    halved until a 20- and a 30-point rule agree. The rest of the range goes
    to :func:`adaptive_quad`.
    """
    if power <= -1.0:
        raise ValueError(f"power must exceed -1, got {power}")
    if not length > 0:
        raise ValueError(f"length must be positive, got {length}")
    inner_pts = sorted(p for p in points if 0.0 < p < length)
    c = inner_pts[0] if inner_pts else length
    t20, w20 = _jacobi_rule(20, float(power))
    t30, w30 = _jacobi_rule(30, float(power))
    best = None
    for _ in range(max_halvings):
        scale = c ** (power + 1.0)
        lo20 = scale * float(_evaluate(g, c * t20) @ w20)
        lo30 = scale * float(_evaluate(g, c * t30) @ w30)
        diff = abs(lo30 - lo20)
        if diff <= max(spec.abs_tol, 0.1 * spec.rel_tol * abs(lo30), 1e-15 * scale):
            best = (c, lo30, diff)
            break
        rel = diff / max(abs(lo30), 1e-300)
        if best is None or rel < best[3]:
            best = (c, lo30, diff, rel)
        elif c < 2.0 ** -8 * best[0]:
            # shrinking no longer helps: the samples of g have reached
            # their round-off floor, so keep the best cell seen
            break
        c *= 0.5
    else:
        raise MaxDepthExceeded("power_weight_quad: first cell never resolved", value=lo30, error=diff)
    c, lo30, diff = best[:3]
    if c >= length:
        return QuadResult(lo30, diff)

    def h(t):
        return _evaluate(g, t) * t ** power

    rest_spec = QuadSpec(
        abs_tol=spec.abs_tol, rel_tol=spec.rel_tol, max_depth=spec.max_depth,
        singular_left=False, singular_right=spec.singular_right,
    )
    # the first cell was shrunk to resolve g; grade back out toward 0
    grade = [c * 2.0 ** k for k in range(1, 64) if c * 2.0 ** k < length]
    try:
        rest = adaptive_quad(h, c, length, rest_spec, points=[*grade, *inner_pts])
    except MaxDepthExceeded as exc:
        raise MaxDepthExceeded(str(exc), value=lo30 + exc.value, error=diff + exc.error) from exc
    return QuadResult(lo30 + rest.value, diff + rest.error)


class LogLogFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float


def fit_loglog_slope(points) -> LogLogFit:
    """Least-squares line through ``(log x, log y)``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DegenerateFit("need at least two (x, y) pairs")
    if np.any(pts <= 0):
        raise ValueError("log-log fit needs positive x and y")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(lx) == 0.0:
        raise DegenerateFit("all x values are equal")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return LogLogFit(float(slope), float(intercept), r2)
