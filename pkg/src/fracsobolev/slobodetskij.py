"""Slobodetskij seminorm, boundary-distance weighted term and the tilde-norm.

For an interval ``O = (a, b)`` and ``sigma`` in (0, 1)::

    seminorm_sq = iint_{O x O} |u(x) - u(y)|^2 / |x - y|^(1 + 2 sigma)
    weighted_sq = int_O |u(x)|^2 / dist(x, dO)^(2 sigma)
    tilde_sq    = seminorm_sq + weighted_sq

Callables go through nested adaptive quadrature. ``P1Function`` inputs on
their own mesh are assembled element pair by element pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DivergentIntegral, MaxDepthExceeded, XOutsideInner
from .funcspec import FunctionExpr, P1Function
from .mesh import Interval
from .numerics import QuadSpec, adaptive_quad, gauss_legendre, power_weight_quad

__all__ = [
    "NormReport",
    "SEMINORM_QUAD",
    "seminorm_sq",
    "weighted_sq",
    "tilde_norm_sq",
    "kernel_tail_integral",
    "disk_tail_integral",
    "p1_identical_pair",
]

SEMINORM_QUAD = QuadSpec(rel_tol=1e-9)
ENDPOINT_TOL = 1e-9


@dataclass
class NormReport:
    s: float
    domain: Interval
    seminorm_sq: float
    weighted_sq: float
    tilde_sq: float
    interp_sq: float | None = None
    error_estimates: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "domain": list(self.domain.as_tuple()),
            "seminorm_sq": self.seminorm_sq,
            "weighted_sq": self.weighted_sq,
            "tilde_sq": self.tilde_sq,
            "interp_sq": self.interp_sq,
            "error_estimates": dict(self.error_estimates),
        }


def _check_sigma(sigma: float):
    if not 0.0 < sigma < 1.0:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")


def _resolve(u, domain: Interval | None, breakpoints):
    """Return ``(callable, domain, breakpoints, p1_or_None)``."""
    if isinstance(u, P1Function):
        if domain is None or domain == u.mesh.domain:
            return u, u.mesh.domain, u.breakpoints, u
        return u, domain, u.breakpoints, None
    if domain is None:
        raise ValueError("a domain is required for callable input")
    if isinstance(u, FunctionExpr):
        u = u.on(domain)
        bps = u.breakpoints if breakpoints is None else breakpoints
    else:
        bps = () if breakpoints is None else breakpoints
    return u, domain, tuple(bps), None


# --------------------------------------------------------------------------
# seminorm


def p1_identical_pair(slope, h, sigma):
    """Closed form of the identical-element term: ``slope^2 h^(3-2s) / ((1-s)(3-2s))``."""
    return slope ** 2 * h ** (3.0 - 2.0 * sigma) / ((1.0 - sigma) * (3.0 - 2.0 * sigma))


def _duffy_panels(n_per_panel: int = 12, n_levels: int = 40):
    """Composite Gauss rule on ``[0, 1]`` with panels graded geometrically toward 0."""
    edges = [0.0] + [0.5 ** k for k in range(n_levels, -1, -1)]
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(n_per_panel, lo, hi)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


_DUFFY_V, _DUFFY_W = _duffy_panels()
_FAR_X, _FAR_W = gauss_legendre(8)


def _adjacent_pairs(h1, h2, a, b, sigma):
    """Touching elements ``[x0, x1] x [x1, x2]`` with slopes ``a`` and ``b``.

    With ``s = x1 - x`` and ``t = y - x1`` the integrand is
    ``(a s + b t)^2 / (s + t)^(1 + 2 sigma)``. Each half of the rectangle is
    mapped to the unit square with a Duffy substitution; the radial factor
    integrates exactly to ``1 / (3 - 2 sigma)``.
    """
    p = 1.0 + 2.0 * sigma
    v = _DUFFY_V[None, :]
    A, B = (a * h1)[:, None], (b * h2)[:, None]
    H1, H2 = h1[:, None], h2[:, None]
    t1 = ((A + B * v) ** 2 / (H1 + H2 * v) ** p) @ _DUFFY_W
    t2 = ((A * v + B) ** 2 / (H1 * v + H2) ** p) @ _DUFFY_W
    return h1 * h2 * (t1 + t2) / (3.0 - 2.0 * sigma)


def _separated_pairs(x0, x1, u0, u1, y0, y1, v0, v1, sigma):
    """Sum over disjoint element pairs with ``x1 < y0``.

    A pair is integrated by 8x8 tensor Gauss once the gap is at least the
    larger element length; closer pairs are split (larger side halved) first.
    """
    p = 1.0 + 2.0 * sigma
    parts = []
    while x0.size:
        hx, hy = x1 - x0, y1 - y0
        gap = y0 - x1
        ok = gap >= np.maximum(hx, hy)
        if np.any(ok):
            g = _FAR_X
            xs = x0[ok, None] + hx[ok, None] * g
            ys = y0[ok, None] + hy[ok, None] * g
            ux = u0[ok, None] + (u1 - u0)[ok, None] * g
            uy = v0[ok, None] + (v1 - v0)[ok, None] * g
            diff = ux[:, :, None] - uy[:, None, :]
            dist = ys[:, None, :] - xs[:, :, None]
            vals = np.einsum("kij,i,j->k", diff ** 2 / dist ** p, _FAR_W, _FAR_W)
            parts.append(vals * hx[ok] * hy[ok])
        bad = ~ok
        if not np.any(bad):
            break
        x0, x1, u0, u1, y0, y1, v0, v1 = (arr[bad] for arr in (x0, x1, u0, u1, y0, y1, v0, v1))
        split_x = (x1 - x0) >= (y1 - y0)
        xm, um = 0.5 * (x0 + x1), 0.5 * (u0 + u1)
        ym, vm = 0.5 * (y0 + y1), 0.5 * (v0 + v1)
        sx, nx = split_x, ~split_x
        x0 = np.concatenate([x0[sx], xm[sx], x0[nx], x0[nx]])
        new_x1 = np.concatenate([xm[sx], x1[sx], x1[nx], x1[nx]])
        u0 = np.concatenate([u0[sx], um[sx], u0[nx], u0[nx]])
        new_u1 = np.concatenate([um[sx], u1[sx], u1[nx], u1[nx]])
        new_y0 = np.concatenate([y0[sx], y0[sx], y0[nx], ym[nx]])
        y1 = np.concatenate([y1[sx], y1[sx], ym[nx], y1[nx]])
        new_v0 = np.concatenate([v0[sx], v0[sx], v0[nx], vm[nx]])
        v1 = np.concatenate([v1[sx], v1[sx], vm[nx], v1[nx]])
        x1, u1, y0, v0 = new_x1, new_u1, new_y0, new_v0
    return np.concatenate(parts) if parts else np.zeros(0)


def _p1_seminorm_sq(nodes: np.ndarray, vals: np.ndarray, sigma: float) -> float:
    h = np.diff(nodes)
    slope = np.diff(vals) / h
    n = h.size
    ident = p1_identical_pair(slope, h, sigma)
    adj = _adjacent_pairs(h[:-1], h[1:], slope[:-1], slope[1:], sigma) if n > 1 else np.zeros(0)
    far_sums = []
    for d in range(2, n):
        k = np.arange(n - d)
        far = _separated_pairs(
            nodes[k], nodes[k + 1], vals[k], vals[k + 1],
            nodes[k + d], nodes[k + d + 1], vals[k + d], vals[k + d + 1],
            sigma,
        )
        far_sums.append(np.sum(far))
    return float(np.sum(ident) + 2.0 * (np.sum(adj) + np.sum(far_sums)))


def _callable_seminorm_sq(f, domain: Interval, sigma: float, bps: Sequence[float], spec: QuadSpec):
    """Nested quadrature over ``{(x, x + d): a < x < b, 0 < d < b - x}``, doubled.

    The inner integrand is written as ``q(d)^2 d^(1 - 2 sigma)`` with the
    difference quotient ``q(d) = (u(x + d) - u(x)) / d``, so the weak
    singularity at ``d = 0`` is carried by the quadrature weight.
    """
    a, b = domain.left, domain.right
    power = 1.0 - 2.0 * sigma
    cuts = [a, *sorted(q for q in set(bps) if a < q < b), b]
    # Difference quotients lose accuracy relative to max|u|, so each ray gets an
    # absolute floor at that round-off scale; it contributes at most
    # 1e-13 max|u|^2 (b - a)^(1 - 2 sigma) to the outer integral.
    sample = np.concatenate([np.linspace(a, b, 65), cuts])
    peak = float(np.max(np.abs(f(sample))))
    floor = 1e-13 * peak**2 * (b - a) ** (-2.0 * sigma)
    inner_spec = QuadSpec(abs_tol=max(spec.abs_tol * 1e-2, floor), rel_tol=spec.rel_tol * 1e-2,
                          max_depth=spec.max_depth)
    inner_err = [0.0]

    def inner(xs):
        out = np.empty_like(xs)
        for i, x in enumerate(xs):
            fx = f(x)
            pts = [q - x for q in cuts[1:-1] if q > x]

            def g(d, x=x, fx=fx):
                return ((f(x + d) - fx) / d) ** 2

            try:
                val, err = power_weight_quad(g, b - x, power, inner_spec, points=pts)
            except MaxDepthExceeded as exc:
                # round-off floor on very short rays; keep the estimate and its error
                val, err = exc.value, exc.error
            out[i] = val
            inner_err[0] = max(inner_err[0], err)
        return out

    res = adaptive_quad(inner, a, b, spec.with_flags(True, True), points=cuts[1:-1])
    return 2.0 * res.value, 2.0 * (res.error + inner_err[0] * (b - a))


def seminorm_sq(u, domain: Interval | None = None, sigma: float = 0.5,
                spec: QuadSpec = SEMINORM_QUAD, breakpoints=None) -> float:
    """Slobodetskij seminorm squared of ``u`` on ``domain``."""
    return _seminorm_with_error(u, domain, sigma, spec, breakpoints)[0]


def _seminorm_with_error(u, domain, sigma, spec, breakpoints):
    _check_sigma(sigma)
    f, domain, bps, p1 = _resolve(u, domain, breakpoints)
    if p1 is not None:
        return _p1_seminorm_sq(p1.mesh.nodes, p1.values, sigma), 0.0
    try:
        return _callable_seminorm_sq(f, domain, sigma, bps, spec)
    except MaxDepthExceeded as exc:
        raise DivergentIntegral(f"seminorm quadrature did not converge: {exc}") from exc


# --------------------------------------------------------------------------
# weighted term


def _power_antiderivative(k: int, sigma: float, rho: np.ndarray) -> np.ndarray:
    e = k + 1.0 - 2.0 * sigma
    if e == 0.0:
        with np.errstate(divide="ignore"):
            return np.log(rho)
    with np.errstate(divide="ignore"):
        return rho ** e / e


def _p1_weighted_sq(nodes: np.ndarray, vals: np.ndarray, sigma: float) -> float:
    a, b = nodes[0], nodes[-1]
    mid = 0.5 * (a + b)
    if not np.any(nodes == mid):
        k = int(np.searchsorted(nodes, mid))
        vmid = np.interp(mid, nodes, vals)
        nodes = np.insert(nodes, k, mid)
        vals = np.insert(vals, k, vmid)
    vals = vals.copy()
    for end in (0, -1):
        if abs(vals[end]) <= ENDPOINT_TOL and sigma >= 0.5:
            vals[end] = 0.0
    left = nodes[1:] <= mid
    # distance coordinate rho, oriented so rho grows away from the nearest end
    p0 = np.where(left, nodes[:-1] - a, b - nodes[1:])
    p1 = np.where(left, nodes[1:] - a, b - nodes[:-1])
    w0 = np.where(left, vals[:-1], vals[1:])
    w1 = np.where(left, vals[1:], vals[:-1])
    h = p1 - p0
    beta = (w1 - w0) / h
    alpha = w0 - beta * p0
    out = np.zeros(h.size)

    near = p0 < h
    if np.any(near):
        al, be = alpha[near], beta[near]
        q0, q1 = p0[near], p1[near]
        coeffs = (al ** 2, 2 * al * be, be ** 2)
        acc = np.zeros(al.size)
        for k, c in enumerate(coeffs):
            f1 = _power_antiderivative(k, sigma, q1)
            f0 = _power_antiderivative(k, sigma, q0)
            term = np.where(c == 0.0, 0.0, c * (f1 - np.where(q0 == 0.0, 0.0, f0)))
            acc += term
        out[near] = acc
    far = ~near
    if np.any(far):
        g, w = gauss_legendre(20)
        rho = p0[far, None] + h[far, None] * g
        uu = alpha[far, None] + beta[far, None] * rho
        out[far] = (uu ** 2 * rho ** (-2.0 * sigma)) @ w * h[far]
    return float(np.sum(out))


def _callable_weighted_sq(f, domain: Interval, sigma: float, bps, spec: QuadSpec):
    """Each half of the domain as an integral in the distance ``rho`` to its end.

    For ``sigma < 1/2`` the weight ``rho^(-2 sigma)`` is integrable as is. For
    ``sigma >= 1/2`` the function vanishes at the end and ``(u / rho)^2``
    is integrated against ``rho^(2 - 2 sigma)`` instead.
    """
    a, b, m = domain.left, domain.right, domain.midpoint
    half = m - a
    total, err = 0.0, 0.0
    for end, sign in ((a, 1.0), (b, -1.0)):
        pts = [abs(q - end) for q in bps if 0.0 < abs(q - end) < half]
        if sigma < 0.5:
            power = -2.0 * sigma

            def g(rho, end=end, sign=sign):
                return f(end + sign * rho) ** 2
        else:
            power = 2.0 - 2.0 * sigma
            u_end = float(f(end))

            def g(rho, end=end, sign=sign, u_end=u_end):
                return ((f(end + sign * rho) - u_end) / rho) ** 2
        try:
            res = power_weight_quad(g, half, power, spec, points=pts)
        except MaxDepthExceeded as exc:
            raise DivergentIntegral(f"weighted integral did not converge: {exc}") from exc
        total += res.value
        err += res.error
    return total, err


def weighted_sq(u, domain: Interval | None = None, sigma: float = 0.5,
                spec: QuadSpec = SEMINORM_QUAD, breakpoints=None) -> float:
    """``int |u|^2 / dist(x, boundary)^(2 sigma)`` over ``domain``."""
    return _weighted_with_error(u, domain, sigma, spec, breakpoints)[0]


def _weighted_with_error(u, domain, sigma, spec, breakpoints):
    _check_sigma(sigma)
    f, domain, bps, p1 = _resolve(u, domain, breakpoints)
    if sigma >= 0.5:
        ends = np.asarray(f(np.array([domain.left, domain.right])), dtype=float)
        if np.max(np.abs(ends)) > ENDPOINT_TOL:
            raise DivergentIntegral(
                f"u does not vanish at the boundary (values {ends.tolist()}); "
                f"the weighted integral diverges for sigma = {sigma}"
            )
    if p1 is not None:
        return _p1_weighted_sq(p1.mesh.nodes, p1.values, sigma), 0.0
    return _callable_weighted_sq(f, domain, sigma, bps, spec)


def tilde_norm_sq(u, domain: Interval | None = None, sigma: float = 0.5,
                  spec: QuadSpec = SEMINORM_QUAD, breakpoints=None) -> NormReport:
    """Both terms of the tilde-norm and their sum."""
    semi, semi_err = _seminorm_with_error(u, domain, sigma, spec, breakpoints)
    wt, wt_err = _weighted_with_error(u, domain, sigma, spec, breakpoints)
    dom = u.mesh.domain if (domain is None and isinstance(u, P1Function)) else domain
    return NormReport(
        s=sigma,
        domain=dom,
        seminorm_sq=semi,
        weighted_sq=wt,
        tilde_sq=semi + wt,
        error_estimates={"seminorm_sq": semi_err, "weighted_sq": wt_err},
    )


# --------------------------------------------------------------------------
# Kernel tail


def kernel_tail_integral(x: float, inner: Interval, outer: Interval) -> tuple[float, float]:
    """``int_{outer \\ inner} dy / |x - y|^2`` in closed form, and the bound ``2 / dist(x, d inner)``."""
    if not (outer.left <= inner.left and inner.right <= outer.right):
        raise ValueError("inner interval must lie inside the outer one")
    if not inner.left < x < inner.right:
        raise XOutsideInner(f"x = {x} is not inside {inner.as_tuple()}")
    left = 1.0 / (x - inner.left) - 1.0 / (x - outer.left)
    right = 1.0 / (inner.right - x) - 1.0 / (outer.right - x)
    bound = 2.0 / min(x - inner.left, inner.right - x)
    return left + right, bound


def disk_tail_integral(offset: float, inner_radius: float, outer_radius: float,
                       n_angles: int = 256) -> tuple[float, float]:
    """Two-dimensional analogue on concentric disks ``B_a`` inside ``B_R``.

    ``x`` sits at distance ``offset`` from the common centre. Along each ray
    from ``x`` the radial integral of ``r / r^3`` is ``1/r_in - 1/r_out``; the
    angular integral of that periodic function uses the trapezoid rule.
    Returns ``(value, 2 pi / dist(x, dB_a))``.
    """
    if not 0.0 <= offset < inner_radius <= outer_radius:
        raise XOutsideInner("need 0 <= offset < inner_radius <= outer_radius")
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    c, s = np.cos(theta), np.sin(theta)

    def exit_radius(radius):
        return -offset * c + np.sqrt(radius ** 2 - (offset * s) ** 2)

    integrand = 1.0 / exit_radius(inner_radius) - 1.0 / exit_radius(outer_radius)
    value = float(np.mean(integrand) * 2.0 * np.pi)
    return value, 2.0 * math.pi / (inner_radius - offset)
