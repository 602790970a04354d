import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsobolev.assembly import mass_matrix, stiffness_matrix, zero_extension
from fracsobolev.errors import GridTooCoarse, NonzeroTrace, ThetaOutOfRange
from fracsobolev.funcspec import P1Function, interpolate_p1, parse_expr, random_sine_sum
from fracsobolev.interpnorm import (
    dirichlet_basis,
    fourier_sine_norm_sq,
    interp_norm_sq,
    interp_norm_sq_tquad,
    k1_functional,
    k_curve,
    k_functional,
    k_minimizer,
    leakage,
    splitting_energy,
    subdomain_interp_norm_sq,
)
from fracsobolev.mesh import Interval, align_partition, uniform_mesh

UNIT = Interval(0.0, 1.0)
# mesh [0, 1/2, 1] has the single Dirichlet eigenvalue 12; a hat of height sqrt(3) has c = 1
SINGLE_MODE = P1Function(uniform_mesh(UNIT, 2), [0.0, math.sqrt(3.0), 0.0])


def _norms(u):
    m, a = mass_matrix(u.mesh), stiffness_matrix(u.mesh)
    return math.sqrt(u.values @ m @ u.values), math.sqrt(u.values @ a @ u.values)


def _random_u(seed, n=64):
    rng = np.random.default_rng(seed)
    return interpolate_p1(random_sine_sum(rng, UNIT), uniform_mesh(UNIT, n), dirichlet=True)


def test_single_mode_k():
    assert k_functional(1.0, SINGLE_MODE) == pytest.approx(math.sqrt(12 / 13), rel=1e-14)
    assert k_functional(1.0, SINGLE_MODE) == pytest.approx(0.96077, abs=1e-5)


def test_single_mode_norm():
    expected = 0.5 * math.pi * math.sqrt(12.0)
    assert interp_norm_sq(SINGLE_MODE, 0.5) == pytest.approx(expected, rel=1e-14)
    assert expected == pytest.approx(5.4414, abs=1e-4)
    assert interp_norm_sq_tquad(SINGLE_MODE, 0.5, rel_tol=np.inf) == pytest.approx(expected, rel=1e-4)


def test_k_limits():
    u = _random_u(1)
    l2, _ = _norms(u)
    assert k_functional(1e-8, u) < 1e-6 * l2
    assert abs(k_functional(1e8, u) - l2) <= 1e-6


def test_k_matches_minimiser_energy():
    u = _random_u(2)
    for t in (1e-3, 0.1, 1.0, 30.0):
        split = k_minimizer(t, u)
        np.testing.assert_allclose(split.u0.values + split.u1.values, u.values, atol=1e-15)
        assert math.sqrt(splitting_energy(t, split)) == pytest.approx(k_functional(t, u), rel=1e-10)


def test_minimiser_of_zero():
    split = k_minimizer(0.5, P1Function(uniform_mesh(UNIT, 8), np.zeros(9)))
    assert not split.u0.values.any() and not split.u1.values.any()


@pytest.mark.parametrize("t", [0.01, 0.3, 5.0])
def test_minimiser_of_first_mode(t):
    mesh = uniform_mesh(UNIT, 32)
    basis = dirichlet_basis(mesh)
    vals = np.zeros(33)
    vals[1:-1] = basis.modes[:, 0]
    u = P1Function(mesh, vals)
    u1 = k_minimizer(t, u).u1.values
    np.testing.assert_allclose(u1, vals / (1 + t * t * basis.eigenvalues[0]), atol=1e-12)


def test_lumped_minimiser_is_positive():
    u = interpolate_p1(parse_expr("family:hat(0,0.5)"), uniform_mesh(UNIT, 256), True)
    for t in (1e-2, 1.0, 1e2):
        u1 = k_minimizer(t, u, lumped=True).u1.values
        assert np.all(u1[1:-1] > 0)


def test_k_curve_examples():
    part = align_partition(uniform_mesh(UNIT, 128), [0.5])
    u = interpolate_p1(parse_expr("family:hat(0,0.5)"), part.mesh, True)
    curve = k_curve(u, np.logspace(-2, 2, 9), part, 0, lumped=True)
    assert np.all(curve.K1 >= curve.K)
    assert np.all(curve.leakage > 0)


def test_k1_strict_and_zero_cases():
    part = align_partition(uniform_mesh(UNIT, 256), [0.5])
    u = interpolate_p1(parse_expr("family:hat(0,0.5)"), part.mesh, True)
    assert k1_functional(0.1, u, part, 0) - k_functional(0.1, u) > 1e-8
    assert leakage(0.1, u, part, 0, lumped=True) > 0
    zero = P1Function(part.mesh, np.zeros(257))
    assert k1_functional(0.1, zero, part, 0) == k_functional(0.1, zero) == 0.0
    assert leakage(0.1, zero, part, 0) == 0.0
    assert leakage(1e-8, u, part, 0) < 1e-12
    with pytest.raises(NonzeroTrace):
        k1_functional(0.1, u, part, 1)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 4, 8]))
def test_k_below_k1_and_monotone(seed, n_sub):
    rng = np.random.default_rng(seed)
    part = align_partition(uniform_mesh(UNIT, 64), [k / n_sub for k in range(1, n_sub)])
    j = int(rng.integers(n_sub))
    sub = part.submesh(j)
    u = zero_extension(interpolate_p1(random_sine_sum(rng, sub.domain), sub, True), part, j)
    l2, h1 = _norms(u)
    t = np.logspace(-3, 3, 40)
    k = np.array([k_functional(ti, u) for ti in t])
    k1 = np.array([k1_functional(ti, u, part, j) for ti in t])
    assert np.all(k <= k1 * (1 + 1e-12) + 1e-15)
    assert np.all(np.diff(k) >= -1e-14)
    assert np.all(k <= np.minimum(l2, t * h1) * (1 + 1e-12) + 1e-15)


def test_interp_norm_examples():
    assert interp_norm_sq(P1Function(uniform_mesh(UNIT, 4), np.zeros(5)), 0.5) == 0.0
    u = interpolate_p1(parse_expr("sin(pi*x)"), uniform_mesh(UNIT, 512), True)
    assert interp_norm_sq(u, 0.5) == pytest.approx(math.pi**2 / 4, rel=0.01)
    with pytest.raises(ThetaOutOfRange):
        interp_norm_sq(u, 1.0)


@pytest.mark.parametrize("theta", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("seed", range(5))
def test_tquad_matches_closed_form(theta, seed):
    u = _random_u(seed)
    assert interp_norm_sq_tquad(u, theta, rel_tol=np.inf) == pytest.approx(interp_norm_sq(u, theta), rel=1e-4)


def test_tquad_grid_errors():
    with pytest.raises(GridTooCoarse):
        interp_norm_sq_tquad(SINGLE_MODE, 0.5, grid=[])
    with pytest.raises(GridTooCoarse):
        interp_norm_sq_tquad(SINGLE_MODE, 0.5, grid=np.logspace(-3, 3, 20))


def test_fourier_oracle():
    assert fourier_sine_norm_sq(parse_expr("sin(pi*x)"), 0.5, 8) == pytest.approx(math.pi**2 / 4, rel=1e-10)
    assert fourier_sine_norm_sq(parse_expr("sin(2*pi*x)"), 0.5, 8) == pytest.approx(math.pi**2 / 2, rel=1e-10)
    assert fourier_sine_norm_sq(parse_expr("0"), 0.5, 8) == 0.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([0.25, 0.5, 0.75]), st.sampled_from([0.5, 0.25, 0.1]))
def test_exact_discrete_scaling(seed, theta, tau):
    u = _random_u(seed, 32)
    assert interp_norm_sq(u.scaled(tau), theta) == pytest.approx(tau ** (1 - 2 * theta) * interp_norm_sq(u, theta), rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_global_basis_below_subdomain_basis(seed):
    rng = np.random.default_rng(seed)
    part = align_partition(uniform_mesh(UNIT, 64), [0.5])
    sub = part.submesh(0)
    u = zero_extension(interpolate_p1(random_sine_sum(rng, sub.domain), sub, True), part, 0)
    whole, local = interp_norm_sq(u, 0.5), subdomain_interp_norm_sq(u, 0.5, part, 0)
    assert whole < local
