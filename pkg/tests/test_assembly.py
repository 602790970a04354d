import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsobolev.assembly import mass_matrix, restrict, stiffness_matrix, zero_extension
from fracsobolev.errors import NonzeroTrace
from fracsobolev.funcspec import P1Function
from fracsobolev.mesh import Interval, Mesh1D, align_partition, uniform_mesh
from fracsobolev.numerics import QuadSpec, adaptive_quad, generalized_eig

UNIT = Interval(0.0, 1.0)


def test_small_matrices():
    mesh = uniform_mesh(UNIT, 2)
    np.testing.assert_allclose(mass_matrix(mesh, dirichlet=True), [[1 / 3]])
    np.testing.assert_allclose(stiffness_matrix(mesh, dirichlet=True), [[4.0]])


def test_mass_stencil():
    h = 1 / 3
    expected = h / 6 * np.array([[4.0, 1.0], [1.0, 4.0]])
    np.testing.assert_allclose(mass_matrix(uniform_mesh(UNIT, 3), dirichlet=True), expected)


def test_mass_total_and_row_sums():
    mesh = Mesh1D(UNIT, np.array([0.0, 0.1, 0.4, 1.0]))
    mat = mass_matrix(mesh)
    assert mat.sum() == pytest.approx(1.0)
    h = mesh.h
    np.testing.assert_allclose(mat.sum(axis=1), 0.5 * (np.r_[0, h] + np.r_[h, 0]))
    np.testing.assert_allclose(mass_matrix(mesh, lumped=True), np.diag(mat.sum(axis=1)))


def test_stiffness_kills_constants():
    mesh = uniform_mesh(UNIT, 5)
    np.testing.assert_allclose(stiffness_matrix(mesh) @ np.ones(6), 0.0, atol=1e-12)


def test_first_dirichlet_eigenvalue():
    mesh = uniform_mesh(UNIT, 64)
    lam = generalized_eig(stiffness_matrix(mesh, True), mass_matrix(mesh, True)).eigenvalues
    assert abs(lam[0] - np.pi**2) < 0.01


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12))
def test_quadratic_forms_match_integrals(seed, n):
    rng = np.random.default_rng(seed)
    nodes = np.sort(np.r_[0.0, rng.uniform(0, 1, n - 1), 1.0])
    if np.any(np.diff(nodes) < 1e-6):
        return
    mesh = Mesh1D(UNIT, nodes)
    u = P1Function(mesh, rng.standard_normal(n + 1))
    spec = QuadSpec(rel_tol=1e-13)
    l2 = adaptive_quad(lambda x: u(x) ** 2, 0, 1, spec, points=nodes[1:-1]).value
    slopes = u.slopes
    h1 = float(np.sum(slopes**2 * mesh.h))
    assert u.values @ mass_matrix(mesh) @ u.values == pytest.approx(l2, rel=1e-12)
    assert u.values @ stiffness_matrix(mesh) @ u.values == pytest.approx(h1, rel=1e-12)


def test_zero_extension_examples():
    part = align_partition(uniform_mesh(UNIT, 8), [0.5])
    zero = P1Function(part.submesh(0), np.zeros(5))
    np.testing.assert_array_equal(zero_extension(zero, part, 0).values, np.zeros(9))
    hat = P1Function(part.submesh(1), [0, 0, 1, 0, 0])
    ext = zero_extension(hat, part, 1)
    np.testing.assert_array_equal(ext.values[4:], hat.values)
    np.testing.assert_array_equal(ext.values[:4], 0)
    with pytest.raises(NonzeroTrace):
        zero_extension(P1Function(part.submesh(0), [0, 0, 0, 0, 1.0]), part, 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5))
def test_restrict_extend_round_trip(seed, n_sub):
    rng = np.random.default_rng(seed)
    mesh = uniform_mesh(UNIT, 60)
    part = align_partition(mesh, [k / n_sub for k in range(1, n_sub)])
    vals = rng.standard_normal(61)
    vals[[0, -1]] = 0
    vals[part.interface_nodes] = 0
    u = P1Function(mesh, vals)
    total = sum(zero_extension(restrict(u, part, j), part, j).values for j in range(n_sub))
    np.testing.assert_array_equal(total, u.values)
