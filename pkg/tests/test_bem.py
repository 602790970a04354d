import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsobolev import bem
from fracsobolev.errors import DegenerateInterval, MaxIterExceeded
from fracsobolev.mesh import align_partition, uniform_mesh


def test_log_integral_unit_square():
    assert bem.log_double_integral(0, 1, 0, 1) == pytest.approx(-1.5, rel=1e-15)


@pytest.mark.parametrize("h", [0.5, 1e-3, 3.0])
def test_log_integral_scaled_square(h):
    assert bem.log_double_integral(0, h, 0, h) == pytest.approx(h * h * (math.log(h) - 1.5), rel=1e-13)


def test_log_integral_separated():
    # scipy dblquad gives 0.6711665767667124
    assert bem.log_double_integral(0, 1, 2, 3) == pytest.approx(0.6711665767667124, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4), st.floats(0.01, 2), st.floats(0.01, 2))
def test_log_integral_symmetric(pts, w1, w2):
    a, c = pts[0], pts[1]
    v1 = bem.log_double_integral(a, a + w1, c, c + w2)
    v2 = bem.log_double_integral(c, c + w2, a, a + w1)
    assert v1 == pytest.approx(v2, rel=1e-12, abs=1e-14)


def test_log_integral_degenerate():
    with pytest.raises(DegenerateInterval):
        bem.log_double_integral(1, 1, 0, 1)


@pytest.mark.parametrize("m", [15, 31, 63])
def test_matrix_spd(m):
    system = bem.screen_system(m + 1)
    assert system.size == m
    np.testing.assert_allclose(system.matrix, system.matrix.T, rtol=0, atol=1e-15)
    scipy.linalg.cholesky(system.matrix)
    hat = np.zeros(m)
    hat[0] = 1.0
    assert system.energy(hat) > 0


def test_energy_equivalent_to_interpolation_norm():
    ratios = bem.energy_norm_ratios(bem.screen_system(256), 50, np.random.default_rng(0))
    assert ratios.min() >= 0.1 and ratios.max() <= 10


def test_condition_numbers():
    assert bem.condition_number(np.eye(3)) == pytest.approx(1.0)
    assert bem.condition_number(np.diag([1.0, 4.0])) == pytest.approx(4.0)
    _, fit = bem.condition_study([16, 32, 64, 128, 256, 512])
    assert 0.7 <= fit.slope <= 1.3


def _diag_system(values):
    values = np.asarray(values, dtype=float)
    return bem.BemSystem(uniform_mesh(bem.SCREEN, values.size + 1), np.diag(values))


def test_preconditioner_kinds():
    system = _diag_system([1.0, 4.0])
    r = np.array([2.0, 8.0])
    np.testing.assert_array_equal(bem.build_preconditioner(system, bem.PrecondSpec()).apply(r), r)
    jac = bem.build_preconditioner(system, bem.PrecondSpec("jacobi"))
    np.testing.assert_allclose(jac.apply(r), [2.0, 2.0])


def test_schwarz_with_singleton_subdomains_is_jacobi():
    system = bem.screen_system(16)
    mesh = system.mesh
    part = align_partition(mesh, mesh.nodes[1:-1])
    schwarz = bem.build_preconditioner(system, bem.PrecondSpec("additive_schwarz", part))
    jac = bem.build_preconditioner(system, bem.PrecondSpec("jacobi"))
    np.testing.assert_allclose(schwarz.matrix(), jac.matrix(), rtol=1e-14)


def test_precond_spec_validation():
    with pytest.raises(ValueError):
        bem.PrecondSpec("ilu")
    with pytest.raises(ValueError):
        bem.PrecondSpec("additive_schwarz")


def test_cg_trivial_cases():
    system = _diag_system(np.ones(5))
    assert bem.pcg(system, np.arange(1.0, 6.0)).iterations == 1
    system = bem.screen_system(32)
    exact = bem.Preconditioner("additive_schwarz", system.size,
                               [(np.arange(system.size), scipy.linalg.cho_factor(system.matrix, lower=True))])
    stats = bem.pcg(system, np.ones(system.size), exact)
    assert stats.iterations == 1


def test_cg_max_iter():
    system = bem.screen_system(64)
    with pytest.raises(MaxIterExceeded) as info:
        bem.pcg(system, np.ones(system.size), max_iter=3)
    assert info.value.stats.iterations == 3


def test_schwarz_coarse_beats_plain_cg():
    system = bem.screen_system(256)
    part = align_partition(system.mesh, [-1 + k / 4 for k in range(1, 8)])
    rng = np.random.default_rng(0)
    x_true = rng.standard_normal(system.size)
    b = system.matrix @ x_true
    plain = bem.pcg(system, b, x_true=x_true)
    pre = bem.build_preconditioner(system, bem.PrecondSpec("additive_schwarz", part, coarse=True))
    two_level = bem.pcg(system, b, pre, x_true=x_true)
    assert two_level.iterations < plain.iterations
    for stats in (plain, two_level):
        assert stats.bound_holds
        errs = np.array(stats.a_norm_errors)
        assert np.all(np.diff(errs) <= 1e-12 * errs[0])
        np.testing.assert_allclose(stats.solution, x_true, atol=1e-6)


@pytest.mark.parametrize("n_sub", [2, 4, 8])
def test_preconditioning_does_not_worsen_kappa(n_sub):
    system = bem.screen_system(128)
    part = align_partition(system.mesh, [-1 + 2 * k / n_sub for k in range(1, n_sub)])
    kappa = bem.condition_number(system.matrix)
    for spec in (bem.PrecondSpec("jacobi"), bem.PrecondSpec("additive_schwarz", part),
                 bem.PrecondSpec("additive_schwarz", part, True)):
        lam = bem.preconditioned_spectrum(system, bem.build_preconditioner(system, spec))
        assert lam[-1] / lam[0] <= kappa * (1 + 1e-10)


def test_galerkin_energies_increase():
    energies = [r["energy"] for r in bem.galerkin_energies(range(2, 8), lambda x: np.ones_like(x))]
    assert all(b >= a for a, b in zip(energies, energies[1:]))


def test_decomposition_constants():
    system = bem.screen_system(256)
    part = align_partition(system.mesh, [0.0])
    d = bem.decomposition_constants(system, part, 100, np.random.default_rng(1))
    assert np.isfinite(d["C2"]) and d["C1"] > 0
    assert d["within_spectrum"]


def test_single_subdomain_function_has_unit_ratio():
    system = bem.screen_system(64)
    part = align_partition(system.mesh, [0.0])
    x = np.zeros(system.size)
    dofs = part.interior_nodes(0) - 1
    x[dofs] = np.random.default_rng(2).standard_normal(dofs.size)
    local = x[dofs] @ system.matrix[np.ix_(dofs, dofs)] @ x[dofs]
    assert system.energy(x) / local == pytest.approx(1.0, rel=1e-14)


def test_subdomain_norm_table():
    rows = bem.misconception_table(256, (2, 4, 8), 100, np.random.default_rng(3))
    local = [r["local_over_global"] for r in rows]
    assert local[0] < local[1] < local[2]
    assert all(r["local_over_global"] >= r["zero_ext_over_global"] for r in rows)
