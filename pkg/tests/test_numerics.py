import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsobolev.errors import DegenerateFit, DimensionMismatch, MaxDepthExceeded, NotSPD
from fracsobolev.numerics import (
    QuadSpec,
    adaptive_quad,
    fit_loglog_slope,
    gauss_kronrod_cell,
    gauss_legendre,
    generalized_eig,
    power_weight_quad,
)


def test_one_dof_eigenvalue():
    basis = generalized_eig([[4.0]], [[1.0 / 3.0]])
    np.testing.assert_allclose(basis.eigenvalues, [12.0], rtol=1e-14)
    # mass-normalised: phi^T m phi = 1
    np.testing.assert_allclose(basis.modes[0, 0] ** 2 / 3.0, 1.0, rtol=1e-14)


def test_identity_pair():
    basis = generalized_eig(np.eye(2), np.eye(2))
    np.testing.assert_allclose(basis.eigenvalues, [1.0, 1.0])
    np.testing.assert_allclose(basis.modes.T @ basis.modes, np.eye(2), atol=1e-14)


def test_diagonal_pair():
    basis = generalized_eig(np.diag([1.0, 4.0]), np.eye(2))
    np.testing.assert_allclose(basis.eigenvalues, [1.0, 4.0])


def test_eig_rejects_bad_input():
    with pytest.raises(NotSPD):
        generalized_eig(np.eye(2), np.diag([1.0, -1.0]))
    with pytest.raises(DimensionMismatch):
        generalized_eig(np.eye(2), np.eye(3))


def _spd(rng, n):
    q = rng.standard_normal((n, n))
    return q @ q.T + n * np.eye(n)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_eigen_residual_and_orthonormality(n, seed):
    rng = np.random.default_rng(seed)
    a, m = _spd(rng, n), _spd(rng, n)
    basis = generalized_eig(a, m)
    res = a @ basis.modes - m @ basis.modes * basis.eigenvalues
    assert np.abs(res).max() <= 1e-9 * np.abs(a).sum(axis=1).max()
    np.testing.assert_allclose(basis.modes.T @ m @ basis.modes, np.eye(n), atol=1e-10)
    assert np.all(np.diff(basis.eigenvalues) >= 0)


def test_eig_is_deterministic():
    rng = np.random.default_rng(3)
    a, m = _spd(rng, 20), _spd(rng, 20)
    b1, b2 = generalized_eig(a, m), generalized_eig(a, m)
    assert np.array_equal(b1.eigenvalues, b2.eigenvalues)
    assert np.array_equal(b1.modes, b2.modes)


def test_quad_constant():
    assert adaptive_quad(lambda x: np.ones_like(x), 0.0, 1.0).value == pytest.approx(1.0, rel=1e-15)


def test_quad_inverse_sqrt():
    res = adaptive_quad(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, QuadSpec().with_flags(True, False))
    assert abs(res.value - 2.0) <= 1e-8


def test_quad_log_weighted_radial_integral():
    # int_0^(1/2) r / (-log r) dr = E1(2 log 2), a finite value
    import scipy.special

    spec = QuadSpec(rel_tol=1e-12).with_flags(True, False)
    res = adaptive_quad(lambda r: r / -np.log(r), 0.0, 0.5, spec)
    assert res.value == pytest.approx(float(scipy.special.exp1(2 * math.log(2))), rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=1, max_size=16), st.floats(-2, 2), st.floats(0.1, 3))
def test_quad_exact_on_polynomials(coeffs, a, width):
    # the Kronrod rule integrates degree <= 22 exactly; stay well inside that
    poly = np.polynomial.Polynomial(coeffs)
    b = a + width
    exact = poly.integ()(b) - poly.integ()(a)
    res = adaptive_quad(poly, a, b, QuadSpec(abs_tol=1e-300))
    scale = np.polynomial.Polynomial(np.abs(coeffs)).integ()(max(abs(a), abs(b))) * 2 + 1e-300
    assert abs(res.value - exact) <= 1e-13 * scale


def test_quad_honours_breakpoints():
    res = adaptive_quad(lambda x: np.abs(x - 0.3), 0.0, 1.0, points=[0.3])
    assert res.value == pytest.approx(0.5 * (0.3**2 + 0.7**2), rel=1e-14)


def test_quad_divergent_raises():
    spec = QuadSpec(max_depth=30).with_flags(True, False)
    with pytest.raises(MaxDepthExceeded):
        adaptive_quad(lambda x: 1.0 / x, 0.0, 1.0, spec)


def test_quad_rejects_reversed_interval():
    with pytest.raises(ValueError):
        adaptive_quad(lambda x: x, 1.0, 0.0)


def test_gauss_kronrod_cell_vectorised():
    val, err = gauss_kronrod_cell(lambda x: x**2, np.array([0.0, 1.0]), np.array([1.0, 2.0]))
    np.testing.assert_allclose(val, [1 / 3, 7 / 3], rtol=1e-14)
    assert np.all(err < 1e-13)


def test_gauss_legendre_interval():
    x, w = gauss_legendre(5, 2.0, 4.0)
    assert w.sum() == pytest.approx(2.0)
    assert np.all((x > 2) & (x < 4))


@pytest.mark.parametrize("power", [-0.5, 0.0, 0.5, 1.0])
def test_power_weight_quad(power):
    # int_0^2 cos(t) t^p dt against scipy's oscillatory-free reference
    from scipy.integrate import quad

    ref = quad(lambda t: math.cos(t) * t**power, 0, 2, epsabs=0, epsrel=1e-13, limit=200)[0]
    res = power_weight_quad(np.cos, 2.0, power, QuadSpec(rel_tol=1e-12))
    assert res.value == pytest.approx(ref, rel=1e-11)


def test_power_weight_quad_rejects_nonintegrable_power():
    with pytest.raises(ValueError):
        power_weight_quad(np.cos, 1.0, -1.0)


def test_fit_exact_power_law():
    fit = fit_loglog_slope([(1, 1), (2, 4), (4, 16)])
    assert fit.slope == pytest.approx(2.0, abs=1e-14)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_constant():
    assert fit_loglog_slope([(1, 3.0), (10, 3.0)]).slope == pytest.approx(0.0, abs=1e-15)


def test_fit_degenerate():
    with pytest.raises(DegenerateFit):
        fit_loglog_slope([(1, 1)])
    with pytest.raises(DegenerateFit):
        fit_loglog_slope([(2, 1), (2, 3)])
