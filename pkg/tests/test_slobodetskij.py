import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsobolev.errors import DivergentIntegral, XOutsideInner
from fracsobolev.funcspec import P1Function, Rescaled, parse_expr, u_eps
from fracsobolev.mesh import Interval, Mesh1D, uniform_mesh
from fracsobolev.slobodetskij import (
    disk_tail_integral,
    kernel_tail_integral,
    p1_identical_pair,
    seminorm_sq,
    tilde_norm_sq,
    weighted_sq,
)

UNIT = Interval(0.0, 1.0)
X = parse_expr("x")
HAT = parse_expr("family:hat").on(UNIT)
PARABOLA = parse_expr("x*(1-x)")

# 2 - 2 log 2; cross-checked against scipy dblquad (agrees to 1e-8, limited by dblquad)
HAT_SEMINORM = 0.6137056388801094
# x(1-x); scipy dblquad agrees to 1e-12
PARABOLA_SEMINORM = {0.25: 0.06772486772486773, 0.5: 1.0 / 6.0, 0.75: 64.0 / 105.0}


@pytest.mark.parametrize("sigma, expected", [(0.5, 1.0), (0.25, 8.0 / 15.0)])
def test_seminorm_of_identity(sigma, expected):
    assert abs(seminorm_sq(X, UNIT, sigma) - expected) <= 1e-6


def test_seminorm_of_constant():
    assert seminorm_sq(parse_expr("3"), UNIT, 0.5) == 0.0


def test_seminorm_of_hat():
    assert seminorm_sq(HAT, UNIT, 0.5) == pytest.approx(HAT_SEMINORM, rel=1e-8)


@pytest.mark.parametrize("sigma", sorted(PARABOLA_SEMINORM))
def test_seminorm_of_parabola(sigma):
    assert seminorm_sq(PARABOLA, UNIT, sigma) == pytest.approx(PARABOLA_SEMINORM[sigma], rel=1e-8)


def test_weighted_examples():
    assert abs(weighted_sq(HAT, UNIT, 0.5) - 0.25) <= 1e-8
    assert abs(weighted_sq(PARABOLA, UNIT, 0.5) - 11.0 / 96.0) <= 1e-8


def test_weighted_divergent():
    with pytest.raises(DivergentIntegral):
        weighted_sq(X, UNIT, 0.5)


def test_zero_function_report():
    rep = tilde_norm_sq(parse_expr("0"), UNIT, 0.5)
    assert rep.seminorm_sq == rep.weighted_sq == rep.tilde_sq == 0.0


def test_hat_report_is_sum_of_parts():
    rep = tilde_norm_sq(HAT, UNIT, 0.5)
    assert rep.tilde_sq == pytest.approx(HAT_SEMINORM + 0.25, rel=1e-8)
    assert rep.tilde_sq == pytest.approx(rep.seminorm_sq + rep.weighted_sq, rel=1e-15)


def test_counterexample_weighted_lower_bound():
    eps = 1e-3
    rep = tilde_norm_sq(u_eps(eps), Interval(eps, 0.75), 0.5)
    assert rep.weighted_sq >= 0.46590


def test_p1_hat_routes_agree():
    mesh = uniform_mesh(UNIT, 2)
    u = P1Function(mesh, [0.0, 0.5, 0.0])
    assert seminorm_sq(u) == pytest.approx(HAT_SEMINORM, rel=1e-12)
    assert weighted_sq(u) == pytest.approx(0.25, rel=1e-14)


@pytest.mark.parametrize("sigma", [0.1, 0.25, 0.5, 0.75, 0.9])
def test_identical_pair_closed_form(sigma):
    # one element of length h with slope a: int int a^2 |x-y|^(1-2 sigma) over the square
    # reduces to 2 int_0^h a^2 d^(1 - 2 sigma) (h - d) dd; scipy's algebraic weight is the oracle
    from scipy.integrate import quad

    a, h = 1.7, 0.3
    ref = 2 * quad(lambda d: a**2 * (h - d), 0, h, weight="alg", wvar=(1 - 2 * sigma, 0))[0]
    assert p1_identical_pair(a, h, sigma) == pytest.approx(ref, rel=1e-11)


def _random_p1(seed, n):
    rng = np.random.default_rng(seed)
    mesh = uniform_mesh(UNIT, n)
    vals = rng.standard_normal(n + 1)
    vals[[0, -1]] = 0.0
    return P1Function(mesh, vals)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.sampled_from([0.25, 0.5, 0.75]))
def test_p1_and_callable_routes_agree(seed, n, sigma):
    u = _random_p1(seed, n)
    fast = tilde_norm_sq(u, None, sigma)
    wrapped = lambda x: u(x)
    slow = tilde_norm_sq(wrapped, UNIT, sigma, breakpoints=u.mesh.nodes[1:-1])
    assert slow.seminorm_sq == pytest.approx(fast.seminorm_sq, rel=1e-6)
    assert slow.weighted_sq == pytest.approx(fast.weighted_sq, rel=1e-6)


def test_p1_graded_mesh_matches_callable():
    nodes = np.array([0.0, 0.05, 0.2, 0.5, 0.6, 1.0])
    u = P1Function(Mesh1D(UNIT, nodes), [0.0, 0.3, -0.2, 1.0, 0.4, 0.0])
    wrapped = lambda x: u(x)
    slow = seminorm_sq(wrapped, UNIT, 0.5, breakpoints=nodes[1:-1])
    assert seminorm_sq(u, None, 0.5) == pytest.approx(slow, rel=1e-7)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.sampled_from([0.25, 0.5, 0.75]))
def test_reflection_symmetry(seed, n, sigma):
    u = _random_p1(seed, n)
    mirrored = P1Function(u.mesh, u.values[::-1])
    assert seminorm_sq(mirrored, None, sigma) == pytest.approx(seminorm_sq(u, None, sigma), rel=1e-10)
    assert weighted_sq(mirrored, None, sigma) == pytest.approx(weighted_sq(u, None, sigma), rel=1e-10)


@pytest.mark.parametrize("tau", [0.5, 0.125])
def test_tilde_norm_scale_invariant_at_half(tau):
    base = tilde_norm_sq(HAT, UNIT, 0.5).tilde_sq
    scaled = tilde_norm_sq(Rescaled(HAT, tau, 0.0), UNIT.scaled(tau), 0.5).tilde_sq
    assert scaled == pytest.approx(base, rel=1e-8)


@pytest.mark.parametrize("sigma", [0.25, 0.75])
def test_p1_scaling_exponent(sigma):
    u = _random_p1(7, 16)
    for tau in (0.5, 0.1):
        v = u.scaled(tau)
        assert seminorm_sq(v, None, sigma) == pytest.approx(tau ** (1 - 2 * sigma) * seminorm_sq(u, None, sigma), rel=1e-10)
        assert weighted_sq(v, None, sigma) == pytest.approx(tau ** (1 - 2 * sigma) * weighted_sq(u, None, sigma), rel=1e-10)


def test_kernel_tail_examples():
    inner, outer = Interval(-0.5, 0.5), Interval(-1.0, 1.0)
    np.testing.assert_allclose(kernel_tail_integral(0.0, inner, outer), (2.0, 4.0), rtol=1e-14)
    np.testing.assert_allclose(kernel_tail_integral(0.25, inner, outer), (3.2, 8.0), rtol=1e-14)
    assert kernel_tail_integral(0.1, outer, outer)[0] == 0.0
    with pytest.raises(XOutsideInner):
        kernel_tail_integral(0.7, inner, outer)


@settings(max_examples=300, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=4, max_size=4, unique=True), st.floats(0.01, 0.99))
def test_kernel_tail_bound(ends, frac):
    ol, il, ir, orr = sorted(ends)
    if min(il - ol, ir - il, orr - ir) < 1e-6:
        return
    x = il + frac * (ir - il)
    value, bound = kernel_tail_integral(x, Interval(il, ir), Interval(ol, orr))
    assert 0 <= value <= bound


def test_kernel_tail_ratio_unbounded():
    ratios = [np.divide(*kernel_tail_integral(0.0, Interval(-1 + g, 1 - g), Interval(-1, 1))[::-1])
              for g in (1e-1, 1e-3, 1e-5)]
    assert ratios[0] < ratios[1] < ratios[2]
    assert ratios[-1] > 1e4


def test_disk_tail_centre_and_offset():
    value, bound = disk_tail_integral(0.0, 0.5, 1.0)
    assert value == pytest.approx(2 * math.pi, rel=1e-12)
    assert bound == pytest.approx(4 * math.pi)
    # off-centre: polar dblquad about the disk centre gives 10.979521705671692
    value, bound = disk_tail_integral(0.3, 0.5, 1.0)
    assert value == pytest.approx(10.979521705671692, rel=1e-10)
    assert value <= bound
