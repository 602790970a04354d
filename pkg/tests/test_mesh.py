import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracsobolev.errors import InvalidCount, InvalidGrading, UnalignedBreakpoint
from fracsobolev.mesh import Interval, align_partition, graded_mesh, partition_from_json, uniform_mesh

UNIT = Interval(0.0, 1.0)


def test_uniform_nodes():
    np.testing.assert_array_equal(uniform_mesh(UNIT, 2).nodes, [0, 0.5, 1])
    np.testing.assert_array_equal(uniform_mesh(Interval(-1, 1), 4).nodes, [-1, -0.5, 0, 0.5, 1])


def test_uniform_rejects_zero_elements():
    with pytest.raises(InvalidCount):
        uniform_mesh(UNIT, 0)


def test_interval_requires_order():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)


def test_graded_nodes():
    np.testing.assert_allclose(graded_mesh(UNIT, 2, 2.0, "left").nodes, [0, 0.25, 1])
    np.testing.assert_allclose(graded_mesh(UNIT, 2, 2.0, "right").nodes, [0, 0.75, 1])


def test_graded_with_unit_grading_is_uniform():
    np.testing.assert_allclose(graded_mesh(UNIT, 7, 1.0).nodes, uniform_mesh(UNIT, 7).nodes, atol=1e-15)


def test_graded_rejects_bad_grading():
    with pytest.raises(InvalidGrading):
        graded_mesh(UNIT, 4, 0.5)


def test_align_two_subdomains():
    part = align_partition(uniform_mesh(UNIT, 4), [0.5])
    assert part.n_sub == 2
    assert part.node_ranges == [(0, 2), (2, 4)]
    np.testing.assert_array_equal(part.interface_nodes, [2])


def test_align_empty_breakpoints():
    part = align_partition(uniform_mesh(UNIT, 4), [])
    assert part.n_sub == 1
    assert part.interval(0) == UNIT


def test_align_unaligned():
    with pytest.raises(UnalignedBreakpoint):
        align_partition(uniform_mesh(UNIT, 4), [0.3])


def test_partition_json_round_trip():
    part = align_partition(uniform_mesh(UNIT, 8), [0.25, 0.75])
    back = partition_from_json(part.to_json())
    np.testing.assert_array_equal(back.mesh.nodes, part.mesh.nodes)
    assert back.node_ranges == part.node_ranges


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 200), st.data())
def test_partition_covers_domain(n, data):
    mesh = uniform_mesh(Interval(-1.0, 2.0), n)
    idx = data.draw(st.sets(st.integers(1, n - 1), max_size=min(6, n - 1)))
    part = align_partition(mesh, [mesh.nodes[i] for i in sorted(idx)])
    total = sum(part.interval(j).diameter for j in range(part.n_sub))
    assert abs(total - 3.0) <= 1e-14 * 3.0
    owners = part.subdomain_of_element
    assert owners.shape == (n,)
    counts = np.bincount(owners, minlength=part.n_sub)
    assert counts.sum() == n and np.all(counts >= 1)
