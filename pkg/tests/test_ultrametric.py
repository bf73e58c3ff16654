from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from prioembed import errors
from prioembed.bounds import priority_function
from prioembed.generators import random_metric, random_ordering
from prioembed.metric import PriorityOrdering, default_alpha, validate_metric
from prioembed.ultrametric import build_ultrametric, grow_ultrametric_partition

from oracles import is_ultrametric


def uniform(n):
    return validate_metric([[0 if i == j else 1 for j in range(n)] for i in range(n)])


def test_two_point_partition():
    m = validate_metric([[0, 5], [5, 0]])
    x1, x2 = grow_ultrametric_partition(m, PriorityOrdering.identity(2), default_alpha(2), 0, 1)
    assert (x1, x2) == ([0], [1])


def test_uniform_metric_never_grows():
    m = uniform(6)
    tr = grow_ultrametric_partition(m, PriorityOrdering.identity(6), default_alpha(6), 2, 4,
                                    trace=True)
    assert tr.x1 == [2] and tr.r == 0 and tr.increments == []


def test_two_clusters_absorbed():
    big = 10 ** 6
    m = validate_metric([[0, 1, big, big], [1, 0, big, big],
                         [big, big, 0, 1], [big, big, 1, 0]])
    x1, x2 = grow_ultrametric_partition(m, PriorityOrdering.identity(4), default_alpha(4), 0, 2)
    assert x1 == [0, 1] and x2 == [2, 3]


def test_partition_needs_diameter_pair():
    m = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    with pytest.raises(errors.InvalidParams):
        grow_ultrametric_partition(m, PriorityOrdering.identity(3), default_alpha(3), 0, 1)


def test_two_point_root_label():
    m = validate_metric([[0, "7/2"], ["7/2", 0]])
    u = build_ultrametric(m, PriorityOrdering.identity(2))
    assert u.label(u.root) == Fraction(7, 2)
    assert u.distance(0, 1) == Fraction(7, 2)


def test_uniform_metric_is_isometric():
    u = build_ultrametric(uniform(9), random_ordering(9, 1))
    assert all(u.distance(p, q) == (p != q) for p in range(9) for q in range(9))


def test_single_point():
    u = build_ultrametric(validate_metric([[0]]), PriorityOrdering.identity(1))
    assert u.n == 1 and u.distance(0, 0) == 0


def test_alpha_too_short():
    with pytest.raises(errors.InvalidParams):
        build_ultrametric(uniform(5), PriorityOrdering.identity(5), default_alpha(3))


def audit(m, o, alpha):
    u = build_ultrametric(m, o, alpha)
    D = [[u.distance(p, q) for q in range(m.n)] for p in range(m.n)]
    assert is_ultrametric(D)
    for j in range(1, m.n + 1):
        p = o.point(j)
        for q in range(m.n):
            if q != p:
                assert m.d(p, q) <= D[p][q] <= 2 * alpha(j) * m.d(p, q)
    return u


@pytest.mark.parametrize("seed", range(3))
def test_random_n64_audit(seed):
    m = random_metric(64, seed, max_den=5)
    audit(m, random_ordering(64, seed + 7), default_alpha(64))


def test_custom_alpha():
    m = random_metric(30, 4)
    audit(m, random_ordering(30, 5), priority_function("2*j*j", 30))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_ultrametric_property(n, mseed, oseed):
    m = random_metric(n, mseed, max_den=3)
    audit(m, random_ordering(n, oseed), default_alpha(n))


def test_deterministic():
    m = random_metric(50, 2)
    o = random_ordering(50, 3)
    a, b = build_ultrametric(m, o), build_ultrametric(m, o)
    assert a.distance_matrix().tolist() == b.distance_matrix().tolist()
