from fractions import Fraction
from math import ceil, log

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prioembed import errors
from prioembed.audit import DEFAULT_BOUNDS, audit_distortion, with_retries
from prioembed.embedding import is_non_expansive
from prioembed.frechet import (MODE_DIMENSION, MODE_DISTORTION, SampleConfig, _membership,
                               build_copied_space_dimension, build_copied_space_distortion,
                               copies_dimension, dimension_level, distortion_level,
                               distortion_set_count, embed_linf_dimension,
                               embed_linf_distortion, loglog_levels)
from prioembed.generators import random_metric, random_ordering
from prioembed.metric import PriorityOrdering, validate_metric


def uniform(n):
    return validate_metric([[0 if i == j else 1 for j in range(n)] for i in range(n)])


def test_k1_gives_single_copies():
    m = uniform(7)
    s = build_copied_space_distortion(m, PriorityOrdering.identity(7), 1)
    assert s.N == 7 and list(s.multiplicity) == [1] * 7


def test_n4_k2_multiplicities():
    m = uniform(4)
    o = PriorityOrdering([2, 0, 3, 1])
    s = build_copied_space_distortion(m, o, 2)
    assert [int(s.multiplicity[o.point(j)]) for j in range(1, 5)] == [4, 4, 1, 1]
    assert s.N == 10
    # copies are laid out in rank order
    assert list(s.owner) == [2] * 4 + [0] * 4 + [3, 1]


@pytest.mark.parametrize("n, k", [(5, 1), (16, 2), (100, 3), (256, 4), (1000, 5)])
def test_distortion_multiplicities_non_increasing(n, k):
    o = PriorityOrdering.identity(n)
    s = build_copied_space_distortion(uniform(n) if n <= 256 else _fake(n), o, k)
    mult = [int(s.multiplicity[p]) for p in o.perm]
    assert all(a >= b for a, b in zip(mult, mult[1:]))
    levels = [distortion_level(j, n, k) for j in range(1, n + 1)]
    for j, i in enumerate(levels, start=1):
        # n^((i-1)/k) < j <= n^(i/k), in exact integers
        assert j ** k <= n ** i and (i == 1 or j ** k > n ** (i - 1))


class _fake:
    """Stands in for a metric when only ``n`` is read."""

    def __init__(self, n):
        self.n = n


def test_dimension_copies_n16():
    assert loglog_levels(16) == 2
    assert copies_dimension(16, 0) == 9
    assert copies_dimension(16, 1) == 1
    s = build_copied_space_dimension(_fake(16), PriorityOrdering.identity(16))
    assert list(s.multiplicity) == [1, 1, 9, 9] + [1] * 12
    assert list(s.level[:2]) == [-1, -1]


@pytest.mark.parametrize("n", [3, 17, 300, 1024])
def test_dimension_multiplicities_non_increasing(n):
    s = build_copied_space_dimension(_fake(n), PriorityOrdering.identity(n))
    mult = list(s.multiplicity[2:])
    assert all(a >= b for a, b in zip(mult, mult[1:]))


def test_dimension_levels():
    assert dimension_level(1) is None and dimension_level(2) is None
    assert [dimension_level(j) for j in (3, 4, 5, 16, 17, 256, 257)] == [0, 0, 1, 1, 2, 2, 3]


def test_set_count_formula():
    for N, k in [(752, 2), (3392, 4), (10, 3)]:
        assert distortion_set_count(N, k, 16) == ceil(16 * N ** (1 / k) * log(N))


def test_invalid_config():
    with pytest.raises(errors.InvalidParams):
        SampleConfig(0)
    with pytest.raises(errors.InvalidParams):
        SampleConfig(2, c=0)
    with pytest.raises(errors.InvalidParams):
        SampleConfig(2, seed=-1)


def test_large_k_warns():
    with pytest.warns(UserWarning):
        embed_linf_distortion(uniform(4), PriorityOrdering.identity(4), SampleConfig(5))


def _oracle_column(m, hit):
    members = [y for y in range(m.n) if hit[y]]
    return [min((m.d(x, y) for y in members), default=Fraction(0)) for x in range(m.n)]


def _keys(res, cfg):
    for col, coord in enumerate(res.family):
        label = coord.label
        if coord.mode == "distortion":
            yield col, (MODE_DISTORTION, *label), coord.probability
        elif label[0] == "E":
            yield col, (MODE_DIMENSION, 0, label[1]), coord.probability
        elif label[0] == "A":
            yield col, (MODE_DIMENSION, 1, *label[1:]), coord.probability


@pytest.mark.parametrize("mode", ["distortion", "dimension"])
def test_coordinates_match_set_distance_oracle(mode):
    m = random_metric(40, 3, max_den=3)
    o = random_ordering(40, 4)
    cfg = SampleConfig(2, 2, seed=11)
    fn = embed_linf_distortion if mode == "distortion" else embed_linf_dimension
    res = fn(m, o, cfg, detailed=True)
    f = res.embedding
    checked = 0
    for col, key, p in _keys(res, cfg):
        _, hit = _membership(res.space, cfg.seed, key, p)
        got = [Fraction(int(v), f.scale) for v in f.num[:, col]]
        assert got == _oracle_column(m, hit)
        for x in np.nonzero(hit)[0]:
            assert got[x] == 0
        checked += 1
    assert checked == len(res.family) - (2 if mode == "dimension" else 0)
    if mode == "dimension":
        assert f.num[o.point(1), 0] == 0 and f.num[o.point(2), 1] == 0


def test_two_points_k1_distortion_one():
    m = validate_metric([[0, 3], [3, 0]])
    o = PriorityOrdering.identity(2)
    out = with_retries(lambda s: embed_linf_distortion(m, o, SampleConfig(1, 16, s)),
                       lambda f: audit_distortion(m, f, o, "1", {"k": 1}), seed=0)
    assert out.passed and out.attempts <= 3


@pytest.mark.parametrize("fn", [embed_linf_distortion, embed_linf_dimension])
def test_same_seed_same_output(fn):
    m = random_metric(30, 1)
    o = random_ordering(30, 2)
    a = fn(m, o, SampleConfig(2, 4, 5))
    b = fn(m, o, SampleConfig(2, 4, 5))
    c = fn(m, o, SampleConfig(2, 4, 6))
    assert np.array_equal(a.num, b.num) and a.scale == b.scale
    assert not np.array_equal(a.num, c.num)


def test_single_point():
    m = validate_metric([[0]])
    o = PriorityOrdering.identity(1)
    for fn in (embed_linf_distortion, embed_linf_dimension):
        f = fn(m, o, SampleConfig(1))
        assert f.n == 1 and not f.num.any()


def test_dimension_mode_n256_within_three_seeds():
    m = random_metric(256, 8)
    o = random_ordering(256, 9)
    out = with_retries(lambda s: embed_linf_dimension(m, o, SampleConfig(2, 16, s)),
                       lambda f: audit_distortion(m, f, o, DEFAULT_BOUNDS["linf-dimension"],
                                                  {"k": 2}), seed=0)
    assert out.passed


@pytest.mark.filterwarnings("ignore:k=")
@settings(max_examples=15, deadline=None)
@given(st.integers(2, 30), st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(0, 2 ** 32))
def test_frechet_non_expansive_property(n, mseed, k, seed):
    m = random_metric(n, mseed, max_den=4)
    o = random_ordering(n, mseed + 1)
    for fn in (embed_linf_distortion, embed_linf_dimension):
        f = fn(m, o, SampleConfig(k, 2, seed))
        assert is_non_expansive(m, f)
