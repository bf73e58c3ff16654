import json
from decimal import Decimal, localcontext
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from prioembed import errors, io
from prioembed.audit import (DEFAULT_BOUNDS, audit_dimension, audit_distortion,
                             with_retries)
from prioembed.bounds import BoundSpec, at_most, priority_function
from prioembed.embedding import Embedding
from prioembed.frechet import frechet_row_map
from prioembed.generators import random_graph, random_metric, random_ordering, random_tree
from prioembed.metric import PriorityOrdering, validate_metric
from prioembed.petal import petal_decomposition_spanning_tree
from prioembed.tree_embed import prioritized_tree_embedding
from prioembed.ultrametric import build_ultrametric

@pytest.mark.parametrize("n, k, j, want", [
    (256, 2, 1, 1), (256, 2, 16, 1), (256, 2, 17, 3), (256, 4, 4, 1), (256, 4, 5, 3),
    (256, 4, 256, 7), (1024, 2, 32, 1), (1024, 2, 33, 3),
])
def test_distortion_bound_at_level_edges(n, k, j, want):
    assert BoundSpec(DEFAULT_BOUNDS["linf-distortion"])(j=j, n=n, k=k) == want

@pytest.mark.parametrize("j, want", [(1, 1), (2, 1), (3, 5), (4, 5), (5, 9), (16, 9), (17, 13)])
def test_dimension_bound(j, want):
    assert BoundSpec(DEFAULT_BOUNDS["linf-dimension"])(j=j, n=64, k=2) == want

def test_exact_rational_arithmetic():
    assert BoundSpec("1/3 + 1/6")() == Fraction(1, 2)
    assert BoundSpec("sqrt(16/9)")() == Fraction(4, 3)
    assert BoundSpec("log2(1/8)")() == -3
    assert BoundSpec("ceil(log(27, 3))")() == 3

def test_irrational_values_use_decimal():
    v = BoundSpec("ln(2)")()
    assert isinstance(v, Decimal) and abs(v - Decimal("0.693147180559945309417")) < Decimal("1e-20")
    assert at_most(Fraction(69, 100), v) and not at_most(Fraction(7, 10), v)

def test_alpha_in_bounds():
    pf = priority_function("4*j*j", 10)
    assert BoundSpec("2*alpha(j)")(j=3, alpha=pf) == 72

@pytest.mark.parametrize("text", ["__import__('os')", "j.real", "[1]", "'a'", "foo(1)", "x"])
def test_rejects_unsafe_or_unknown(text):
    with pytest.raises(errors.InvalidParams):
        BoundSpec(text)

def test_missing_variable():
    with pytest.raises(errors.InvalidParams):
        BoundSpec("k+1")(j=1)

def test_priority_function_grid_rounding():
    pf = priority_function("4*j*sqrt(j)", 20)
    for j in range(1, 21):
        with localcontext() as ctx:
            ctx.prec = 80
            exact = 4 * j * Decimal(j).sqrt()
            assert Decimal(pf(j).numerator) / pf(j).denominator >= exact
        assert pf(j).denominator in (1, 2 ** 64) or (2 ** 64) % pf(j).denominator == 0
    assert pf.partial_sum < 1

def test_priority_function_invalid_sum():
    with pytest.raises(errors.SumAtLeastOne):
        priority_function("j", 3)

def roundtrip(obj):
    text = io.dumps(io.to_json(obj))
    back = io.from_json(json.loads(text))
    assert io.dumps(io.to_json(back)) == text
    return back

@settings(max_examples=20, deadline=None)
@given(st.integers(1, 20), st.integers(0, 10 ** 6))
def test_roundtrips(n, seed):
    m = random_metric(n, seed, max_den=5)
    assert roundtrip(m) == m
    g = random_graph(n, seed, max_den=5)
    assert roundtrip(g).edges == g.edges
    t = random_tree(n, seed)
    assert roundtrip(t).adj == t.adj
    o = random_ordering(n, seed)
    assert roundtrip(o) == o
    f = prioritized_tree_embedding(t, PriorityOrdering.identity(n))
    assert roundtrip(f) == f
    u = build_ultrametric(m, o)
    back = roundtrip(u)
    assert all(back.distance(p, q) == u.distance(p, q) for p in range(n) for q in range(n))

def test_spanning_tree_json_checks_indices():
    g = random_graph(20, 1)
    st_ = petal_decomposition_spanning_tree(g, PriorityOrdering.identity(20))
    d = json.loads(io.dumps(io.to_json(st_)))
    assert io.spanning_tree_from_json(d, g).edges == st_.edges
    d["edge_indices"][0] = (d["edge_indices"][0] + 1) % len(g.edges)
    with pytest.raises(errors.ValidationError):
        io.spanning_tree_from_json(d, g)

def test_parsers_accept_decimal_strings_and_numbers():
    m = io.from_json({"dist": [[0, "0.5"], ["1/2", 0]]})
    assert m.d(0, 1) == Fraction(1, 2)
    f = io.from_json({"vectors": [[1.25], ["-3/4"]]})
    assert f.vector(0) == [Fraction(5, 4)] and f.vector(1) == [Fraction(-3, 4)]

@pytest.mark.parametrize("doc", [[1, 2], {"dist": [[0, "x"], ["x", 0]]}, {"kind": "nope"},
                                 {"n": 2, "dist": [[0]]}, {"dist": [[0, True], [True, 0]]}])
def test_bad_documents(doc):
    with pytest.raises(errors.ValidationError):
        io.from_json(doc)

def test_row_map_audit_passes_bound_one():
    m = random_metric(20, 2)
    o = random_ordering(20, 3)
    res = audit_distortion(m, frechet_row_map(m), o, "1")
    assert res.passed and res.checks["non_expansive"]

def test_contracted_embedding_fails_with_witness():
    m = validate_metric([[0, 2, 2], [2, 0, 2], [2, 2, 0]])
    f = Embedding.from_vectors([[0], [1], [2]])
    res = audit_distortion(m, f, PriorityOrdering.identity(3), "1")
    assert not res.passed
    bad = res.violations[0]
    assert bad.witness is not None and bad.achieved == 2

def test_zero_embedding_dimension_passes_any_bound():
    f = Embedding.from_vectors([[0, 0]] * 5)
    res = audit_dimension(f, PriorityOrdering.identity(5), "0")
    assert res.passed and all(r.achieved == 0 for r in res.rows)

def test_retry_moves_to_next_seed():
    seen = []

    class R:
        def __init__(self, ok):
            self.passed = ok

    out = with_retries(lambda s: seen.append(s) or s, lambda a: R(a == 12), seed=10)
    assert seen == [10, 11, 12] and out.passed and out.attempts == 3
    out = with_retries(lambda s: s, lambda a: R(False), seed=0, retries=3)
    assert not out.passed and out.attempts == 3
