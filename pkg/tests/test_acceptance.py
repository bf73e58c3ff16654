"""The nine acceptance criteria, each at its stated tolerance.

Every test is named ``test_criterion_<i>_...``; the conftest prints one
PASS/FAIL line per criterion at the end of the run.
"""
import json
import math
import time
from collections import Counter
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prioembed import io
from prioembed.audit import DEFAULT_BOUNDS, audit_distortion, with_retries
from prioembed.cli import main as cli_main
from prioembed.embedding import dimension_report, distortion_report, pairwise_linf
from prioembed.folding import k_folding
from prioembed.frechet import SampleConfig, embed_linf_dimension, embed_linf_distortion
from prioembed.generators import random_graph, random_metric, random_ordering, random_tree
from prioembed.metric import MetricSpace, default_alpha
from prioembed.petal import petal_decomposition_spanning_tree
from prioembed.tree_embed import prioritized_tree_embedding
from prioembed.ultrametric import build_ultrametric

from oracles import graph_apsp, is_spanning_tree, linf, tree_distances, zero_edge_oracle

# Measured by demos/pilot_dimension_constant.py on a separate pilot instance
# (metric seed 101, ordering seed 202): max 122.77 over k in {2, 4} and three
# seeds; frozen with a 10% margin.
FROZEN_C = 136


def _tree_pairs_exact(t, f):
    """Exact comparison of l_inf image distances with tree distances."""
    m = t.metric()
    E = pairwise_linf(f)
    return np.array_equal(E.astype(object) * m.scale, m.num.astype(object) * f.scale)


@lru_cache(maxsize=1)
def criterion_trees():
    out = []
    for n in (5, 20, 100, 200):
        for s in range(25):
            t = random_tree(n, seed=1000 * n + s, max_weight=100)
            o = random_ordering(n, seed=7000 * n + s)
            out.append((t, o))
    return out


@lru_cache(maxsize=1)
def criterion_embeddings():
    start = time.perf_counter()
    res = [prioritized_tree_embedding(t, o, detailed=True) for t, o in criterion_trees()]
    return res, time.perf_counter() - start


def test_criterion_1_tree_isometry():
    """100 trees, n in {5,20,100,200}: exact isometry, < 2 min."""
    start = time.perf_counter()
    results, _ = criterion_embeddings()
    for (t, o), res in zip(criterion_trees(), results):
        f = res.embedding
        assert _tree_pairs_exact(t, f), f"not isometric for n={t.n_real}"
        rep = distortion_report(t.metric(), f, o)
        assert all(rep.distortion(j) == 1 for j in range(1, t.n_real + 1))
    # spot-check with pure-Python tree distances on the small trees
    for (t, o), res in list(zip(criterion_trees(), results))[:25]:
        for u in range(t.n_real):
            d = tree_distances(t.adj, u)
            for v in range(t.n_real):
                assert linf(res.embedding.vector(u), res.embedding.vector(v)) == d[v]
    assert time.perf_counter() - start < 120


def test_criterion_2_prioritized_dimension():
    """beta(j) <= 40 (log2 j + 2) and <= the level-sum bound, same trees."""
    results, _ = criterion_embeddings()
    for (t, o), res in zip(criterion_trees(), results):
        beta = dimension_report(res.embedding, o).per_j
        for j, b in enumerate(beta, start=1):
            assert b <= 40 * (math.log2(j) + 2), (t.n_real, j, b)
            assert b <= res.level_bound(j), (t.n_real, j, b)


def test_criterion_3_folding_oracle():
    """200 trees n <= 50: k-folding distances equal the zero-edge oracle and
    non-crossing pairs keep their distance."""
    rng = np.random.default_rng(3)
    for s in range(200):
        n = 2 + s % 49
        t = random_tree(n, seed=s, max_weight=100)
        size = int(rng.integers(1, n + 1))
        K = [int(v) for v in rng.choice(n, size=size, replace=False)]
        rec = k_folding(t, K)
        fd = rec.folding
        oracle = zero_edge_oracle(rec.refined, fd.find)
        for u in range(n):
            dh = tree_distances(rec.final_tree.adj, fd.find(u))
            dt = tree_distances(t.adj, u)
            for v in range(n):
                got = dh[fd.find(v)]
                assert got == oracle(u, v)
                if not rec.crosses(u, v):
                    assert got == dt[v]


def _expected_distortion_dim(n, k, c):
    N = 0
    for j in range(1, n + 1):
        i = next(i for i in range(1, k + 1) if j ** k <= n ** i)
        target = (2 ** k * n) ** (k - i)
        mult = round(target ** (1 / k))
        while mult ** k < target:
            mult += 1
        while mult > 1 and (mult - 1) ** k >= target:
            mult -= 1
        N += mult
    x = c * N ** (1 / k) * math.log(N)
    assert abs(x - round(x)) > 1e-6   # float is decisive away from integers
    return k * math.ceil(x)


def test_criterion_4_distortion_mode_n256():
    """n=256, k in {2,4}, c=16: per-j bound within 3 seeds, exact coordinate
    count, < 5 min."""
    start = time.perf_counter()
    for mseed in (0, 1):
        m = random_metric(256, seed=mseed)
        o = random_ordering(256, seed=mseed + 10)
        for k in (2, 4):
            out = with_retries(
                lambda s: embed_linf_distortion(m, o, SampleConfig(k, 16, s)),
                lambda f: audit_distortion(m, f, o, DEFAULT_BOUNDS["linf-distortion"], {"k": k}),
                seed=0, retries=3)
            assert out.passed, f"metric {mseed}, k={k}: failed after {out.attempts} seeds"
            assert out.results[0].checks["non_expansive"]
            assert out.artifact.dim == _expected_distortion_dim(256, k, 16)
    assert time.perf_counter() - start < 300


def test_criterion_5_dimension_mode_n1024():
    """n=1024, k in {2,4}: per-j distortion bound within 3 seeds and
    beta(j) <= C k (j^(2/k) + log2 k) ln n with the frozen C."""
    n = 1024
    m = random_metric(n, seed=1)
    o = random_ordering(n, seed=2)
    for k in (2, 4):
        def audit(f):
            return audit_distortion(m, f, o, DEFAULT_BOUNDS["linf-dimension"], {"k": k})

        out = with_retries(lambda s: embed_linf_dimension(m, o, SampleConfig(k, 16, s)),
                           audit, seed=0, retries=3)
        assert out.passed, f"k={k}: distortion failed after {out.attempts} seeds"
        beta = dimension_report(out.artifact, o).per_j
        for j, b in enumerate(beta, start=1):
            allowed = FROZEN_C * k * (j ** (2 / k) + math.log2(k)) * math.log(n)
            assert b <= allowed, f"k={k} j={j}: beta={b} > {allowed:.1f}"


def _strong_triangle(D):
    for y in range(D.shape[0]):
        if (D > np.maximum(D[:, y][:, None], D[y, :][None, :])).any():
            return False
    return True


def test_criterion_6_ultrametric():
    """100 metrics n <= 256, default alpha: ultrametric, non-contractive,
    per-j distortion <= 2 alpha(j), deterministic."""
    sizes = [2, 3, 5, 8, 13, 32, 64, 128, 200, 256]
    for s in range(100):
        n = sizes[s % len(sizes)]
        m = random_metric(n, seed=500 + s, max_den=1 + s % 4)
        o = random_ordering(n, seed=900 + s)
        alpha = default_alpha(n)
        u = build_ultrametric(m, o, alpha)
        U = u.distance_matrix().astype(object) * m.scale
        d = m.num.astype(object) * u.scale
        assert _strong_triangle(u.distance_matrix())
        assert (U >= d).all()
        for j in range(1, n + 1):
            p = o.point(j)
            a = 2 * alpha(j)
            assert (U[p] * a.denominator <= d[p] * a.numerator).all(), (s, j)
        if s < 10:
            again = build_ultrametric(m, o, alpha).distance_matrix()
            assert np.array_equal(again, u.distance_matrix())


def test_criterion_7_spanning_tree():
    """50 graphs n <= 128: spanning subtree, dominating, per-j stretch
    <= 1024 alpha(j), cluster tree radius <= 4 rad, carved r <= rad / 8."""
    for s in range(50):
        n = 2 + (s * 37) % 127
        g = random_graph(n, seed=300 + s, max_den=1 + s % 3)
        o = random_ordering(n, seed=400 + s)
        alpha = default_alpha(n)
        st_ = petal_decomposition_spanning_tree(g, o, alpha)
        assert is_spanning_tree(n, st_.edges)
        assert set(st_.edges) <= set(g.edges)
        dg = graph_apsp(n, g.edges)
        dt = graph_apsp(n, st_.edges)
        for j in range(1, n + 1):
            p = o.point(j)
            for q in range(n):
                if q != p:
                    assert dg[p][q] <= dt[p][q] <= 1024 * alpha(j) * dg[p][q], (s, j, q)
        for rec in st_.clusters:
            assert rec.tree_radius <= 4 * rec.cluster.rad
            for carve in rec.carves:
                assert carve.radius <= rec.cluster.rad / 8
                assert max(Counter(carve.increments).values(), default=0) <= 2


def _brute_non_expansive(m, f):
    for p in range(m.n):
        for q in range(p + 1, m.n):
            if linf(f.vector(p), f.vector(q)) > m.d(p, q):
                return False
    return True


@pytest.mark.filterwarnings("ignore:k=")
@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 24), mseed=st.integers(0, 10 ** 6), oseed=st.integers(0, 10 ** 6),
       k=st.integers(1, 4), seed=st.integers(0, 2 ** 63), den=st.integers(1, 6))
def test_criterion_8_non_expansive(n, mseed, oseed, k, seed, den):
    """Every l_inf embedding from any mode is non-expansive on all pairs;
    the tree-valued modes dominate the metric instead."""
    o = random_ordering(n, oseed)
    t = random_tree(n, mseed)
    assert _brute_non_expansive(t.metric(), prioritized_tree_embedding(t, o))
    g = random_graph(n, mseed, max_den=den)
    m = random_metric(n, mseed, max_den=den)
    for fn in (embed_linf_distortion, embed_linf_dimension):
        assert _brute_non_expansive(m, fn(m, o, SampleConfig(k, 2, seed)))
    u = build_ultrametric(m, o)
    assert all(u.distance(p, q) >= m.d(p, q) for p in range(n) for q in range(n))
    gm = graph_apsp(n, g.edges)
    dt = graph_apsp(n, petal_decomposition_spanning_tree(g, o).edges)
    assert all(dt[p][q] >= gm[p][q] for p in range(n) for q in range(n))


def test_criterion_9_determinism(tmp_path, monkeypatch, capsys):
    """Randomized modes replay byte-identically from their manifest; serial
    and parallel audits agree."""
    monkeypatch.chdir(tmp_path)
    assert cli_main(["gen", "metric", "--n", "96", "--seed", "5", "--out", "m.json"]) == 0
    assert cli_main(["gen", "ordering", "--n", "96", "--seed", "6", "--out", "o.json"]) == 0
    for mode in ("linf-distortion", "linf-dimension"):
        out = f"{mode}.json"
        assert cli_main(["embed", mode, "--input", "m.json", "--ordering", "o.json",
                         "--k", "2", "--seed", "9", "--out", out]) == 0
        first = (tmp_path / out).read_bytes()
        capsys.readouterr()
        assert cli_main(["embed", "--from-manifest", out + ".manifest.json",
                         "--out", "replay.json"]) == 0
        assert all(json.loads(capsys.readouterr().out)["identical"].values())
        assert (tmp_path / "replay.json").read_bytes() == first
    m, o = io.load("m.json"), io.load("o.json")
    g = random_graph(60, 8)
    gm = MetricSpace(np.array(graph_apsp_num(g)), 1, check=False)
    alpha = default_alpha(96)
    arts = [
        (m, embed_linf_distortion(m, o, SampleConfig(2, 16, 3)), DEFAULT_BOUNDS["linf-distortion"]),
        (m, embed_linf_dimension(m, o, SampleConfig(2, 16, 3)), DEFAULT_BOUNDS["linf-dimension"]),
        (m, build_ultrametric(m, o, alpha), DEFAULT_BOUNDS["ultrametric"]),
    ]
    o60 = random_ordering(60, 1)
    arts.append((gm, petal_decomposition_spanning_tree(g, o60), DEFAULT_BOUNDS["spanning-tree"]))
    for metric, art, bound in arts:
        ordering = o if metric is m else o60
        params = {"k": 2, "alpha": default_alpha(metric.n)}
        serial = audit_distortion(metric, art, ordering, bound, params, workers=1).as_dict()
        parallel = audit_distortion(metric, art, ordering, bound, params, workers=4).as_dict()
        assert serial == parallel and serial["passed"]


def graph_apsp_num(g):
    d = graph_apsp(g.n, g.edges)
    assert all(x.denominator == 1 for row in d for x in row)
    return [[int(x) for x in row] for row in d]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
