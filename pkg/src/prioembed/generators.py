"""Seeded random instances: trees, connected graphs, metrics, orderings.

- tree: vertex ``v`` attaches to a uniform earlier vertex, weight uniform
  in ``1..max_weight``.
- graph: a random tree for connectivity plus every other pair independently
  with probability ``p``; weights ``a/b`` with ``a`` uniform in
  ``1..max_weight`` and ``b`` uniform in ``1..max_den``.
- metric: the shortest-path metric of such a graph.
"""
from fractions import Fraction

import numpy as np

from . import errors
from .metric import PriorityOrdering, WeightedGraph, shortest_path_metric
from .tree import WeightedTree


def _rng(seed):
    return np.random.default_rng(seed)


def _check_n(n):
    if int(n) != n or n < 1:
        raise errors.InvalidParams(f"n must be a positive integer, got {n}")


def random_tree(n, seed=0, max_weight=100):
    _check_n(n)
    if max_weight < 1:
        raise errors.InvalidParams("max_weight must be at least 1")
    rng = _rng(seed)
    edges = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, int(rng.integers(1, max_weight + 1))))
    return WeightedTree.from_edges(n, edges)


def random_graph(n, seed=0, p=None, max_weight=100, max_den=1):
    _check_n(n)
    if max_weight < 1 or max_den < 1:
        raise errors.InvalidParams("max_weight and max_den must be at least 1")
    if p is None:
        p = min(1.0, 3.0 / max(n, 1))
    if not 0 <= p <= 1:
        raise errors.InvalidParams(f"edge probability {p} outside [0, 1]")
    rng = _rng(seed)

    def weight():
        a = int(rng.integers(1, max_weight + 1))
        b = int(rng.integers(1, max_den + 1))
        return Fraction(a, b)

    edges = [(int(rng.integers(0, v)), v, weight()) for v in range(1, n)]
    tree = {(min(u, v), max(u, v)) for u, v, _ in edges}
    if n > 1:
        iu, ju = np.triu_indices(n, 1)
        pick = rng.random(iu.size) < p
        for u, v in zip(iu[pick], ju[pick]):
            if (int(u), int(v)) not in tree:
                edges.append((int(u), int(v), weight()))
    return WeightedGraph(n, edges)


def random_metric(n, seed=0, p=None, max_weight=100, max_den=1):
    return shortest_path_metric(random_graph(n, seed, p, max_weight, max_den))


def random_ordering(n, seed=0):
    _check_n(n)
    return PriorityOrdering(_rng(seed).permutation(n))
