"""Finite metrics, weighted graphs, priority orderings and priority functions."""
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from . import errors
from .scalar import common_scale, int_array, to_fraction


class MetricSpace:
    """A finite metric given by an exact distance matrix.

    Distances are held as an integer matrix ``num`` with one common positive
    denominator ``scale``; ``d(i, j) == Fraction(num[i, j], scale)``.
    Construct through :func:`validate_metric` unless the input is already
    known to be a metric (``check=False``).
    """

    def __init__(self, num, scale=1, check=True):
        num = np.asarray(num)
        if num.dtype != object:
            num = num.astype(np.int64)
        self.num = num
        self.scale = int(scale)
        self.num.setflags(write=False)
        if check:
            _check_metric(self.num)

    @property
    def n(self):
        return self.num.shape[0]

    def d(self, i, j):
        return Fraction(int(self.num[i, j]), self.scale)

    @property
    def dist(self):
        return [[self.d(i, j) for j in range(self.n)] for i in range(self.n)]

    def diameter(self):
        if self.n < 2:
            return Fraction(0)
        return Fraction(int(self.num.max()), self.scale)

    def restrict(self, points):
        idx = np.asarray(points, dtype=np.intp)
        return MetricSpace(self.num[np.ix_(idx, idx)], self.scale, check=False)

    def __eq__(self, other):
        if not isinstance(other, MetricSpace) or other.n != self.n:
            return NotImplemented
        return all(self.d(i, j) == other.d(i, j)
                   for i in range(self.n) for j in range(self.n))

    def __repr__(self):
        return f"MetricSpace(n={self.n}, scale={self.scale})"


def _check_metric(num):
    if num.ndim != 2 or num.shape[0] != num.shape[1]:
        raise errors.NotSquare(f"distance matrix has shape {num.shape}")
    n = num.shape[0]
    diag = np.nonzero(np.diagonal(num) != 0)[0]
    if len(diag):
        i = int(diag[0])
        raise errors.NonzeroDiagonal(i, num[i, i])
    asym = np.argwhere(num != num.T)
    if len(asym):
        i, j = (int(v) for v in asym[0])
        raise errors.Asymmetric(i, j, num[i, j], num[j, i])
    off = num + np.eye(n, dtype=num.dtype)
    bad = np.argwhere(off <= 0)
    if len(bad):
        i, j = (int(v) for v in bad[0])
        raise errors.NonpositiveOffDiagonal(i, j, num[i, j])
    for j in range(n):
        through = num[:, j][:, None] + num[j, :][None, :]
        viol = np.argwhere(num > through)
        if len(viol):
            i, k = (int(v) for v in viol[0])
            raise errors.TriangleViolation(i, j, k, num[i, j], num[j, k], num[i, k])


def _scaled_matrix(matrix):
    rows = [list(r) for r in matrix]
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise errors.NotSquare("distance matrix is not square")
    flat, scale = common_scale([v for r in rows for v in r])
    return int_array([flat[i * n:(i + 1) * n] for i in range(n)]), scale


def validate_metric(matrix):
    """Check a square matrix of scalars and return a :class:`MetricSpace`.

    Raises the first violated condition with its witnessing indices
    (``Asymmetric``, ``NonzeroDiagonal``, ``NonpositiveOffDiagonal``,
    ``TriangleViolation``).
    """
    if isinstance(matrix, MetricSpace):
        _check_metric(matrix.num)
        return matrix
    num, scale = _scaled_matrix(matrix)
    if num.size == 0:
        num = np.zeros((0, 0), dtype=np.int64)
    return MetricSpace(num, scale)


class WeightedGraph:
    """Undirected graph on vertices ``0..n-1`` with positive exact weights.

    Parallel edges collapse to the lightest one; self-loops are rejected.
    """

    def __init__(self, n, edges):
        self.n = int(n)
        best = {}
        for e in edges:
            u, v, w = int(e[0]), int(e[1]), to_fraction(e[2])
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise errors.ValidationError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise errors.SelfLoop(f"self-loop at vertex {u}")
            if w <= 0:
                raise errors.ValidationError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = (min(u, v), max(u, v))
            if key not in best or w < best[key]:
                best[key] = w
        self.edges = sorted((u, v, w) for (u, v), w in best.items())

    def adjacency(self):
        adj = {u: {} for u in range(self.n)}
        for u, v, w in self.edges:
            adj[u][v] = w
            adj[v][u] = w
        return adj

    def weight(self, u, v):
        key = (min(u, v), max(u, v))
        for a, b, w in self.edges:
            if (a, b) == key:
                return w
        raise KeyError(key)

    def is_connected(self):
        if self.n <= 1:
            return True
        return connected_components(self._sparse(np.ones(len(self.edges))), directed=False)[0] == 1

    def _sparse(self, data):
        rows = [u for u, _, _ in self.edges]
        cols = [v for _, v, _ in self.edges]
        return coo_matrix((data, (rows, cols)), shape=(self.n, self.n)).tocsr()

    def scaled_weights(self):
        nums, scale = common_scale([w for _, _, w in self.edges])
        return nums, scale

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, m={len(self.edges)})"


def shortest_path_metric(g):
    """All-pairs shortest-path distances of a connected graph, exactly.

    Weights are brought to a common denominator; with integer weights whose
    total stays below 2**53 the float Dijkstra of scipy is exact.
    """
    if not g.is_connected():
        raise errors.Disconnected("graph is not connected")
    if g.n == 1:
        return MetricSpace(np.zeros((1, 1), dtype=np.int64), 1, check=False)
    nums, scale = g.scaled_weights()
    if sum(nums) < 2 ** 53:
        dist = dijkstra(g._sparse(np.array(nums, dtype=float)), directed=False)
        num = np.rint(dist).astype(np.int64)
    else:
        num = np.array(_exact_apsp(g.n, g.edges, nums), dtype=object)
    return MetricSpace(num, scale, check=False)


def _exact_apsp(n, edges, nums):
    import heapq
    adj = [[] for _ in range(n)]
    for (u, v, _), w in zip(edges, nums):
        adj[u].append((v, w))
        adj[v].append((u, w))
    out = []
    for s in range(n):
        dist = [None] * n
        dist[s] = 0
        pq = [(0, s)]
        while pq:
            d, u = heapq.heappop(pq)
            if d > dist[u]:
                continue
            for v, w in adj[u]:
                nd = d + w
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    heapq.heappush(pq, (nd, v))
        out.append(dist)
    return out


class PriorityOrdering:
    """A ranking of the points: ``perm[j - 1]`` is the point ``x_j``."""

    def __init__(self, perm):
        self.perm = tuple(int(p) for p in perm)
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)):
            raise errors.OrderingMismatch(f"perm is not a permutation of 0..{n - 1}")
        rank = [0] * n
        for j, p in enumerate(self.perm, start=1):
            rank[p] = j
        self.rank = tuple(rank)

    @classmethod
    def identity(cls, n):
        return cls(range(n))

    @property
    def n(self):
        return len(self.perm)

    def point(self, j):
        """The point of rank ``j`` (1-based)."""
        return self.perm[j - 1]

    def induced(self, points):
        """Members of ``points`` sorted by rank (the induced ordering)."""
        return sorted(points, key=lambda p: self.rank[p])

    def __eq__(self, other):
        return isinstance(other, PriorityOrdering) and self.perm == other.perm

    def __repr__(self):
        return f"PriorityOrdering({list(self.perm)})"


@dataclass(frozen=True)
class PriorityFunction:
    """A priority function certified on ``1..n_max``."""
    evaluator: Callable[[int], Fraction]
    n_max: int
    partial_sum: Fraction
    values: tuple = field(repr=False)
    spec: str = "custom"

    def __call__(self, j):
        if 1 <= j <= self.n_max:
            return self.values[j - 1]
        return to_fraction(self.evaluator(j))


def validate_priority_function(alpha, n, spec="custom"):
    """Certify that ``alpha`` is positive, non-decreasing on ``1..n`` and
    that the partial sum of ``1/alpha(j)`` is below one."""
    if n < 1:
        raise errors.InvalidParams("n must be at least 1")
    values = [to_fraction(alpha(j)) for j in range(1, n + 1)]
    for j, a in enumerate(values, start=1):
        if a <= 0:
            raise errors.NonPositiveAlpha(f"alpha({j}) = {a} is not positive")
    for j in range(1, n):
        if values[j - 1] > values[j]:
            raise errors.NotMonotone(j, values[j - 1], values[j])
    total = sum((1 / a for a in values), Fraction(0))
    if total >= 1:
        raise errors.SumAtLeastOne(total, n)
    return PriorityFunction(alpha, n, total, tuple(values), spec)


_ROUND_BITS = 64


def _alpha_shape(j):
    """``j * log2(j+1) * (log2 log2 (j+3)) ** 1.1`` rounded up to a dyadic rational."""
    with localcontext() as ctx:
        ctx.prec = 60
        ln2 = Decimal(2).ln()
        lg = lambda x: Decimal(x).ln() / ln2
        v = Decimal(j) * lg(j + 1) * (Decimal("1.1") * lg(lg(j + 3)).ln()).exp()
        scaled = v * (Decimal(2) ** _ROUND_BITS)
        # +1 absorbs the residual error of the 60-digit evaluation
        return Fraction(int(scaled.to_integral_value(rounding="ROUND_CEILING")) + 1, 2 ** _ROUND_BITS)


def default_alpha(n):
    """The default priority function ``c * j log j (log log j)^1.1``.

    ``c`` is the smallest power of two for which the sum over ``1..n`` of
    ``1/alpha`` is below one.
    """
    shapes = [_alpha_shape(j) for j in range(1, max(n, 1) + 1)]
    s = sum((1 / a for a in shapes), Fraction(0))
    c = 1
    while s / c >= 1:
        c *= 2

    def alpha(j):
        return c * (shapes[j - 1] if j <= len(shapes) else _alpha_shape(j))

    return validate_priority_function(alpha, max(n, 1), spec=f"default(c={c})")
