"""A single ultrametric with prioritized distortion ``2 alpha(j)``.

Each cluster of diameter ``D`` becomes a node labelled ``D``; it is split by
growing a ball around one end of a diametral pair until no pair that would
be stretched by more than ``2 alpha`` is cut.
"""
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import errors
from .metric import MetricSpace, PriorityOrdering, default_alpha


@dataclass
class UltraNode:
    id: int
    label: int                  # in units of 1 / scale
    children: list = field(default_factory=list)
    point: int = None           # set for leaves


@dataclass
class UltrametricTree:
    nodes: list
    leaf_of: dict
    scale: int = 1
    root: int = 0

    @property
    def n(self):
        return len(self.leaf_of)

    def label(self, node):
        return Fraction(self.nodes[node].label, self.scale)

    def _parents(self):
        par = {self.root: None}
        for nd in self.nodes:
            for c in nd.children:
                par[c] = nd.id
        return par

    def distance(self, p, q):
        if p == q:
            return Fraction(0)
        par = self._parents()
        up = set()
        a = self.leaf_of[p]
        while a is not None:
            up.add(a)
            a = par[a]
        b = self.leaf_of[q]
        while b not in up:
            b = par[b]
        return self.label(b)

    def leaves_under(self):
        out = {}
        for nd in reversed(self._topo()):
            if nd.point is not None:
                out[nd.id] = [nd.point]
            else:
                out[nd.id] = [p for c in nd.children for p in out[c]]
        return out

    def _topo(self):
        order, stack = [], [self.root]
        while stack:
            v = stack.pop()
            order.append(self.nodes[v])
            stack.extend(self.nodes[v].children)
        return order

    def distance_matrix(self):
        """Leaf distances in units of ``1 / scale``."""
        n = self.n
        big = max((nd.label for nd in self.nodes), default=0) >= 2 ** 62
        D = np.zeros((n, n), dtype=object if big else np.int64)
        under = self.leaves_under()
        for nd in self.nodes:
            kids = [np.asarray(under[c], dtype=np.intp) for c in nd.children]
            for a in range(len(kids)):
                for b in range(a + 1, len(kids)):
                    D[np.ix_(kids[a], kids[b])] = nd.label
                    D[np.ix_(kids[b], kids[a])] = nd.label
        return D

    def as_metric(self):
        return MetricSpace(self.distance_matrix(), self.scale, check=False)

    def check(self):
        """Labels shrink towards the leaves and are zero exactly at leaves."""
        for nd in self.nodes:
            if nd.point is not None:
                if nd.label != 0 or nd.children:
                    raise errors.InvariantError(f"leaf {nd.id} has label or children")
                continue
            if nd.label <= 0:
                raise errors.InvariantError(f"internal node {nd.id} has label {nd.label}")
            for c in nd.children:
                if self.nodes[c].label > nd.label:
                    raise errors.InvariantError(f"child {c} outranks parent {nd.id}")
        return True


def is_ultrametric(D):
    """Strong triangle inequality over all triples of a distance matrix."""
    D = np.asarray(D)
    for y in range(D.shape[0]):
        if (D > np.maximum(D[:, y][:, None], D[y, :][None, :])).any():
            return False
    return True


@dataclass
class PartitionTrace:
    x1: list
    x2: list
    r: Fraction               # final radius, in units of 1 / scale
    increments: list          # rank j of each radius increase


def _diametral_pair(num):
    top = num.max()
    i, j = np.argwhere(num == top)[0]
    return int(i), int(j), top


def _thresholds(delta, alpha, n):
    """Largest integer distance still counted as bad for minimum rank ``j``:
    ``2 alpha(j) d < delta``  <=>  ``d <= ceil(delta / (2 alpha(j))) - 1``."""
    out = []
    for j in range(1, n + 1):
        t = Fraction(delta) / (2 * alpha(j))
        out.append(-(-t.numerator // t.denominator) - 1)
    return out


def first_bad_rank(num, inside, thr):
    """Smallest rank (1-based, rows of ``num`` in rank order) touching a
    separated pair ``(a, b)``, ``a < b``, with ``num[a, b] <= thr[a]``."""
    n = num.shape[0]
    sep = inside[:, None] != inside[None, :]
    close = num <= np.asarray(thr, dtype=num.dtype)[:, None]
    bad = np.triu(sep & close, 1)
    rows = np.nonzero(bad.any(axis=1))[0]
    return int(rows[0]) + 1 if rows.size else None


def _grow(num, alpha, u, v, delta):
    """Ball growth on a cluster whose rows are already in rank order."""
    n = num.shape[0]
    thr = _thresholds(delta, alpha, n)
    r = Fraction(0)
    increments = []
    while True:
        inside = num[u] <= r.numerator // r.denominator
        j = first_bad_rank(num, inside, thr)
        if j is None:
            break
        increments.append(j)
        if increments.count(j) > 2 or len(increments) > 2 * n:
            raise errors.InvariantError(f"rank {j} triggered a third radius increase")
        r += Fraction(delta) / (2 * alpha(j))
    if inside[v] or r >= delta:
        raise errors.InvariantError(f"ball grew to {r} and swallowed the far end of a diameter {delta}")
    return inside, r, increments


def grow_ultrametric_partition(m, ordering, alpha, u, v, trace=False):
    """Split the cluster ``m`` into ``(X1, X2)`` with ``u`` in ``X1`` and
    ``v`` in ``X2``, never cutting a bad pair."""
    n = m.n
    if ordering.n != n:
        raise errors.OrderingMismatch("ordering and metric sizes differ")
    if n < 2 or m.num.max() == 0:
        raise errors.DegenerateDiameter("cluster has zero diameter")
    delta = int(m.num.max())
    if m.num[u, v] != delta:
        raise errors.InvalidParams(f"d({u}, {v}) is not the diameter")
    perm = np.asarray(ordering.perm, dtype=np.intp)
    num = m.num[np.ix_(perm, perm)]
    inside, r, inc = _grow(num, alpha, ordering.rank[u] - 1, ordering.rank[v] - 1, delta)
    in_pts = np.zeros(n, dtype=bool)
    in_pts[perm] = inside
    x1 = [int(p) for p in np.nonzero(in_pts)[0]]
    x2 = [int(p) for p in np.nonzero(~in_pts)[0]]
    if trace:
        return PartitionTrace(x1, x2, r, inc)
    return x1, x2


def build_ultrametric(m, ordering, alpha=None):
    """Non-contractive ultrametric in which pairs with ``x_j`` stretch by at
    most ``2 alpha(j)``. Both halves recurse with the induced ranking."""
    n = m.n
    if not isinstance(ordering, PriorityOrdering):
        ordering = PriorityOrdering(ordering)
    if ordering.n != n:
        raise errors.OrderingMismatch("ordering and metric sizes differ")
    if alpha is None:
        alpha = default_alpha(n)
    if alpha.n_max < n:
        raise errors.InvalidParams(f"alpha is certified only up to {alpha.n_max} < {n}")
    nodes, leaf_of = [], {}

    def new(label, point=None):
        nodes.append(UltraNode(len(nodes), int(label), [], point))
        return nodes[-1]

    stack = [(None, sorted(range(n)))]
    while stack:
        parent, pts = stack.pop()
        if len(pts) == 1:
            nd = new(0, pts[0])
            leaf_of[pts[0]] = nd.id
        else:
            idx = np.asarray(pts, dtype=np.intp)
            sub = m.num[np.ix_(idx, idx)]
            u, v, delta = _diametral_pair(sub)
            nd = new(delta)
            perm = ordering.induced(pts)
            local = {p: i for i, p in enumerate(pts)}
            sub_ord = PriorityOrdering([local[p] for p in perm])
            x1, x2 = grow_ultrametric_partition(MetricSpace(sub, m.scale, check=False),
                                                sub_ord, alpha, u, v)
            # X2 is pushed first so X1 is expanded first
            stack.append((nd.id, [pts[i] for i in x2]))
            stack.append((nd.id, [pts[i] for i in x1]))
        if parent is not None:
            nodes[parent].children.append(nd.id)
    return UltrametricTree(nodes, leaf_of, m.scale, 0)
