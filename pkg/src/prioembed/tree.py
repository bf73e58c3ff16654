"""Edge-weighted trees with real and Steiner vertices."""
from collections import deque
from fractions import Fraction

import numpy as np

from . import errors
from .scalar import common_scale, int_array, to_fraction


class WeightedTree:
    """An undirected tree with positive exact edge weights.

    Vertices are non-negative ints. Vertices in ``steiner`` are auxiliary
    points created on edges (by folding or subdivision); all other vertices
    are real. Trees built by :meth:`from_edges` have real vertices
    ``0..n_real-1``.
    """

    def __init__(self, vertices, edges, steiner=(), check=True):
        self.adj = {int(v): {} for v in vertices}
        self.steiner = set(int(s) for s in steiner)
        for u, v, w in edges:
            u, v, w = int(u), int(v), to_fraction(w)
            if u == v:
                raise errors.SelfLoop(f"self-loop at {u}")
            if w <= 0:
                raise errors.ValidationError(f"edge ({u}, {v}) has non-positive weight")
            if u not in self.adj or v not in self.adj:
                raise errors.ValidationError(f"edge ({u}, {v}) uses an unknown vertex")
            if v in self.adj[u]:
                raise errors.ValidationError(f"duplicate edge ({u}, {v})")
            self.adj[u][v] = w
            self.adj[v][u] = w
        if not self.steiner <= set(self.adj):
            raise errors.ValidationError("Steiner flag on an unknown vertex")
        self._next = max(self.adj, default=-1) + 1
        if check:
            self._check_tree()

    @classmethod
    def from_edges(cls, n, edges):
        return cls(range(n), edges)

    def _check_tree(self):
        nv = len(self.adj)
        ne = sum(len(a) for a in self.adj.values()) // 2
        if nv == 0:
            return
        if ne != nv - 1:
            raise errors.ValidationError(f"{nv} vertices and {ne} edges cannot form a tree")
        start = next(iter(self.adj))
        if len(self.distances_from(start)) != nv:
            raise errors.Disconnected("tree is not connected")

    def copy(self):
        t = WeightedTree.__new__(WeightedTree)
        t.adj = {u: dict(a) for u, a in self.adj.items()}
        t.steiner = set(self.steiner)
        t._next = self._next
        return t

    @property
    def vertices(self):
        return sorted(self.adj)

    @property
    def real_vertices(self):
        return sorted(v for v in self.adj if v not in self.steiner)

    @property
    def n_real(self):
        return len(self.adj) - len(self.steiner)

    def __len__(self):
        return len(self.adj)

    def __contains__(self, v):
        return v in self.adj

    def is_steiner(self, v):
        return v in self.steiner

    @property
    def edges(self):
        return sorted((u, v, w) for u, a in self.adj.items() for v, w in a.items() if u < v)

    def new_vertex(self, steiner=True):
        v = self._next
        self._next += 1
        self.adj[v] = {}
        if steiner:
            self.steiner.add(v)
        return v

    def subdivide(self, u, v, offset):
        """Insert a Steiner vertex on edge ``(u, v)`` at ``offset`` from ``u``."""
        w = self.adj[u][v]
        offset = to_fraction(offset)
        if not 0 < offset < w:
            raise errors.ValidationError(f"offset {offset} not inside edge of weight {w}")
        s = self.new_vertex()
        del self.adj[u][v]
        del self.adj[v][u]
        self.adj[u][s] = self.adj[s][u] = offset
        self.adj[v][s] = self.adj[s][v] = w - offset
        return s

    def distances_from(self, source, within=None):
        """Exact distances from ``source`` (optionally inside a vertex subset)."""
        dist = {source: Fraction(0)}
        q = deque([source])
        while q:
            u = q.popleft()
            for v, w in self.adj[u].items():
                if v not in dist and (within is None or v in within):
                    dist[v] = dist[u] + w
                    q.append(v)
        return dist

    def parents_from(self, source):
        par = {source: None}
        q = deque([source])
        while q:
            u = q.popleft()
            for v in self.adj[u]:
                if v not in par:
                    par[v] = u
                    q.append(v)
        return par

    def path(self, u, v):
        """Vertices of the unique ``u``-``v`` path, ``u`` first."""
        par = self.parents_from(v)
        out = [u]
        while out[-1] != v:
            out.append(par[out[-1]])
        return out

    def distance(self, u, v):
        p = self.path(u, v)
        return sum((self.adj[a][b] for a, b in zip(p, p[1:])), Fraction(0))

    def all_pairs(self, vertices=None):
        vs = self.vertices if vertices is None else list(vertices)
        return {u: self.distances_from(u) for u in vs}

    def metric(self):
        """The metric on the real vertices, which must be ``0..n_real-1``."""
        from .metric import MetricSpace
        real = self.real_vertices
        n = len(real)
        if real != list(range(n)):
            raise errors.ValidationError("real vertices must be numbered 0..n_real-1")
        nums, scale = common_scale([w for _, _, w in self.edges])
        iw = {}
        for (u, v, _), w in zip(self.edges, nums):
            iw[(u, v)] = iw[(v, u)] = w
        rows = []
        for s in real:
            dist = {s: 0}
            q = deque([s])
            while q:
                u = q.popleft()
                for v in self.adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + iw[(u, v)]
                        q.append(v)
            rows.append([dist[t] for t in real])
        return MetricSpace(int_array(rows) if n else np.zeros((0, 0), dtype=np.int64), scale, check=False)

    def __repr__(self):
        return f"WeightedTree(|V|={len(self.adj)}, real={self.n_real})"
