"""Spanning trees with prioritized distortion via petal decomposition.

A cluster ``X`` with center ``x`` is split into petals ``X_1 .. X_s`` and a
remainder ``X_0``; each petal is a ball in a directed reweighting of the
induced graph that is cheap to traverse away from ``x`` and expensive
towards it. Petals are grown just far enough that no pair of vertices that
would be stretched by more than ``1024 alpha`` is cut.

Everything runs on integer weights (the graph's weights over a common
denominator); directed lengths are doubled so the halved path edges stay
integral.
"""
import heapq
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import errors
from .metric import PriorityOrdering, default_alpha, shortest_path_metric
from .scalar import common_scale

BAD_FACTOR = 128        # pairs with 128 alpha d < rad must not be cut
STEP_DIV = 16           # radius grows by rad / (16 alpha(j))
MAX_RADIUS_DIV = 8      # and may never exceed rad / 8


@dataclass(frozen=True)
class Cluster:
    vertices: frozenset
    center: int
    target: int
    rad: Fraction


@dataclass
class PetalResult:
    members: frozenset
    center: int
    path: list              # shortest path from the target to the cluster center
    directed: dict = field(repr=False)   # doubled directed distances from the target


@dataclass
class CarveRecord:
    target: int
    radius: Fraction
    increments: list
    petal: frozenset
    center: int
    edge: tuple             # (petal center, neighbour outside the petal)


@dataclass
class ClusterRecord:
    cluster: Cluster
    carves: list
    tree_radius: Fraction = None


@dataclass
class SpanningTree:
    n: int
    edges: list             # (u, v, w) taken from the input graph
    edge_index: list        # positions in ``WeightedGraph.edges``
    clusters: list = field(default_factory=list, repr=False)

    def adjacency(self):
        adj = {u: {} for u in range(self.n)}
        for u, v, w in self.edges:
            adj[u][v] = adj[v][u] = w
        return adj

    def as_graph(self):
        from .metric import WeightedGraph
        return WeightedGraph(self.n, self.edges)


class _Graph:
    """Integer-weight adjacency of a WeightedGraph."""

    def __init__(self, g):
        nums, scale = common_scale([w for _, _, w in g.edges])
        self.n = g.n
        self.scale = scale
        self.adj = [dict() for _ in range(g.n)]
        self.index = {}
        for k, ((u, v, _), w) in enumerate(zip(g.edges, nums)):
            self.adj[u][v] = self.adj[v][u] = w
            self.index[(u, v)] = self.index[(v, u)] = k

    def dijkstra(self, src, allowed, weight=None):
        """Distances and parents from ``src`` inside ``allowed``; ties keep
        the first parent found (smallest distance, then vertex id)."""
        dist = {src: 0}
        par = {src: None}
        pq = [(0, src)]
        done = set()
        while pq:
            d, u = heapq.heappop(pq)
            if u in done:
                continue
            done.add(u)
            for v, w in self.adj[u].items():
                if v not in allowed or v in done:
                    continue
                nd = d + (w if weight is None else weight(u, v, w))
                if v not in dist or nd < dist[v]:
                    dist[v] = nd
                    par[v] = u
                    heapq.heappush(pq, (nd, v))
        return dist, par


def _path_to_root(par, v):
    out = [v]
    while par[out[-1]] is not None:
        out.append(par[out[-1]])
    return out


def _petal(G, Y, dx, parx, t):
    """Directed ball data for target ``t``: doubled directed distances from
    ``t`` and the path ``t -> x`` along the shortest-path tree of ``x``."""
    path = _path_to_root(parx, t)
    toward = {(a, b) for a, b in zip(path, path[1:])}

    def weight(u, v, w):
        if (u, v) in toward:
            return w                      # half of w, doubled
        return 2 * (w - dx[v] + dx[u])   # anti-parallel path edges fall here too

    directed, _ = G.dijkstra(t, Y, weight)
    return path, directed


def _members(directed, r):
    """Vertices within doubled directed distance ``r`` (a Fraction in weight units)."""
    lim = r.numerator // r.denominator
    return frozenset(v for v, d in directed.items() if d <= lim)


def _center(path, members):
    k = max(i for i, v in enumerate(path) if v in members)
    return k


def petal(g, vertices, center, target, r):
    """The petal ``P(target, r)`` inside the induced graph on ``vertices``.

    ``r`` is in the graph's weight units. Returns the members and the
    petal's center (the farthest vertex of the target-to-center path still
    inside the petal).
    """
    G = g if isinstance(g, _Graph) else _Graph(g)
    Y = frozenset(vertices)
    if target not in Y or center not in Y:
        raise errors.ValidationError("center and target must lie in the cluster")
    dx, parx = G.dijkstra(center, Y)
    path, directed = _petal(G, Y, dx, parx, target)
    r = Fraction(r) * G.scale
    mem = _members(directed, r)
    return PetalResult(mem, path[_center(path, mem)], path, directed)


class _Carver:
    """Shared state for one decomposition."""

    def __init__(self, g, ordering, alpha):
        self.G = _Graph(g)
        self.metric = shortest_path_metric(g)
        # the metric and the graph share the same common denominator
        assert self.metric.scale == self.G.scale or self.G.n == 1
        self.ordering = ordering
        self.alpha = alpha

    def thresholds(self, rad, m):
        """Integer distance bounds per induced rank for the bad-pair rule."""
        out = []
        for j in range(1, m + 1):
            t = Fraction(rad) / (BAD_FACTOR * self.alpha(j))
            out.append(-(-t.numerator // t.denominator) - 1)
        return out

    def carve(self, Y, rank, rad, thr, directed):
        """Grow the radius until no bad pair is cut; returns (r, members, increments)."""
        ys = sorted(Y, key=lambda v: rank[v])
        idx = np.asarray(ys, dtype=np.intp)
        D = self.metric.num[np.ix_(idx, idx)]
        rows_rank = [rank[v] for v in ys]
        thr_rows = np.asarray([thr[k - 1] for k in rows_rank], dtype=D.dtype)
        close = np.triu(D <= thr_rows[:, None], 1)
        r = Fraction(0)
        limit = Fraction(rad, MAX_RADIUS_DIV)
        incs = []
        while True:
            mem = _members(directed, r)
            inside = np.fromiter((v in mem for v in ys), dtype=bool, count=len(ys))
            bad = close & (inside[:, None] != inside[None, :])
            rows = np.nonzero(bad.any(axis=1))[0]
            if not rows.size:
                return r, mem, incs
            j = rows_rank[int(rows[0])]
            incs.append(j)
            r += Fraction(rad) / (STEP_DIV * self.alpha(j))
            if r > limit:
                raise errors.InvariantError(
                    f"petal radius {r} exceeds rad/8 = {limit} (increments {incs})")


def petal_decomposition_spanning_tree(g, ordering, alpha=None, check=True):
    """Spanning tree of ``g`` where pairs with ``x_j`` stretch by at most
    ``1024 alpha(j)`` and every cluster's tree has radius at most
    ``4 rad(X)`` around its center."""
    n = g.n
    if not isinstance(ordering, PriorityOrdering):
        ordering = PriorityOrdering(ordering)
    if ordering.n != n:
        raise errors.OrderingMismatch("ordering and graph sizes differ")
    if not g.is_connected():
        raise errors.Disconnected("graph is not connected")
    if alpha is None:
        alpha = default_alpha(n)
    if alpha.n_max < n:
        raise errors.InvalidParams(f"alpha is certified only up to {alpha.n_max} < {n}")
    C = _Carver(g, ordering, alpha)
    G = C.G
    tree = set()
    records = []
    root = ordering.point(1)
    stack = [(frozenset(range(n)), root, root)]
    while stack:
        X, x, t = stack.pop()
        if len(X) == 1:
            records.append(ClusterRecord(Cluster(X, x, t, Fraction(0)), [], Fraction(0)))
            continue
        dx, parx = G.dijkstra(x, X)
        if len(dx) != len(X):
            raise errors.InvariantError("cluster is not connected in its induced graph")
        rad = max(dx.values())
        rank = {v: i for i, v in enumerate(ordering.induced(X), start=1)}
        thr = C.thresholds(rad, len(X))
        far = 3 * rad  # compare 4 d >= 3 rad
        Y = set(X)
        carves = []
        children = []
        first = True
        while True:
            dy, pary = G.dijkstra(x, Y)
            if check and any(dy[v] != dx[v] for v in Y):
                raise errors.InvariantError("removing a petal changed distances from the center")
            cands = [v for v in Y if 4 * dy[v] >= far]
            if not cands:
                break
            ti = None
            if first and t != x and t in Y and 4 * dy[t] >= far:
                # glue: t_1 is the first vertex of the x -> t path that is far enough
                for v in reversed(_path_to_root(pary, t)):
                    if 4 * dy[v] >= far:
                        ti = v
                        break
            if ti is None:
                ti = max(cands, key=lambda v: (dy[v], -v))
            first = False
            path, directed = _petal(G, frozenset(Y), dy, pary, ti)
            r, mem, incs = C.carve(Y, rank, rad, thr, directed)
            k = _center(path, mem)
            ci, out = path[k], path[k + 1]
            if check:
                _check_proximity(G, Y, mem, directed, r)
            tree.add(G.index[(ci, out)])
            carves.append(CarveRecord(ti, r / G.scale, incs, mem, ci, (ci, out)))
            # glue: a petal recurses around its own center towards its target
            children.append((mem, ci, ti))
            Y -= mem
        x0 = frozenset(Y)
        if x0 == X:
            raise errors.InvariantError("no petal carved from a cluster with positive radius")
        t0 = t if t in x0 else None
        children.append((x0, x, t0))
        records.append(ClusterRecord(Cluster(X, x, t, Fraction(rad, G.scale)), carves))
        for Z, c, tt in reversed(children):
            if tt is None:
                dz, _ = G.dijkstra(c, Z)
                tt = max(Z, key=lambda v: (dz[v], -v))
            stack.append((Z, c, tt))
    edges = sorted(tree)
    out = SpanningTree(n, [g.edges[k] for k in edges], edges, records)
    if len(edges) != n - 1:
        raise errors.InvariantError(f"decomposition produced {len(edges)} edges for {n} vertices")
    if check:
        audit_cluster_radii(out)
    return out


def _check_proximity(G, Y, mem, directed, r):
    """A vertex at distance ``delta`` from the petal lies in ``P(t, r + 4 delta)``."""
    dist = {v: 0 for v in mem}
    pq = [(0, v) for v in sorted(mem)]
    done = set()
    while pq:
        d, u = heapq.heappop(pq)
        if u in done:
            continue
        done.add(u)
        for v, w in G.adj[u].items():
            if v in Y and v not in done and (v not in dist or d + w < dist[v]):
                dist[v] = d + w
                heapq.heappush(pq, (d + w, v))
    for v, delta in dist.items():
        if directed.get(v) is None or directed[v] > r + 4 * delta:
            raise errors.InvariantError(
                f"vertex {v} at distance {delta} from the petal is outside P(t, r + 4 delta)")


def audit_cluster_radii(st):
    """Fill in and check the tree radius of every recursion cluster."""
    adj = st.adjacency()
    for rec in st.clusters:
        X, x = rec.cluster.vertices, rec.cluster.center
        dist = {x: Fraction(0)}
        todo = [x]
        while todo:
            u = todo.pop()
            for v, w in adj[u].items():
                if v in X and v not in dist:
                    dist[v] = dist[u] + w
                    todo.append(v)
        if len(dist) != len(X):
            raise errors.InvariantError(f"tree restricted to a cluster of {len(X)} vertices is disconnected")
        rec.tree_radius = max(dist.values())
        if rec.tree_radius > 4 * rec.cluster.rad:
            raise errors.InvariantError(
                f"cluster around {x} has tree radius {rec.tree_radius} > 4 * {rec.cluster.rad}")
    return True
