"""Path folding and K-folding of trees.

Folding a path ``x_0 .. x_1`` of length ``L`` identifies the point at distance
``a`` from ``x_0`` with the point at distance ``L - a``; the midpoint is the
folding point. Identification is done with a union-find over a refined copy
of the input tree (Steiner vertices are inserted where a mirrored position
falls inside an edge), so every intermediate folded tree is the quotient of
that refined tree. This keeps the original geometry available: for each
folding point we remember which tree edges leave it towards either half of
the folded path, which is what the crossing test and the terminal embedding
need.
"""
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from . import errors
from .tree import WeightedTree


@dataclass
class FoldStep:
    index: int
    source: int          # class folded from (x_0 side, the "minus" half)
    target: int          # class folded into it (x_1 side)
    length: Fraction
    point: int           # representative of the folding-point class at fold time
    members: list        # refined-tree vertices in the folding-point class


class Folding:
    """Mutable folding state over a refined copy of a tree."""

    def __init__(self, tree):
        self.h = tree.copy()
        self.parent = {v: v for v in self.h.adj}
        self.members = {v: [v] for v in self.h.adj}
        self.steps = []
        # dirs[x][y] -> list of (step index, '-' or '+'): the edge x-y leaves
        # folding point x towards that half of the folded path
        self.dirs = {}

    def find(self, v):
        p = self.parent
        while p[v] != v:
            p[v] = p[p[v]]
            v = p[v]
        return v

    def _is_real(self, v):
        return v not in self.h.steiner

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        # a class is real iff it has a real member; the representative shows it
        if (self._is_real(rb), -rb) > (self._is_real(ra), -ra):
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.members[ra].extend(self.members.pop(rb))
        return ra

    def subdivide(self, a, b, offset):
        s = self.h.subdivide(a, b, offset)
        self.parent[s] = s
        self.members[s] = [s]
        for x, y in ((a, b), (b, a)):
            d = self.dirs.get(x)
            if d is not None and y in d:
                d[s] = d.pop(y)
        return s

    def quotient(self):
        """Adjacency of the current folded tree and, per directed class edge,
        the refined-tree edges that map onto it."""
        qadj = {r: {} for r in self.members}
        qedges = {}
        for a, nbrs in self.h.adj.items():
            A = self.find(a)
            for b, w in nbrs.items():
                if a > b:
                    continue
                B = self.find(b)
                if A == B:
                    raise errors.InvariantError(f"edge ({a}, {b}) collapsed inside one class")
                old = qadj[A].get(B)
                if old is None:
                    qadj[A][B] = qadj[B][A] = w
                elif old != w:
                    raise errors.InvariantError(
                        f"parallel edges of weights {old} and {w} between classes {A}, {B}")
                qedges.setdefault((A, B), []).append((a, b))
                qedges.setdefault((B, A), []).append((b, a))
        return qadj, qedges

    def quotient_tree(self):
        qadj, _ = self.quotient()
        edges = [(u, v, w) for u, a in qadj.items() for v, w in a.items() if u < v]
        steiner = [r for r in qadj if not self._is_real(r)]
        t = WeightedTree(list(qadj), edges, steiner, check=False)
        t._next = max(t._next, self.h._next)
        return t

    def fold(self, a, b, quotient=None, bfs=None):
        """Fold the path between the classes of ``a`` and ``b``."""
        A, B = self.find(a), self.find(b)
        if A == B:
            raise errors.SameVertex(f"{a} and {b} are already identified")
        qadj, qedges = quotient or self.quotient()
        dist, par = bfs or _bfs(qadj, A)
        path = [B]
        while path[-1] != A:
            path.append(par[path[-1]])
        path.reverse()
        pos = [dist[c] for c in path]
        L = pos[-1]
        half = L / 2
        marks = set(pos) | {L - p for p in pos} | {half}
        at = dict(zip(pos, path))
        for k in range(len(path) - 1):
            lo, hi = pos[k], pos[k + 1]
            inner = sorted(p for p in marks if lo < p < hi)
            if not inner:
                continue
            firsts = [None] * len(inner)
            for x, y in qedges[(path[k], path[k + 1])]:
                cur, cur_pos = x, lo
                for i, p in enumerate(inner):
                    s = self.subdivide(cur, y, p - cur_pos)
                    firsts[i] = s if firsts[i] is None else self.union(firsts[i], s)
                    cur, cur_pos = s, p
            for i, p in enumerate(inner):
                at[p] = firsts[i]
        order = sorted(at)
        M = self.find(at[half])
        minus_cls = self.find(at[max(p for p in order if p < half)])
        plus_cls = self.find(at[min(p for p in order if p > half)])
        idx = len(self.steps)
        step = FoldStep(idx, A, B, L, M, list(self.members[M]))
        for x in step.members:
            for y in self.h.adj[x]:
                c = self.find(y)
                if c == minus_cls:
                    self.dirs.setdefault(x, {}).setdefault(y, []).append((idx, "-"))
                elif c == plus_cls:
                    self.dirs.setdefault(x, {}).setdefault(y, []).append((idx, "+"))
        for p in order:
            if p < half:
                self.union(at[p], at[L - p])
        self.steps.append(step)
        return step

    def k_fold(self, terminals):
        """Identify all ``terminals`` by repeated folds.

        The first terminal is the anchor; each round folds in the unmerged
        terminal nearest to the merged class (ties by position in the list).
        Terminals that were already identified as a side effect are skipped.
        """
        terminals = list(terminals)
        if not terminals:
            raise errors.EmptyTerminalSet("terminal set is empty")
        anchor = terminals[0]
        rank = {}
        for i, t in enumerate(terminals):
            rank.setdefault(t, i)
        while True:
            Z = self.find(anchor)
            left = [t for t in terminals if self.find(t) != Z]
            if not left:
                break
            q = self.quotient()
            bfs = _bfs(q[0], Z)
            t = min(left, key=lambda v: (bfs[0][self.find(v)], rank[v]))
            self.fold(Z, self.find(t), quotient=q, bfs=bfs)
        return self

    def marked(self):
        """Folding-point vertices with, per fold, the edge directions towards
        the two halves: ``{x: [(minus_nbrs, plus_nbrs), ...]}``."""
        out = {}
        for x, d in self.dirs.items():
            per = {}
            for y, tags in d.items():
                for idx, sign in tags:
                    per.setdefault(idx, (set(), set()))[0 if sign == "-" else 1].add(y)
            out[x] = [(frozenset(m), frozenset(p)) for _, (m, p) in sorted(per.items())
                      if m and p]
        return {x: v for x, v in out.items() if v}

    def separate_marks(self):
        """Put a Steiner vertex on every edge joining two folding points."""
        marked = set(self.marked())
        for x in sorted(marked):
            for y in list(self.h.adj[x]):
                if y in marked and x < y:
                    self.subdivide(x, y, self.h.adj[x][y] / 2)

    def crossing_steps(self, u, v):
        """Folds whose folding point the refined-tree path ``u``-``v`` crosses."""
        path = self.h.path(u, v)
        hit = []
        for k in range(1, len(path) - 1):
            d = self.dirs.get(path[k])
            if not d:
                continue
            a = {i: s for i, s in d.get(path[k - 1], [])}
            b = {i: s for i, s in d.get(path[k + 1], [])}
            for i in a.keys() & b.keys():
                if a[i] != b[i]:
                    hit.append(i)
        return sorted(hit)


def _bfs(adj, source):
    dist = {source: Fraction(0)}
    par = {source: None}
    q = deque([source])
    while q:
        u = q.popleft()
        for v, w in adj[u].items():
            if v not in dist:
                dist[v] = dist[u] + w
                par[v] = u
                q.append(v)
    return dist, par


@dataclass
class FoldResult:
    """Outcome of folding one path.

    ``refined`` is the input tree with the inserted Steiner vertices;
    ``minus_path`` runs from ``u`` to the folding point and ``plus_path``
    from the folding point to ``v`` (both in ``refined``).
    """
    folded_tree: WeightedTree
    folding_point: int
    merged: dict
    refined: WeightedTree
    minus_path: list
    plus_path: list
    folding: Folding = field(repr=False)


def fold_path(t, u, v):
    if u == v:
        raise errors.SameVertex(f"cannot fold a path from {u} to itself")
    if u not in t or v not in t:
        raise errors.ValidationError("fold endpoints must be vertices of the tree")
    fd = Folding(t)
    step = fd.fold(u, v)
    x = step.members[0]
    return FoldResult(
        folded_tree=fd.quotient_tree(),
        folding_point=fd.find(x),
        merged={w: fd.find(w) for w in t.adj},
        refined=fd.h,
        minus_path=fd.h.path(u, x),
        plus_path=fd.h.path(x, v),
        folding=fd,
    )


def crosses(t, u, v, fold):
    """Does the ``u``-``v`` path meet the interiors of both halves of the fold?

    ``u`` and ``v`` are vertices of ``t``, the tree the fold was applied to.
    """
    if u not in t or v not in t:
        raise errors.ValidationError("crossing test needs vertices of the folded tree")
    path = fold.refined.path(u, v)
    return _meets_interior(path, fold.minus_path) and _meets_interior(path, fold.plus_path)


def _meets_interior(path, half):
    inner = set(half[1:-1])
    if inner & set(path):
        return True
    edges = {frozenset(e) for e in zip(half, half[1:])}
    return any(frozenset(e) in edges for e in zip(path, path[1:]))


@dataclass
class KFoldingRecord:
    """All terminals identified into ``z``.

    ``folding_points`` has one representative per fold performed (at most
    ``|K| - 1``; fewer when a terminal got identified as a side effect);
    ``trace`` lists ``(source, target, folding_point)`` per fold.
    """
    final_tree: WeightedTree
    folding_points: list
    z: int
    merged: dict
    trace: list
    refined: WeightedTree
    folding: Folding = field(repr=False)

    def crosses(self, u, v):
        return bool(self.folding.crossing_steps(u, v))


def k_folding(t, K):
    K = list(dict.fromkeys(K))
    if not K:
        raise errors.EmptyTerminalSet("terminal set is empty")
    for k in K:
        if k not in t:
            raise errors.ValidationError(f"terminal {k} is not a vertex of the tree")
    fd = Folding(t).k_fold(K)
    return _record(fd, t, K)


def _record(fd, t, K):
    return KFoldingRecord(
        final_tree=fd.quotient_tree(),
        folding_points=[s.point for s in fd.steps],
        z=fd.find(K[0]),
        merged={w: fd.find(w) for w in fd.h.adj},
        trace=[(s.source, s.target, s.point) for s in fd.steps],
        refined=fd.h,
        folding=fd,
    )
