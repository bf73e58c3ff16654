"""Isometric embedding of tree metrics into l_inf with prioritized dimension."""
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, log2

from . import errors
from .embedding import Embedding
from .folding import Folding, _record
from .metric import PriorityOrdering


@dataclass
class SeparatorSplit:
    t1: frozenset
    t2: frozenset
    s: int


def _components(adj, verts, s):
    comps = []
    for start in sorted(adj[s]):
        if start not in verts:
            continue
        seen = {start}
        q = deque([start])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if v != s and v in verts and v not in seen:
                    seen.add(v)
                    q.append(v)
        comps.append(seen)
    return comps


def _centroid(adj, verts, marked):
    """Vertex minimising the largest marked count over the components of
    its removal (ties: smallest id)."""
    root = min(verts)
    order, par = [], {root: None}
    stack = [root]
    while stack:
        u = stack.pop()
        order.append(u)
        for v in adj[u]:
            if v in verts and v not in par:
                par[v] = u
                stack.append(v)
    cnt = {}
    for u in reversed(order):
        cnt[u] = (u in marked) + sum(cnt[v] for v in adj[u] if v in verts and par.get(v) == u)
    b = cnt[root]
    best = None
    for u in order:
        comps = [cnt[v] for v in adj[u] if v in verts and par.get(v) == u]
        if par[u] is not None:
            comps.append(b - cnt[u])
        key = (max(comps, default=0), u in marked, u)
        if best is None or key < best:
            best = key
    return best[2]


def _split(adj, verts, marked):
    """Two subtrees sharing one vertex ``s`` whose marked counts are as
    balanced as possible (exact subset-sum over the components of ``s``)."""
    s = _centroid(adj, verts, marked)
    comps = _components(adj, verts, s)
    counts = [len(c & marked) for c in comps]
    target = sum(counts) / 2
    # reachable subset sums -> one witness subset
    reach = {0: ()}
    for i, c in enumerate(counts):
        if c == 0:
            continue
        for tot, sub in list(reach.items()):
            reach.setdefault(tot + c, sub + (i,))
    tot = min(reach, key=lambda x: (abs(x - target), x))
    pick = set(reach[tot])
    g1, g2 = {s}, {s}
    for i, c in enumerate(comps):
        if i in pick or (counts[i] == 0 and len(g1) <= len(g2)):
            g1 |= c
        else:
            g2 |= c
    return SeparatorSplit(frozenset(g1), frozenset(g2), s)


def tree_separator(t, K):
    """Split ``t`` into two subtrees sharing one vertex, each holding at most
    ``ceil(2|K|/3)`` vertices of ``K`` (the shared vertex counts for both)."""
    K = set(K)
    if not K:
        raise errors.EmptyTerminalSet("separator needs at least one terminal")
    verts = set(t.adj)
    if len(K) == 1:
        s = next(iter(K))
        return SeparatorSplit(frozenset(verts), frozenset({s}), s)
    return _split(t.adj, verts, K)


def _first_steps(adj, verts, x):
    """For every vertex, the neighbour of ``x`` its path from ``x`` starts with."""
    first = {x: None}
    q = deque()
    for y in adj[x]:
        if y in verts:
            first[y] = y
            q.append(y)
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v in verts and v not in first:
                first[v] = first[u]
                q.append(v)
    return first


def _signed_coordinate(tree, verts, x, side):
    """``d(x, u)`` on the vertices reached through ``side``, ``-d(x, u)`` elsewhere."""
    dist = tree.distances_from(x, within=verts)
    first = _first_steps(tree.adj, verts, x)
    return {u: (dist[u] if first[u] in side else -dist[u]) for u in verts}


def _relevant(marks, verts):
    """Marks inside ``verts`` that still have neighbours on both sides there."""
    rel = {}
    for x, lst in marks.items():
        if x not in verts:
            continue
        keep = [(m & verts, p & verts) for m, p in lst if m & verts and p & verts]
        if keep:
            rel[x] = keep
    return rel


def _embed(tree, verts, marks):
    """Recursive separator embedding; returns ``(dim, {vertex: coords})``.

    ``marks`` maps folding points to ``(minus_nbrs, plus_nbrs)`` pairs; a
    pair of vertices whose path passes a mark entering from a minus neighbour
    and leaving through any other edge gets its distance exactly.
    """
    rel = _relevant(marks, verts)
    if not rel:
        return 0, {u: [] for u in verts}
    if len(rel) == 1:
        (x, lst), = rel.items()
        sides = sorted({m for m, _ in lst}, key=sorted)
        cols = [_signed_coordinate(tree, verts, x, side) for side in sides]
        return len(cols), {u: [c[u] for c in cols] for u in verts}
    sp = _split(tree.adj, verts, set(rel))
    if max(len(_relevant(rel, sp.t1)), len(_relevant(rel, sp.t2))) >= len(rel):
        raise errors.InvariantError("separator made no progress")
    d1, f1 = _embed(tree, sp.t1, rel)
    d2, f2 = _embed(tree, sp.t2, rel)
    dim = max(d1, d2)
    dist = tree.distances_from(sp.s, within=verts)
    out = {}
    for part, f, sign, d in ((sp.t2, f2, -1, d2), (sp.t1, f1, 1, d1)):
        base = f[sp.s]
        for u in part:
            vec = [a - b for a, b in zip(f[u], base)] + [Fraction(0)] * (dim - d)
            vec.append(sign * dist[u])
            out[u] = vec
    return dim + 1, out


@dataclass
class TerminalEmbedding:
    """Embedding of every vertex of the refined tree plus the K-folding."""
    coords: dict
    dim: int
    record: object
    n_marks: int

    def vector(self, v):
        return self.coords[v]


def dimension_cap(b):
    """Upper bound checked on the terminal embedding dimension."""
    return 4 * ceil(log2(max(b, 1))) + 4


def embed_terminal_set(t, K, anchor=None):
    """Embed ``t`` so that every pair whose distance changes under the
    K-folding keeps its exact distance in l_inf.

    Returns a :class:`TerminalEmbedding` defined on all vertices of the
    refined tree (which contains every vertex of ``t``).
    """
    K = list(dict.fromkeys(K))
    if not K:
        raise errors.EmptyTerminalSet("terminal set is empty")
    if anchor is not None:
        K = [anchor] + [k for k in K if k != anchor]
    fd = Folding(t).k_fold(K)
    fd.separate_marks()
    marks = fd.marked()
    verts = set(fd.h.adj)
    dim, coords = _embed(fd.h, verts, marks)
    b = len(fd.steps)
    if dim > dimension_cap(b) and dim > dimension_cap(len(marks)):
        raise errors.InvariantError(
            f"terminal embedding used {dim} coordinates for {b} folds ({len(marks)} marked vertices)")
    return TerminalEmbedding(coords, dim, _record(fd, t, K), len(marks))


@dataclass
class TreeEmbeddingResult:
    embedding: Embedding
    level_dims: list
    level_of_rank: list = field(repr=False)
    levels: list = field(repr=False)

    def level_bound(self, j):
        """Coordinates available to ``x_j``: all blocks up to its level."""
        return sum(self.level_dims[: self.level_of_rank[j - 1]])


def level_sets(n):
    """Rank ranges ``(lo, hi]`` of the levels: ``2^(2^(i-1)) < j <= 2^(2^i)``,
    with ranks 1 and 2 in the first level and the last one cut at ``n``."""
    out = []
    i = 1
    lo = 0
    while lo < n:
        hi = min(n, 2 ** (2 ** i))
        out.append((lo, hi))
        lo = hi
        i += 1
    return out


def prioritized_tree_embedding(t, ordering, detailed=False):
    """Exact isometric embedding of the real vertices of ``t`` into l_inf in
    which ``x_j`` is non-zero only in the first O(log j) coordinates.

    Level ``i`` folds the level's ranks together with the already merged
    vertex ``z`` and embeds the current tree so that ``z`` maps to 0; the
    blocks are concatenated in level order.
    """
    n = t.n_real
    if not isinstance(ordering, PriorityOrdering):
        ordering = PriorityOrdering(ordering)
    if ordering.n != n or set(ordering.perm) != set(t.real_vertices):
        raise errors.OrderingMismatch("ordering must rank exactly the real vertices of the tree")
    blocks, dims, levels = [], [], []
    level_of_rank = [0] * n
    cur = t
    rep = {v: v for v in t.real_vertices}
    z = ordering.point(1) if n else None
    for li, (lo, hi) in enumerate(level_sets(n), start=1):
        for j in range(lo + 1, hi + 1):
            level_of_rank[j - 1] = li
        if n == 1:
            break
        terms = [rep[z]] + [rep[ordering.point(j)] for j in range(lo + 1, hi + 1)]
        te = embed_terminal_set(cur, terms, anchor=rep[z])
        zero = te.coords[rep[z]]
        blocks.append({v: [a - b for a, b in zip(te.coords[rep[v]], zero)] for v in rep})
        dims.append(te.dim)
        levels.append(te)
        fd = te.record.folding
        cur = fd.quotient_tree()
        rep = {v: fd.find(r) for v, r in rep.items()}
    if n == 1:
        dims.append(0)
    vectors = [[x for blk in blocks for x in blk[v]] for v in range(n)] if n else []
    total = sum(dims)
    emb = Embedding.from_vectors(vectors, dim=total) if n else Embedding.from_vectors([], 0)
    if detailed:
        return TreeEmbeddingResult(emb, dims, level_of_rank, levels)
    return emb
