"""Randomized Frechet embeddings into l_inf with prioritized distortion or
prioritized dimension.

High-priority points are replaced by many zero-distance copies before the
random sets are drawn, which makes them far more likely to be hit. Sets
store copies; a coordinate is the distance from a point to the nearest base
point owning a sampled copy (0 for an empty set).
"""
import warnings
from dataclasses import dataclass, field
from decimal import Decimal, localcontext, ROUND_CEILING
from fractions import Fraction
from math import log2

import numba
import numpy as np

from . import errors
from .embedding import Embedding
from .metric import PriorityOrdering

MODE_DISTORTION = 0
MODE_DIMENSION = 1


@dataclass
class SampleConfig:
    k: int
    c: int = 16
    seed: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise errors.InvalidParams(f"k must be a positive integer, got {self.k}")
        if int(self.c) != self.c or self.c < 1:
            raise errors.InvalidParams(f"c must be a positive integer, got {self.c}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise errors.InvalidParams("seed must fit in 64 bits")
        self.k, self.c, self.seed = int(self.k), int(self.c), int(self.seed)

    def check_k(self, n):
        if n >= 2 and self.k > log2(n):
            warnings.warn(f"k={self.k} exceeds log2(n)={log2(n):.2f}; extra levels add nothing",
                          stacklevel=3)


@dataclass
class CopiedSpace:
    """Points with multiplicities. Copies are laid out in rank order, so
    ``owner[c]`` is the base point of copy ``c``."""
    base: object
    ordering: PriorityOrdering
    multiplicity: np.ndarray   # indexed by point id
    level: np.ndarray          # S_i index per point id (-1 for none)
    owner: np.ndarray = field(repr=False)

    @property
    def N(self):
        return int(self.owner.size)

    def copies_of(self, p):
        return np.nonzero(self.owner == p)[0]


@dataclass
class FrechetCoordinate:
    mode: str
    label: tuple
    probability: float
    set_size: int

    def as_dict(self):
        return {"mode": self.mode, "label": list(self.label),
                "probability": self.probability, "set_size": self.set_size}


@dataclass
class FrechetResult:
    embedding: Embedding
    family: list
    space: CopiedSpace

    def manifest(self):
        return [c.as_dict() for c in self.family]


def _ceil(x):
    return int(x.to_integral_value(rounding=ROUND_CEILING))


def _ceil_root(a, k):
    """Smallest integer m with m**k >= a."""
    if a <= 1:
        return int(a > 0)
    m = int(round(a ** (1.0 / k))) if a < 2 ** 1000 else 1 << -(-a.bit_length() // k)
    while m ** k < a:
        m += 1
    while m > 1 and (m - 1) ** k >= a:
        m -= 1
    return m


def distortion_level(j, n, k):
    """Index ``i`` with ``n^((i-1)/k) < j <= n^(i/k)``; ``x_1`` is in level 1."""
    i = 1
    while j ** k > n ** i:
        i += 1
    return i


def _copied(m, ordering, mults, levels):
    by_rank = [mults[p] for p in ordering.perm]
    owner = np.repeat(np.asarray(ordering.perm, dtype=np.int64), by_rank)
    return CopiedSpace(m, ordering, np.asarray(mults, dtype=np.int64),
                       np.asarray(levels, dtype=np.int64), owner)


def build_copied_space_distortion(m, ordering, k):
    """``x_j`` in level ``i`` gets ``ceil((2^k n)^(1 - i/k))`` copies."""
    n = m.n
    if k < 1:
        raise errors.InvalidParams("k must be at least 1")
    if ordering.n != n:
        raise errors.OrderingMismatch("ordering and metric sizes differ")
    mults, levels = [0] * n, [0] * n
    for j in range(1, n + 1):
        i = distortion_level(j, n, k)
        p = ordering.point(j)
        levels[p] = i
        mults[p] = _ceil_root((2 ** k * n) ** (k - i), k)
    return _copied(m, ordering, mults, levels)


def loglog_levels(n):
    """``ceil(log2 log2 n)``, the number of dimension-mode levels (0 for n <= 2)."""
    if n <= 2:
        return 0
    L = 0
    while 2 ** (2 ** L) < n:
        L += 1
    return L


def dimension_level(j):
    """``i`` with ``2^(2^i) < j <= 2^(2^(i+1))``; None for ``j <= 2``."""
    if j <= 2:
        return None
    i = 0
    while j > 2 ** (2 ** (i + 1)):
        i += 1
    return i


def copies_dimension(n, i):
    L = loglog_levels(n)
    c = Fraction(n * (L + 1) ** 2, 2 ** (2 ** (i + 1)) * (i + 2) ** 2)
    return max(-(-c.numerator // c.denominator), 1)


def build_copied_space_dimension(m, ordering):
    """``x_j`` in ``S_i`` gets ``max(ceil(C(i)), 1)`` copies; ``x_1, x_2`` get one."""
    n = m.n
    if ordering.n != n:
        raise errors.OrderingMismatch("ordering and metric sizes differ")
    mults, levels = [1] * n, [-1] * n
    for j in range(3, n + 1):
        i = dimension_level(j)
        p = ordering.point(j)
        levels[p] = i
        mults[p] = copies_dimension(n, i)
    return _copied(m, ordering, mults, levels)


def _ln(x):
    with localcontext() as ctx:
        ctx.prec = 50
        return Decimal(x).ln()


def distortion_set_count(N, k, c):
    """``ceil(c * N^(1/k) * ln N)``."""
    if N <= 1:
        return 0
    with localcontext() as ctx:
        ctx.prec = 50
        return _ceil(c * (Decimal(N) ** (Decimal(1) / k)) * _ln(N))


def e_set_count(n, c):
    if n <= 1:
        return 0
    with localcontext() as ctx:
        ctx.prec = 50
        return _ceil(c * _ln(n))


def level_set_count(n, i, k, c):
    """``R(i) = ceil(c * 2^((2^i + 2)/k) * ln n)``."""
    if n <= 1:
        return 0
    with localcontext() as ctx:
        ctx.prec = 50
        return _ceil(c * Decimal(2) ** (Decimal(2 ** i + 2) / k) * _ln(n))


def level_probability(N, i, s, k):
    e = 2 ** i * (1 + s / k) - 2 + 2 * s / k
    return min(2.0 ** e * (i + 2) ** 2 / N, 1.0)


def _membership(space, seed, key, p):
    """Sampled copies and the base points they hit, from the stream for ``key``."""
    N = space.N
    if p >= 1:
        mask = np.ones(N, dtype=bool)
    else:
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))
        mask = rng.random(N) < p
    hit = np.zeros(space.base.n, dtype=bool)
    hit[space.owner[mask]] = True
    return int(mask.sum()), hit


@numba.njit(cache=True, nogil=True)
def _set_distances(D, order, hits, out, col0):
    m, n = hits.shape
    members = np.empty(n, dtype=np.int64)
    for h in range(m):
        cnt = 0
        for y in range(n):
            if hits[h, y]:
                members[cnt] = y
                cnt += 1
        col = col0 + h
        if cnt == 0:
            for x in range(n):
                out[x, col] = 0
        elif cnt * cnt <= n:
            for x in range(n):
                best = D[x, members[0]]
                for t in range(1, cnt):
                    v = D[x, members[t]]
                    if v < best:
                        best = v
                out[x, col] = best
        else:
            # dense set: the first hit in sorted order is the nearest member
            for x in range(n):
                for t in range(n):
                    y = order[x, t]
                    if hits[h, y]:
                        out[x, col] = D[x, y]
                        break


class _Coords:
    """Accumulates coordinate columns for one embedding."""

    def __init__(self, m, dim):
        self.D = m.num
        self.n = m.n
        self.obj = self.D.dtype == object
        self.out = np.zeros((self.n, dim), dtype=object if self.obj else np.int64)
        self.order = None if self.obj else np.argsort(self.D, axis=1, kind="stable")
        self.col = 0
        self.pending = []

    def column(self, values):
        self.flush()
        self.out[:, self.col] = values
        self.col += 1

    def add(self, hit):
        self.pending.append(hit)
        if len(self.pending) >= 256:
            self.flush()

    def flush(self):
        if not self.pending:
            return
        hits = np.array(self.pending)
        self.pending = []
        if self.obj:
            for h, row in enumerate(hits):
                idx = np.nonzero(row)[0]
                self.out[:, self.col + h] = self.D[:, idx].min(axis=1) if idx.size else 0
        else:
            _set_distances(self.D, self.order, hits, self.out, self.col)
        self.col += len(hits)

    def embedding(self, scale):
        self.flush()
        assert self.col == self.out.shape[1]
        return Embedding(self.out, scale)


def embed_linf_distortion(m, ordering, cfg, detailed=False):
    """Embedding whose pairs with ``x_j`` have distortion at most
    ``2 ceil(k log j / log n) - 1`` with good probability.

    For each density ``i = 1..k`` it draws ``ceil(c N^(1/k) ln N)`` sets that
    keep each copy with probability ``N^(-i/k)``.
    """
    n = m.n
    cfg.check_k(n)
    space = build_copied_space_distortion(m, ordering, cfg.k)
    N = space.N
    per = distortion_set_count(N, cfg.k, cfg.c)
    acc = _Coords(m, cfg.k * per)
    family = []
    for i in range(1, cfg.k + 1):
        p = float(N) ** (-i / cfg.k)
        for h in range(per):
            size, hit = _membership(space, cfg.seed, (MODE_DISTORTION, i, h), p)
            acc.add(hit)
            family.append(FrechetCoordinate("distortion", (i, h), p, size))
    emb = acc.embedding(m.scale)
    return FrechetResult(emb, family, space) if detailed else emb


def dimension_layout(n, k, c, N):
    """``[(label, count, probability)]`` blocks after the two anchors."""
    blocks = [(("E",), e_set_count(n, c), 1.0 / N if N else 1.0)]
    for i in range(loglog_levels(n)):
        R = level_set_count(n, i, k, c)
        for s in range(1, k + 1):
            blocks.append((("A", s, i), R, level_probability(N, i, s, k)))
    return blocks


def embed_linf_dimension(m, ordering, cfg, detailed=False):
    """Embedding with prioritized dimension: ``x_j`` is non-zero mostly in the
    prefix up to its own level, with distortion ``2k ceil(log log j) + 1``.

    Layout: ``d(x, x_1)``, ``d(x, x_2)``, the ``E_g`` sets (probability
    ``1/N``), then for each level ``i`` and ``s = 1..k`` the ``R(i)`` sets
    ``A_h^(s,i)``.
    """
    n = m.n
    cfg.check_k(n)
    space = build_copied_space_dimension(m, ordering)
    N = space.N
    blocks = dimension_layout(n, cfg.k, cfg.c, N)
    acc = _Coords(m, 2 + sum(b[1] for b in blocks))
    family = []
    for a in (1, 2):
        if a <= n:
            acc.column(m.num[:, ordering.point(a)])
        else:
            acc.column(0)
        family.append(FrechetCoordinate("dimension", ("anchor", a), 1.0, int(a <= n)))
    for label, count, p in blocks:
        tag = 0 if label[0] == "E" else 1
        for h in range(count):
            key = (MODE_DIMENSION, tag, *label[1:], h)
            size, hit = _membership(space, cfg.seed, key, p)
            acc.add(hit)
            family.append(FrechetCoordinate("dimension", (*label, h), p, size))
    emb = acc.embedding(m.scale)
    return FrechetResult(emb, family, space) if detailed else emb


def frechet_row_map(m):
    """The classic isometry ``x -> (d(x, y))_y``."""
    return Embedding(np.array(m.num), m.scale)
