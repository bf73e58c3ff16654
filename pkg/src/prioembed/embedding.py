"""Embeddings into l_inf and the distortion / dimension audits."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import inf

import numba
import numpy as np

from . import errors
from .scalar import common_scale, fits_product, int_array, to_fraction


class Embedding:
    """Per-point coordinate vectors sharing one global coordinate order.

    Stored like :class:`~prioembed.metric.MetricSpace`: an integer array
    ``num`` of shape ``(n, dim)`` and a common denominator ``scale``.
    """

    def __init__(self, num, scale=1):
        num = np.asarray(num)
        if num.ndim != 2:
            raise errors.LengthMismatch("embedding vectors must all have the same length")
        if num.dtype != object:
            num = num.astype(np.int64)
        self.num = num
        self.scale = int(scale)
        self.num.setflags(write=False)

    @classmethod
    def from_vectors(cls, vectors, dim=None):
        vectors = [list(v) for v in vectors]
        if dim is None:
            dim = len(vectors[0]) if vectors else 0
        if any(len(v) != dim for v in vectors):
            raise errors.LengthMismatch("embedding vectors must all have the same length")
        flat, scale = common_scale([x for v in vectors for x in v])
        if dim == 0:
            return cls(np.zeros((len(vectors), 0), dtype=np.int64), 1)
        rows = [flat[i * dim:(i + 1) * dim] for i in range(len(vectors))]
        return cls(int_array(rows), scale)

    @property
    def n(self):
        return self.num.shape[0]

    @property
    def dim(self):
        return self.num.shape[1]

    def vector(self, i):
        return [Fraction(int(v), self.scale) for v in self.num[i]]

    @property
    def vectors(self):
        return [self.vector(i) for i in range(self.n)]

    def __eq__(self, other):
        if not isinstance(other, Embedding):
            return NotImplemented
        return self.vectors == other.vectors and self.dim == other.dim

    def __repr__(self):
        return f"Embedding(n={self.n}, dim={self.dim})"


def linf_distance(u, v):
    u, v = list(u), list(v)
    if len(u) != len(v):
        raise errors.LengthMismatch(f"lengths {len(u)} and {len(v)} differ")
    return max((abs(to_fraction(a) - to_fraction(b)) for a, b in zip(u, v)), default=Fraction(0))


@numba.njit(nogil=True, cache=True)
def _linf_rows(F, lo, hi, out):
    n, d = F.shape
    for i in range(lo, hi):
        for j in range(n):
            m = 0
            for c in range(d):
                x = F[i, c] - F[j, c]
                if x < 0:
                    x = -x
                if x > m:
                    m = x
            out[i - lo, j] = m


def pairwise_linf(f, workers=1, block=64):
    """Matrix of l_inf distances between all embedded points, in units of
    ``1 / f.scale``. Row blocks may be computed by several threads; the result
    does not depend on ``workers``."""
    F = f.num
    n = f.n
    if F.dtype == object:
        out = np.zeros((n, n), dtype=object)
        for i in range(n):
            if f.dim:
                out[i] = np.abs(F - F[i]).max(axis=1)
        return out
    F = np.ascontiguousarray(F)
    out = np.zeros((n, n), dtype=np.int64)

    def run(lo):
        hi = min(n, lo + block)
        buf = np.zeros((hi - lo, n), dtype=np.int64)
        _linf_rows(F, lo, hi, buf)
        out[lo:hi] = buf

    starts = range(0, n, block)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            list(ex.map(run, starts))
    else:
        for s in starts:
            run(s)
    return out


@dataclass
class PairWorst:
    value: Fraction  # may be math.inf for a collapsed pair
    partner: int


@dataclass
class DistortionReport:
    """Per-rank worst expansion and contraction.

    ``per_j[j - 1]`` describes the pairs containing ``x_j``. ``expansion`` is
    max ||f(x_j) - f(y)|| / d(x_j, y) and ``contraction`` is its reciprocal
    maximised separately; a pair mapped to one vector has infinite
    contraction.
    """
    expansion: list
    contraction: list
    points: list

    @property
    def per_j(self):
        return [
            {"j": j, "point": p, "expansion": e.value, "expansion_partner": e.partner,
             "contraction": c.value, "contraction_partner": c.partner}
            for j, (p, e, c) in enumerate(zip(self.points, self.expansion, self.contraction), start=1)
        ]

    def distortion(self, j):
        """Worst two-sided factor for pairs containing ``x_j``: the larger
        of the two when the map is non-expansive or non-contractive on them."""
        e, c = self.expansion[j - 1].value, self.contraction[j - 1].value
        return max(e, 1) * max(c, 1)

    @property
    def global_distortion(self):
        if not self.expansion:
            return Fraction(1)
        e = max(x.value for x in self.expansion)
        c = max(x.value for x in self.contraction)
        return max(e, 1) * max(c, 1)

    def __len__(self):
        return len(self.points)


def _exact_row_max(num, den, s_num, s_den):
    """Exact max of (num[k] / s_num) / (den[k] / s_den) over k.

    Floats locate the candidates; the winner is then chosen in exact
    arithmetic among everything within a relative 1e-9 of the float max.
    """
    num = np.asarray(num)
    den = np.asarray(den)
    zero = den == 0
    if zero.any():
        k = int(np.nonzero(zero)[0][0])
        return inf, k
    approx = num.astype(float) / den.astype(float)
    top = approx.max()
    cand = np.nonzero(approx >= top * (1 - 1e-9))[0]
    best, arg = None, -1
    for k in cand:
        val = Fraction(int(num[k]) * s_den, int(den[k]) * s_num)
        if best is None or val > best:
            best, arg = val, int(k)
    return best, arg


def distortion_report(m, f, ordering, workers=1, linf=None):
    """Exhaustive per-rank distortion of ``f`` against the metric ``m``."""
    if f.n != m.n:
        raise errors.OrderingMismatch("metric and embedding sizes differ")
    E = None
    if m.n >= 2:
        E = pairwise_linf(f, workers) if linf is None else linf
    return distortion_report_matrix(m, E, f.scale, ordering)


def distortion_report_matrix(m, E, scale, ordering):
    """Per-rank distortion of target distances ``E / scale`` against ``m``."""
    n = m.n
    if ordering.n != n:
        raise errors.OrderingMismatch("metric and ordering sizes differ")
    if n < 2:
        return DistortionReport([], [], list(ordering.perm))
    D = m.num
    exp_, con_ = [], []
    idx_all = np.arange(n)
    for j in range(1, n + 1):
        p = ordering.point(j)
        idx = idx_all[idx_all != p]
        e_val, e_arg = _exact_row_max(E[p, idx], D[p, idx], scale, m.scale)
        c_val, c_arg = _exact_row_max(D[p, idx], E[p, idx], m.scale, scale)
        exp_.append(PairWorst(e_val, int(idx[e_arg])))
        con_.append(PairWorst(c_val, int(idx[c_arg])))
    return DistortionReport(exp_, con_, list(ordering.perm))


def is_non_expansive(m, f, workers=1, linf=None):
    """True iff ||f(u) - f(v)|| <= d(u, v) for every pair, checked exactly."""
    E = pairwise_linf(f, workers) if linf is None else linf
    D = m.num
    if f.n < 2:
        return True
    if E.dtype != object and D.dtype != object and fits_product(np.abs(E).max(), m.scale) \
            and fits_product(np.abs(D).max(), f.scale):
        return bool((E * m.scale <= D * f.scale).all())
    return bool((E.astype(object) * m.scale <= D.astype(object) * f.scale).all())


@dataclass
class DimensionReport:
    """``per_j[j - 1]`` is 1 + the index of the last non-zero coordinate of
    ``f(x_j)``, or 0 for the zero vector."""
    per_j: list
    dim: int


def last_nonzero(num):
    """1-based index of the last non-zero entry of each row (0 if none)."""
    num = np.asarray(num)
    if num.shape[1] == 0:
        return np.zeros(num.shape[0], dtype=np.int64)
    nz = num != 0
    rev = nz[:, ::-1]
    last = num.shape[1] - rev.argmax(axis=1)
    return np.where(nz.any(axis=1), last, 0).astype(np.int64)


def dimension_report(f, ordering):
    if ordering.n != f.n:
        raise errors.OrderingMismatch("embedding and ordering sizes differ")
    lnz = last_nonzero(f.num)
    return DimensionReport([int(lnz[ordering.point(j)]) for j in range(1, f.n + 1)], f.dim)
