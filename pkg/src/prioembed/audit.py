"""Per-rank audits of distortion and dimension against bound expressions,
and the seed-retry wrapper for the randomized constructions."""
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from math import inf

from .bounds import BoundSpec, at_most
from .embedding import (Embedding, dimension_report, distortion_report_matrix,
                        is_non_expansive, pairwise_linf)
from .metric import MetricSpace, WeightedGraph, shortest_path_metric
from .scalar import format_scalar


@dataclass
class AuditRow:
    j: int
    point: int
    achieved: object
    allowed: object
    ok: bool
    witness: object = None     # partner point of the worst pair

    def as_dict(self):
        return {"j": self.j, "point": self.point, "achieved": _fmt(self.achieved),
                "allowed": _fmt(self.allowed), "ok": self.ok, "witness": self.witness}


@dataclass
class AuditResult:
    kind: str
    bound: str
    rows: list
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(r.ok for r in self.rows) and all(self.checks.values())

    @property
    def violations(self):
        return [r for r in self.rows if not r.ok]

    def as_dict(self):
        return {"kind": self.kind, "bound": self.bound, "passed": self.passed,
                "checks": dict(self.checks), "per_j": [r.as_dict() for r in self.rows]}


def _fmt(x):
    if x is None:
        return None
    if x == inf:
        return "inf"
    if isinstance(x, Decimal):
        return str(x)
    return format_scalar(x)


def target_distances(artifact, workers=1):
    """``(matrix, scale)`` of pairwise distances in the image of ``artifact``."""
    from .petal import SpanningTree
    from .ultrametric import UltrametricTree
    if isinstance(artifact, Embedding):
        return pairwise_linf(artifact, workers), artifact.scale
    if isinstance(artifact, UltrametricTree):
        return artifact.distance_matrix(), artifact.scale
    if isinstance(artifact, SpanningTree):
        artifact = artifact.as_graph()
    if isinstance(artifact, WeightedGraph):
        sp = shortest_path_metric(artifact)
        return sp.num, sp.scale
    if isinstance(artifact, MetricSpace):
        return artifact.num, artifact.scale
    raise TypeError(f"cannot audit a {type(artifact).__name__}")


def audit_distortion(m, artifact, ordering, bound, params=None, workers=1):
    """Compare every rank's worst pair distortion with ``bound``.

    ``params`` supplies ``k``, ``c`` and ``alpha`` for the expression; ``j``
    and ``n`` are filled in. Embeddings are also checked to be
    non-expansive.
    """
    bound = bound if isinstance(bound, BoundSpec) else BoundSpec(bound)
    params = dict(params or {})
    E, scale = target_distances(artifact, workers)
    rep = distortion_report_matrix(m, E, scale, ordering)
    rows = []
    for j in range(1, len(rep) + 1):
        e, c = rep.expansion[j - 1], rep.contraction[j - 1]
        achieved = rep.distortion(j)
        allowed = bound(j=j, n=m.n, **params)
        witness = c.partner if c.value >= e.value else e.partner
        rows.append(AuditRow(j, ordering.point(j), achieved, allowed,
                             at_most(achieved, allowed), witness))
    checks = {}
    if isinstance(artifact, Embedding):
        checks["non_expansive"] = is_non_expansive(m, artifact, linf=E)
    return AuditResult("distortion", bound.text, rows, checks)


def audit_dimension(f, ordering, bound, params=None):
    bound = bound if isinstance(bound, BoundSpec) else BoundSpec(bound)
    params = dict(params or {})
    rep = dimension_report(f, ordering)
    rows = []
    for j, beta in enumerate(rep.per_j, start=1):
        allowed = bound(j=j, n=f.n, **params)
        rows.append(AuditRow(j, ordering.point(j), Fraction(beta), allowed, at_most(beta, allowed)))
    return AuditResult("dimension", bound.text, rows)


@dataclass
class RetryOutcome:
    artifact: object
    results: list
    seed: int
    attempts: int

    @property
    def passed(self):
        return all(r.passed for r in self.results)


def with_retries(make, audit, seed, retries=3):
    """Run ``make(seed)`` and ``audit(artifact)`` for seeds ``seed, seed+1, ...``
    until every returned audit passes or ``retries`` attempts are used."""
    out = None
    for attempt in range(max(1, retries)):
        s = (seed + attempt) % 2 ** 64
        art = make(s)
        res = audit(art)
        res = res if isinstance(res, list) else [res]
        out = RetryOutcome(art, res, s, attempt + 1)
        if out.passed:
            break
    return out


DEFAULT_BOUNDS = {
    "tree": "1",
    "linf-distortion": "max(2*ceil(k*log2(j)/log2(n))-1, 1)",
    "linf-dimension": "1 if j <= 2 else 2*k*ceil(log2(log2(j)))+1",
    "ultrametric": "2*alpha(j)",
    "spanning-tree": "1024*alpha(j)",
}
