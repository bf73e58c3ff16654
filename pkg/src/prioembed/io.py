"""JSON forms of every artifact. Scalars are written as ``"p/q"`` or integer
strings; parsers also take JSON numbers and decimal strings.

Output is canonical (sorted keys, fixed separators) so equal artifacts give
equal bytes.
"""
import hashlib
import json
from fractions import Fraction
from math import lcm

from . import errors
from .embedding import Embedding
from .metric import MetricSpace, PriorityOrdering, WeightedGraph, validate_metric
from .scalar import format_scalar, to_fraction
from .tree import WeightedTree
from .ultrametric import UltraNode, UltrametricTree


def dumps(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False) + "\n"


def digest(data):
    if isinstance(data, str):
        data = data.encode("utf-8")
    return "sha256:" + hashlib.sha256(data).hexdigest()


def _scalar(x):
    if isinstance(x, bool):
        raise errors.ValidationError("booleans are not scalars")
    try:
        return to_fraction(x)
    except (TypeError, ValueError, ZeroDivisionError):
        raise errors.ValidationError(f"cannot parse scalar {x!r}") from None


def _fmt_scaled(num, scale):
    if scale == 1:
        return [[str(int(v)) for v in row] for row in num]
    return [[format_scalar(Fraction(int(v), scale)) for v in row] for row in num]


def _need(d, *keys, kind):
    if not isinstance(d, dict):
        raise errors.ValidationError(f"{kind} must be a JSON object")
    missing = [k for k in keys if k not in d]
    if missing:
        raise errors.ValidationError(f"{kind} is missing {', '.join(missing)}")


def metric_to_json(m):
    return {"kind": "metric", "n": m.n, "dist": _fmt_scaled(m.num, m.scale)}


def metric_from_json(d):
    _need(d, "dist", kind="metric")
    rows = [[_scalar(x) for x in row] for row in d["dist"]]
    if "n" in d and int(d["n"]) != len(rows):
        raise errors.ValidationError(f"n = {d['n']} but dist has {len(rows)} rows")
    return validate_metric(rows)


def graph_to_json(g):
    return {"kind": "graph", "n": g.n, "edges": [[u, v, format_scalar(w)] for u, v, w in g.edges]}


def graph_from_json(d):
    _need(d, "n", "edges", kind="graph")
    return WeightedGraph(int(d["n"]), [(int(u), int(v), _scalar(w)) for u, v, w in d["edges"]])


def tree_to_json(t):
    return {
        "kind": "tree",
        "n_real": t.n_real,
        "vertices": [{"id": v, "steiner": t.is_steiner(v)} for v in t.vertices],
        "edges": [[u, v, format_scalar(w)] for u, v, w in t.edges],
    }


def tree_from_json(d):
    _need(d, "edges", kind="tree")
    if "vertices" in d:
        verts = [int(v["id"]) for v in d["vertices"]]
        steiner = [int(v["id"]) for v in d["vertices"] if v.get("steiner")]
    else:
        _need(d, "n_real", kind="tree")
        verts, steiner = list(range(int(d["n_real"]))), []
    t = WeightedTree(verts, [(int(u), int(v), _scalar(w)) for u, v, w in d["edges"]], steiner)
    if "n_real" in d and int(d["n_real"]) != t.n_real:
        raise errors.ValidationError(f"n_real = {d['n_real']} but {t.n_real} real vertices given")
    return t


def ordering_to_json(o):
    return {"kind": "ordering", "perm": list(o.perm)}


def ordering_from_json(d):
    _need(d, "perm", kind="ordering")
    return PriorityOrdering([int(p) for p in d["perm"]])


def embedding_to_json(f):
    return {"kind": "embedding", "dim": f.dim, "vectors": _fmt_scaled(f.num, f.scale)}


def embedding_from_json(d):
    _need(d, "vectors", kind="embedding")
    vecs = [[_scalar(x) for x in v] for v in d["vectors"]]
    dim = int(d["dim"]) if "dim" in d else None
    return Embedding.from_vectors(vecs, dim)


def ultrametric_to_json(u):
    return {
        "kind": "ultrametric",
        "nodes": [{"id": nd.id, "label": format_scalar(Fraction(nd.label, u.scale)),
                   "children": list(nd.children)} for nd in u.nodes],
        "leaf_of": {str(p): node for p, node in sorted(u.leaf_of.items())},
        "root": u.root,
    }


def ultrametric_from_json(d):
    _need(d, "nodes", "leaf_of", kind="ultrametric")
    labels = [_scalar(nd["label"]) for nd in d["nodes"]]
    scale = lcm(1, *(lab.denominator for lab in labels))
    point = {int(node): int(p) for p, node in d["leaf_of"].items()}
    nodes = []
    for nd, lab in zip(d["nodes"], labels):
        i = int(nd["id"])
        nodes.append(UltraNode(i, int(lab * scale), [int(c) for c in nd["children"]], point.get(i)))
    if [nd.id for nd in nodes] != list(range(len(nodes))):
        raise errors.ValidationError("ultrametric node ids must be 0..len-1 in order")
    u = UltrametricTree(nodes, {int(p): int(n) for p, n in d["leaf_of"].items()}, scale,
                        int(d.get("root", 0)))
    u.check()
    return u


def spanning_tree_to_json(st):
    return {
        "kind": "spanning_tree",
        "n": st.n,
        "edge_indices": list(st.edge_index),
        "edges": [[u, v, format_scalar(w)] for u, v, w in st.edges],
    }


def spanning_tree_from_json(d, graph=None):
    """The tree as a graph; with ``graph`` given, indices are checked against it."""
    _need(d, "n", "edges", kind="spanning tree")
    g = WeightedGraph(int(d["n"]), [(int(u), int(v), _scalar(w)) for u, v, w in d["edges"]])
    if graph is not None:
        for k, (u, v, w) in zip(d.get("edge_indices", []), g.edges):
            if graph.edges[int(k)] != (u, v, w):
                raise errors.ValidationError(f"edge index {k} does not match the input graph")
    return g


def report_to_json(rep):
    return {"kind": "report", "per_j": rep}


_READERS = {
    "metric": metric_from_json,
    "graph": graph_from_json,
    "tree": tree_from_json,
    "ordering": ordering_from_json,
    "embedding": embedding_from_json,
    "ultrametric": ultrametric_from_json,
    "spanning_tree": spanning_tree_from_json,
}

_WRITERS = {
    MetricSpace: metric_to_json,
    WeightedGraph: graph_to_json,
    WeightedTree: tree_to_json,
    PriorityOrdering: ordering_to_json,
    Embedding: embedding_to_json,
    UltrametricTree: ultrametric_to_json,
}


def to_json(obj):
    from .petal import SpanningTree
    if isinstance(obj, SpanningTree):
        return spanning_tree_to_json(obj)
    for cls, fn in _WRITERS.items():
        if isinstance(obj, cls):
            return fn(obj)
    raise TypeError(f"no JSON form for {type(obj).__name__}")


def guess_kind(d):
    if not isinstance(d, dict):
        raise errors.ValidationError("artifact must be a JSON object")
    if "kind" in d:
        return d["kind"]
    for kind, key in (("metric", "dist"), ("ordering", "perm"), ("embedding", "vectors"),
                      ("ultrametric", "nodes"), ("tree", "n_real")):
        if key in d:
            return kind
    if "edges" in d:
        return "graph"
    raise errors.ValidationError("cannot tell what kind of artifact this is")


def from_json(d, kind=None):
    kind = kind or guess_kind(d)
    if kind not in _READERS:
        raise errors.ValidationError(f"unknown artifact kind {kind!r}")
    return _READERS[kind](d)


def load(path, kind=None):
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as e:
        raise errors.ValidationError(f"{path}: invalid JSON ({e.msg})") from None
    return from_json(d, kind)


def save(obj, path):
    text = dumps(obj if isinstance(obj, dict) else to_json(obj))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return digest(text)
