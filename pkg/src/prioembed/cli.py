"""Command line front end: ``gen``, ``embed``, ``audit`` and ``validate``.

Exit codes: 0 success, 1 a bound was violated, 2 invalid input, 3 an
internal invariant broke.
"""
import argparse
import json
import sys

from . import __version__, errors, io
from .audit import DEFAULT_BOUNDS, audit_dimension, audit_distortion, with_retries
from .bounds import BoundSpec, priority_function
from .frechet import SampleConfig, embed_linf_dimension, embed_linf_distortion
from .generators import random_graph, random_metric, random_ordering, random_tree
from .metric import MetricSpace, PriorityOrdering, WeightedGraph, shortest_path_metric
from .petal import petal_decomposition_spanning_tree
from .tree import WeightedTree
from .tree_embed import prioritized_tree_embedding
from .ultrametric import build_ultrametric

MODES = ("tree", "linf-distortion", "linf-dimension", "ultrametric", "spanning-tree")
RANDOMIZED = ("linf-distortion", "linf-dimension")


class AuditFailed(Exception):
    pass


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return io.digest(text)


def _read_text(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise errors.ValidationError(f"cannot read {path}: {e.strerror}") from None


def _load(path, kind=None):
    text = _read_text(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise errors.ValidationError(f"{path}: invalid JSON ({e.msg})") from None
    return io.from_json(data, kind), io.digest(text)


# gen

def cmd_gen(args):
    if args.n < 1:
        raise errors.InvalidParams("n must be at least 1")
    if args.kind == "tree":
        obj = random_tree(args.n, args.seed, args.max_weight)
    elif args.kind == "graph":
        obj = random_graph(args.n, args.seed, args.p, args.max_weight, args.max_den)
    elif args.kind == "metric":
        obj = random_metric(args.n, args.seed, args.p, args.max_weight, args.max_den)
    else:
        obj = random_ordering(args.n, args.seed)
    _emit(io.dumps(io.to_json(obj)), args.out)
    return 0


# embed

def _as_metric(obj):
    if isinstance(obj, MetricSpace):
        return obj
    if isinstance(obj, WeightedGraph):
        return shortest_path_metric(obj)
    if isinstance(obj, WeightedTree):
        return obj.metric()
    raise errors.ValidationError(f"expected a metric or graph, got {type(obj).__name__}")


def _inputs(mode, input_path, ordering_path):
    obj, in_digest = _load(input_path)
    if mode == "tree" and not isinstance(obj, WeightedTree):
        raise errors.ValidationError("tree mode needs a tree input")
    if mode == "spanning-tree" and not isinstance(obj, WeightedGraph):
        raise errors.ValidationError("spanning-tree mode needs a graph input")
    n = obj.n_real if isinstance(obj, WeightedTree) else obj.n
    if ordering_path:
        ordering, ord_digest = _load(ordering_path, "ordering")
        if ordering.n != n:
            raise errors.OrderingMismatch(f"ordering ranks {ordering.n} points, input has {n}")
    else:
        ordering, ord_digest = PriorityOrdering.identity(n), None
    return obj, ordering, n, in_digest, ord_digest


def _build(mode, obj, ordering, n, k, c, seed, alpha_spec):
    """Run one construction; returns ``(artifact, sidecar or None)``."""
    if mode == "tree":
        return prioritized_tree_embedding(obj, ordering), None
    if mode in RANDOMIZED:
        m = _as_metric(obj)
        cfg = SampleConfig(k, c, seed)
        fn = embed_linf_distortion if mode == "linf-distortion" else embed_linf_dimension
        res = fn(m, ordering, cfg, detailed=True)
        return res.embedding, {"kind": "coordinates", "mode": mode, "seed": seed,
                               "coordinates": res.manifest()}
    alpha = priority_function(alpha_spec, max(n, 1))
    if mode == "ultrametric":
        return build_ultrametric(_as_metric(obj), ordering, alpha), None
    return petal_decomposition_spanning_tree(obj, ordering, alpha), None


def _params(args):
    return {"k": args.k, "c": args.c, "alpha": args.alpha}


def _bound_params(mode, n, k, c, alpha_spec):
    p = {"k": k, "c": c}
    if mode in ("ultrametric", "spanning-tree"):
        p["alpha"] = priority_function(alpha_spec, max(n, 1))
    return p


def _reference_metric(mode, obj):
    if mode == "tree":
        return obj.metric()
    return _as_metric(obj)


def cmd_embed(args):
    if args.from_manifest:
        return _replay(args)
    if not args.input:
        raise errors.InvalidParams("--input is required")
    obj, ordering, n, in_digest, ord_digest = _inputs(args.mode, args.input, args.ordering)
    art, sidecar = _build(args.mode, obj, ordering, n, args.k, args.c, args.seed, args.alpha)
    out_text = io.dumps(io.to_json(art))
    outputs = {"artifact": {"path": args.out, "digest": _emit(out_text, args.out)}}
    if sidecar is not None and args.out:
        path = args.out + ".coords.json"
        outputs["coordinates"] = {"path": path, "digest": _emit(io.dumps(sidecar), path)}
    verdicts = {}
    if args.audit:
        m = _reference_metric(args.mode, obj)
        res = audit_distortion(m, art, ordering, DEFAULT_BOUNDS[args.mode],
                               _bound_params(args.mode, n, args.k, args.c, args.alpha))
        verdicts["distortion"] = {"bound": res.bound, "passed": res.passed, "checks": res.checks}
    manifest = {
        "kind": "manifest",
        "version": __version__,
        "command": "embed",
        "mode": args.mode,
        "inputs": {"input": {"path": args.input, "digest": in_digest},
                   "ordering": {"path": args.ordering, "digest": ord_digest}},
        "seed": args.seed,
        "params": _params(args),
        "outputs": outputs,
        "verdicts": verdicts,
    }
    mpath = args.manifest or (args.out + ".manifest.json" if args.out else None)
    if mpath:
        _emit(io.dumps(manifest), mpath)
    if verdicts and not all(v["passed"] for v in verdicts.values()):
        raise AuditFailed("default bound violated")
    return 0


def _replay(args):
    """Re-run the construction a manifest describes and compare digests."""
    man, _ = _read_manifest(args.from_manifest)
    ins = man["inputs"]
    for key in ("input", "ordering"):
        rec = ins.get(key) or {}
        if rec.get("path"):
            got = io.digest(_read_text(rec["path"]))
            if got != rec["digest"]:
                raise errors.ValidationError(f"{key} {rec['path']} changed since the manifest was written")
    p = man["params"]
    obj, ordering, n, _, _ = _inputs(man["mode"], ins["input"]["path"], ins["ordering"]["path"])
    art, sidecar = _build(man["mode"], obj, ordering, n, p["k"], p["c"], man["seed"], p["alpha"])
    texts = {"artifact": io.dumps(io.to_json(art))}
    if sidecar is not None:
        texts["coordinates"] = io.dumps(sidecar)
    report = {}
    for key, rec in man["outputs"].items():
        report[key] = io.digest(texts[key]) == rec["digest"]
        if args.out and key == "artifact":
            _emit(texts[key], args.out)
    sys.stdout.write(io.dumps({"kind": "replay", "identical": report}))
    if not all(report.values()):
        raise errors.InvariantError("replay produced different bytes than the manifest records")
    return 0


def _read_manifest(path):
    text = _read_text(path)
    try:
        man = json.loads(text)
    except json.JSONDecodeError as e:
        raise errors.ValidationError(f"{path}: invalid JSON ({e.msg})") from None
    if not isinstance(man, dict) or man.get("kind") != "manifest":
        raise errors.ValidationError(f"{path} is not a run manifest")
    return man, io.digest(text)


# audit

def cmd_audit(args):
    obj, ordering, n = _inputs_any(args.input, args.ordering)
    mode = args.mode
    m = _reference_metric("tree" if isinstance(obj, WeightedTree) else mode, obj)
    bound = args.bound or (DEFAULT_BOUNDS[mode] if mode else None)
    if bound is None:
        raise errors.InvalidParams("--bound is required when auditing a stored artifact")
    BoundSpec(bound)
    bparams = {"k": args.k, "c": args.c}
    if "alpha" in bound or "alpha" in (args.dimension_bound or ""):
        bparams["alpha"] = priority_function(args.alpha, max(n, 1))

    def check(art):
        out = [audit_distortion(m, art, ordering, bound, bparams, workers=args.workers)]
        if args.dimension_bound:
            out.append(audit_dimension(art, ordering, args.dimension_bound, bparams))
        return out

    if args.embedding:
        art, _ = _load(args.embedding)
        if isinstance(art, WeightedGraph) and isinstance(obj, WeightedGraph):
            art = io.spanning_tree_from_json(json.loads(_read_text(args.embedding)), obj)
        outcome = with_retries(lambda s: art, check, args.seed, 1)
    else:
        if not mode:
            raise errors.InvalidParams("give --embedding or --mode")
        retries = args.retries if mode in RANDOMIZED else 1
        outcome = with_retries(
            lambda s: _build(mode, obj, ordering, n, args.k, args.c, s, args.alpha)[0],
            check, args.seed, retries)
        if args.save:
            _emit(io.dumps(io.to_json(outcome.artifact)), args.save)
    report = {
        "kind": "audit",
        "passed": outcome.passed,
        "seed": outcome.seed,
        "attempts": outcome.attempts,
        "results": [r.as_dict() for r in outcome.results],
    }
    _emit(io.dumps(report), args.out)
    if not outcome.passed:
        for r in outcome.results:
            for name, ok in r.checks.items():
                if not ok:
                    sys.stderr.write(f"violation: check {name} failed\n")
            for row in r.violations[:10]:
                sys.stderr.write(
                    f"violation: {r.kind} j={row.j} point={row.point} partner={row.witness} "
                    f"achieved={row.as_dict()['achieved']} allowed={row.as_dict()['allowed']}\n")
        raise AuditFailed("bound violated")
    return 0


def _inputs_any(input_path, ordering_path):
    obj, _ = _load(input_path)
    n = obj.n_real if isinstance(obj, WeightedTree) else obj.n
    if ordering_path:
        ordering, _ = _load(ordering_path, "ordering")
        if ordering.n != n:
            raise errors.OrderingMismatch(f"ordering ranks {ordering.n} points, input has {n}")
    else:
        ordering = PriorityOrdering.identity(n)
    return obj, ordering, n


# validate

def cmd_validate(args):
    if args.kind == "alpha":
        pf = priority_function(args.target, args.n)
        sys.stdout.write(io.dumps({"kind": "alpha", "valid": True, "spec": pf.spec, "n": args.n,
                                   "partial_sum": f"{float(pf.partial_sum):.12g}"}))
        return 0
    obj, dg = _load(args.target, None if args.kind == "auto" else args.kind)
    if isinstance(obj, WeightedGraph) and not obj.is_connected():
        raise errors.Disconnected("graph is not connected")
    sys.stdout.write(io.dumps({"kind": "validation", "valid": True,
                               "type": type(obj).__name__, "digest": dg}))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="prioembed", description="Prioritized metric embeddings.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=["json"], default="json")
        sp.add_argument("--out", help="output file (default: stdout)")

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("kind", choices=["metric", "graph", "tree", "ordering"])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-weight", type=int, default=100)
    g.add_argument("--max-den", type=int, default=1, help="largest weight denominator")
    g.add_argument("--p", type=float, default=None, help="extra-edge probability")
    common(g)
    g.set_defaults(func=cmd_gen)

    e = sub.add_parser("embed", help="run a construction")
    e.add_argument("mode", choices=MODES, nargs="?")
    e.add_argument("--input")
    e.add_argument("--ordering")
    e.add_argument("--k", type=int, default=2)
    e.add_argument("--c", type=int, default=16)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--alpha", default="default")
    e.add_argument("--manifest", help="manifest path (default: OUT.manifest.json)")
    e.add_argument("--from-manifest", help="replay a manifest and compare digests")
    e.add_argument("--audit", action="store_true", help="audit against the mode's bound")
    common(e)
    e.set_defaults(func=cmd_embed)

    a = sub.add_parser("audit", help="audit distortion and dimension")
    a.add_argument("--input", required=True)
    a.add_argument("--ordering")
    a.add_argument("--embedding", help="stored embedding, ultrametric or spanning tree")
    a.add_argument("--mode", choices=MODES, help="build with this mode instead")
    a.add_argument("--bound", help="distortion bound expression in j, n, k, c, alpha(j)")
    a.add_argument("--dimension-bound")
    a.add_argument("--k", type=int, default=2)
    a.add_argument("--c", type=int, default=16)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--alpha", default="default")
    a.add_argument("--retries", type=int, default=3)
    a.add_argument("--workers", type=int, default=1)
    a.add_argument("--save", help="write the audited artifact here")
    common(a)
    a.set_defaults(func=cmd_audit)

    v = sub.add_parser("validate", help="check an artifact or priority function")
    v.add_argument("kind", choices=["auto", "metric", "graph", "tree", "ordering", "embedding",
                                    "ultrametric", "alpha"])
    v.add_argument("target", help="file, or an alpha expression")
    v.add_argument("--n", type=int, default=1)
    common(v)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "embed" and not args.mode and not args.from_manifest:
        sys.stderr.write("error: embed needs a mode or --from-manifest\n")
        return 2
    try:
        return args.func(args)
    except AuditFailed as e:
        sys.stderr.write(f"audit failed: {e}\n")
        return 1
    except errors.InvariantError as e:
        sys.stderr.write(f"invariant broken: {e}\n")
        return 3
    except (errors.ValidationError, OSError) as e:
        sys.stderr.write(f"invalid input: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
