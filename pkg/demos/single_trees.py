"""Build a single ultrametric and a single spanning tree for one graph and
look at how stretch depends on the rank of a pair's better endpoint."""
from fractions import Fraction

from prioembed import build_ultrametric, default_alpha, petal_decomposition_spanning_tree
from prioembed.audit import audit_distortion
from prioembed.generators import random_graph, random_ordering
from prioembed.metric import shortest_path_metric


def summary(label, res, alpha, ranks):
    print(label)
    for j in ranks:
        row = res.rows[j - 1]
        print(f"   j={j:<4} worst stretch {float(row.achieved):8.3f}"
              f"   budget {float(row.allowed):10.1f}   (alpha(j) = {float(alpha(j)):.1f})")


def main(n=120):
    g = random_graph(n, 11, p=0.06, max_den=2)
    m = shortest_path_metric(g)
    o = random_ordering(n, 12)
    alpha = default_alpha(n)
    params = {"alpha": alpha}
    ranks = (1, 2, 5, 20, n)

    u = build_ultrametric(m, o, alpha)
    res = audit_distortion(m, u, o, "2*alpha(j)", params)
    summary(f"ultrametric: {len(u.nodes)} nodes, passed={res.passed}", res, alpha, ranks)

    st = petal_decomposition_spanning_tree(g, o, alpha)
    res = audit_distortion(m, st, o, "1024*alpha(j)", params)
    summary(f"spanning tree: {len(st.edges)} edges, passed={res.passed}", res, alpha, ranks)
    radii = [rec.tree_radius / rec.cluster.rad for rec in st.clusters if rec.cluster.rad]
    carves = [c.radius / rec.cluster.rad for rec in st.clusters for c in rec.carves]
    print(f"   cluster tree radius / rad: max {float(max(radii)):.3f} (allowed 4)")
    print(f"   carved radius / rad: max {float(max(carves, default=Fraction(0))):.4f} (allowed 1/8)")


if __name__ == "__main__":
    main()
