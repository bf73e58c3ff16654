"""Embed a small random tree isometrically into l_inf and show how the
coordinates of high-priority vertices stay in a short prefix."""
import math

from prioembed import PriorityOrdering, prioritized_tree_embedding
from prioembed.embedding import dimension_report, distortion_report
from prioembed.generators import random_ordering, random_tree


def main(n=60, seed=4):
    t = random_tree(n, seed, max_weight=20)
    o = random_ordering(n, seed + 1)
    res = prioritized_tree_embedding(t, o, detailed=True)
    f = res.embedding
    rep = distortion_report(t.metric(), f, o)
    worst = max(rep.distortion(j) for j in range(1, n + 1))
    print(f"{n} vertices -> {f.dim} coordinates, worst pair distortion {worst}")
    print("level block sizes:", res.level_dims)
    beta = dimension_report(f, o).per_j
    print(" j  point  last nonzero  level budget  40(log2 j + 2)")
    for j in (1, 2, 3, 4, 5, 16, 17, n):
        print(f"{j:>2}  {o.point(j):>5}  {beta[j - 1]:>12}  {res.level_bound(j):>12}"
              f"  {40 * (math.log2(j) + 2):>14.1f}")
    x1 = o.point(1)
    print(f"f(x_1) = f({x1}) =", [str(v) for v in f.vector(x1)[:res.level_dims[0]]], "...")

    # the same tree under the identity ranking gives a different prefix layout
    g = prioritized_tree_embedding(t, PriorityOrdering.identity(n))
    print("identity ranking uses", g.dim, "coordinates")


if __name__ == "__main__":
    main()
