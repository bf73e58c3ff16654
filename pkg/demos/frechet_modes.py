"""Run both randomized l_inf embeddings on one metric and compare the
achieved per-rank distortion with the bounds they are audited against."""
import time

from prioembed.audit import DEFAULT_BOUNDS, audit_distortion, with_retries
from prioembed.embedding import dimension_report
from prioembed.frechet import SampleConfig, embed_linf_dimension, embed_linf_distortion
from prioembed.generators import random_metric, random_ordering


def run(name, fn, m, o, k):
    start = time.perf_counter()
    out = with_retries(lambda s: fn(m, o, SampleConfig(k, 16, s)),
                       lambda f: audit_distortion(m, f, o, DEFAULT_BOUNDS[name], {"k": k}),
                       seed=0)
    f, res = out.artifact, out.results[0]
    beta = dimension_report(f, o).per_j
    print(f"{name} k={k}: dim {f.dim}, passed={out.passed} after {out.attempts} seed(s), "
          f"{time.perf_counter() - start:.1f}s")
    for row in res.rows[:3] + res.rows[-2:]:
        print(f"   j={row.j:<4} distortion {float(row.achieved):6.3f} <= {row.allowed}"
              f"   last nonzero coordinate {beta[row.j - 1]}")


def main(n=256):
    m = random_metric(n, 3)
    o = random_ordering(n, 4)
    for k in (2, 4):
        run("linf-distortion", embed_linf_distortion, m, o, k)
        run("linf-dimension", embed_linf_dimension, m, o, k)


if __name__ == "__main__":
    main()
