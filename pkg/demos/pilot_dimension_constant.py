"""Measure the constant C in the prioritized-dimension bound

    beta(j) <= C * k * (j^(2/k) + log2 k) * ln n

on a pilot instance that the acceptance suite does not reuse. The suite
freezes the value printed here (rounded up) and fails if any later run
exceeds it.
"""
import math
import time

from prioembed.embedding import dimension_report
from prioembed.frechet import SampleConfig, embed_linf_dimension
from prioembed.generators import random_metric, random_ordering

N = 1024
PILOT_METRIC_SEED, PILOT_ORDER_SEED = 101, 202


def ratio(beta, j, k, n):
    return beta / (k * (j ** (2 / k) + math.log2(k)) * math.log(n))


def main():
    m = random_metric(N, PILOT_METRIC_SEED)
    o = random_ordering(N, PILOT_ORDER_SEED)
    worst = 0.0
    for k in (2, 4):
        for seed in (0, 1, 2):
            t = time.time()
            f = embed_linf_dimension(m, o, SampleConfig(k, 16, seed))
            beta = dimension_report(f, o).per_j
            c = max(ratio(b, j, k, N) for j, b in enumerate(beta, start=1))
            top = max(range(1, N + 1), key=lambda j: ratio(beta[j - 1], j, k, N))
            print(f"k={k} seed={seed} dim={f.dim} C={c:.3f} (worst j={top}, "
                  f"beta={beta[top - 1]}) {time.time() - t:.1f}s")
            worst = max(worst, c)
    print(f"pilot C = {worst:.3f}; frozen value = {math.ceil(worst * 1.1)}")


if __name__ == "__main__":
    main()
