"""Benchmark the clustering kernel: compiled extension vs pure-Python twin.

The quadratic pair loop inside one blocking partition is the pipeline's hot
spot; this script times both backends on identical encoded blocks.  Usage::

    python benchmarks/bench_disambig.py [--sizes 200,500,1000,2000,4000]
"""

from __future__ import annotations

import argparse
import time
from random import Random

from scholarmob.disambig import MentionContext, load_scoring_config
from scholarmob.disambig import kernels
from scholarmob.names import NameKey

KEY = NameKey("wang", "w")


def build_block(size: int, rng: Random) -> list[MentionContext]:
    """One oversized block: ~size/5 identities behind the same name key."""
    identities = max(1, size // 5)
    coauthor_pool = [NameKey(f"co{i:03d}", "a") for i in range(identities * 2)]
    contexts = []
    for i in range(size):
        person = rng.randrange(identities)
        has_email = rng.random() < 0.9
        circle = coauthor_pool[2 * person : 2 * person + 2]
        contexts.append(
            MentionContext(
                pub_id=f"p{i:06d}",
                mention_index=0,
                year=rng.randint(2008, 2017),
                key=KEY,
                email=f"person{person}@example.edu" if has_email else None,
                full_first=f"name{person}" if rng.random() < 0.85 else None,
                countries=frozenset({rng.choice(["EGY", "SAU", "TUN", "FRA"])}),
                coauthor_keys=frozenset(rng.sample(circle, k=rng.randint(1, 2))),
            )
        )
    contexts.sort(key=lambda c: c.member)
    return contexts


def time_backend(encoded, vector, threshold, backend: str, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        kernels.link_labels(encoded, vector, threshold, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="200,500,1000,2000,4000")
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    config = load_scoring_config()
    vector = config.weight_vector()
    rng = Random(args.seed)

    has_compiled = kernels.BACKEND == "compiled"
    print(f"selected backend at import: {kernels.BACKEND}")
    print(f"{'block size':>10}  {'pure (s)':>10}  {'compiled (s)':>12}  {'speedup':>8}")
    for size in sizes:
        block = build_block(size, rng)
        encoded = kernels.encode_block(block)
        pure = time_backend(encoded, vector, config.threshold, "pure")
        if has_compiled:
            compiled = time_backend(encoded, vector, config.threshold, "compiled")
            labels_pure = kernels.link_labels(encoded, vector, config.threshold, backend="pure")
            labels_compiled = kernels.link_labels(
                encoded, vector, config.threshold, backend="compiled"
            )
            assert list(labels_pure) == list(labels_compiled), "backend mismatch"
            print(f"{size:>10}  {pure:>10.4f}  {compiled:>12.4f}  {pure / compiled:>7.1f}x")
        else:
            print(f"{size:>10}  {pure:>10.4f}  {'n/a':>12}  {'n/a':>8}")


if __name__ == "__main__":
    main()
