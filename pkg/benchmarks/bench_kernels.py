"""Benchmark the compiled kernels against the pure-Python fallback.

Run from the repository root after building the extension in place:

    python benchmarks/bench_kernels.py
"""

import random
import time

from divedit import _kernels_py

try:
    from divedit import _ckernels
except ImportError:
    _ckernels = None


def random_dists(count, support, pool_size, seed):
    rng = random.Random(seed)
    pool = [f"tok{i}" for i in range(pool_size)]
    pairs = []
    for _ in range(count):
        def one():
            tokens = rng.sample(pool, support)
            weights = {t: rng.random() + 1e-9 for t in tokens}
            total = sum(weights.values())
            return {t: w / total for t, w in weights.items()}

        pairs.append((one(), one()))
    return pairs


def random_id_lists(count, low, high, alphabet, seed):
    rng = random.Random(seed)
    return [
        (
            [rng.randrange(alphabet) for _ in range(rng.randint(low, high))],
            [rng.randrange(alphabet) for _ in range(rng.randint(low, high))],
        )
        for _ in range(count)
    ]


def timed(fn, args_list, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    eps = 1e-8
    dist_pairs = random_dists(count=2000, support=128, pool_size=1000, seed=1)
    kl_args = [(p, q, eps) for p, q in dist_pairs]
    lcs_args = random_id_lists(count=400, low=20, high=60, alphabet=50, seed=2)

    cases = [
        ("kl_div (128-entry sparse)", "kl_div", kl_args),
        ("hellinger_div (128-entry sparse)", "hellinger_div", kl_args),
        ("lcs_len_ids (20-60 tokens)", "lcs_len_ids", lcs_args),
    ]

    print(f"{'kernel':36s} {'pure (s)':>10s} {'compiled (s)':>12s} {'speedup':>8s}")
    for label, name, args_list in cases:
        pure = timed(getattr(_kernels_py, name), args_list)
        if _ckernels is None:
            print(f"{label:36s} {pure:10.4f} {'-':>12s} {'-':>8s}")
            continue
        compiled = timed(getattr(_ckernels, name), args_list)
        print(f"{label:36s} {pure:10.4f} {compiled:12.4f} {pure / compiled:7.1f}x")

    if _ckernels is not None:
        for p, q in dist_pairs[:50]:
            assert abs(_ckernels.kl_div(p, q, eps) - _kernels_py.kl_div(p, q, eps)) < 1e-12
        for xs, ys in lcs_args[:50]:
            assert _ckernels.lcs_len_ids(xs, ys) == _kernels_py.lcs_len_ids(xs, ys)
        print("\nagreement checks passed")


if __name__ == "__main__":
    main()
