"""Pure-Python kernels: sparse divergences and LCS length.

Reference implementations for the compiled extension in ``_ckernels.pyx``;
used as the fallback when the extension is unavailable. Signatures must stay
in sync with the extension module.
"""

from __future__ import annotations

from math import log, sqrt

BACKEND_NAME = "python"


def kl_div(p: dict, q: dict, eps: float) -> float:
    """KL(p || q) over the union of stored supports, eps-floored lookups.

    Clamped at zero: floating-point cancellation can drive near-identical
    distributions a hair negative.
    """
    total = 0.0
    for token, pv in p.items():
        total += pv * log(pv / q.get(token, eps))
    for token, qv in q.items():
        if token not in p:
            total += eps * log(eps / qv)
    return total if total > 0.0 else 0.0


def hellinger_div(p: dict, q: dict, eps: float) -> float:
    """Hellinger distance over the union of stored supports, clamped to [0, 1]."""
    acc = 0.0
    for token, pv in p.items():
        d = sqrt(pv) - sqrt(q.get(token, eps))
        acc += d * d
    sqrt_eps = sqrt(eps)
    for token, qv in q.items():
        if token not in p:
            d = sqrt_eps - sqrt(qv)
            acc += d * d
    h = sqrt(acc / 2.0)
    if h < 0.0:
        return 0.0
    return h if h < 1.0 else 1.0


def lcs_len_ids(xs: list[int], ys: list[int]) -> int:
    """Length of the longest common subsequence of two int id sequences."""
    if not xs or not ys:
        return 0
    if len(xs) < len(ys):
        xs, ys = ys, xs
    width = len(ys) + 1
    prev = [0] * width
    curr = [0] * width
    for x in xs:
        for j in range(1, width):
            if x == ys[j - 1]:
                curr[j] = prev[j - 1] + 1
            else:
                a = prev[j]
                b = curr[j - 1]
                curr[j] = a if a >= b else b
        prev, curr = curr, prev
    return prev[width - 1]
