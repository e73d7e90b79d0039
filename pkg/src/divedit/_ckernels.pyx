# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels: sparse divergences and LCS length.

Hot loops of the scoring pipeline. Must stay signature-compatible with the
pure-Python fallback in ``_kernels_py.py``.
"""

from libc.math cimport log, sqrt
from libc.stdlib cimport free, malloc

BACKEND_NAME = "c"


def kl_div(dict p, dict q, double eps):
    """KL(p || q) over the union of stored supports, eps-floored lookups."""
    cdef double total = 0.0
    cdef double pv, qv
    cdef object token, val
    for token, val in p.items():
        pv = val
        qv = <double> q.get(token, eps)
        total += pv * log(pv / qv)
    for token, val in q.items():
        if token not in p:
            qv = val
            total += eps * log(eps / qv)
    return total if total > 0.0 else 0.0


def hellinger_div(dict p, dict q, double eps):
    """Hellinger distance over the union of stored supports, clamped to [0, 1]."""
    cdef double acc = 0.0
    cdef double d, pv, qv
    cdef double sqrt_eps = sqrt(eps)
    cdef object token, val
    for token, val in p.items():
        pv = val
        d = sqrt(pv) - sqrt(<double> q.get(token, eps))
        acc += d * d
    for token, val in q.items():
        if token not in p:
            qv = val
            d = sqrt_eps - sqrt(qv)
            acc += d * d
    cdef double h = sqrt(acc / 2.0)
    if h < 0.0:
        return 0.0
    return h if h < 1.0 else 1.0


def lcs_len_ids(list xs, list ys):
    """Length of the longest common subsequence of two int id sequences."""
    cdef Py_ssize_t m = len(xs)
    cdef Py_ssize_t n = len(ys)
    if m == 0 or n == 0:
        return 0
    if m < n:
        xs, ys = ys, xs
        m, n = n, m
    cdef long *xa = <long *> malloc(m * sizeof(long))
    cdef long *ya = <long *> malloc(n * sizeof(long))
    cdef long *prev = <long *> malloc((n + 1) * sizeof(long))
    cdef long *curr = <long *> malloc((n + 1) * sizeof(long))
    if xa == NULL or ya == NULL or prev == NULL or curr == NULL:
        free(xa); free(ya); free(prev); free(curr)
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef long a, b, result
    cdef long *tmp
    try:
        for i in range(m):
            xa[i] = <long> xs[i]
        for j in range(n):
            ya[j] = <long> ys[j]
        for j in range(n + 1):
            prev[j] = 0
            curr[j] = 0
        for i in range(m):
            for j in range(1, n + 1):
                if xa[i] == ya[j - 1]:
                    curr[j] = prev[j - 1] + 1
                else:
                    a = prev[j]
                    b = curr[j - 1]
                    curr[j] = a if a >= b else b
            tmp = prev; prev = curr; curr = tmp
        result = prev[n]
    finally:
        free(xa); free(ya); free(prev); free(curr)
    return result
