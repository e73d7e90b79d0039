"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``DIVEDIT_PURE_PYTHON=1`` to force the fallback (used by the kernel
benchmark and by tests asserting both implementations agree).
"""

from __future__ import annotations

import os
from collections.abc import Sequence

from . import _kernels_py

if os.environ.get("DIVEDIT_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

KERNEL_BACKEND: str = _impl.BACKEND_NAME

kl_div = _impl.kl_div
hellinger_div = _impl.hellinger_div
_lcs_len_ids = _impl.lcs_len_ids


def lcs_length(xs: Sequence[str], ys: Sequence[str]) -> int:
    """Token-level longest-common-subsequence length."""
    ids: dict[str, int] = {}
    xi = [ids.setdefault(t, len(ids)) for t in xs]
    yi = [ids.setdefault(t, len(ids)) for t in ys]
    return _lcs_len_ids(xi, yi)
