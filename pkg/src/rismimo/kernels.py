"""Backend selection for the batch rate kernel.

The compiled extension is preferred when importable; otherwise the numpy
implementation is used.  Set RISMIMO_BACKEND=python (or =compiled) to force a
choice, e.g. for benchmarking or debugging.
"""
from __future__ import annotations

import os

from . import _ratecore_py

_requested = os.environ.get("RISMIMO_BACKEND", "").lower()

if _requested in ("python", "py"):
    _impl = _ratecore_py
    BACKEND = "python"
elif _requested in ("", "compiled", "c"):
    try:
        from . import _ratecore as _impl  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        if _requested:
            raise
        _impl = _ratecore_py
        BACKEND = "python"
else:
    raise ValueError(f"RISMIMO_BACKEND must be 'python' or 'compiled'; got {_requested!r}")

#: Selected implementation of the (L, N) -> (L,) batch sum-rate evaluation.
sum_rate_batch = _impl.sum_rate_batch
