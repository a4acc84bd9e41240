"""Kernel dispatch: use the compiled extension when present, else the numpy fallback.

Set ``QCYCLE_PURE_PYTHON=1`` to force the fallback (useful for benchmarking).
"""
import os

from . import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("QCYCLE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _fallback

lifted_st_distance = _impl.lifted_st_distance
walk_zero_phase_sum = _impl.walk_zero_phase_sum

__all__ = ["BACKEND", "lifted_st_distance", "walk_zero_phase_sum"]
