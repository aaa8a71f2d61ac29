"""Strip accumulation kernels: compiled core with a pure-Python fallback.

The compiled extension is preferred; if it was not built select the
Python twin at import time. ``BACKEND`` records which one is active.
``benchmarks/bench_kernels.py`` compares the two.
"""

from ._edie_py import clip_polygon_rect, polygon_area

try:
    from ._edie_cy import accumulate_strips

    BACKEND = "cython"
except ImportError:  # extension not built; fall back
    from ._edie_py import accumulate_strips

    BACKEND = "python"

from ._edie_py import accumulate_strips as accumulate_strips_py

__all__ = [
    "BACKEND",
    "accumulate_strips",
    "accumulate_strips_py",
    "clip_polygon_rect",
    "polygon_area",
]
