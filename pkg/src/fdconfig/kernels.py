"""Kernel backend selection.

Prefers the compiled Cython module when it was built; FDCONFIG_PURE=1
forces the pure-Python implementation. Both expose the same functions
over plain tuples, so the rest of the package is backend-agnostic.
"""

from __future__ import annotations

import os

if os.environ.get("FDCONFIG_PURE"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND

normalize = _impl.normalize
intersect = _impl.intersect
clip = _impl.clip
remove_value = _impl.remove_value
contains = _impl.contains
count_values = _impl.count_values
sum_bounds = _impl.sum_bounds
tighten_le = _impl.tighten_le
