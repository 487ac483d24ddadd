"""Select the compiled timetable kernel when available.

Set ``EVACSCHED_PURE_PYTHON=1`` to force the pure-Python implementation.
"""

import os

from . import _kernel_py
from ._kernel_py import CHANGED, FAIL, UNCHANGED, usage_profile

IMPLEMENTATION = "python"
timetable = _kernel_py.timetable

if not os.environ.get("EVACSCHED_PURE_PYTHON"):
    try:
        from . import _kernel  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        timetable = _kernel.timetable
        IMPLEMENTATION = "cython"

__all__ = ["CHANGED", "FAIL", "UNCHANGED", "IMPLEMENTATION", "timetable", "usage_profile"]
