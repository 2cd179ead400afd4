"""Hot loops, compiled when available.

The Cython extension is used if it was built and imports cleanly; otherwise the
pure-Python module is used. Set ``SOTADC_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels as python

BACKEND = "python"
compiled = None

if not os.environ.get("SOTADC_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None
    else:
        BACKEND = "cython"

_impl = compiled if compiled is not None else python

sweep_codes = _impl.sweep_codes
hysteresis_trace = _impl.hysteresis_trace
first_reach = _impl.first_reach

__all__ = ["BACKEND", "compiled", "python", "sweep_codes", "hysteresis_trace", "first_reach"]
