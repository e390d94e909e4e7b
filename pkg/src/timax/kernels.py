"""Backend selection for the Monte Carlo kernels.

The compiled extension is used when it imports; otherwise the pure-Python
reference module is used.  Setting ``TIMAX_PURE_PYTHON=1`` forces the
fallback.
"""

import importlib
import os

from . import _pykernels

_NAMES = ("spread_counts", "marginal_totals", "prefix_totals", "extend_mask", "masked_marginal_totals")


def load_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("timax._ckernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def _select():
    if os.environ.get("TIMAX_PURE_PYTHON", "") not in ("", "0"):
        return "python", _pykernels
    try:
        return "cython", load_backend("cython")
    except ImportError:
        return "python", _pykernels


BACKEND, _impl = _select()
spread_counts = _impl.spread_counts
marginal_totals = _impl.marginal_totals
prefix_totals = _impl.prefix_totals
extend_mask = _impl.extend_mask
masked_marginal_totals = _impl.masked_marginal_totals
# Compiled exact enumeration; None selects the vectorized numpy path.
exact_spread = getattr(_impl, "exact_spread", None)
