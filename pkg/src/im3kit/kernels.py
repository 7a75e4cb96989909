"""Kernel backend selection.

The compiled extension is used when it was built; set ``IM3KIT_PURE_PYTHON=1``
to force the pure-Python fallback.
"""
import os

from . import _kernels_py

if os.environ.get("IM3KIT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = "cython" if _impl is not _kernels_py else "python"

channel_power = _impl.channel_power
profile_powers = _impl.profile_powers
