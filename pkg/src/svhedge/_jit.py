"""Numba shim.

The hot kernels are compiled with numba unless ``SVHEDGE_DISABLE_NUMBA`` is
set to a truthy value (or numba cannot be imported), in which case the
pure-numpy implementations in :mod:`svhedge.kernels` are used instead.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("SVHEDGE_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAVE_NUMBA = False

    def njit(*args, **kw):
        if len(args) == 1 and callable(args[0]) and not kw:
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def set_backend(name: str) -> None:
    """Switch between the ``"numba"`` and ``"numpy"`` kernels at runtime."""
    global USE_NUMBA
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    USE_NUMBA = name == "numba"


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
