"""Kernel backend selection.

Set ``MZCHAIN_BACKEND=numpy`` to force the pure-numpy kernels; the default
uses numba when it imports cleanly.
"""

from __future__ import annotations

import os

BACKEND_ENV = "MZCHAIN_BACKEND"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def requested_backend() -> str:
    value = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {value!r}")
    return value


def default_backend() -> str:
    if requested_backend() == "numba" and HAVE_NUMBA:
        return "numba"
    return "numpy"


def resolve(backend: str | None) -> str:
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def njit(func):
    """``numba.njit(cache=True)`` when numba is present, else the plain function."""
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func
