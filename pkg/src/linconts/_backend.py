"""Backend selection for the hot kernels.

``LINCONTS_BACKEND=numba`` (default when numba imports) compiles the
per-round loops with ``numba.njit``; ``LINCONTS_BACKEND=numpy`` runs the
same algorithms as vectorised numpy plus plain Python. Both backends
consume the random stream identically.
"""

from __future__ import annotations

import functools
import os

BACKENDS = ("numba", "numpy")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


def default_backend() -> str:
    name = os.environ.get("LINCONTS_BACKEND", "").strip().lower()
    if not name:
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"LINCONTS_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("LINCONTS_BACKEND=numba but numba is not installed")
    return name


def get_kernels(name: str | None = None):
    """Return the kernel namespace for ``name`` (or the env default)."""
    name = name or default_backend()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; expected one of {BACKENDS}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba backend requested but numba is not installed")
    return _build(name)


@functools.cache
def _build(name: str):
    from . import _kernels

    return _kernels.build(jit=(name == "numba"))
