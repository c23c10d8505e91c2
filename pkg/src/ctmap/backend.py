"""Numeric backend selection.

Hot kernels (coverage computation, grid Dijkstra) have two implementations:
a numba @njit path and a pure numpy/python fallback. Selection order:

1. the ``backend=`` argument of the calling function, when given;
2. the ``CTMAP_BACKEND`` environment variable (``numba`` or ``numpy``);
3. ``numba`` when importable, else ``numpy``.
"""

import os

_VALID = ("numba", "numpy")


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def resolve_backend(backend=None):
    """Return the effective backend name, ``"numba"`` or ``"numpy"``."""
    name = backend or os.environ.get("CTMAP_BACKEND", "").lower() or None
    if name is None:
        return "numba" if _numba_available() else "numpy"
    if name not in _VALID:
        raise ValueError(f"unknown backend {name!r}, expected one of {_VALID}")
    if name == "numba" and not _numba_available():
        raise RuntimeError("CTMAP_BACKEND=numba but numba is not importable")
    return name
