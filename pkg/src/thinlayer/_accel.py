"""Optional numba acceleration.

Set ``THINLAYER_BACKEND=numpy`` to force the pure-numpy kernels even when
numba is importable.  Any other value (or unset) uses numba if present.
"""

from __future__ import annotations

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def requested_backend(explicit: str | None = None) -> str:
    """Backend actually used: ``explicit`` if given, else the environment flag."""
    value = (explicit or os.environ.get("THINLAYER_BACKEND", "numba")).strip().lower()
    if value in ("numpy", "python", "off", "0"):
        return "numpy"
    return "numba" if HAVE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` or an identity decorator without numba."""
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)
