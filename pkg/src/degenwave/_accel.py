"""Optional numba acceleration for the hot kernels.

The numba path is used when numba imports cleanly and ``DEGENWAVE_NO_NUMBA``
is unset (or ``0``).  ``DEGENWAVE_THREADS`` caps the numba thread pool.
Both paths produce the same numbers up to floating-point reassociation.
"""

from __future__ import annotations

import os

_FALSE = {"", "0", "false", "no", "off"}

try:  # pragma: no cover - exercised implicitly by whichever path is active
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

HAVE_NUMBA = _numba is not None
if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # the kernels are serial; avoid probing TBB/OpenMP when the pool starts
    _numba.config.THREADING_LAYER = "workqueue"
USE_NUMBA = HAVE_NUMBA and os.environ.get("DEGENWAVE_NO_NUMBA", "0").strip().lower() in _FALSE


def njit(fn):
    """Compile ``fn`` with numba when available, otherwise return it untouched."""
    if not HAVE_NUMBA:
        return fn
    return _numba.njit(cache=False, fastmath=False)(fn)


def configure_threads() -> int | None:
    """Apply ``DEGENWAVE_THREADS`` to numba; returns the active thread count."""
    if not HAVE_NUMBA:
        return None
    raw = os.environ.get("DEGENWAVE_THREADS")
    if not raw:
        return int(_numba.config.NUMBA_NUM_THREADS)
    n = max(1, min(int(raw), _numba.config.NUMBA_NUM_THREADS))
    _numba.set_num_threads(n)
    return _numba.get_num_threads()


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
