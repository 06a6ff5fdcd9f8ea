"""Backend selection for the numeric kernels.

Set ``BELLDISC_DISABLE_NUMBA=1`` to force the pure-numpy code paths even when
numba is importable. The flag is read once at import time; use
:func:`set_backend` to switch in-process (tests and the benchmark do).
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

_FLAG = os.environ.get("BELLDISC_DISABLE_NUMBA", "").strip().lower()
_use_numba = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def use_numba() -> bool:
    return _use_numba


def backend() -> str:
    return "numba" if _use_numba else "numpy"


def set_backend(name: str) -> None:
    """Select ``"numba"`` or ``"numpy"`` for subsequent kernel calls."""
    global _use_numba
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _use_numba = name == "numba"


def max_threads() -> int:
    """Parallelism cap from ``BELLDISC_THREADS`` (default 1)."""
    raw = os.environ.get("BELLDISC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
