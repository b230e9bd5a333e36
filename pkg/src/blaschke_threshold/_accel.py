"""Backend selection for the hot grid kernels.

Kernels are written once as plain Python loops and compiled with numba when
it is importable; a vectorized numpy twin exists for each of them.  The
numpy path is used when ``BLASCHKE_THRESHOLD_PURE_NUMPY=1`` is set or numba
is missing.  ``set_backend`` switches at runtime (tests and benchmarks).
"""

import os

ENV_FLAG = "BLASCHKE_THRESHOLD_PURE_NUMPY"

# The TBB layer shipped with some images is too old; the workqueue layer is enough.
os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
_backend = "numpy" if (not HAVE_NUMBA or os.environ.get(ENV_FLAG, "0").lower() in ("1", "true", "yes", "on")) else "numba"


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    _backend = name


def set_threads(n: int) -> None:
    if HAVE_NUMBA and n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


def njit(*args, **kwargs):
    """``numba.njit`` with caching, or a no-op decorator without numba."""
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return numba.njit(*args, **kwargs)

