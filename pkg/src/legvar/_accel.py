"""Backend switch for the compiled kernels.

``LEGVAR_BACKEND=numpy`` forces the vectorised numpy path; the default is
numba when it imports. ``LEGVAR_THREADS`` caps the numba thread pool.
"""
import os

try:
    import numba

    HAS_NUMBA = True
    # the bundled TBB is too old for numba and only produces a warning; OpenMP works
    if "NUMBA_THREADING_LAYER" not in os.environ:
        numba.config.THREADING_LAYER = "omp"
except ImportError:  # pragma: no cover
    numba = None
    HAS_NUMBA = False

_BACKENDS = ("numba", "numpy")


def default_backend() -> str:
    name = os.environ.get("LEGVAR_BACKEND", "numba").strip().lower()
    if name not in _BACKENDS:
        raise ValueError(f"LEGVAR_BACKEND must be one of {_BACKENDS}, got {name!r}")
    if name == "numba" and not HAS_NUMBA:
        return "numpy"
    return name


def resolve_backend(backend: str | None) -> str:
    if backend is None:
        return default_backend()
    if backend not in _BACKENDS:
        raise ValueError(f"backend must be one of {_BACKENDS}, got {backend!r}")
    if backend == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def apply_thread_limit() -> int | None:
    """Honour LEGVAR_THREADS; returns the thread count in effect."""
    if not HAS_NUMBA:
        return None
    raw = os.environ.get("LEGVAR_THREADS")
    if raw:
        n = max(1, min(int(raw), numba.config.NUMBA_NUM_THREADS))
        numba.set_num_threads(n)
    return numba.get_num_threads()
