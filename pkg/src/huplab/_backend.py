"""Backend selection for the hot kernels.

``HUPLAB_NUMBA=0`` forces the pure-numpy kernels; any other value (or
unset) uses numba when it can be imported.  ``HUPLAB_THREADS`` caps the
number of numba worker threads.
"""
import os

_flag = os.environ.get("HUPLAB_NUMBA", "1").strip().lower()
WANT_NUMBA = _flag not in ("0", "false", "no", "off")

# the bundled TBB is too old for numba; omp is thread-safe and always present here
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    import numba  # noqa: F401
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    HAS_NUMBA = False

USE_NUMBA = WANT_NUMBA and HAS_NUMBA


def thread_cap():
    """Return the HUPLAB_THREADS cap, or None when unset/invalid."""
    raw = os.environ.get("HUPLAB_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        return None
    return n if n >= 1 else None


def apply_thread_cap():
    cap = thread_cap()
    if cap is None or not HAS_NUMBA:
        return
    import numba
    numba.set_num_threads(min(cap, numba.config.NUMBA_NUM_THREADS))


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
