"""Kernel backend selection.

The numeric hot paths (correlation, softmax warping, Haar transforms,
feature statistics, resampling) exist twice: a numba ``@njit`` version and a
pure-numpy version with identical signatures and semantics. The active set
is chosen once, at import time, from the ``STYLEWARP_BACKEND`` environment
variable:

    STYLEWARP_BACKEND=numba   force the jitted kernels (error if numba is absent)
    STYLEWARP_BACKEND=numpy   force the pure-numpy fallback
    unset / "auto"            numba when importable, numpy otherwise

Both sets agree to float32 round-off; see tests/test_kernels_parity.py.
"""

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

_requested = os.environ.get("STYLEWARP_BACKEND", "auto").strip().lower()

if _requested in ("", "auto"):
    NUMBA_ENABLED = HAVE_NUMBA
elif _requested in ("numpy", "np"):
    NUMBA_ENABLED = False
elif _requested in ("numba", "jit"):
    if not HAVE_NUMBA:
        raise ImportError(
            "STYLEWARP_BACKEND=numba requested but numba is not importable"
        )
    NUMBA_ENABLED = True
else:
    raise ValueError(
        f"unknown STYLEWARP_BACKEND value {_requested!r}; "
        "expected 'auto', 'numba', or 'numpy'"
    )


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
