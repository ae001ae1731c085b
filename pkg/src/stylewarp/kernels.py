"""Active kernel set, bound once at import per ``backend`` selection."""

from .backend import NUMBA_ENABLED, backend_name

if NUMBA_ENABLED:
    from ._kernels_numba import (
        ZNCC_EPS,
        bilinear_up2,
        box_down2,
        cell_stats,
        haar_dwt2,
        haar_idwt2,
        row_softmax,
        zncc_matrix,
    )
else:
    from ._kernels_numpy import (
        ZNCC_EPS,
        bilinear_up2,
        box_down2,
        cell_stats,
        haar_dwt2,
        haar_idwt2,
        row_softmax,
        zncc_matrix,
    )

__all__ = [
    "ZNCC_EPS",
    "backend_name",
    "bilinear_up2",
    "box_down2",
    "cell_stats",
    "haar_dwt2",
    "haar_idwt2",
    "row_softmax",
    "zncc_matrix",
]
