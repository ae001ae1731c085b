"""The jitted and pure-numpy kernel sets must agree to f32 round-off.

Both modules are imported directly so the comparison runs regardless of
which backend the environment selected for the package itself.
"""

import numpy as np
import pytest

from stylewarp import _kernels_numpy as knp
from stylewarp.backend import HAVE_NUMBA

if HAVE_NUMBA:
    from stylewarp import _kernels_numba as knb
else:  # pragma: no cover
    knb = None

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")

ATOL = 1e-6


def test_zncc_matrix_parity(rng):
    fc = rng.standard_normal((20, 12)).astype(np.float32)
    fs = rng.standard_normal((15, 12)).astype(np.float32)
    a = knp.zncc_matrix(fc, fs)
    b = knb.zncc_matrix(fc, fs)
    assert a.shape == b.shape == (20, 15)
    np.testing.assert_allclose(a, b, atol=ATOL)


def test_zncc_matrix_zero_variance_row_parity(rng):
    fc = rng.standard_normal((4, 6)).astype(np.float32)
    fc[2] = 1.25  # constant vector centers to zero
    fs = rng.standard_normal((4, 6)).astype(np.float32)
    np.testing.assert_allclose(
        knp.zncc_matrix(fc, fs), knb.zncc_matrix(fc, fs), atol=ATOL
    )
    assert np.abs(knb.zncc_matrix(fc, fs)[2]).max() <= ATOL


def test_row_softmax_parity(rng):
    m = rng.uniform(-1, 1, (25, 30)).astype(np.float32)
    for tau in (0.01, 0.1, 1.0):
        a = knp.row_softmax(m, tau)
        b = knb.row_softmax(m, tau)
        np.testing.assert_allclose(a, b, atol=ATOL)
        np.testing.assert_allclose(b.sum(axis=1), 1.0, atol=1e-5)


def test_haar_dwt_idwt_parity(rng):
    x = rng.standard_normal((3, 16, 24)).astype(np.float32)
    sa = knp.haar_dwt2(x)
    sb = knb.haar_dwt2(x)
    for band_a, band_b in zip(sa, sb):
        np.testing.assert_allclose(band_a, band_b, atol=ATOL)
    ya = knp.haar_idwt2(sa)
    yb = knb.haar_idwt2(sb)
    np.testing.assert_allclose(ya, yb, atol=ATOL)


def test_cell_stats_parity(rng):
    img = rng.random((32, 24, 3)).astype(np.float32)
    luma = (
        0.299 * img[:, :, 0] + 0.587 * img[:, :, 1] + 0.114 * img[:, :, 2]
    ).astype(np.float32)
    a = knp.cell_stats(img, luma, 8)
    b = knb.cell_stats(img, luma, 8)
    assert a.shape == b.shape == (4, 3, 8)
    np.testing.assert_allclose(a, b, atol=ATOL)


def test_box_down2_parity(rng):
    img = rng.random((18, 22, 3)).astype(np.float32)
    np.testing.assert_allclose(
        knp.box_down2(img), knb.box_down2(img), atol=ATOL
    )


def test_bilinear_up2_parity(rng):
    x = rng.standard_normal((4, 9, 7)).astype(np.float32)
    a = knp.bilinear_up2(x)
    b = knb.bilinear_up2(x)
    assert a.shape == b.shape == (4, 18, 14)
    np.testing.assert_allclose(a, b, atol=ATOL)


def test_backend_flag_reports():
    import stylewarp

    assert stylewarp.backend_name() in ("numba", "numpy")
