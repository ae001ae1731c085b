"""Gram and content metrics."""

import numpy as np
import pytest

import stylewarp as sw
from stylewarp.features import FeatureMap


def _fm(data):
    data = np.asarray(data, np.float32)
    gh, gw, c = data.shape
    return FeatureMap(
        grid_h=gh, grid_w=gw, channels=c, stride=8, scales=1, data=data
    )


def test_gram_matrix_hand_case():
    fm = _fm([[[1.0, 2.0], [3.0, 4.0]]])  # two positions, two channels
    g = sw.gram_matrix(fm)
    # flat rows [1,2],[3,4]; G = F^T F / N with N = 2
    want = np.array([[10.0, 14.0], [14.0, 20.0]]) / 2.0
    np.testing.assert_allclose(g, want, atol=1e-6)
    assert g.dtype == np.float32


def test_gram_symmetric_and_psd(rng):
    for _ in range(100):
        fm = _fm(rng.standard_normal((3, 4, 6)).astype(np.float32))
        g = sw.gram_matrix(fm).astype(np.float64)
        np.testing.assert_allclose(g, g.T, atol=1e-6)
        eig = np.linalg.eigvalsh(g)
        assert eig.min() >= -1e-6


def test_gram_loss_self_zero(rng):
    img = rng.random((32, 32, 3)).astype(np.float32)
    assert sw.gram_loss(img, img) == 0.0


def test_gram_loss_symmetric_positive(rng):
    a = rng.random((32, 32, 3)).astype(np.float32)
    b = rng.random((32, 32, 3)).astype(np.float32)
    lab = sw.gram_loss(a, b)
    lba = sw.gram_loss(b, a)
    assert lab > 0.0
    np.testing.assert_allclose(lab, lba, rtol=1e-6)


def test_content_distance_oracle(rng):
    a = rng.random((32, 24, 3)).astype(np.float32)
    b = rng.random((32, 24, 3)).astype(np.float32)
    fa = sw.extract_features(a)
    fb = sw.extract_features(b)
    want = float(
        np.abs(fa.data.astype(np.float64) - fb.data.astype(np.float64)).mean()
    )
    np.testing.assert_allclose(sw.content_distance(a, b), want, rtol=1e-6)
    assert sw.content_distance(a, a) == 0.0


def test_content_distance_grid_mismatch(rng):
    a = rng.random((32, 32, 3)).astype(np.float32)
    b = rng.random((16, 16, 3)).astype(np.float32)
    with pytest.raises(ValueError):
        sw.content_distance(a, b)


def test_gram_loss_detects_palette_change(rng):
    base = rng.random((32, 32, 3)).astype(np.float32) * 0.5
    shifted = np.clip(base * np.array([1.6, 0.6, 1.0], np.float32), 0, 1)
    permuted = np.roll(base, 16, axis=0)
    # reordering content moves the Gram far less than recoloring does
    assert sw.gram_loss(base, shifted) > sw.gram_loss(base, permuted)
