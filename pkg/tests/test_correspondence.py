"""Correlation, warping, and mask plumbing against brute-force oracles."""

import numpy as np
import pytest

import stylewarp as sw
from stylewarp.features import FeatureMap


def _fm(data, stride=8, scales=1):
    data = np.asarray(data, np.float32)
    gh, gw, c = data.shape
    return FeatureMap(
        grid_h=gh, grid_w=gw, channels=c, stride=stride, scales=scales, data=data
    )


def _brute_corr(fc, fs):
    """Direct per-pair normalized cross-correlation, f64 throughout."""
    a = fc.flat().astype(np.float64)
    b = fs.flat().astype(np.float64)
    a = a - a.mean(axis=1, keepdims=True)
    b = b - b.mean(axis=1, keepdims=True)
    out = np.zeros((a.shape[0], b.shape[0]))
    for i in range(a.shape[0]):
        for j in range(b.shape[0]):
            denom = np.sqrt((a[i] ** 2).sum()) * np.sqrt((b[j] ** 2).sum())
            out[i, j] = (a[i] * b[j]).sum() / (denom + 1e-8)
    return out


def _rand_fm(rng, gh, gw, c):
    return _fm(rng.standard_normal((gh, gw, c)).astype(np.float32))


def test_two_position_anticorrelated():
    # two positions whose centered features point in opposite directions
    fm = _fm([[[1.0, 0.0]], [[0.0, 1.0]]])
    corr = sw.correlation_matrix(fm, fm)
    np.testing.assert_allclose(corr.data, [[1, -1], [-1, 1]], atol=1e-6)


def test_diagonal_is_row_maximum(rng):
    fm = _rand_fm(rng, 4, 5, 12)
    corr = sw.correlation_matrix(fm, fm)
    for i in range(corr.rows):
        assert corr.data[i].argmax() == i
        np.testing.assert_allclose(corr.data[i, i], 1.0, atol=1e-5)


def test_matches_brute_force_oracle(rng):
    for _ in range(10):
        fc = _rand_fm(rng, 3, 4, 8)
        fs = _rand_fm(rng, 2, 5, 8)
        corr = sw.correlation_matrix(fc, fs)
        np.testing.assert_allclose(corr.data, _brute_corr(fc, fs), atol=1e-5)


def test_scale_and_shift_invariance(rng):
    for _ in range(50):
        fc = _rand_fm(rng, 3, 3, 6)
        fs = _rand_fm(rng, 3, 3, 6)
        base = sw.correlation_matrix(fc, fs).data
        c = float(rng.uniform(0.1, 10.0))
        scaled = sw.correlation_matrix(
            _fm(fc.data * c), _fm(fs.data * c)
        ).data
        np.testing.assert_allclose(scaled, base, atol=1e-5)
        # per-position constant across channels
        shift_c = rng.standard_normal((3, 3, 1)).astype(np.float32)
        shift_s = rng.standard_normal((3, 3, 1)).astype(np.float32)
        shifted = sw.correlation_matrix(
            _fm(fc.data + shift_c), _fm(fs.data + shift_s)
        ).data
        np.testing.assert_allclose(shifted, base, atol=1e-5)


def test_transpose_symmetry_exact(rng):
    fc = _rand_fm(rng, 3, 4, 8)
    fs = _rand_fm(rng, 4, 2, 8)
    ab = sw.correlation_matrix(fc, fs)
    ba = sw.correlation_matrix(fs, fc)
    assert np.array_equal(ab.data.T, ba.data)
    t = ab.transposed()
    assert np.array_equal(t.data, ba.data)
    assert t.content_grid == ab.style_grid


def test_zero_variance_position_correlates_to_zero(rng):
    data = rng.standard_normal((2, 2, 6)).astype(np.float32)
    data[0, 0] = 0.7  # constant feature vector: no variance after centering
    fm = _fm(data)
    corr = sw.correlation_matrix(fm, fm)
    np.testing.assert_allclose(corr.data[0, :], 0.0, atol=1e-6)


def test_entries_bounded(rng):
    fc = _rand_fm(rng, 4, 4, 10)
    fs = _rand_fm(rng, 4, 4, 10)
    corr = sw.correlation_matrix(fc, fs)
    assert corr.data.min() >= -1.0 - 1e-6
    assert corr.data.max() <= 1.0 + 1e-6


def test_channel_mismatch_rejected(rng):
    with pytest.raises(ValueError):
        sw.correlation_matrix(_rand_fm(rng, 2, 2, 4), _rand_fm(rng, 2, 2, 6))


def _rand_corr(rng, n, m):
    data = rng.uniform(-1, 1, (n, m)).astype(np.float32)
    return sw.CorrelationMatrix(
        data=data, content_grid=(1, n), style_grid=(1, m)
    )


def test_warp_is_convex_combination(rng):
    for _ in range(50):
        corr = _rand_corr(rng, 6, 8)
        source = rng.random((1, 8, 3)).astype(np.float32)
        out = sw.warp(corr, source, tau=0.01)
        assert out.shape == (1, 6, 3)
        for ch in range(3):
            lo, hi = source[..., ch].min(), source[..., ch].max()
            assert out[..., ch].min() >= lo - 1e-5
            assert out[..., ch].max() <= hi + 1e-5


def test_warp_sharp_permutation_roundtrip(rng):
    # mutually exclusive max per row and column, sharp temperature
    perm = rng.permutation(6)
    corr_data = -np.ones((6, 6), np.float32)
    corr_data[np.arange(6), perm] = 1.0
    corr = sw.CorrelationMatrix(
        data=corr_data, content_grid=(2, 3), style_grid=(2, 3)
    )
    source = rng.random((2, 3, 3)).astype(np.float32)
    fwd = sw.warp(corr, source, tau=0.001)
    back = sw.warp(corr.transposed(), fwd, tau=0.001)
    np.testing.assert_allclose(back, source, atol=1e-3)


def test_warp_full_resolution_permutation(rng):
    # source at stride x grid resolution: each pixel must travel with its cell
    perm = np.array([2, 0, 3, 1])
    corr_data = -np.ones((4, 4), np.float32)
    corr_data[np.arange(4), perm] = 1.0
    corr = sw.CorrelationMatrix(
        data=corr_data, content_grid=(2, 2), style_grid=(2, 2)
    )
    stride = 4
    source = rng.random((2 * stride, 2 * stride, 3)).astype(np.float32)
    out = sw.warp(corr, source, tau=0.001)
    assert out.shape == source.shape
    patches = source.reshape(2, stride, 2, stride, 3)
    flat = patches.transpose(0, 2, 1, 3, 4).reshape(4, stride, stride, 3)
    want = flat[perm].reshape(2, 2, stride, stride, 3)
    want = want.transpose(0, 2, 1, 3, 4).reshape(2 * stride, 2 * stride, 3)
    np.testing.assert_allclose(out, want, atol=1e-3)


def test_warp_rejects_bad_tau(rng):
    corr = _rand_corr(rng, 2, 2)
    src = rng.random((1, 2, 3)).astype(np.float32)
    with pytest.raises(ValueError):
        sw.warp(corr, src, tau=0.0)
    with pytest.raises(ValueError):
        sw.warp(corr, src, tau=-1.0)


def test_warp_rejects_mismatched_source(rng):
    corr = _rand_corr(rng, 2, 3)
    with pytest.raises(ValueError):
        sw.warp(corr, rng.random((2, 2, 3)).astype(np.float32), tau=0.01)


def test_softmax_rows_sum_to_one(rng):
    from stylewarp.correspondence import _softmax_weights

    for _ in range(20):
        corr = _rand_corr(rng, 5, 7)
        w = _softmax_weights(corr, 0.01)
        assert w.min() >= 0.0
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-5)


def test_identity_correlation_cyclic_loss(rng):
    n = 9
    corr_data = (2.0 * np.eye(n) - 1.0).astype(np.float32)
    corr = sw.CorrelationMatrix(
        data=corr_data, content_grid=(3, 3), style_grid=(3, 3)
    )
    style = rng.random((3, 3, 3)).astype(np.float32)
    assert sw.cyclic_warp_loss(style, corr, tau=0.001) <= 1e-4


def test_permutation_cyclic_loss(rng):
    n = 9
    perm = rng.permutation(n)
    corr_data = -np.ones((n, n), np.float32)
    corr_data[np.arange(n), perm] = 1.0
    corr = sw.CorrelationMatrix(
        data=corr_data, content_grid=(3, 3), style_grid=(3, 3)
    )
    style = rng.random((3, 3, 3)).astype(np.float32)
    assert sw.cyclic_warp_loss(style, corr, tau=0.001) <= 1e-4


def test_mask_identity_warp_loss(rng):
    n = 16
    corr_data = (2.0 * np.eye(n) - 1.0).astype(np.float32)
    corr = sw.CorrelationMatrix(
        data=corr_data, content_grid=(4, 4), style_grid=(4, 4)
    )
    labels = rng.integers(0, 3, (4, 4)).astype(np.int32)
    mask = sw.SemanticMask(labels, 3)
    warped = sw.warp_mask(corr, mask, tau=0.001)
    assert sw.mask_warp_loss(mask, warped) <= 1e-4


def test_mask_warp_loss_zero_iff_equal(rng):
    labels = rng.integers(0, 4, (3, 3)).astype(np.int32)
    mask = sw.SemanticMask(labels, 4)
    oh = sw.one_hot(mask)
    assert sw.mask_warp_loss(mask, oh) == 0.0
    other = oh.copy()
    other[0] = np.roll(other[0], 1)
    if not np.array_equal(other, oh):
        assert sw.mask_warp_loss(mask, other) > 0.0


def test_warp_mask_downsamples_full_resolution_mask(rng):
    corr_data = (2.0 * np.eye(4) - 1.0).astype(np.float32)
    corr = sw.CorrelationMatrix(
        data=corr_data, content_grid=(2, 2), style_grid=(2, 2)
    )
    labels = np.zeros((16, 16), np.int32)
    labels[:, 8:] = 1  # right half label 1 at full resolution
    warped = sw.warp_mask(corr, sw.SemanticMask(labels, 2), tau=0.001)
    want = sw.one_hot(sw.SemanticMask(np.array([[0, 1], [0, 1]], np.int32), 2))
    np.testing.assert_allclose(warped, want, atol=1e-4)


def test_one_hot_layout():
    mask = sw.SemanticMask(np.array([[0, 2], [1, 1]], np.int32), 3)
    oh = sw.one_hot(mask)
    assert oh.shape == (4, 3)
    np.testing.assert_array_equal(
        oh, [[1, 0, 0], [0, 0, 1], [0, 1, 0], [0, 1, 0]]
    )


def test_downsample_mask_majority_and_ties():
    labels = np.array(
        [
            [0, 0, 1, 1],
            [0, 2, 1, 1],
            [3, 3, 4, 5],
            [3, 2, 5, 4],
        ],
        np.int32,
    )
    mask = sw.SemanticMask(labels, 6)
    small = sw.downsample_mask(mask, 2, 2)
    # top-left: three 0s one 2 -> 0; top-right: all 1 -> 1
    # bottom-left: three 3s one 2 -> 3; bottom-right: 4,5,5,4 tie -> 4
    np.testing.assert_array_equal(small.labels, [[0, 1], [3, 4]])
    assert small.num_classes == 6


def test_semantic_mask_validation():
    with pytest.raises(ValueError):
        sw.SemanticMask(np.array([[0, 5]], np.int32), 3)  # label out of range
    with pytest.raises(ValueError):
        sw.SemanticMask(np.array([[-1, 0]], np.int32), 3)
    with pytest.raises(ValueError):
        sw.SemanticMask(np.zeros((2, 2, 2), np.int32), 3)  # wrong rank


def test_similarity_map_highlights_row_max(rng):
    corr = _rand_corr(rng, 3, 4)
    corr.data[1, 2] = 2.0  # unambiguous maximum
    sim = sw.similarity_map(corr, query=1, stride=8)
    assert sim.shape == (8, 32, 1)
    assert sim.max() == 1.0
    block = sim[:, 16:24, 0]
    assert np.all(block == 1.0)


def test_similarity_map_constant_row_is_half():
    corr = sw.CorrelationMatrix(
        data=np.full((2, 6), 0.3, np.float32),
        content_grid=(1, 2),
        style_grid=(2, 3),
    )
    sim = sw.similarity_map(corr, query=0, stride=4)
    assert sim.shape == (8, 12, 1)
    assert np.all(sim == 0.5)


def test_similarity_map_self_query(rng):
    fm = _rand_fm(rng, 3, 3, 10)
    corr = sw.correlation_matrix(fm, fm)
    sim = sw.similarity_map(corr, query=4, stride=2)
    # query cell (1,1) is the brightest block
    assert np.all(sim[2:4, 2:4, 0] == 1.0)


def test_similarity_map_query_range(rng):
    corr = _rand_corr(rng, 2, 2)
    with pytest.raises(ValueError):
        sw.similarity_map(corr, query=2)
    with pytest.raises(ValueError):
        sw.similarity_map(corr, query=-1)


def test_cyclic_loss_on_bundled_pair(input_image, reference_image):
    fc = sw.extract_features(input_image)
    fs = sw.extract_features(reference_image)
    corr = sw.correlation_matrix(fc, fs)
    loss = sw.cyclic_warp_loss(reference_image, corr, tau=0.01)
    assert 0.0 <= loss < 0.05  # near-bijective correspondence on the pair
