"""Haar analysis/synthesis identities and the high-frequency conditioner."""

import numpy as np
import pytest

import stylewarp as sw


def test_perfect_reconstruction(rng):
    for _ in range(20):
        x = rng.standard_normal((3, 16, 16)).astype(np.float32)
        y = sw.idwt_haar(sw.dwt_haar(x))
        assert np.abs(y - x).max() <= 1e-5


def test_energy_conservation(rng):
    x = rng.standard_normal((2, 32, 32)).astype(np.float32)
    s = sw.dwt_haar(x)
    e_in = float((x.astype(np.float64) ** 2).sum())
    e_out = sum(
        float((b.astype(np.float64) ** 2).sum())
        for b in (s.ll, s.lh, s.hl, s.hh)
    )
    assert abs(e_in - e_out) / e_in <= 1e-4


def test_linearity(rng):
    x = rng.standard_normal((1, 8, 8)).astype(np.float32)
    y = rng.standard_normal((1, 8, 8)).astype(np.float32)
    sx, sy = sw.dwt_haar(x), sw.dwt_haar(y)
    s = sw.dwt_haar(2.0 * x + 3.0 * y)
    for band in ("ll", "lh", "hl", "hh"):
        np.testing.assert_allclose(
            getattr(s, band),
            2.0 * getattr(sx, band) + 3.0 * getattr(sy, band),
            atol=1e-5,
        )


def test_constant_image_low_band_only():
    c = 0.37
    x = np.full((3, 8, 8), c, np.float32)
    s = sw.dwt_haar(x)
    np.testing.assert_allclose(s.ll, 2.0 * c, atol=1e-6)
    for band in (s.lh, s.hl, s.hh):
        np.testing.assert_allclose(band, 0.0, atol=1e-6)


def test_two_by_two_block_hand_values():
    a, b, c, d = 1.0, 2.0, 3.0, 4.0
    x = np.array([[[a, b], [c, d]]], np.float32)
    s = sw.dwt_haar(x)
    np.testing.assert_allclose(s.ll[0, 0, 0], (a + b + c + d) / 2.0, atol=1e-6)
    np.testing.assert_allclose(s.lh[0, 0, 0], (-a + b - c + d) / 2.0, atol=1e-6)
    np.testing.assert_allclose(s.hl[0, 0, 0], (-a - b + c + d) / 2.0, atol=1e-6)
    np.testing.assert_allclose(s.hh[0, 0, 0], (a - b - c + d) / 2.0, atol=1e-6)


def test_vertical_step_edge_loads_horizontal_band():
    # step between columns 2 and 3 cuts through the second 2x2 block
    x = np.zeros((1, 8, 8), np.float32)
    x[:, :, 3:] = 1.0
    s = sw.dwt_haar(x)
    assert np.abs(s.lh).max() > 0.0
    np.testing.assert_allclose(s.hl, 0.0, atol=1e-6)
    # away from the step the horizontal band is zero too
    np.testing.assert_allclose(s.lh[:, :, 0], 0.0, atol=1e-6)
    np.testing.assert_allclose(s.lh[:, :, 2:], 0.0, atol=1e-6)


def test_odd_dimensions_rejected():
    with pytest.raises(ValueError):
        sw.dwt_haar(np.zeros((1, 7, 8), np.float32))
    with pytest.raises(ValueError):
        sw.dwt_haar(np.zeros((1, 8, 9), np.float32))
    with pytest.raises(ValueError):
        sw.dwt_haar(np.zeros((8, 8), np.float32))


def test_subband_set_stack_roundtrip(rng):
    x = rng.standard_normal((3, 8, 8)).astype(np.float32)
    s = sw.dwt_haar(x)
    stack = s.stacked()
    assert stack.shape == (4, 3, 4, 4)
    back = sw.SubbandSet.from_stack(stack)
    for band in ("ll", "lh", "hl", "hh"):
        assert np.array_equal(getattr(back, band), getattr(s, band))


def test_subband_set_shape_validation(rng):
    good = rng.standard_normal((1, 4, 4)).astype(np.float32)
    bad = rng.standard_normal((1, 4, 2)).astype(np.float32)
    with pytest.raises(ValueError):
        sw.SubbandSet(ll=good, lh=good, hl=good, hh=bad)


def test_high_freq_conditioning_constant_is_zero():
    img = np.full((16, 16, 3), 0.8, np.float32)
    cond = sw.high_freq_conditioning(img)
    assert cond.shape == (9, 16, 16)
    np.testing.assert_allclose(cond, 0.0, atol=1e-6)


def test_high_freq_conditioning_global_shift_invariant(rng):
    img = rng.random((16, 16, 3)).astype(np.float32) * 0.5
    a = sw.high_freq_conditioning(img)
    b = sw.high_freq_conditioning(img + 0.25)
    np.testing.assert_allclose(a, b, atol=1e-5)


def test_high_freq_conditioning_dims(rng):
    img = rng.random((20, 12, 3)).astype(np.float32)
    cond = sw.high_freq_conditioning(img)
    assert cond.shape == (9, 20, 12)
    gray = rng.random((8, 8, 1)).astype(np.float32)
    assert sw.high_freq_conditioning(gray).shape == (3, 8, 8)


def test_idwt_dwt_roundtrip_from_bands(rng):
    # synthesis then analysis also recovers the bands (orthonormality)
    bands = [rng.standard_normal((2, 4, 4)).astype(np.float32) for _ in range(4)]
    s = sw.SubbandSet(ll=bands[0], lh=bands[1], hl=bands[2], hh=bands[3])
    s2 = sw.dwt_haar(sw.idwt_haar(s))
    for band in ("ll", "lh", "hl", "hh"):
        np.testing.assert_allclose(
            getattr(s2, band), getattr(s, band), atol=1e-5
        )
