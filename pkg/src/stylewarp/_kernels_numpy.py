"""Pure-numpy implementations of the hot kernels.

Reference semantics for the jitted twins in ``_kernels_numba``; every
function here has the same signature, dtype contract, and (to float32
round-off) the same values as its numba counterpart.
"""

import numpy as np

ZNCC_EPS = 1e-8


def zncc_matrix(fc, fs):
    """Pairwise zero-mean normalized cross-correlation of feature rows.

    fc: float32 [n_c, C], fs: float32 [n_s, C]. Each row is centered by its
    own mean across channels and L2-normalized; the denominator is clipped
    below at ZNCC_EPS so constant rows correlate to exactly 0.
    Returns float32 [n_c, n_s] with entries in [-1, 1].
    """
    a = fc.astype(np.float64)
    a -= a.mean(axis=1, keepdims=True)
    b = fs.astype(np.float64)
    b -= b.mean(axis=1, keepdims=True)
    na = np.sqrt(np.einsum("ij,ij->i", a, a))
    nb = np.sqrt(np.einsum("ij,ij->i", b, b))
    denom = np.maximum(na[:, None] * nb[None, :], ZNCC_EPS)
    return ((a @ b.T) / denom).astype(np.float32)


def row_softmax(m, tau):
    """Row-wise softmax of m / tau with max subtraction, float64 output."""
    z = m.astype(np.float64) / tau
    z -= z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def haar_dwt2(x):
    """Single-level 2D Haar analysis of a [C, H, W] float32 tensor.

    Stride-2 correlation with the four orthonormal 2x2 kernels; the first
    filter letter acts along rows (vertical), the second along columns.
    Returns float32 [4, C, H/2, W/2] stacked as (ll, lh, hl, hh).
    """
    a = x[:, 0::2, 0::2]
    b = x[:, 0::2, 1::2]
    c = x[:, 1::2, 0::2]
    d = x[:, 1::2, 1::2]
    out = np.empty((4,) + a.shape, np.float32)
    half = np.float32(0.5)
    out[0] = (a + b + c + d) * half
    out[1] = (-a + b - c + d) * half
    out[2] = (-a - b + c + d) * half
    out[3] = (a - b - c + d) * half
    return out


def haar_idwt2(s):
    """Inverse of haar_dwt2: [4, C, h, w] subbands -> [C, 2h, 2w]."""
    ll, lh, hl, hh = s[0], s[1], s[2], s[3]
    c, h, w = ll.shape
    out = np.empty((c, 2 * h, 2 * w), np.float32)
    half = np.float32(0.5)
    out[:, 0::2, 0::2] = (ll - lh - hl + hh) * half
    out[:, 0::2, 1::2] = (ll + lh - hl - hh) * half
    out[:, 1::2, 0::2] = (ll - lh + hl - hh) * half
    out[:, 1::2, 1::2] = (ll + lh + hl + hh) * half
    return out


def cell_stats(img, luma, cell):
    """Per-cell patch statistics over a square grid of side `cell` pixels.

    img: float32 [H, W, C]; luma: float32 [H, W]; excess right/bottom pixels
    that do not fill a whole cell are ignored. Gradients are forward
    differences of luma with a replicated border (the last row/column
    difference is zero), computed on the cropped region.

    Returns float32 [gh, gw, 2C + 2] laid out as
    [mean_1..mean_C, mean|dx|, mean|dy|, std_1..std_C] (population std).
    """
    h, w, nc = img.shape
    gh, gw = h // cell, w // cell
    hc, wc = gh * cell, gw * cell
    im = img[:hc, :wc].astype(np.float64)
    lu = luma[:hc, :wc].astype(np.float64)

    blocks = im.reshape(gh, cell, gw, cell, nc)
    mean = blocks.mean(axis=(1, 3))
    std = np.sqrt(((blocks - mean[:, None, :, None, :]) ** 2).mean(axis=(1, 3)))

    gx = np.abs(np.diff(lu, axis=1, append=lu[:, -1:]))
    gy = np.abs(np.diff(lu, axis=0, append=lu[-1:, :]))
    gx = gx.reshape(gh, cell, gw, cell).mean(axis=(1, 3))
    gy = gy.reshape(gh, cell, gw, cell).mean(axis=(1, 3))

    out = np.empty((gh, gw, 2 * nc + 2), np.float64)
    out[:, :, :nc] = mean
    out[:, :, nc] = gx
    out[:, :, nc + 1] = gy
    out[:, :, nc + 2 :] = std
    return out.astype(np.float32)


def box_down2(img):
    """2x2 box downsample of a [H, W, C] float32 image (odd edges cropped)."""
    h, w, _ = img.shape
    im = img[: h // 2 * 2, : w // 2 * 2]
    a = im[0::2, 0::2]
    b = im[0::2, 1::2]
    c = im[1::2, 0::2]
    d = im[1::2, 1::2]
    return ((a + b + c + d) * np.float32(0.25)).astype(np.float32)


def bilinear_up2(x):
    """Bilinear 2x upsample of [C, H, W] with half-pixel centers.

    Output pixel i samples input coordinate (i + 0.5)/2 - 0.5, edges clamped
    (align_corners=False convention).
    """
    _, h, w = x.shape

    def axis_iw(n):
        pos = (np.arange(2 * n, dtype=np.float64) + 0.5) / 2.0 - 0.5
        i0 = np.floor(pos).astype(np.int64)
        frac = (pos - i0).astype(np.float32)
        i1 = np.clip(i0 + 1, 0, n - 1)
        i0 = np.clip(i0, 0, n - 1)
        return i0, i1, frac

    r0, r1, wr = axis_iw(h)
    c0, c1, wc = axis_iw(w)
    wr = wr[None, :, None]
    rows = x[:, r0, :] * (1 - wr) + x[:, r1, :] * wr
    wc = wc[None, None, :]
    out = rows[:, :, c0] * (1 - wc) + rows[:, :, c1] * wc
    return out.astype(np.float32)
