"""Numba-jitted twins of the kernels in ``_kernels_numpy``.

Serial @njit only: no prange, no fastmath. Reductions keep a fixed order so
repeated runs are bit-reproducible, which the pipeline promises. Compiled
objects are disk-cached; the first call in a fresh environment pays the JIT
cost once.
"""

import numpy as np
from numba import njit

ZNCC_EPS = 1e-8


@njit(cache=True)
def zncc_matrix(fc, fs):
    n_c, ch = fc.shape
    n_s = fs.shape[0]

    ac = np.empty((n_c, ch), np.float64)
    na = np.empty(n_c, np.float64)
    for i in range(n_c):
        mu = 0.0
        for k in range(ch):
            mu += fc[i, k]
        mu /= ch
        sq = 0.0
        for k in range(ch):
            v = fc[i, k] - mu
            ac[i, k] = v
            sq += v * v
        na[i] = np.sqrt(sq)

    bs = np.empty((n_s, ch), np.float64)
    nb = np.empty(n_s, np.float64)
    for j in range(n_s):
        mu = 0.0
        for k in range(ch):
            mu += fs[j, k]
        mu /= ch
        sq = 0.0
        for k in range(ch):
            v = fs[j, k] - mu
            bs[j, k] = v
            sq += v * v
        nb[j] = np.sqrt(sq)

    out = np.empty((n_c, n_s), np.float32)
    for i in range(n_c):
        for j in range(n_s):
            dot = 0.0
            for k in range(ch):
                dot += ac[i, k] * bs[j, k]
            denom = na[i] * nb[j]
            if denom < ZNCC_EPS:
                denom = ZNCC_EPS
            out[i, j] = dot / denom
    return out


@njit(cache=True)
def row_softmax(m, tau):
    n, k = m.shape
    out = np.empty((n, k), np.float64)
    for i in range(n):
        mx = m[i, 0] / tau
        for j in range(1, k):
            v = m[i, j] / tau
            if v > mx:
                mx = v
        s = 0.0
        for j in range(k):
            e = np.exp(m[i, j] / tau - mx)
            out[i, j] = e
            s += e
        for j in range(k):
            out[i, j] /= s
    return out


@njit(cache=True)
def haar_dwt2(x):
    c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    out = np.empty((4, c, h2, w2), np.float32)
    half = np.float32(0.5)
    for ch in range(c):
        for i in range(h2):
            for j in range(w2):
                a = x[ch, 2 * i, 2 * j]
                b = x[ch, 2 * i, 2 * j + 1]
                cc = x[ch, 2 * i + 1, 2 * j]
                d = x[ch, 2 * i + 1, 2 * j + 1]
                out[0, ch, i, j] = (a + b + cc + d) * half
                out[1, ch, i, j] = (-a + b - cc + d) * half
                out[2, ch, i, j] = (-a - b + cc + d) * half
                out[3, ch, i, j] = (a - b - cc + d) * half
    return out


@njit(cache=True)
def haar_idwt2(s):
    c, h, w = s.shape[1], s.shape[2], s.shape[3]
    out = np.empty((c, 2 * h, 2 * w), np.float32)
    half = np.float32(0.5)
    for ch in range(c):
        for i in range(h):
            for j in range(w):
                ll = s[0, ch, i, j]
                lh = s[1, ch, i, j]
                hl = s[2, ch, i, j]
                hh = s[3, ch, i, j]
                out[ch, 2 * i, 2 * j] = (ll - lh - hl + hh) * half
                out[ch, 2 * i, 2 * j + 1] = (ll + lh - hl - hh) * half
                out[ch, 2 * i + 1, 2 * j] = (ll - lh + hl - hh) * half
                out[ch, 2 * i + 1, 2 * j + 1] = (ll + lh + hl + hh) * half
    return out


@njit(cache=True)
def cell_stats(img, luma, cell):
    h, w, nc = img.shape
    gh, gw = h // cell, w // cell
    hc, wc = gh * cell, gw * cell
    area = cell * cell
    out = np.empty((gh, gw, 2 * nc + 2), np.float32)

    for gi in range(gh):
        for gj in range(gw):
            r0, c0 = gi * cell, gj * cell
            for ch in range(nc):
                mu = 0.0
                for i in range(cell):
                    for j in range(cell):
                        mu += img[r0 + i, c0 + j, ch]
                mu /= area
                sq = 0.0
                for i in range(cell):
                    for j in range(cell):
                        v = img[r0 + i, c0 + j, ch] - mu
                        sq += v * v
                out[gi, gj, ch] = mu
                out[gi, gj, nc + 2 + ch] = np.sqrt(sq / area)

            gx = 0.0
            gy = 0.0
            for i in range(cell):
                for j in range(cell):
                    y, x = r0 + i, c0 + j
                    v = luma[y, x]
                    # replicated border: difference past the cropped edge is 0
                    if x + 1 < wc:
                        gx += abs(luma[y, x + 1] - v)
                    if y + 1 < hc:
                        gy += abs(luma[y + 1, x] - v)
            out[gi, gj, nc] = gx / area
            out[gi, gj, nc + 1] = gy / area
    return out


@njit(cache=True)
def box_down2(img):
    h, w, nc = img.shape
    h2, w2 = h // 2, w // 2
    out = np.empty((h2, w2, nc), np.float32)
    q = np.float32(0.25)
    for i in range(h2):
        for j in range(w2):
            for ch in range(nc):
                out[i, j, ch] = (
                    img[2 * i, 2 * j, ch]
                    + img[2 * i, 2 * j + 1, ch]
                    + img[2 * i + 1, 2 * j, ch]
                    + img[2 * i + 1, 2 * j + 1, ch]
                ) * q
    return out


@njit(cache=True)
def bilinear_up2(x):
    c, h, w = x.shape
    out = np.empty((c, 2 * h, 2 * w), np.float32)

    r0 = np.empty(2 * h, np.int64)
    r1 = np.empty(2 * h, np.int64)
    wr = np.empty(2 * h, np.float32)
    for i in range(2 * h):
        pos = (i + 0.5) / 2.0 - 0.5
        f = np.floor(pos)
        wr[i] = np.float32(pos - f)
        lo = int(f)
        hi = lo + 1
        r0[i] = min(max(lo, 0), h - 1)
        r1[i] = min(max(hi, 0), h - 1)

    c0 = np.empty(2 * w, np.int64)
    c1 = np.empty(2 * w, np.int64)
    wc = np.empty(2 * w, np.float32)
    for j in range(2 * w):
        pos = (j + 0.5) / 2.0 - 0.5
        f = np.floor(pos)
        wc[j] = np.float32(pos - f)
        lo = int(f)
        hi = lo + 1
        c0[j] = min(max(lo, 0), w - 1)
        c1[j] = min(max(hi, 0), w - 1)

    one = np.float32(1.0)
    # vertical lerp first, then horizontal: mirrors the numpy twin's op order
    for ch in range(c):
        for i in range(2 * h):
            a, b, fr = r0[i], r1[i], wr[i]
            for j in range(2 * w):
                left = x[ch, a, c0[j]] * (one - fr) + x[ch, b, c0[j]] * fr
                right = x[ch, a, c1[j]] * (one - fr) + x[ch, b, c1[j]] * fr
                out[ch, i, j] = left * (one - wc[j]) + right * wc[j]
    return out
