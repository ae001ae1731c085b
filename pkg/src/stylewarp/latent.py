"""Statistics transfer and initial-latent construction.

AdaIN aligns per-channel mean and std of a content tensor to a style
tensor. The wavelet blend keeps the style latent's low band and the
AdaIN result's high bands, then inverts the transform, so the initial
latent inherits coarse structure from the style side and detail
statistics from the matched content. Strength interpolation is a plain
affine blend with exact endpoints.
"""

import numpy as np

from .wavelet import SubbandSet, dwt_haar, idwt_haar

# variance floor inside the square root; keeps constant channels finite
ADAIN_EPS = 1e-6


def channel_stats(x: np.ndarray):
    """Per-channel mean and std over spatial dims of [C, H, W].

    std = sqrt(var + eps), so it is strictly positive even for constant
    channels. Returned as float64 [C] vectors.
    """
    x = np.asarray(x)
    if x.ndim != 3:
        raise ValueError(f"expected [C, H, W], got shape {x.shape}")
    flat = x.reshape(x.shape[0], -1).astype(np.float64)
    mean = flat.mean(axis=1)
    std = np.sqrt(flat.var(axis=1) + ADAIN_EPS)
    return mean, std


def adain(content: np.ndarray, style: np.ndarray) -> np.ndarray:
    """Shift content channel statistics onto the style's.

    Spatial dims may differ; only channel counts must match. Output
    channel means equal the style means and stds equal the style stds up
    to the eps floor.
    """
    content = np.asarray(content, dtype=np.float32)
    style = np.asarray(style, dtype=np.float32)
    if content.ndim != 3 or style.ndim != 3:
        raise ValueError("adain expects [C, H, W] tensors")
    if content.shape[0] != style.shape[0]:
        raise ValueError(
            f"channel mismatch: content {content.shape[0]} vs style {style.shape[0]}"
        )
    mu_c, sd_c = channel_stats(content)
    mu_s, sd_s = channel_stats(style)
    scale = (sd_s / sd_c)[:, None, None]
    shift = (mu_s - mu_c * (sd_s / sd_c))[:, None, None]
    out = content.astype(np.float64) * scale + shift
    return out.astype(np.float32)


def adain_wavelet_init(z_c: np.ndarray, z_sw: np.ndarray) -> np.ndarray:
    """Blend latents in the Haar domain for sampling initialization.

    Computes the AdaIN of z_c onto z_sw, then reassembles a latent from
    the low band of z_sw and the high bands of the AdaIN result. With
    z_c == z_sw this is the identity up to reconstruction rounding.
    """
    z_c = np.asarray(z_c, dtype=np.float32)
    z_sw = np.asarray(z_sw, dtype=np.float32)
    if z_c.shape != z_sw.shape:
        raise ValueError(f"shape mismatch: {z_c.shape} vs {z_sw.shape}")
    z_cs = adain(z_c, z_sw)
    bands_sw = dwt_haar(z_sw)
    bands_cs = dwt_haar(z_cs)
    blend = SubbandSet(bands_sw.ll, bands_cs.lh, bands_cs.hl, bands_cs.hh)
    return idwt_haar(blend)


def _affine_blend(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    """gamma * a + (1 - gamma) * b with bitwise-exact endpoints."""
    a = np.asarray(a, dtype=np.float32)
    b = np.asarray(b, dtype=np.float32)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    gamma = float(gamma)
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    if gamma == 0.0:
        return b.copy()
    if gamma == 1.0:
        return a.copy()
    return gamma * a + (1.0 - gamma) * b


def interpolate_strength(z_cs: np.ndarray, z_c: np.ndarray, gamma: float) -> np.ndarray:
    """Stylization-strength blend of the initial latent.

    gamma = 0 returns z_c exactly, gamma = 1 returns z_cs exactly; the
    default strength used by the pipeline is 1.0.
    """
    return _affine_blend(z_cs, z_c, gamma)


def interpolate_conditioning(
    c_ref: np.ndarray, c_input: np.ndarray, gamma: float
) -> np.ndarray:
    """Same affine blend applied to conditioning embeddings."""
    return _affine_blend(c_ref, c_input, gamma)
