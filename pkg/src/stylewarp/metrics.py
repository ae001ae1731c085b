"""Desk-scale evaluation functionals.

Gram loss measures style-statistics agreement through second moments of
the toy features; content distance is a mean L1 over the same features.
Absolute values are not comparable to metrics built on pretrained
backbones; ordering behavior on controlled inputs is the contract.
"""

import numpy as np

from .features import DEFAULT_SCALES, DEFAULT_STRIDE, FeatureMap, extract_features


def gram_matrix(fm: FeatureMap) -> np.ndarray:
    """G = F^T F / (number of positions) over flattened grid positions.

    Symmetric positive semidefinite by construction; returned as
    float32 [C, C].
    """
    flat = fm.flat().astype(np.float64)
    if flat.shape[0] == 0:
        raise ValueError("feature map has no positions")
    g = flat.T @ flat / flat.shape[0]
    return g.astype(np.float32)


def gram_loss(
    a: np.ndarray,
    b: np.ndarray,
    stride: int = DEFAULT_STRIDE,
    scales: int = DEFAULT_SCALES,
) -> float:
    """Mean squared difference between the two images' Gram matrices."""
    ga = gram_matrix(extract_features(a, stride, scales)).astype(np.float64)
    gb = gram_matrix(extract_features(b, stride, scales)).astype(np.float64)
    return float(((ga - gb) ** 2).mean())


def content_distance(
    a: np.ndarray,
    b: np.ndarray,
    stride: int = DEFAULT_STRIDE,
    scales: int = DEFAULT_SCALES,
) -> float:
    """Mean L1 over multi-scale toy features; zero iff features agree."""
    fa = extract_features(a, stride, scales)
    fb = extract_features(b, stride, scales)
    if fa.data.shape != fb.data.shape:
        raise ValueError(
            f"feature grids differ: {fa.data.shape} vs {fb.data.shape}; "
            f"images must share dimensions"
        )
    return float(np.abs(fa.data.astype(np.float64) - fb.data).mean())
