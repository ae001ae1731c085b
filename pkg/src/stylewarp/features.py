"""Deterministic multi-scale patch features on a regular grid.

Stands in for a learned feature backbone: each grid cell gets appearance
statistics (means, gradient magnitudes, standard deviations) computed at
several box-downsampled scales. Purely content-driven, no positional
encoding, so symmetric regions are free to match each other during
correspondence.
"""

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import box_down2, cell_stats
from .tensor_io import read_npy, write_npy

# Rec. 601 luma weights
_LUMA = (0.299, 0.587, 0.114)

DEFAULT_STRIDE = 8
DEFAULT_SCALES = 3


@dataclass(frozen=True)
class FeatureMap:
    """Per-cell feature vectors on a [grid_h, grid_w] grid.

    `stride` is the number of image pixels per cell at full resolution;
    `data` has shape [grid_h, grid_w, channels].
    """

    grid_h: int
    grid_w: int
    channels: int
    stride: int
    scales: int
    data: np.ndarray

    def flat(self) -> np.ndarray:
        """Positions flattened row-major: [grid_h * grid_w, channels]."""
        return self.data.reshape(self.grid_h * self.grid_w, self.channels)


def _luma(image: np.ndarray) -> np.ndarray:
    if image.shape[2] == 1:
        return np.ascontiguousarray(image[:, :, 0])
    r, g, b = _LUMA
    out = (
        np.float32(r) * image[:, :, 0]
        + np.float32(g) * image[:, :, 1]
        + np.float32(b) * image[:, :, 2]
    )
    return np.ascontiguousarray(out, dtype=np.float32)


def extract_features(
    image: np.ndarray, stride: int = DEFAULT_STRIDE, scales: int = DEFAULT_SCALES
) -> FeatureMap:
    """Extract per-cell statistics over `scales` pyramid levels.

    Per cell and per level: mean of each color channel, mean absolute
    horizontal and vertical luma gradient, standard deviation of each
    color channel. Level k works on the k-times box-downsampled image
    with cell side stride / 2^k, so every level lands on the same grid.

    The grid is [H // stride, W // stride]; excess right/bottom pixels
    are ignored. Identical inputs give bitwise identical outputs.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] not in (1, 3):
        raise ValueError(f"image must be [H, W, 1|3], got shape {image.shape}")
    if image.dtype != np.float32:
        image = image.astype(np.float32)
    if stride < 1 or scales < 1:
        raise ValueError("stride and scales must be positive")
    if stride % (1 << (scales - 1)) != 0:
        raise ValueError(
            f"stride {stride} must be divisible by 2^(scales-1) = {1 << (scales - 1)}"
        )
    h, w = image.shape[:2]
    if h < stride or w < stride:
        raise ValueError(f"image {h}x{w} smaller than stride {stride}")

    levels = []
    level = image
    cell = stride
    for k in range(scales):
        levels.append(cell_stats(level, _luma(level), cell))
        if k + 1 < scales:
            level = box_down2(level)
            cell //= 2

    data = np.concatenate(levels, axis=2)
    gh, gw, c = data.shape
    return FeatureMap(gh, gw, c, stride, scales, np.ascontiguousarray(data))


def feature_channels(image_channels: int, scales: int) -> int:
    """Channel count produced by extract_features for a given input."""
    return scales * (2 * image_channels + 2)


def save_features(fm: FeatureMap, path) -> None:
    """Write feature data as NPY plus a sidecar JSON with grid metadata."""
    path = Path(path)
    write_npy(fm.data, path)
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps({"stride": fm.stride, "scales": fm.scales}))


def load_features(path) -> FeatureMap:
    path = Path(path)
    data = read_npy(path)
    if data.ndim != 3:
        raise ValueError(f"feature file must be rank 3, got {data.ndim}")
    meta = json.loads(path.with_suffix(".json").read_text())
    gh, gw, c = data.shape
    return FeatureMap(gh, gw, c, int(meta["stride"]), int(meta["scales"]), data)
