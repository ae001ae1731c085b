"""Dense correspondence between two feature grids and softmax warping.

The correlation matrix holds zero-mean normalized cross-correlations
between every content position and every style position. Warping turns
each row into softmax weights at temperature tau and averages the source,
so every warped value is a convex combination of source values. Mask
warping and cyclic consistency are the evaluable training signals built
on top of the same machinery.
"""

from dataclasses import dataclass

import numpy as np

from .features import FeatureMap, extract_features
from .kernels import row_softmax, zncc_matrix


@dataclass(frozen=True)
class CorrelationMatrix:
    """Pairwise correlations, rows = content positions, cols = style positions.

    Entries lie in [-1, 1] up to float slack; grids record the originating
    feature-map shapes as (h, w).
    """

    data: np.ndarray
    content_grid: tuple
    style_grid: tuple

    @property
    def rows(self) -> int:
        return self.data.shape[0]

    @property
    def cols(self) -> int:
        return self.data.shape[1]

    def transposed(self) -> "CorrelationMatrix":
        return CorrelationMatrix(
            np.ascontiguousarray(self.data.T), self.style_grid, self.content_grid
        )


@dataclass(frozen=True)
class SemanticMask:
    """Integer label map over K classes."""

    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2:
            raise ValueError(f"labels must be [H, W], got shape {labels.shape}")
        if self.num_classes < 1:
            raise ValueError("num_classes must be >= 1")
        if labels.size and (labels.min() < 0 or labels.max() >= self.num_classes):
            raise ValueError(
                f"labels must lie in [0, {self.num_classes}), "
                f"got range [{labels.min()}, {labels.max()}]"
            )

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


def one_hot(mask: SemanticMask) -> np.ndarray:
    """[H*W, K] one-hot rows, each summing to exactly 1."""
    flat = np.asarray(mask.labels).reshape(-1).astype(np.int64)
    out = np.zeros((flat.size, mask.num_classes), np.float32)
    out[np.arange(flat.size), flat] = 1.0
    return out


def downsample_mask(mask: SemanticMask, grid_h: int, grid_w: int) -> SemanticMask:
    """Majority-vote label per grid cell; ties go to the smallest label.

    Cell size is inferred from the mask and grid dims; excess right and
    bottom rows that do not fill a cell are ignored, mirroring the
    feature extractor's crop.
    """
    labels = np.asarray(mask.labels)
    h, w = labels.shape
    ch, cw = h // grid_h, w // grid_w
    if ch < 1 or cw < 1:
        raise ValueError(f"mask {h}x{w} smaller than grid {grid_h}x{grid_w}")
    crop = labels[: grid_h * ch, : grid_w * cw]
    cells = crop.reshape(grid_h, ch, grid_w, cw).transpose(0, 2, 1, 3)
    cells = cells.reshape(grid_h, grid_w, ch * cw)
    # bincount argmax returns the smallest index on ties
    counts = np.apply_along_axis(
        lambda v: np.bincount(v, minlength=mask.num_classes), 2, cells
    )
    voted = counts.argmax(axis=2).astype(labels.dtype)
    return SemanticMask(voted, mask.num_classes)


def correlation_matrix(fc: FeatureMap, fs: FeatureMap) -> CorrelationMatrix:
    """Zero-mean normalized cross-correlation between all position pairs.

    Each feature vector is centered by its own mean over channels before
    the cosine similarity; positions with zero variance correlate to 0 by
    the epsilon-guard convention.
    """
    if fc.channels != fs.channels:
        raise ValueError(
            f"channel mismatch: content {fc.channels} vs style {fs.channels}"
        )
    m = zncc_matrix(fc.flat(), fs.flat())
    return CorrelationMatrix(m, (fc.grid_h, fc.grid_w), (fs.grid_h, fs.grid_w))


def _softmax_weights(corr: CorrelationMatrix, tau: float) -> np.ndarray:
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return row_softmax(corr.data, tau)


def warp(corr: CorrelationMatrix, source: np.ndarray, tau: float = 0.01) -> np.ndarray:
    """Softmax-weighted average of source positions per content position.

    Grid mode: source is [h_s, w_s] or [h_s, w_s, C] on the style grid and
    the result lives on the content grid. Full-res mode: source dims are an
    integer multiple `stride` of the style grid; each output pixel inherits
    the softmax row of its containing cell and source cells are whole
    stride x stride patches at the matching intra-patch offset, so the
    weighted-average form is preserved patchwise.
    """
    source = np.asarray(source, dtype=np.float32)
    gh_s, gw_s = corr.style_grid
    gh_c, gw_c = corr.content_grid
    squeeze = source.ndim == 2
    if squeeze:
        source = source[:, :, None]
    if source.ndim != 3:
        raise ValueError(f"source must be rank 2 or 3, got shape {source.shape}")
    h, w, ch = source.shape

    weights = _softmax_weights(corr, tau)

    if (h, w) == (gh_s, gw_s):
        out = weights @ source.reshape(gh_s * gw_s, ch)
        out = out.reshape(gh_c, gw_c, ch)
    else:
        if h % gh_s or w % gw_s or h // gh_s != w // gw_s:
            raise ValueError(
                f"source {h}x{w} is neither the style grid {gh_s}x{gw_s} "
                f"nor an integer multiple of it"
            )
        stride = h // gh_s
        patches = source.reshape(gh_s, stride, gw_s, stride, ch)
        patches = patches.transpose(0, 2, 1, 3, 4).reshape(
            gh_s * gw_s, stride * stride * ch
        )
        warped = weights @ patches
        warped = warped.reshape(gh_c, gw_c, stride, stride, ch)
        out = warped.transpose(0, 2, 1, 3, 4).reshape(
            gh_c * stride, gw_c * stride, ch
        )
    out = np.ascontiguousarray(out, dtype=np.float32)
    return out[:, :, 0] if squeeze else out


def warp_mask(
    corr: CorrelationMatrix, mask: SemanticMask, tau: float = 0.01
) -> np.ndarray:
    """Warp a style-space mask onto the content grid as soft one-hot rows.

    The mask is majority-vote downsampled to the style grid first; each
    output row is a convex combination of one-hot rows, so entries are
    nonnegative and rows sum to 1.
    """
    gh_s, gw_s = corr.style_grid
    if (mask.height, mask.width) != (gh_s, gw_s):
        mask = downsample_mask(mask, gh_s, gw_s)
    weights = _softmax_weights(corr, tau)
    return weights @ one_hot(mask)


def mask_warp_loss(mc: SemanticMask, warped_soft: np.ndarray) -> float:
    """Mean L1 between the one-hot content mask and the warped soft mask."""
    oh = one_hot(mc)
    warped_soft = np.asarray(warped_soft, dtype=np.float32)
    if oh.shape != warped_soft.shape:
        raise ValueError(
            f"shape mismatch: one-hot {oh.shape} vs warped {warped_soft.shape}"
        )
    return float(np.abs(oh.astype(np.float64) - warped_soft).mean())


def feature_l1_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Mean L1 over single-pixel toy features (stride 1, single scale).

    Combines per-pixel intensity and forward-difference gradient terms, a
    rough perceptual stand-in that works at any tensor size.
    """
    fa = extract_features(np.atleast_3d(a), stride=1, scales=1).data
    fb = extract_features(np.atleast_3d(b), stride=1, scales=1).data
    if fa.shape != fb.shape:
        raise ValueError(f"shape mismatch: {fa.shape} vs {fb.shape}")
    return float(np.abs(fa.astype(np.float64) - fb).mean())


def cyclic_warp_loss(
    style: np.ndarray,
    corr: CorrelationMatrix,
    tau: float = 0.01,
    distance=feature_l1_distance,
) -> float:
    """Distance between the style tensor and its forward-then-back warp.

    Back-warping uses the transposed correlation matrix, so a correlation
    with one mutually exclusive match per row and column round-trips the
    source and drives the loss to zero.
    """
    forward = warp(corr, style, tau)
    cycled = warp(corr.transposed(), forward, tau)
    return float(distance(style, cycled))


def similarity_map(
    corr: CorrelationMatrix, query: int, stride: int = 8
) -> np.ndarray:
    """Min-max normalized heatmap of one correlation row on the style grid.

    Returns a grayscale image [h*stride, w*stride, 1]; a constant row maps
    to uniform 0.5 by convention.
    """
    if not 0 <= query < corr.rows:
        raise ValueError(f"query {query} out of range [0, {corr.rows})")
    gh_s, gw_s = corr.style_grid
    row = corr.data[query].astype(np.float64).reshape(gh_s, gw_s)
    lo, hi = row.min(), row.max()
    if hi - lo < 1e-12:
        norm = np.full_like(row, 0.5)
    else:
        norm = (row - lo) / (hi - lo)
    up = np.repeat(np.repeat(norm, stride, axis=0), stride, axis=1)
    return np.ascontiguousarray(up[:, :, None], dtype=np.float32)
