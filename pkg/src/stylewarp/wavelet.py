"""Single-level 2D Haar transform and high-frequency conditioning.

The forward transform is a depthwise stride-2 correlation with the four
2x2 outer-product kernels built from L = 1/sqrt(2) [1 1]^T and
H = 1/sqrt(2) [-1 1]^T; the first factor acts along rows (vertical), the
second along columns (horizontal). Haar is orthonormal, so the inverse
reconstructs exactly up to float rounding and energy is conserved.
"""

from dataclasses import dataclass

import numpy as np

from .kernels import bilinear_up2, haar_dwt2, haar_idwt2
from .tensor_io import image_to_chw


@dataclass(frozen=True)
class SubbandSet:
    """The four Haar subbands, each [C, H/2, W/2], in order ll, lh, hl, hh."""

    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __post_init__(self):
        shape = self.ll.shape
        for name in ("lh", "hl", "hh"):
            band = getattr(self, name)
            if band.shape != shape:
                raise ValueError(
                    f"subband {name} shape {band.shape} != ll shape {shape}"
                )

    def stacked(self) -> np.ndarray:
        """[4, C, H/2, W/2] in (ll, lh, hl, hh) order, the NPY layout."""
        return np.stack([self.ll, self.lh, self.hl, self.hh])

    @staticmethod
    def from_stack(s: np.ndarray) -> "SubbandSet":
        if s.ndim != 4 or s.shape[0] != 4:
            raise ValueError(f"expected [4, C, h, w], got shape {s.shape}")
        return SubbandSet(s[0], s[1], s[2], s[3])


def _check_chw(x: np.ndarray, even: bool = True) -> np.ndarray:
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 3:
        raise ValueError(f"expected [C, H, W], got shape {x.shape}")
    if even and (x.shape[1] % 2 or x.shape[2] % 2):
        raise ValueError(
            f"spatial dims must be even, got {x.shape[1]}x{x.shape[2]}; "
            f"pad before transforming"
        )
    return np.ascontiguousarray(x)


def dwt_haar(x: np.ndarray) -> SubbandSet:
    """Forward Haar transform of [C, H, W] with even H and W.

    A constant image of value c maps to ll = 2c with zero high bands; lh
    carries horizontal differences, hl vertical ones.
    """
    x = _check_chw(x)
    s = haar_dwt2(x)
    return SubbandSet.from_stack(s)


def idwt_haar(s: SubbandSet) -> np.ndarray:
    """Inverse Haar transform, [C, h, w] subbands -> [C, 2h, 2w]."""
    return haar_idwt2(np.ascontiguousarray(s.stacked(), dtype=np.float32))


def high_freq_conditioning(image: np.ndarray) -> np.ndarray:
    """High-pass subbands of an image, upsampled back to full size.

    Takes an [H, W, C] image with even dims, concatenates (lh, hl, hh)
    channel-wise and bilinearly upsamples x2 (half-pixel centers), giving
    a [3C, H, W] conditioning tensor. Invariant to global intensity
    shifts since the low band is dropped.
    """
    image = np.asarray(image)
    if image.ndim != 3:
        raise ValueError(f"expected [H, W, C] image, got shape {image.shape}")
    s = dwt_haar(image_to_chw(image.astype(np.float32)))
    high = np.concatenate([s.lh, s.hl, s.hh], axis=0)
    return bilinear_up2(np.ascontiguousarray(high))
