"""Image and tensor file I/O with a deliberately narrow, loud contract.

Tensors are float32 numpy arrays of rank <= 4 with all-finite values; images
are float32 arrays shaped [H, W, C] (C = 1 or 3) with values in [0, 1].
Files outside the supported subset are rejected with FormatError instead of
being coerced:

* PNG: 8- or 16-bit gray/RGB (alpha dropped on read, palette rejected);
  writes are always 8-bit with round-half-up quantization.
* NPY: version 1.0, little-endian float32, C order, rank <= 4.
"""

import struct
from pathlib import Path

import cv2
import numpy as np


class FormatError(ValueError):
    """A file violates the supported PNG/NPY subset."""


_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# IHDR color types
_GRAY, _RGB, _PALETTE, _GRAY_ALPHA, _RGBA = 0, 2, 3, 4, 6


def _read_ihdr(path):
    with open(path, "rb") as f:
        head = f.read(33)
    if len(head) < 33 or head[:8] != _PNG_SIGNATURE or head[12:16] != b"IHDR":
        raise FormatError(f"{path}: not a PNG file")
    width, height = struct.unpack(">II", head[16:24])
    bit_depth, color_type = head[24], head[25]
    return width, height, bit_depth, color_type


def read_png(path) -> np.ndarray:
    """Read an 8/16-bit gray or RGB PNG as float32 [H, W, C] in [0, 1].

    An alpha channel is dropped; palette PNGs are rejected because the
    stored samples are indices, not intensities.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"PNG file not found: {path}")
    _, _, bit_depth, color_type = _read_ihdr(path)
    if color_type == _PALETTE:
        raise FormatError(f"{path}: palette PNG (color type 3) is not supported")
    if color_type not in (_GRAY, _RGB, _GRAY_ALPHA, _RGBA):
        raise FormatError(f"{path}: unsupported PNG color type {color_type}")
    if bit_depth not in (8, 16):
        raise FormatError(f"{path}: unsupported PNG bit depth {bit_depth}")

    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FormatError(f"{path}: PNG decode failed")
    scale = np.float32(65535.0 if raw.dtype == np.uint16 else 255.0)

    if raw.ndim == 2:
        img = raw[:, :, None]
    elif raw.shape[2] == 4:  # BGRA; gray+alpha arrives expanded to BGRA
        img = raw[:, :, 2::-1]
        if color_type == _GRAY_ALPHA:
            img = img[:, :, :1]
    else:  # BGR
        img = raw[:, :, ::-1]
    return np.ascontiguousarray(img, dtype=np.float32) / scale


def write_png(image: np.ndarray, path) -> None:
    """Write a [0, 1] float32 image as an 8-bit PNG.

    Quantization is round-half-up: byte = floor(v * 255 + 0.5), clamped.
    """
    validate_image(image)
    byte = np.floor(image * 255.0 + 0.5)
    byte = np.clip(byte, 0, 255).astype(np.uint8)
    if byte.shape[2] == 1:
        byte = byte[:, :, 0]
    else:
        byte = byte[:, :, ::-1]  # RGB -> BGR for the encoder
    path = Path(path)
    if not cv2.imwrite(str(path), byte):
        raise OSError(f"failed to write PNG: {path}")


def read_png_labels(path) -> np.ndarray:
    """Read a single-channel PNG as raw integer labels [H, W] (no scaling)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"PNG file not found: {path}")
    _, _, bit_depth, color_type = _read_ihdr(path)
    if color_type != _GRAY:
        raise FormatError(
            f"{path}: label masks must be single-channel gray PNG "
            f"(got color type {color_type})"
        )
    if bit_depth not in (8, 16):
        raise FormatError(f"{path}: unsupported PNG bit depth {bit_depth}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FormatError(f"{path}: PNG decode failed")
    return raw.astype(np.int32)


def validate_image(image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] not in (1, 3):
        raise ValueError(f"image must be [H, W, 1|3], got shape {image.shape}")
    if image.dtype != np.float32:
        raise ValueError(f"image must be float32, got {image.dtype}")
    if not np.isfinite(image).all():
        raise ValueError("image contains non-finite values")
    lo, hi = float(image.min()), float(image.max())
    if lo < 0.0 or hi > 1.0:
        raise ValueError(f"image values outside [0, 1]: min={lo}, max={hi}")


def validate_tensor(t: np.ndarray) -> None:
    t = np.asarray(t)
    if t.dtype != np.float32:
        raise FormatError(f"tensor dtype must be float32, got {t.dtype}")
    if t.ndim > 4:
        raise FormatError(f"tensor rank must be <= 4, got {t.ndim}")
    if any(d < 1 for d in t.shape):
        raise FormatError(f"tensor dimensions must be positive, got {t.shape}")
    if not np.isfinite(t).all():
        raise FormatError("tensor contains non-finite values")


def write_npy(tensor: np.ndarray, path) -> None:
    """Write a float32 tensor as NPY v1.0, C order. Bit-exact round trip."""
    validate_tensor(tensor)
    arr = np.ascontiguousarray(tensor)
    with open(path, "wb") as f:
        np.lib.format.write_array(f, arr, version=(1, 0))


def read_npy(path) -> np.ndarray:
    """Read an NPY file, enforcing v1.0 / little-endian float32 / C order / rank <= 4."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"NPY file not found: {path}")
    with open(path, "rb") as f:
        try:
            version = np.lib.format.read_magic(f)
        except ValueError as exc:
            raise FormatError(f"{path}: not an NPY file ({exc})") from exc
        if version != (1, 0):
            raise FormatError(f"{path}: NPY version {version} unsupported, need 1.0")
        shape, fortran_order, dtype = np.lib.format.read_array_header_1_0(f)
        if dtype != np.dtype("<f4"):
            raise FormatError(f"{path}: dtype must be little-endian float32, got {dtype}")
        if fortran_order:
            raise FormatError(f"{path}: Fortran-order arrays are not supported")
        if len(shape) > 4:
            raise FormatError(f"{path}: rank must be <= 4, got {len(shape)}")
        if any(d < 1 for d in shape):
            raise FormatError(f"{path}: dimensions must be positive, got {shape}")
        count = int(np.prod(shape)) if shape else 1
        data = np.fromfile(f, dtype="<f4", count=count)
    if data.size != count:
        raise FormatError(f"{path}: truncated data, expected {count} values")
    out = data.reshape(shape)
    if not np.isfinite(out).all():
        raise FormatError(f"{path}: tensor contains non-finite values")
    return out


def image_to_chw(image: np.ndarray) -> np.ndarray:
    """[H, W, C] image -> contiguous [C, H, W] tensor."""
    return np.ascontiguousarray(np.transpose(image, (2, 0, 1)))


def chw_to_image(tensor: np.ndarray) -> np.ndarray:
    """[C, H, W] tensor -> contiguous [H, W, C] image layout (no clipping)."""
    return np.ascontiguousarray(np.transpose(tensor, (1, 2, 0)))
