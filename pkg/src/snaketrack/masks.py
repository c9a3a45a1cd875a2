"""Binary mask utilities: bounding boxes, dilation, IoU, PNG round-trip.

Masks on disk are 8-bit grayscale PNG with 0 = background and 255 = robot;
loading thresholds at 128. Soft masks quantize by rounding value*255 (the
in-memory float array remains the authoritative representation).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError
from scipy import ndimage

from .errors import DimensionError, EmptyMaskError, MaskIOError, ParameterError, UndefinedIoUError
from .validation import check_binary_mask, check_same_shape, check_soft_mask


class BBox(NamedTuple):
    """Inclusive pixel bounding box (u = column, v = row)."""

    u_min: int
    v_min: int
    u_max: int
    v_max: int


def mask_to_box(mask) -> BBox:
    """Axis-aligned bounding box of the set pixels."""
    mask = check_binary_mask(mask)
    rows, cols = np.nonzero(mask)
    if len(rows) == 0:
        raise EmptyMaskError("cannot compute bounding box of an empty mask")
    return BBox(int(cols.min()), int(rows.min()), int(cols.max()), int(rows.max()))


def dilate(mask, k: int):
    """Morphological dilation with a (2k+1)x(2k+1) square element; k=0 is identity."""
    mask = check_binary_mask(mask)
    if k < 0:
        raise ParameterError(f"dilation radius must be >= 0, got {k}")
    if k == 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=np.ones((2 * k + 1, 2 * k + 1), dtype=bool))


def erode(mask, k: int):
    """Morphological erosion with a (2k+1)x(2k+1) square element; k=0 is identity."""
    mask = check_binary_mask(mask)
    if k < 0:
        raise ParameterError(f"erosion radius must be >= 0, got {k}")
    if k == 0:
        return mask.copy()
    return ndimage.binary_erosion(mask, structure=np.ones((2 * k + 1, 2 * k + 1), dtype=bool))


def boundary(mask):
    """Inner boundary: set pixels with at least one unset 4- or 8-neighbour."""
    mask = check_binary_mask(mask)
    return mask & ~ndimage.binary_erosion(mask, structure=np.ones((3, 3), dtype=bool))


def iou(a, b) -> float:
    """Intersection over union of two same-shape binary masks."""
    a = check_binary_mask(a, "mask a")
    b = check_binary_mask(b, "mask b")
    check_same_shape(a, b)
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        raise UndefinedIoUError("IoU of two empty masks is undefined")
    inter = int(np.logical_and(a, b).sum())
    return inter / union


def load_mask(path) -> np.ndarray:
    """Read a grayscale PNG as a boolean mask (threshold at 128)."""
    try:
        with Image.open(path) as img:
            if img.mode not in ("L", "1", "I", "P"):
                raise MaskIOError(f"mask file {path} is not grayscale (mode {img.mode})")
            arr = np.asarray(img.convert("L"))
    except MaskIOError:
        raise
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise MaskIOError(f"cannot read mask file {path}: {exc}") from exc
    return arr >= 128


def save_mask(mask, path) -> None:
    """Write a boolean mask as 8-bit grayscale PNG (0 / 255)."""
    mask = check_binary_mask(mask)
    arr = np.where(mask, np.uint8(255), np.uint8(0))
    try:
        Image.fromarray(arr, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise MaskIOError(f"cannot write mask file {path}: {exc}") from exc


def save_soft_mask(mask, path) -> None:
    """Quantize a soft mask to 8-bit grayscale PNG by rounding value*255."""
    mask = check_soft_mask(mask)
    arr = np.clip(np.rint(mask * 255.0), 0, 255).astype(np.uint8)
    try:
        Image.fromarray(arr, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise MaskIOError(f"cannot write mask file {path}: {exc}") from exc
