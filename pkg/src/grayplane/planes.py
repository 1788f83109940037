"""Bit-plane and Gray-plane decomposition of 8-bit grayscale images.

Images are 2-D ``uint8`` arrays.  Planes (bit planes, Gray planes and
watermarks alike) are 2-D ``uint8`` arrays holding only 0 and 1.  Plane
indices run from 1 (least significant) to 8 (most significant).

A virtual ninth bit plane, identically zero, lets ``g_8 = b_8 XOR b_9``
follow the same rule as the other Gray digits.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DimensionError, ImageError, PlaneIndexError

NUM_PLANES = 8


def as_image(image) -> np.ndarray:
    """Validate ``image`` as an 8-bit grayscale raster and return it as uint8."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ImageError(f"expected a 2-D grayscale image, got shape {arr.shape}")
    if arr.size == 0:
        raise ImageError("image is empty")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ImageError("image values must be integers")
        if arr.min() < 0 or arr.max() > 255:
            raise ImageError("image values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def as_plane(plane) -> np.ndarray:
    """Validate ``plane`` as a binary raster and return it as uint8."""
    arr = np.asarray(plane)
    if arr.ndim != 2:
        raise ImageError(f"expected a 2-D binary plane, got shape {arr.shape}")
    if arr.dtype == np.bool_:
        return arr.astype(np.uint8)
    if not np.all((arr == 0) | (arr == 1)):
        raise ImageError("binary plane values must be 0 or 1")
    return arr.astype(np.uint8, copy=False)


def check_index(v, *, upper: int = NUM_PLANES) -> int:
    if isinstance(v, (bool, np.bool_)) or not isinstance(v, (int, np.integer)):
        raise PlaneIndexError(f"plane index must be an integer, got {v!r}")
    v = int(v)
    if not 1 <= v <= upper:
        raise PlaneIndexError(f"plane index {v} outside [1, {upper}]")
    return v


def check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(shapes)}")


def bitget(image, v: int) -> np.ndarray:
    """Return bit plane ``v`` (weight ``2**(v-1)``); ``v = 9`` gives zeros."""
    image = as_image(image)
    v = check_index(v, upper=NUM_PLANES + 1)
    if v == NUM_PLANES + 1:
        return np.zeros_like(image)
    return (image >> (v - 1)) & 1


def gray_plane(image, v: int) -> np.ndarray:
    """Gray digit ``g_v = b_v XOR b_{v+1}`` for every pixel."""
    v = check_index(v)
    return bitget(image, v) ^ bitget(image, v + 1)


def gray_decompose(image) -> list[np.ndarray]:
    """Return the Gray planes ``[G_1, ..., G_8]``."""
    image = as_image(image)
    return [gray_plane(image, v) for v in range(1, NUM_PLANES + 1)]


def bit_decompose(image) -> list[np.ndarray]:
    """Return the bit planes ``[B_1, ..., B_8]``."""
    image = as_image(image)
    return [bitget(image, v) for v in range(1, NUM_PLANES + 1)]


def _check_plane_stack(planes: Sequence) -> list[np.ndarray]:
    if len(planes) != NUM_PLANES:
        raise DimensionError(f"expected {NUM_PLANES} planes, got {len(planes)}")
    planes = [as_plane(p) for p in planes]
    check_same_shape(*planes)
    return planes


def bit_compose(planes: Sequence) -> np.ndarray:
    """Weighted sum ``sum 2**(v-1) * B_v`` of bit planes ``[B_1, ..., B_8]``."""
    planes = _check_plane_stack(planes)
    out = np.zeros_like(planes[0])
    for v, p in enumerate(planes, start=1):
        out |= p << (v - 1)
    return out


def gray_compose(planes: Sequence) -> np.ndarray:
    """Rebuild an image from Gray planes ``[G_1, ..., G_8]``.

    Each bit plane is the running XOR of the Gray planes taken from the top:
    ``B_T = G_8 ^ ... ^ G_T``.
    """
    planes = _check_plane_stack(planes)
    out = np.zeros_like(planes[0])
    running = np.zeros_like(planes[0])
    for t in range(NUM_PLANES, 0, -1):
        running = running ^ planes[t - 1]
        out |= running << (t - 1)
    return out


def xor_planes(a, b) -> np.ndarray:
    a, b = as_plane(a), as_plane(b)
    check_same_shape(a, b)
    return a ^ b


def set_gray_plane(image, v: int, plane) -> np.ndarray:
    """Replace Gray plane ``v`` of ``image`` with ``plane``.

    Only bit planes ``1..v`` of the result can differ from the input.
    """
    image = as_image(image)
    v = check_index(v)
    plane = as_plane(plane)
    check_same_shape(image, plane)
    gray = gray_decompose(image)
    gray[v - 1] = plane
    return gray_compose(gray)
