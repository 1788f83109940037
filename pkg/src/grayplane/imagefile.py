"""Reading and writing grayscale images and binary watermarks.

Binary PGM (P5) is handled natively; PNG, TIFF and other formats go
through Pillow.  Colour inputs are reduced to luma
``round(0.299 R + 0.587 G + 0.114 B)``.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .errors import ImageFormatError
from .planes import as_image, as_plane

PGM_SUFFIXES = {".pgm", ".pnm"}
LOSSLESS_SUFFIXES = PGM_SUFFIXES | {".png", ".tif", ".tiff", ".bmp"}
LOSSY_SUFFIXES = {".jpg", ".jpeg", ".jpe", ".jfif", ".webp"}
READABLE_SUFFIXES = LOSSLESS_SUFFIXES | LOSSY_SUFFIXES | {".ppm", ".gif"}


class LossyFormatError(ImageFormatError):
    """Refused to store stego or watermark data in a lossy format."""


def _pnm_tokens(data: bytes, count: int):
    """Split the first ``count`` header tokens off ``data``, skipping comments."""
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("truncated PNM header")
        tokens.append(data[start:pos])
    # exactly one whitespace byte separates the header from raster data
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 2 or data[:1] != b"P":
        raise ImageFormatError(f"{path}: not a PNM file")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError(f"{path}: unsupported PNM type {magic.decode(errors='replace')}")
    (_, w, h, maxval), offset = _pnm_tokens(data, 4)
    try:
        width, height, maxval = int(w), int(h), int(maxval)
    except ValueError as exc:
        raise ImageFormatError(f"{path}: malformed PGM header") from exc
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: bad dimensions {width}x{height}")
    if not 0 < maxval < 256:
        raise ImageFormatError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")

    if magic == b"P5":
        raster = data[offset : offset + width * height]
        if len(raster) != width * height:
            raise ImageFormatError(f"{path}: truncated raster")
        arr = np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()
    else:
        values = data[offset - 1 :].split()
        if len(values) < width * height:
            raise ImageFormatError(f"{path}: truncated raster")
        arr = np.array([int(x) for x in values[: width * height]], dtype=np.int64)
        arr = arr.reshape(height, width)
    if arr.max() > maxval:
        raise ImageFormatError(f"{path}: sample exceeds maxval {maxval}")
    return arr.astype(np.uint8)


def write_pgm(path, image) -> None:
    image = as_image(image)
    h, w = image.shape
    with open(path, "wb") as fh:
        fh.write(b"P5\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(image).tobytes())


def luma(rgb: np.ndarray) -> np.ndarray:
    rgb = rgb.astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def read_image(path) -> np.ndarray:
    """Load any supported image file as an 8-bit grayscale array."""
    path = Path(path)
    if path.suffix.lower() in PGM_SUFFIXES:
        return read_pgm(path)
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("1", "L"):
                return np.array(im.convert("L"), dtype=np.uint8)
            if mode == "P":
                im = im.convert("RGBA" if "transparency" in im.info else "RGB")
                mode = im.mode
            if mode in ("LA",):
                return np.array(im, dtype=np.uint8)[..., 0]
            if mode in ("RGB", "RGBA", "RGBX"):
                return luma(np.array(im, dtype=np.uint8)[..., :3])
            if mode == "CMYK":
                return luma(np.array(im.convert("RGB"), dtype=np.uint8))
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageFormatError(f"{path}: {exc}") from exc
    raise ImageFormatError(f"{path}: unsupported image mode {mode}")


def write_image(path, image) -> None:
    """Write ``image`` losslessly; lossy formats are refused."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in LOSSY_SUFFIXES:
        raise LossyFormatError(
            f"{path.name}: refusing to write a lossy format, it would damage embedded "
            "planes; use .pgm or .png (run 'compress' for lossy experiments)"
        )
    if suffix in PGM_SUFFIXES:
        write_pgm(path, image)
        return
    if suffix not in LOSSLESS_SUFFIXES:
        raise ImageFormatError(f"{path.name}: unknown output format '{suffix}'")
    from PIL import Image

    Image.fromarray(as_image(image), mode="L").save(path)


def read_watermark(path) -> np.ndarray:
    """Load a binary watermark: pixels above 127 are 1, the rest 0."""
    return (read_image(path) > 127).astype(np.uint8)


def write_watermark(path, plane) -> None:
    write_image(path, as_plane(plane) * np.uint8(255))


def is_image_file(path) -> bool:
    return os.path.splitext(str(path))[1].lower() in READABLE_SUFFIXES
