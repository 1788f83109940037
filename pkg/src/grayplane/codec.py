"""Deterministic JPEG-style lossy compression for 8-bit grayscale images.

Only the lossy part of baseline JPEG is reproduced: 8x8 blocks, level shift,
orthonormal 2-D DCT-II, quantization with the IJG-scaled luminance table,
dequantization and inverse DCT.  Entropy coding is lossless and skipped.
"""
from __future__ import annotations

import shlex
import shutil
import subprocess
import tempfile
from pathlib import Path

import numpy as np
from scipy.fft import dctn, idctn

from .errors import CodecError, CodecUnavailableError, QualityError
from .planes import as_image

BLOCK = 8

# fmt: off
BASE_LUMA_TABLE = np.array([
    [16, 11, 10, 16,  24,  40,  51,  61],
    [12, 12, 14, 19,  26,  58,  60,  55],
    [14, 13, 16, 24,  40,  57,  69,  56],
    [14, 17, 22, 29,  51,  87,  80,  62],
    [18, 22, 37, 56,  68, 109, 103,  77],
    [24, 35, 55, 64,  81, 104, 113,  92],
    [49, 64, 78, 87, 103, 121, 120, 101],
    [72, 92, 95, 98, 112, 100, 103,  99],
], dtype=np.int64)
# fmt: on


def check_quality(q) -> int:
    if isinstance(q, (bool, np.bool_)) or not isinstance(q, (int, np.integer)):
        raise QualityError(f"quality must be an integer, got {q!r}")
    q = int(q)
    if not 1 <= q <= 100:
        raise QualityError(f"quality {q} outside [1, 100]")
    return q


def quality_scale(q: int) -> int:
    """IJG scaling percentage: ``5000 / q`` below 50, ``200 - 2q`` otherwise."""
    q = check_quality(q)
    return 5000 // q if q < 50 else 200 - 2 * q


def quant_table(q: int) -> np.ndarray:
    """Luminance quantization table for quality ``q`` (entries in [1, 255])."""
    scale = quality_scale(q)
    table = (BASE_LUMA_TABLE * scale + 50) // 100
    return np.clip(table, 1, 255)


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest, ties away from zero.

    Values are first snapped to 1e-9 so that exact mathematical ties (the DC
    term is a multiple of 1/8) are not decided by floating point noise.
    """
    x = np.round(x, 9)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def _to_blocks(arr: np.ndarray) -> np.ndarray:
    h, w = arr.shape
    return arr.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2)


def _from_blocks(blocks: np.ndarray) -> np.ndarray:
    nh, nw = blocks.shape[:2]
    return blocks.swapaxes(1, 2).reshape(nh * BLOCK, nw * BLOCK)


def compress(image, q: int) -> np.ndarray:
    """Apply the lossy JPEG round trip at quality ``q``.

    Dimensions that are not multiples of 8 are padded by edge replication and
    the result is cropped back to the input size.
    """
    image = as_image(image)
    table = quant_table(q).astype(np.float64)
    h, w = image.shape
    pad_h, pad_w = -h % BLOCK, -w % BLOCK
    padded = np.pad(image, ((0, pad_h), (0, pad_w)), mode="edge").astype(np.float64)

    blocks = _to_blocks(padded - 128.0)
    coeffs = dctn(blocks, type=2, axes=(2, 3), norm="ortho")
    coeffs = round_half_away(coeffs / table) * table
    restored = idctn(coeffs, type=2, axes=(2, 3), norm="ortho")

    out = round_half_away(_from_blocks(restored) + 128.0)
    return np.clip(out, 0, 255).astype(np.uint8)[:h, :w]


def external_roundtrip(image, q: int, codec_command: str) -> np.ndarray:
    """Compress ``image`` with an external codec command.

    ``codec_command`` is a shell-style template with ``{input}``, ``{output}``
    and ``{quality}`` placeholders.  The input is written as binary PGM; the
    command must leave a decodable image (PGM, or anything Pillow reads) at
    ``{output}``.
    """
    from .imagefile import read_image, write_pgm

    image = as_image(image)
    q = check_quality(q)
    template = shlex.split(codec_command)
    if not template:
        raise CodecUnavailableError("empty codec command")
    if shutil.which(template[0]) is None:
        raise CodecUnavailableError(f"codec executable not found: {template[0]}")

    with tempfile.TemporaryDirectory(prefix="grayplane-codec-") as tmp:
        src = Path(tmp) / "input.pgm"
        dst = Path(tmp) / "output.pgm"
        write_pgm(src, image)
        argv = [a.format(input=src, output=dst, quality=q) for a in template]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True)
        except FileNotFoundError as exc:
            raise CodecUnavailableError(str(exc)) from exc
        if proc.returncode != 0:
            raise CodecError(
                f"codec exited with status {proc.returncode}: {proc.stderr.strip()}"
            )
        if not dst.exists():
            raise CodecError("codec produced no output file")
        try:
            result = read_image(dst)
        except Exception as exc:
            raise CodecError(f"could not decode codec output: {exc}") from exc

    if result.shape != image.shape:
        raise CodecError(f"codec changed dimensions {image.shape} -> {result.shape}")
    return result
