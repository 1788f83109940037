"""Watermark embedding into bit/Gray planes and the matching detectors.

All embedding is XOR of a binary watermark ``m`` (same shape as the cover)
into one plane:

* bit plane:   ``B_v -> B_v ^ m``
* Gray plane:  ``G_v -> G_v ^ m``        (non-blind, needs the cover to detect)
* blind Gray:  ``G_v -> G_k ^ m``        (detectable from the stego work alone)

Embedding into Gray plane ``v`` flips every bit plane ``1..v`` where ``m`` is
set, so the Gray watermark is also readable from any single bit plane
``t <= v`` (detector D2).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidSpecError
from .planes import (
    NUM_PLANES,
    as_image,
    as_plane,
    bitget,
    check_index,
    check_same_shape,
    gray_plane,
    set_gray_plane,
)


class Domain(enum.Enum):
    BIT = "bit"
    GRAY = "gray"


class Mode(enum.Enum):
    NON_BLIND = "nonblind"
    BLIND = "blind"


@dataclass(frozen=True)
class EmbedSpec:
    """Where and how a watermark is embedded."""

    domain: Domain
    mode: Mode
    v: int
    k: Optional[int] = None

    def __post_init__(self):
        check_index(self.v)
        if self.mode is Mode.BLIND:
            if self.domain is not Domain.GRAY:
                raise InvalidSpecError("blind embedding is only defined for Gray planes")
            if self.k is None:
                raise InvalidSpecError("blind embedding needs a reference plane k")
            check_index(self.k)
            if self.k == self.v:
                raise InvalidSpecError(f"reference plane k must differ from v (both {self.v})")
        elif self.k is not None:
            raise InvalidSpecError("reference plane k only applies to blind embedding")

    def embed(self, cover, watermark) -> np.ndarray:
        if self.mode is Mode.BLIND:
            return embed_gray_blind(cover, watermark, self.v, self.k)
        if self.domain is Domain.GRAY:
            return embed_gray(cover, watermark, self.v)
        return embed_bit(cover, watermark, self.v)


@dataclass(frozen=True)
class WatermarkBundle:
    """The four watermarks recovered after the J2J scheme."""

    m_b: np.ndarray
    m_gb: np.ndarray
    m_g: np.ndarray
    m_gc: np.ndarray

    def __post_init__(self):
        check_same_shape(self.m_b, self.m_gb, self.m_g, self.m_gc)

    def as_dict(self) -> dict[str, np.ndarray]:
        return {"m_b": self.m_b, "m_gb": self.m_gb, "m_g": self.m_g, "m_gc": self.m_gc}


def _prepare(cover, watermark):
    cover = as_image(cover)
    watermark = as_plane(watermark)
    check_same_shape(cover, watermark)
    return cover, watermark


def _check_blind_pair(v, k):
    v, k = check_index(v), check_index(k)
    if k == v:
        raise InvalidSpecError(f"reference plane k must differ from v (both {v})")
    return v, k


def embed_bit(cover, watermark, v: int) -> np.ndarray:
    """XOR ``watermark`` into bit plane ``v``; other bit planes untouched."""
    cover, watermark = _prepare(cover, watermark)
    v = check_index(v)
    return cover ^ (watermark << (v - 1))


def embed_gray(cover, watermark, v: int) -> np.ndarray:
    """XOR ``watermark`` into Gray plane ``v`` (non-blind)."""
    cover, watermark = _prepare(cover, watermark)
    v = check_index(v)
    return set_gray_plane(cover, v, gray_plane(cover, v) ^ watermark)


def embed_gray_blind(cover, watermark, v: int, k: int) -> np.ndarray:
    """Replace Gray plane ``v`` with ``G_k ^ watermark``."""
    cover, watermark = _prepare(cover, watermark)
    v, k = _check_blind_pair(v, k)
    return set_gray_plane(cover, v, gray_plane(cover, k) ^ watermark)


def detect_d1(cover, stego, v: int) -> np.ndarray:
    """Non-blind Gray-plane detector: ``b_v(C) ^ b_{v+1}(C) ^ b_v(S) ^ b_{v+1}(S)``."""
    cover, stego = as_image(cover), as_image(stego)
    check_same_shape(cover, stego)
    v = check_index(v)
    return bitget(cover, v) ^ bitget(cover, v + 1) ^ bitget(stego, v) ^ bitget(stego, v + 1)


def detect_d2(cover, stego, t: int) -> np.ndarray:
    """Non-blind bit-plane detector ``b_t(C) ^ b_t(S)``.

    For a Gray-plane stego embedded at ``v`` any ``t <= v`` recovers the
    watermark; ``t > v`` yields zeros.
    """
    cover, stego = as_image(cover), as_image(stego)
    check_same_shape(cover, stego)
    t = check_index(t)
    return bitget(cover, t) ^ bitget(stego, t)


def detect_blind(stego, v: int, k: int) -> np.ndarray:
    """Blind detector ``G_v(S) ^ G_k(S)`` written over bit planes.

    For ``k = v + 1`` the middle terms cancel and this is
    ``b_v(S) ^ b_{v+2}(S)``.
    """
    stego = as_image(stego)
    v, k = _check_blind_pair(v, k)
    return bitget(stego, v) ^ bitget(stego, v + 1) ^ bitget(stego, k) ^ bitget(stego, k + 1)


def detect_gray_single(cover, stego, v: int) -> np.ndarray:
    """Two-term Gray detector ``b_v(C) ^ b_v(S)`` used for ``M_g``.

    Equal to :func:`detect_d1` before compression, since plane ``v + 1`` is
    not touched by embedding; after compression the ``v + 1`` terms no
    longer cancel and the two detectors differ.
    """
    cover, stego = as_image(cover), as_image(stego)
    check_same_shape(cover, stego)
    v = check_index(v)
    return bitget(cover, v) ^ bitget(stego, v)


def extract_bundle(c_q, s_bq, s_gq, s_blind, v: int, t: int, k: int) -> WatermarkBundle:
    """Recover ``M_b, M_gb, M_g, M_gc`` from (possibly compressed) works.

    ``c_q``, ``s_bq`` and ``s_gq`` are the compressed cover, bit-plane stego
    and Gray-plane stego; ``s_blind`` is the blind stego work, compressed or
    not at the caller's choice.
    """
    c_q, s_bq, s_gq, s_blind = (as_image(a) for a in (c_q, s_bq, s_gq, s_blind))
    check_same_shape(c_q, s_bq, s_gq, s_blind)
    v = check_index(v)
    t = check_index(t)
    if t > v:
        raise InvalidSpecError(f"bit plane t={t} must not exceed the embedding plane v={v}")
    return WatermarkBundle(
        m_b=detect_d2(c_q, s_bq, v),
        m_gb=detect_d2(c_q, s_gq, t),
        m_g=detect_gray_single(c_q, s_gq, v),
        m_gc=detect_blind(s_blind, v, k),
    )


def max_perturbation(cover, stego) -> int:
    """Largest absolute per-pixel intensity change between two images."""
    cover, stego = as_image(cover), as_image(stego)
    check_same_shape(cover, stego)
    return int(np.abs(cover.astype(np.int16) - stego.astype(np.int16)).max())


__all__ = [
    "Domain",
    "Mode",
    "EmbedSpec",
    "WatermarkBundle",
    "embed_bit",
    "embed_gray",
    "embed_gray_blind",
    "detect_d1",
    "detect_d2",
    "detect_blind",
    "detect_gray_single",
    "extract_bundle",
    "max_perturbation",
    "NUM_PLANES",
]
