"""Distortion measures between a reference watermark and an extracted one.

Inputs are usually binary planes; 8-bit images are accepted as well, in which
case histograms use 256 bins instead of 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ImageError, UndefinedPeakError

PSEUDO_COUNT = 1.0


@dataclass(frozen=True)
class DistortionReport:
    euclidean: float
    psnr: float  # math.inf when the two inputs are identical
    kl: float

    def as_dict(self) -> dict[str, float]:
        return {"euclidean": self.euclidean, "psnr": self.psnr, "kl": self.kl}


@dataclass(frozen=True)
class Histogram:
    """Laplace-smoothed brightness histogram."""

    probabilities: np.ndarray
    counts: np.ndarray
    total: int

    @property
    def bins(self) -> int:
        return len(self.probabilities)


def _pair(m, x):
    m, x = np.asarray(m), np.asarray(x)
    if m.shape != x.shape:
        raise DimensionError(f"dimension mismatch: {m.shape} vs {x.shape}")
    if m.size == 0:
        raise ImageError("empty input")
    return m, x


def _bins_for(*arrays: np.ndarray) -> int:
    if all(((a == 0) | (a == 1)).all() for a in arrays):
        return 2
    for a in arrays:
        if a.min() < 0 or a.max() > 255 or not np.all(np.equal(np.mod(a, 1), 0)):
            raise ImageError("histogram inputs must be binary or 8-bit integer valued")
    return 256


def histogram(values, bins: int | None = None) -> Histogram:
    values = np.asarray(values)
    if bins is None:
        bins = _bins_for(values)
    counts = np.bincount(values.astype(np.int64).ravel(), minlength=bins)[:bins]
    total = int(values.size)
    probs = (counts + PSEUDO_COUNT) / (total + PSEUDO_COUNT * bins)
    return Histogram(probabilities=probs, counts=counts, total=total)


def euclidean(m, x) -> float:
    """Root-mean-square difference of two equally sized arrays."""
    m, x = _pair(m, x)
    diff = m.astype(np.float64) - x.astype(np.float64)
    return float(math.sqrt(np.mean(diff * diff)))


def psnr(m, x) -> float:
    """``20 log10(max|m| / euclidean(m, x))`` in dB; ``inf`` for a perfect match."""
    m, x = _pair(m, x)
    peak = float(np.abs(m.astype(np.float64)).max())
    if peak == 0.0:
        raise UndefinedPeakError("reference is all zero; PSNR peak is undefined")
    e = euclidean(m, x)
    if e == 0.0:
        return math.inf
    return 20.0 * math.log10(peak / e)


def kl_divergence(m, x) -> float:
    """Relative entropy ``Q(m || x)`` of brightness histograms, in bits."""
    m, x = _pair(m, x)
    bins = _bins_for(m, x)
    p = histogram(m, bins).probabilities
    q = histogram(x, bins).probabilities
    value = float(np.sum(p * (np.log2(p) - np.log2(q))))
    # rounding can leave tiny negatives for identical histograms
    return max(value, 0.0)


def report(m, x) -> DistortionReport:
    return DistortionReport(euclidean=euclidean(m, x), psnr=psnr(m, x), kl=kl_divergence(m, x))
