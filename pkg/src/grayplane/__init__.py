"""Watermarking of 8-bit grayscale images through bit planes and Gray planes."""

from .codec import compress, external_roundtrip, quant_table
from .errors import GrayplaneError
from .metrics import DistortionReport, euclidean, kl_divergence, psnr, report
from .planes import (
    bit_compose,
    bit_decompose,
    bitget,
    gray_compose,
    gray_decompose,
    gray_plane,
    set_gray_plane,
    xor_planes,
)
from .stego import (
    EmbedSpec,
    WatermarkBundle,
    detect_blind,
    detect_d1,
    detect_d2,
    embed_bit,
    embed_gray,
    embed_gray_blind,
    extract_bundle,
)

__version__ = "0.1.0"
