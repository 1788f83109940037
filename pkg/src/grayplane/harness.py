"""J2J robustness experiment: embed, compress, extract, measure, aggregate.

For every corpus image ``C``, plane ``V`` and quality ``q`` the pipeline
builds three stego works (bit plane, Gray plane, blind Gray plane with
``K = V + offset``), compresses them together with the cover, and measures
every requested detector's output against the watermark.

Detector identifiers used in the output files:

``m_b``       bit-plane embedding, bit-plane detection at ``V``
``m_gb_t<T>`` Gray-plane embedding, bit-plane detection at ``T`` (one per ``T <= V``)
``m_g``       Gray-plane embedding, two-term detection ``b_V(C_q) ^ b_V(S_Gq)``
``m_g_d1``    Gray-plane embedding, four-term detector D1 on the compressed pair
``m_gc``      blind Gray embedding, detected from the uncompressed stego work
``m_gc_q``    blind Gray embedding, detected from the compressed stego work
"""
from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import stego
from .codec import check_quality, compress, external_roundtrip
from .errors import EmptyCorpusError, GrayplaneError, InvalidSpecError
from .imagefile import is_image_file, read_image, read_watermark
from .metrics import DistortionReport, report
from .planes import as_image, as_plane, check_index

log = logging.getLogger(__name__)

DETECTOR_FAMILIES = ("m_b", "m_gb", "m_g", "m_g_d1", "m_gc", "m_gc_q")
MEASURES = ("euclidean", "psnr", "kl")
HIST_BINS = 20
WATERMARK_RULE = "tile to cover size when smaller, then center-crop when larger"

ROW_FIELDS = ["image", "v", "q", "k", "detector", "t", "euclidean", "psnr", "kl", "error"]
MEAN_FIELDS = ["v", "q", "detector", "n", "euclidean", "psnr", "kl"]
HIST_FIELDS = ["v", "q", "bin", "lo", "hi", "count"]


class CorpusImage(NamedTuple):
    name: str
    pixels: np.ndarray


@dataclass
class Corpus:
    images: list[CorpusImage]
    skipped: list[dict[str, str]] = field(default_factory=list)

    def __len__(self):
        return len(self.images)


@dataclass
class SweepConfig:
    corpus: Path
    watermark: Optional[Path] = None
    pattern: str = "checker"
    pattern_block: int = 16
    planes: tuple[int, ...] = (2, 3, 4)
    qualities: tuple[int, ...] = (70, 80, 90)
    blind_offset: int = 1
    detectors: tuple[str, ...] = DETECTOR_FAMILIES
    output: Optional[Path] = None
    external_cmd: Optional[str] = None
    jobs: int = 1
    figures: bool = True

    def __post_init__(self):
        self.corpus = Path(self.corpus)
        if self.watermark is not None:
            self.watermark = Path(self.watermark)
        if self.output is not None:
            self.output = Path(self.output)
        self.planes = tuple(check_index(v) for v in self.planes)
        self.qualities = tuple(check_quality(q) for q in self.qualities)
        self.detectors = tuple(self.detectors)
        if not self.planes:
            raise InvalidSpecError("plane list is empty")
        if not self.qualities:
            raise InvalidSpecError("quality list is empty")
        unknown = set(self.detectors) - set(DETECTOR_FAMILIES)
        if unknown:
            raise InvalidSpecError(f"unknown detectors: {sorted(unknown)}")
        if self.pattern != "checker":
            raise InvalidSpecError(f"unknown watermark pattern {self.pattern!r}")
        if self.pattern_block < 1:
            raise InvalidSpecError("pattern block size must be positive")
        if self.jobs < 1:
            raise InvalidSpecError("jobs must be at least 1")
        for v in self.planes:
            self.blind_k(v)

    def blind_k(self, v: int) -> int:
        k = v + self.blind_offset
        if k == v or not 1 <= k <= 8:
            raise InvalidSpecError(
                f"blind reference plane K = {v} + {self.blind_offset} = {k} is invalid"
            )
        return k


@dataclass
class Row:
    image: str
    v: int
    q: int
    k: int
    detector: str
    t: Optional[int]
    euclidean: float
    psnr: float
    kl: float
    error: str = ""


@dataclass
class MeanRow:
    v: int
    q: int
    detector: str
    n: int
    euclidean: float
    psnr: float
    kl: float


@dataclass
class MeasureHistogram:
    v: int
    q: int
    detector: str
    measure: str
    edges: np.ndarray
    counts: np.ndarray


@dataclass
class SweepResult:
    rows: list[Row]
    means: list[MeanRow]
    histograms: list[MeasureHistogram]
    metadata: dict

    def mean(self, v: int, q: int, detector: str) -> MeanRow:
        for m in self.means:
            if (m.v, m.q, m.detector) == (v, q, detector):
                return m
        raise KeyError((v, q, detector))

    def values(self, v: int, q: int, detector: str, measure: str) -> dict[str, float]:
        """Per-image values of one measure, keyed by image name."""
        return {
            r.image: getattr(r, measure)
            for r in self.rows
            if (r.v, r.q, r.detector) == (v, q, detector) and not r.error
        }


def expand_detectors(families: Sequence[str], v: int) -> list[str]:
    out = []
    for fam in DETECTOR_FAMILIES:
        if fam not in families:
            continue
        if fam == "m_gb":
            out.extend(f"m_gb_t{t}" for t in range(1, v + 1))
        else:
            out.append(fam)
    return out


# -- corpus and watermark ---------------------------------------------------


def ingest_corpus(path) -> Corpus:
    """Load every image in ``path`` as 8-bit grayscale, ordered by file name."""
    path = Path(path)
    if not path.is_dir():
        raise EmptyCorpusError(f"corpus directory not found: {path}")
    images, skipped = [], []
    for f in sorted(p for p in path.iterdir() if p.is_file()):
        if not is_image_file(f):
            continue
        try:
            images.append(CorpusImage(f.name, read_image(f)))
        except (GrayplaneError, OSError) as exc:
            log.warning("skipping unreadable corpus file %s: %s", f.name, exc)
            skipped.append({"file": f.name, "reason": str(exc)})
    if not images:
        raise EmptyCorpusError(f"no readable images in {path}")
    return Corpus(images, skipped)


def fit_watermark(watermark, shape: tuple[int, int]) -> np.ndarray:
    """Tile ``watermark`` up to ``shape`` if smaller, then center-crop."""
    watermark = as_plane(watermark)
    h, w = shape
    wh, ww = watermark.shape
    reps = (max(1, -(-h // wh)), max(1, -(-w // ww)))
    tiled = np.tile(watermark, reps)
    top = (tiled.shape[0] - h) // 2
    left = (tiled.shape[1] - w) // 2
    return tiled[top : top + h, left : left + w].copy()


def checker_pattern(shape: tuple[int, int], block: int = 16) -> np.ndarray:
    rows, cols = np.indices(shape)
    return (((rows // block) + (cols // block)) % 2).astype(np.uint8)


def make_watermark(config: SweepConfig, shape: tuple[int, int]) -> np.ndarray:
    if config.watermark is not None:
        return fit_watermark(read_watermark(config.watermark), shape)
    return checker_pattern(shape, config.pattern_block)


# -- single run -------------------------------------------------------------


def run_j2j(
    cover,
    watermark,
    v: int,
    q: int,
    k: int,
    detectors: Sequence[str] = DETECTOR_FAMILIES,
    compressor: Callable[[np.ndarray, int], np.ndarray] = compress,
) -> dict[str, DistortionReport]:
    """Run the J2J scheme once and measure each detector against ``watermark``.

    ``watermark`` must already have the cover's dimensions.
    """
    cover = as_image(cover)
    m = as_plane(watermark)
    v, k = check_index(v), check_index(k)
    q = check_quality(q)
    names = expand_detectors(detectors, v)
    if not names:
        return {}

    s_b = stego.embed_bit(cover, m, v)
    s_g = stego.embed_gray(cover, m, v)
    s_blind = stego.embed_gray_blind(cover, m, v, k)
    c_q, s_bq, s_gq, s_blind_q = (compressor(a, q) for a in (cover, s_b, s_g, s_blind))

    extracted = {}
    for name in names:
        if name == "m_b":
            x = stego.detect_d2(c_q, s_bq, v)
        elif name.startswith("m_gb_t"):
            x = stego.detect_d2(c_q, s_gq, int(name[len("m_gb_t") :]))
        elif name == "m_g":
            x = stego.detect_gray_single(c_q, s_gq, v)
        elif name == "m_g_d1":
            x = stego.detect_d1(c_q, s_gq, v)
        elif name == "m_gc":
            x = stego.detect_blind(s_blind, v, k)
        else:
            x = stego.detect_blind(s_blind_q, v, k)
        extracted[name] = x
    return {name: report(m, x) for name, x in extracted.items()}


def _detector_t(name: str) -> Optional[int]:
    return int(name[len("m_gb_t") :]) if name.startswith("m_gb_t") else None


def _image_rows(item: CorpusImage, config: SweepConfig) -> list[Row]:
    compressor = compress
    if config.external_cmd:
        compressor = partial(_external, codec_command=config.external_cmd)
    rows = []
    setup_error = ""
    try:
        m = make_watermark(config, item.pixels.shape)
    except GrayplaneError as exc:
        setup_error = f"{type(exc).__name__}: {exc}"
    for v in config.planes:
        k = config.blind_k(v)
        names = expand_detectors(config.detectors, v)
        for q in config.qualities:
            error = setup_error
            reports = {}
            if not error:
                try:
                    reports = run_j2j(item.pixels, m, v, q, k, config.detectors, compressor)
                except GrayplaneError as exc:
                    error = f"{type(exc).__name__}: {exc}"
            for name in names:
                if error:
                    rows.append(Row(item.name, v, q, k, name, _detector_t(name),
                                    math.nan, math.nan, math.nan, error))
                else:
                    r = reports[name]
                    rows.append(Row(item.name, v, q, k, name, _detector_t(name),
                                    r.euclidean, r.psnr, r.kl))
    return rows


def _external(image, q, codec_command):
    return external_roundtrip(image, q, codec_command)


# -- aggregation ------------------------------------------------------------


def _aggregate(rows: list[Row], config: SweepConfig):
    means, hists = [], []
    for v in config.planes:
        for q in config.qualities:
            for name in expand_detectors(config.detectors, v):
                cell = [r for r in rows if (r.v, r.q, r.detector) == (v, q, name) and not r.error]
                n = len(cell)
                agg = {}
                for measure in MEASURES:
                    vals = np.array([getattr(r, measure) for r in cell], dtype=np.float64)
                    agg[measure] = float(np.mean(vals)) if n else math.nan
                    finite = vals[np.isfinite(vals)]
                    if finite.size:
                        counts, edges = np.histogram(finite, bins=HIST_BINS)
                        hists.append(MeasureHistogram(v, q, name, measure, edges, counts))
                means.append(MeanRow(v, q, name, n, **agg))
    return means, hists


def sweep(config: SweepConfig, corpus: Optional[Corpus] = None) -> SweepResult:
    """Run the full (image, V, q) cross product and aggregate.

    Rows come out sorted by image name, then V, q and detector order, no
    matter how many worker processes were used.
    """
    if corpus is None:
        corpus = ingest_corpus(config.corpus)
    items = sorted(corpus.images, key=lambda it: it.name)
    work = partial(_image_rows, config=config)
    if config.jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            per_image = list(pool.map(work, items))
    else:
        per_image = [work(it) for it in items]
    rows = [r for chunk in per_image for r in chunk]
    means, hists = _aggregate(rows, config)

    metadata = {
        "corpus": [it.name for it in items],
        "skipped": corpus.skipped,
        "watermark": str(config.watermark) if config.watermark else
                     f"{config.pattern} pattern, block {config.pattern_block}",
        "watermark_sizing": WATERMARK_RULE if config.watermark else "generated at cover size",
        "planes": list(config.planes),
        "qualities": list(config.qualities),
        "blind_k": {str(v): config.blind_k(v) for v in config.planes},
        "detectors": list(config.detectors),
        "codec": config.external_cmd or "internal IJG-table DCT quantizer",
        "histogram_bins": HIST_BINS,
        "failed_rows": sum(1 for r in rows if r.error),
    }
    return SweepResult(rows, means, hists, metadata)


# -- output -----------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], records) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for rec in records:
            writer.writerow([_fmt(rec[h]) for h in header])


def emit_results(result: SweepResult, out_dir, *, figures: bool = True) -> list[Path]:
    """Write CSV tables, metadata and (optionally) SVG figures; return the paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    path = out_dir / "rows.csv"
    _write_csv(path, ROW_FIELDS, (asdict(r) for r in result.rows))
    written.append(path)

    path = out_dir / "means.csv"
    _write_csv(path, MEAN_FIELDS, (asdict(m) for m in result.means))
    written.append(path)

    grouped: dict[tuple[str, str], list[MeasureHistogram]] = {}
    for h in result.histograms:
        grouped.setdefault((h.measure, h.detector), []).append(h)
    for (measure, detector), hs in grouped.items():
        path = out_dir / f"hist_{measure}_{detector}.csv"
        records = [
            {"v": h.v, "q": h.q, "bin": i, "lo": float(h.edges[i]),
             "hi": float(h.edges[i + 1]), "count": int(h.counts[i])}
            for h in hs
            for i in range(len(h.counts))
        ]
        _write_csv(path, HIST_FIELDS, records)
        written.append(path)

    path = out_dir / "metadata.json"
    path.write_text(json.dumps(result.metadata, indent=2, sort_keys=True) + "\n")
    written.append(path)

    if figures and result.means:
        from .plotting import render_figures

        written.extend(render_figures(result, out_dir))
    return written


def read_rows(path) -> list[dict]:
    """Load ``rows.csv`` back with numeric columns converted."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            for key in ("v", "q", "k"):
                rec[key] = int(rec[key])
            rec["t"] = int(rec["t"]) if rec["t"] else None
            for key in MEASURES:
                rec[key] = float(rec[key])
            out.append(rec)
    return out


def summary_table(result: SweepResult) -> str:
    lines = [f"{'V':>2} {'q':>3}  {'detector':<10} {'n':>4} {'euclidean':>10} {'PSNR dB':>8} {'KL bits':>8}"]
    for m in result.means:
        lines.append(
            f"{m.v:>2} {m.q:>3}  {m.detector:<10} {m.n:>4} {m.euclidean:>10.4f} "
            f"{m.psnr:>8.2f} {m.kl:>8.4f}"
        )
    return "\n".join(lines)
