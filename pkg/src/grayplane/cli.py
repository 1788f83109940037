"""Command line interface.

Exit status: 0 on success, 1 on a domain error (bad image, dimension
mismatch, codec failure, empty corpus), 2 on a usage error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

from . import __version__, stego
from .codec import compress, external_roundtrip
from .errors import DimensionError, GrayplaneError
from .harness import (
    DETECTOR_FAMILIES,
    SweepConfig,
    emit_results,
    fit_watermark,
    summary_table,
    sweep,
)
from .imagefile import (
    LOSSLESS_SUFFIXES,
    read_image,
    read_watermark,
    write_image,
    write_watermark,
)
from .metrics import report
from .planes import bit_decompose, gray_decompose

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("grayplane")


def _plane(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 1 <= v <= 8:
        raise argparse.ArgumentTypeError(f"plane {v} outside 1..8")
    return v


def _quality(text: str) -> int:
    try:
        q = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 1 <= q <= 100:
        raise argparse.ArgumentTypeError(f"quality {q} outside 1..100")
    return q


def _int_list(conv):
    def parse(text: str) -> tuple[int, ...]:
        items = [s for s in text.replace(" ", "").split(",") if s]
        if not items:
            raise argparse.ArgumentTypeError("empty list")
        return tuple(conv(s) for s in items)

    return parse


def _detectors(text: str) -> tuple[str, ...]:
    items = tuple(s for s in text.replace(" ", "").split(",") if s)
    bad = [s for s in items if s not in DETECTOR_FAMILIES]
    if bad:
        raise argparse.ArgumentTypeError(
            f"unknown detector(s) {', '.join(bad)}; choose from {', '.join(DETECTOR_FAMILIES)}"
        )
    return items


def _require_lossless(parser, path: str) -> None:
    suffix = Path(path).suffix.lower()
    if suffix not in LOSSLESS_SUFFIXES:
        parser.error(
            f"output {path!r} must use a lossless format ({', '.join(sorted(LOSSLESS_SUFFIXES))}); "
            "lossy formats would destroy embedded planes, use 'compress' or 'bench' to study them"
        )


def _atomic(write, path, data) -> None:
    """Write via a temporary sibling so a failed run never leaves a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=path.suffix)
    os.close(fd)
    try:
        write(tmp, data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- subcommands ------------------------------------------------------------


def cmd_embed(args, parser) -> int:
    if args.k is not None and not args.blind:
        parser.error("--k only applies with --blind")
    if args.blind:
        if args.k is None:
            parser.error("--blind requires --k")
        if args.domain == "bit":
            parser.error("--blind embedding is only defined for the gray domain")
        if args.k == args.plane:
            parser.error("--k must differ from --plane")
    _require_lossless(parser, args.out)

    cover = read_image(args.cover)
    watermark = read_watermark(args.watermark)
    if watermark.shape != cover.shape:
        if not args.tile:
            raise DimensionError(
                f"watermark {watermark.shape[1]}x{watermark.shape[0]} does not match cover "
                f"{cover.shape[1]}x{cover.shape[0]}; pass --tile to tile/crop it"
            )
        watermark = fit_watermark(watermark, cover.shape)

    if args.blind:
        spec = stego.EmbedSpec(stego.Domain.GRAY, stego.Mode.BLIND, args.plane, args.k)
    else:
        spec = stego.EmbedSpec(stego.Domain(args.domain), stego.Mode.NON_BLIND, args.plane)
    result = spec.embed(cover, watermark)
    _atomic(write_image, args.out, result)
    print(f"max pixel change: {stego.max_perturbation(cover, result)}")
    return EXIT_OK


def cmd_extract(args, parser) -> int:
    if args.mode in ("d1", "d2") and args.cover is None:
        parser.error(f"--mode {args.mode} is non-blind and needs --cover")
    if args.mode == "blind":
        if args.k is None:
            parser.error("--mode blind requires --k")
        if args.k == args.plane:
            parser.error("--k must differ from --plane")
    if args.t is not None and args.mode != "d2":
        parser.error("--t only applies to --mode d2")
    _require_lossless(parser, args.out)

    s = read_image(args.stego)
    if args.mode == "blind":
        m = stego.detect_blind(s, args.plane, args.k)
    else:
        c = read_image(args.cover)
        if args.mode == "d1":
            m = stego.detect_d1(c, s, args.plane)
        else:
            m = stego.detect_d2(c, s, args.t if args.t is not None else args.plane)
    _atomic(write_watermark, args.out, m)
    print(f"recovered {m.shape[1]}x{m.shape[0]} watermark, {int(m.sum())} bits set")
    return EXIT_OK


def cmd_compress(args, parser) -> int:
    _require_lossless(parser, args.out)
    image = read_image(args.input)
    if args.external_cmd:
        result = external_roundtrip(image, args.quality, args.external_cmd)
    else:
        result = compress(image, args.quality)
    _atomic(write_image, args.out, result)
    return EXIT_OK


def cmd_metrics(args, parser) -> int:
    load = read_image if args.gray else read_watermark
    m, x = load(args.reference), load(args.extracted)
    r = report(m, x)
    if args.json:
        psnr = r.psnr if math.isfinite(r.psnr) else "inf"
        print(json.dumps({"euclidean": r.euclidean, "psnr": psnr, "kl": r.kl}))
    else:
        print(f"euclidean  {r.euclidean:.6f}")
        print(f"psnr_db    {r.psnr:.4f}")
        print(f"kl_bits    {r.kl:.6f}")
    return EXIT_OK


def cmd_decompose(args, parser) -> int:
    image = read_image(args.input)
    planes = gray_decompose(image) if args.kind == "gray" else bit_decompose(image)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    prefix = "G" if args.kind == "gray" else "B"
    for v, p in enumerate(planes, start=1):
        _atomic(write_watermark, out / f"{prefix}{v}.{args.format}", p)
    print(f"wrote 8 {args.kind} planes to {out}")
    return EXIT_OK


def load_config(path) -> dict:
    """Read an INI bench config into SweepConfig keyword arguments."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not parser.read(path):
        raise FileNotFoundError(f"config file not found: {path}")
    base = path.parent
    out: dict = {}
    if parser.has_section("bench"):
        sec = parser["bench"]
        for key in ("corpus", "watermark", "output"):
            if key in sec:
                out[key] = base / sec[key]
        if "pattern" in sec:
            out["pattern"] = sec["pattern"]
        if "pattern_block" in sec:
            out["pattern_block"] = sec.getint("pattern_block")
        if "planes" in sec:
            out["planes"] = _int_list(int)(sec["planes"])
        if "qualities" in sec:
            out["qualities"] = _int_list(int)(sec["qualities"])
        if "blind_offset" in sec:
            out["blind_offset"] = sec.getint("blind_offset")
        if "detectors" in sec:
            out["detectors"] = _detectors(sec["detectors"])
        if "jobs" in sec:
            out["jobs"] = sec.getint("jobs")
        if "figures" in sec:
            out["figures"] = sec.getboolean("figures")
    if parser.has_section("codec") and parser["codec"].get("external_cmd"):
        out["external_cmd"] = parser["codec"]["external_cmd"]
    return out


def cmd_bench(args, parser) -> int:
    settings = load_config(args.config) if args.config else {}
    overrides = {
        "corpus": args.corpus,
        "watermark": args.watermark,
        "pattern_block": args.pattern_block,
        "planes": args.planes,
        "qualities": args.qualities,
        "blind_offset": args.blind_offset,
        "detectors": args.detectors,
        "output": args.out,
        "jobs": args.jobs,
        "external_cmd": args.external_cmd,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    if args.no_figures:
        settings["figures"] = False
    if "corpus" not in settings:
        parser.error("bench needs a corpus (--corpus or [bench] corpus in --config)")
    settings.setdefault("output", Path("bench-results"))
    config = SweepConfig(**settings)

    result = sweep(config)
    emit_results(result, config.output, figures=config.figures)
    print(summary_table(result))
    failed = result.metadata["failed_rows"]
    if failed:
        print(f"{failed} measurement(s) failed; see the error column of rows.csv", file=sys.stderr)
    print(f"results written to {config.output}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grayplane",
        description="Bit-plane / Gray-plane watermarking and JPEG robustness benchmarks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="embed a binary watermark into a cover image")
    p.add_argument("cover")
    p.add_argument("watermark", help="binary image; pixels > 127 are ones")
    p.add_argument("out", help="lossless output (.pgm, .png, .tif)")
    p.add_argument("--plane", "-V", type=_plane, required=True)
    p.add_argument("--domain", choices=("bit", "gray"), default="gray")
    p.add_argument("--blind", action="store_true", help="blind Gray embedding G_V <- G_K ^ M")
    p.add_argument("--k", type=_plane, help="reference plane for --blind")
    p.add_argument("--tile", action="store_true", help="tile/crop the watermark to the cover size")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="recover a watermark from a stego image")
    p.add_argument("out")
    p.add_argument("--mode", choices=("d1", "d2", "blind"), required=True)
    p.add_argument("--stego", required=True)
    p.add_argument("--cover", help="original cover, required for d1 and d2")
    p.add_argument("--plane", "-V", type=_plane, required=True)
    p.add_argument("--t", type=_plane, help="bit plane for d2 (default: --plane)")
    p.add_argument("--k", type=_plane, help="reference plane for blind mode")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("compress", help="apply JPEG-style lossy compression")
    p.add_argument("input")
    p.add_argument("out", help="lossless container for the compressed pixels")
    p.add_argument("--quality", "-q", type=_quality, required=True)
    p.add_argument("--external-cmd", help="external codec template with {input} {output} {quality}")
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("metrics", help="distortion between a watermark and an extracted one")
    p.add_argument("reference")
    p.add_argument("extracted")
    p.add_argument("--gray", action="store_true", help="compare as 8-bit images, not binary")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("decompose", help="write the 8 bit or Gray planes of an image")
    p.add_argument("input")
    p.add_argument("outdir")
    p.add_argument("--kind", choices=("gray", "bit"), default="gray")
    p.add_argument("--format", choices=("pgm", "png"), default="pgm")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("bench", help="run the embed/compress/extract sweep over a corpus")
    p.add_argument("--config", help="INI file with [bench] and [codec] sections")
    p.add_argument("--corpus", type=Path)
    p.add_argument("--watermark", type=Path, help="binary watermark file (default: checkerboard)")
    p.add_argument("--pattern-block", type=int, help="checkerboard cell size in pixels")
    p.add_argument("--planes", type=_int_list(_plane), help="e.g. 2,3,4")
    p.add_argument("--qualities", type=_int_list(_quality), help="e.g. 70,80,90")
    p.add_argument("--blind-offset", type=int, help="blind reference plane K = V + offset")
    p.add_argument("--detectors", type=_detectors,
                   help=f"comma list from {','.join(DETECTOR_FAMILIES)}")
    p.add_argument("--out", type=Path, help="output directory (default ./bench-results)")
    p.add_argument("--jobs", type=int)
    p.add_argument("--external-cmd")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args, parser)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    except (GrayplaneError, OSError) as exc:
        print(f"grayplane: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
