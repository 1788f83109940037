"""SVG figures for sweep results.

* ``psnr_vs_quality.svg``  - corpus-mean PSNR against q, one panel per plane
* ``measures_vs_plane.svg`` - corpus-mean euclidean distance and KL against V
* ``hist_<measure>.svg``   - per-image measure distributions for one (V, q) cell
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.5,
    "lines.markersize": 4,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "grayplane",
    "svg.fonttype": "path",
}

LABELS = {
    "m_b": "bit plane (M_b)",
    "m_g": "Gray plane (M_g)",
    "m_g_d1": "Gray plane, D1",
    "m_gc": "Gray blind, uncompressed",
    "m_gc_q": "Gray blind (M_gc)",
}

# per-T bit-plane detectors would swamp the line plots
PLOTTED = ("m_b", "m_g", "m_g_d1", "m_gc_q")


def _label(detector: str) -> str:
    if detector.startswith("m_gb_t"):
        return f"Gray plane, bit {detector[6:]} (M_gb)"
    return LABELS.get(detector, detector)


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_psnr_vs_quality(result, path) -> Path:
    planes = sorted({m.v for m in result.means})
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(planes), figsize=(3.2 * len(planes), 2.8),
                                 squeeze=False, sharey=True)
        for ax, v in zip(axes[0], planes):
            for det in PLOTTED:
                pts = sorted((m.q, m.psnr) for m in result.means
                             if m.v == v and m.detector == det and math.isfinite(m.psnr))
                if pts:
                    qs, ps = zip(*pts)
                    ax.plot(qs, ps, marker="o", label=_label(det))
            ax.set_title(f"V = {v}")
            ax.set_xlabel("quality q")
        axes[0][0].set_ylabel("mean PSNR (dB)")
        axes[0][-1].legend(loc="best")
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_measures_vs_plane(result, path) -> Path:
    qualities = sorted({m.q for m in result.means})
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(2, len(qualities), figsize=(3.2 * len(qualities), 5.0),
                                 squeeze=False, sharex=True)
        for col, q in enumerate(qualities):
            for row, measure in enumerate(("euclidean", "kl")):
                ax = axes[row][col]
                for det in PLOTTED:
                    pts = sorted((m.v, getattr(m, measure)) for m in result.means
                                 if m.q == q and m.detector == det
                                 and math.isfinite(getattr(m, measure)))
                    if pts:
                        vs, ys = zip(*pts)
                        ax.plot(vs, ys, marker="o", label=_label(det))
                if row == 0:
                    ax.set_title(f"q = {q}")
                else:
                    ax.set_xlabel("plane V")
        axes[0][0].set_ylabel("mean euclidean")
        axes[1][0].set_ylabel("mean KL (bits)")
        axes[0][-1].legend(loc="best")
        fig.tight_layout()
        return _save(fig, Path(path))


def _histogram_cell(result):
    """Pick the (V, q) cell to show: largest V, q closest to 80."""
    cells = {(h.v, h.q) for h in result.histograms}
    if not cells:
        return None
    v = max(c[0] for c in cells)
    q = min((c[1] for c in cells if c[0] == v), key=lambda q: (abs(q - 80), -q))
    return v, q


def plot_measure_histograms(result, measure: str, path) -> Path | None:
    cell = _histogram_cell(result)
    if cell is None:
        return None
    v, q = cell
    hists = [h for h in result.histograms
             if (h.v, h.q, h.measure) == (v, q, measure) and h.detector in PLOTTED]
    if not hists:
        return None
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        for h in hists:
            ax.stairs(h.counts, h.edges, label=_label(h.detector), fill=False)
        ax.set_xlabel({"euclidean": "euclidean distance", "kl": "relative entropy (bits)",
                       "psnr": "PSNR (dB)"}[measure])
        ax.set_ylabel("images")
        ax.set_title(f"V = {v}, q = {q}")
        ax.legend(loc="best")
        fig.tight_layout()
        return _save(fig, Path(path))


def render_figures(result, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    written = [
        plot_psnr_vs_quality(result, out_dir / "psnr_vs_quality.svg"),
        plot_measures_vs_plane(result, out_dir / "measures_vs_plane.svg"),
    ]
    for measure in ("euclidean", "kl", "psnr"):
        p = plot_measure_histograms(result, measure, out_dir / f"hist_{measure}.svg")
        if p is not None:
            written.append(p)
    return written
