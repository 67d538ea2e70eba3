"""Minimal SVG histograms for spectral distributions.

Output is plain text with fixed number formatting so that identical inputs give
byte-identical documents.
"""
from __future__ import annotations

import json
from typing import Callable, Sequence

import numpy as np

from .spectra import Esd, fd_histogram

WIDTH, HEIGHT, PAD = 640, 400, 40
COLOURS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def figure_esd(series: Sequence, density: Callable | None = None, title: str = "") -> str:
    """Overlay normalised Freedman-Diaconis histograms, one per ``(label, values)`` pair.

    ``density`` (vectorised) is drawn as a reference curve.  Bin edges of each
    series are embedded in a ``<metadata>`` block.
    """
    if not series:
        raise ValueError("figure_esd needs at least one series")
    hists = []
    for label, values in series:
        vals = values.eigenvalues if isinstance(values, Esd) else np.asarray(values, dtype=float)
        heights, edges = fd_histogram(vals, density=True)
        hists.append((str(label), heights, edges))
    lo = min(h[2][0] for h in hists)
    hi = max(h[2][-1] for h in hists)
    xs = np.linspace(lo, hi, 401)
    curve = None if density is None else np.asarray(density(xs), dtype=float)
    top = max(max(h[1].max() for h in hists), 0.0 if curve is None else float(curve.max()))
    top = top if top > 0 else 1.0

    def px(x):
        return PAD + (x - lo) / (hi - lo) * (WIDTH - 2 * PAD)

    def py(y):
        return HEIGHT - PAD - y / top * (HEIGHT - 2 * PAD)

    meta = {label: [float(f"{e:.12g}") for e in edges] for label, _, edges in hists}
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f"<metadata>{json.dumps({'bin_edges': meta}, sort_keys=True)}</metadata>",
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    if title:
        out.append(f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" font-size="14">{title}</text>')
    for k, (label, heights, edges) in enumerate(hists):
        colour = COLOURS[k % len(COLOURS)]
        out.append(f'<g class="series" data-label="{label}" fill="{colour}" fill-opacity="0.35" '
                   f'stroke="{colour}" stroke-width="0.5">')
        for h, a, b in zip(heights, edges[:-1], edges[1:]):
            x0, x1 = px(a), px(b)
            out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(py(h))}" width="{_fmt(max(x1 - x0, 0.5))}" '
                       f'height="{_fmt(py(0) - py(h))}"/>')
        out.append("</g>")
        out.append(f'<text x="{WIDTH - PAD - 120}" y="{PAD + 16 * k}" font-size="12" '
                   f'fill="{colour}">{label}</text>')
    if curve is not None:
        pts = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in zip(xs, curve))
        out.append(f'<polyline class="reference" fill="none" stroke="black" stroke-width="1.5" '
                   f'points="{pts}"/>')
    out.append(f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" y2="{HEIGHT - PAD}" '
               f'stroke="black"/>')
    out.append(f'<text x="{PAD}" y="{HEIGHT - 10}" font-size="11">{_fmt(lo)}</text>')
    out.append(f'<text x="{WIDTH - PAD}" y="{HEIGHT - 10}" font-size="11" '
               f'text-anchor="end">{_fmt(hi)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
