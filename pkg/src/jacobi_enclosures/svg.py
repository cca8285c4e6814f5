"""Minimal SVG renderer for boundary curves: polylines, axes and the
segment [-2, 2]."""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .enclosures import BoundaryCurve

PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
           "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a")


def _fmt(x: float) -> str:
    return f"{x:.5g}"


def render_curves(curves: Sequence[BoundaryCurve], size: int = 640, margin: float = 0.08,
                  title: str | None = None) -> str:
    """SVG document with each curve drawn in all four quadrants.

    The plot is in data coordinates (``y`` flipped) with equal aspect; stroke
    widths are non-scaling so lines stay thin at any zoom.
    """
    pts = [c.full_curve() for c in curves if len(c)]
    allpts = np.concatenate(pts + [np.array([-2.0, 2.0], dtype=complex)])
    R = max(float(np.max(np.abs(allpts.real))), float(np.max(np.abs(allpts.imag))), 2.0)
    R *= 1.0 + margin
    vb = f"{_fmt(-R)} {_fmt(-R)} {_fmt(2 * R)} {_fmt(2 * R)}"
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="{vb}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append('<g transform="scale(1,-1)" fill="none" stroke-linejoin="round">')
    axis = 'stroke="#999999" stroke-width="0.75" vector-effect="non-scaling-stroke"'
    out.append(f'<line x1="{_fmt(-R)}" y1="0" x2="{_fmt(R)}" y2="0" {axis}/>')
    out.append(f'<line x1="0" y1="{_fmt(-R)}" x2="0" y2="{_fmt(R)}" {axis}/>')
    out.append('<line class="band" x1="-2" y1="0" x2="2" y2="0" stroke="#000000" '
               'stroke-width="2.5" vector-effect="non-scaling-stroke"/>')
    for i, c in enumerate(curves):
        colour = PALETTE[i % len(PALETTE)]
        exp = "" if c.exponent is None else f" exponent={c.exponent}"
        out.append(f'<g class="curve" stroke="{colour}" stroke-width="1.25" '
                   f'vector-effect="non-scaling-stroke"><desc>{escape(c.kind)} Q={c.Q}{escape(exp)}</desc>')
        for piece in c.quadrant_pieces():
            coords = " ".join(f"{_fmt(z.real)},{_fmt(z.imag)}" for z in piece)
            out.append(f'<polyline points="{coords}" vector-effect="non-scaling-stroke"/>')
        out.append("</g>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
