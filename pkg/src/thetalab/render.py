"""Deterministic SVG drawings of rank-2 scattering diagrams and broken lines.

Coordinates are exact rationals until the final affine map to the
viewport, which is printed with three decimals, so identical input gives
identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence
from xml.sax.saxutils import escape

from .broken_lines import BrokenLine
from .io import _monomial, display_series
from .scattering import ScatteringDiagram


@dataclass(frozen=True)
class Viewport:
    size: int = 640
    margin: int = 40
    radius: Fraction | None = None  # half-width in lattice units; chosen from the data when None


def _fmt(x: Fraction) -> str:
    return f"{float(x):.3f}"


def _clip_ray(origin, direction, R: Fraction):
    """Where ``origin + t direction`` (t > 0) leaves the box ``[-R, R]^2``."""
    ts = []
    for o, d in zip(origin, direction):
        if d > 0:
            ts.append((R - o) / d)
        elif d < 0:
            ts.append((-R - o) / d)
    t = min(ts)
    return tuple(o + t * d for o, d in zip(origin, direction))


def _label_text(coeff, m, n) -> str:
    parts = []
    if coeff != 1:
        parts.append(str(coeff))
    zm = _monomial("z", m)
    zn = _monomial("zeta", n)
    parts.extend(p for p in (zm, zn) if p)
    return " ".join(parts) or "1"


def _auto_radius(lines: Sequence[BrokenLine]) -> Fraction:
    best = Fraction(3)
    for line in lines:
        for dom in line.domains:
            for pt in (dom.start, dom.end):
                if pt is not None:
                    best = max(best, *(abs(Fraction(x)) for x in pt))
    return Fraction(int(best * Fraction(5, 4)) + 1)


def render_svg(
    diagram: ScatteringDiagram,
    lines: Sequence[BrokenLine] = (),
    viewport: Viewport = Viewport(),
) -> str:
    if diagram.rank != 2:
        raise ValueError(f"rendering needs rank 2, got rank {diagram.rank}")
    R = Fraction(viewport.radius) if viewport.radius is not None else _auto_radius(lines)
    half = Fraction(viewport.size, 2)
    scale = (half - viewport.margin) / R

    def px(p):
        return _fmt(half + Fraction(p[0]) * scale), _fmt(half - Fraction(p[1]) * scale)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{viewport.size}" height="{viewport.size}" '
        f'viewBox="0 0 {viewport.size} {viewport.size}" font-family="monospace" font-size="10">',
        '<rect width="100%" height="100%" fill="white"/>',
    ]
    # axes
    for a, b in (((-R, 0), (R, 0)), ((0, -R), (0, R))):
        (x1, y1), (x2, y2) = px(a), px(b)
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="#bbbbbb" stroke-dasharray="4 3"/>')
    # walls
    for ray in diagram.rays():
        end = _clip_ray((Fraction(0), Fraction(0)), ray.direction, R)
        (x1, y1), (x2, y2) = px((0, 0)), px(end)
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="black" stroke-width="1.5"/>')
        lx, ly = px(tuple(Fraction(9, 10) * c for c in end))
        label = escape(display_series(ray.f))
        out.append(f'<text x="{lx}" y="{ly}" fill="black">{label}</text>')
    # broken lines
    for line in lines:
        pts = []
        for dom in line.domains:
            start = dom.start
            if start is None:
                start = _clip_ray(tuple(Fraction(x) for x in dom.end), dom.m, R)
            pts.append(start)
        pts.append(line.domains[-1].end)
        coords = " ".join(",".join(px(p)) for p in pts)
        out.append(f'<polyline points="{coords}" fill="none" stroke="red" stroke-width="1.2"/>')
        for dom, a, b in zip(line.domains, pts, pts[1:]):
            mid = tuple((Fraction(x) + Fraction(y)) / 2 for x, y in zip(a, b))
            mx, my = px(mid)
            text = escape(_label_text(dom.coeff, dom.m, dom.n))
            out.append(f'<text x="{mx}" y="{my}" fill="red">{text}</text>')
    if lines:
        qx, qy = px(lines[0].endpoint)
        out.append(f'<circle cx="{qx}" cy="{qy}" r="3" fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
