"""SVG output: the isometry circles with the family of orbit circles, and gap histograms."""

from __future__ import annotations

from typing import Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .config import GroupConfig
from .orbit import OrbitPoint, enumerate_by_depth

_F = "{:.6f}"


def _num(x: float) -> str:
    s = _F.format(x).rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _meta_comment(meta: Optional[dict]) -> str:
    if not meta:
        return ""
    body = "\n".join(f"  {k}: {v}" for k, v in meta.items())
    return f"<!--\n{escape(body).replace('--', '- -')}\n-->\n"


def circles_svg(cfg: GroupConfig, depth: int = 8, size: int = 800, stroke: float = 0.5,
                points: Optional[Sequence[OrbitPoint]] = None, meta: Optional[dict] = None) -> str:
    """Unit circle, the three isometry circles (clipped to the disk) and ``w(C_I)`` for ``l(w) <= depth``.

    Circles smaller than a tenth of a pixel are skipped.
    """
    if points is None:
        points = enumerate_by_depth(cfg, depth)
    half = size / 2.0
    scale = 0.95 * half

    def xy(z: complex) -> tuple[str, str]:
        # SVG y axis points down
        return _num(half + scale * z.real), _num(half - scale * z.imag)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">\n', _meta_comment(meta),
           '<defs><clipPath id="disk">'
           f'<circle cx="{_num(half)}" cy="{_num(half)}" r="{_num(scale)}"/></clipPath></defs>\n',
           f'<rect width="{size}" height="{size}" fill="white"/>\n',
           f'<circle cx="{_num(half)}" cy="{_num(half)}" r="{_num(scale)}" fill="none" '
           f'stroke="black" stroke-width="{_num(2 * stroke)}"/>\n',
           '<g clip-path="url(#disk)" fill="none" stroke="#1f4e9c" '
           f'stroke-width="{_num(1.5 * stroke)}">\n']
    for c in cfg.circles:
        cx, cy = xy(c.center)
        out.append(f'<circle cx="{cx}" cy="{cy}" r="{_num(scale * c.radius)}"/>\n')
    out.append(f'</g>\n<g fill="none" stroke="#b2182b" stroke-width="{_num(stroke)}">\n')
    for p in points:
        r = scale * p.circle.radius
        if r < 0.1:
            continue
        cx, cy = xy(p.circle.center)
        out.append(f'<circle cx="{cx}" cy="{cy}" r="{_num(r)}"/>\n')
    out.append("</g>\n</svg>\n")
    return "".join(out)


def histogram_svg(edges, density, width: int = 800, height: int = 400, stroke: float = 0.5,
                  s_max: Optional[float] = None, meta: Optional[dict] = None) -> str:
    """Bar chart of a histogram; bins beyond ``s_max`` are dropped."""
    e = np.asarray(edges, float)
    d = np.asarray(density, float)
    if s_max is not None:
        keep = e[1:] <= s_max
        e, d = np.append(e[:-1][keep], e[1:][keep][-1:] if keep.any() else e[:1]), d[keep]
    pad = 40.0
    x0, x1 = float(e[0]), float(e[-1]) if e.size > 1 else float(e[0]) + 1.0
    ymax = float(d.max()) if d.size and d.max() > 0 else 1.0
    sx = (width - 2 * pad) / (x1 - x0)
    sy = (height - 2 * pad) / ymax
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">\n', _meta_comment(meta),
           f'<rect width="{width}" height="{height}" fill="white"/>\n',
           f'<g fill="#9ecae1" stroke="#3182bd" stroke-width="{_num(stroke)}">\n']
    for left, right, v in zip(e[:-1], e[1:], d):
        if v <= 0:
            continue
        h = v * sy
        out.append(f'<rect x="{_num(pad + (left - x0) * sx)}" y="{_num(height - pad - h)}" '
                   f'width="{_num((right - left) * sx)}" height="{_num(h)}"/>\n')
    out.append("</g>\n")
    out.append(f'<line x1="{_num(pad)}" y1="{_num(height - pad)}" x2="{_num(width - pad)}" '
               f'y2="{_num(height - pad)}" stroke="black"/>\n')
    out.append(f'<text x="{_num(pad)}" y="{_num(height - pad / 3)}" font-size="12">{_num(x0)}</text>\n')
    out.append(f'<text x="{_num(width - pad)}" y="{_num(height - pad / 3)}" font-size="12" '
               f'text-anchor="end">{_num(x1)}</text>\n')
    out.append("</svg>\n")
    return "".join(out)
