"""Minimal standalone SVG writers: a trajectory plot and an atlas heat map."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

TAG_COLORS = {"A": "#3b6fb6", "C": "#c8553d", "Undetermined": "#bdbdbd"}


def _header(width, height):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _text(x, y, s, anchor="middle", size=12):
    return f'<text x="{x:.1f}" y="{y:.1f}" font-family="sans-serif" font-size="{size}" text-anchor="{anchor}">{escape(s)}</text>'


def trajectory_svg(traj, title: str = "", width: int = 800, height: int = 450, y_clip: float = 6.0) -> str:
    """Line plot of y(t) with dashed marks at poles and -sqrt(-t/6) overlaid.

    Values are clipped to |y| <= y_clip so the pole spikes stay on the canvas.
    """
    margin = 50
    t_all = traj.t
    t_lo, t_hi = float(t_all.min()), float(t_all.max())
    if t_hi == t_lo:
        t_hi = t_lo + 1.0
    y_lo, y_hi = -y_clip, y_clip

    def px(t):
        return margin + (np.asarray(t) - t_lo) / (t_hi - t_lo) * (width - 2 * margin)

    def py(y):
        yc = np.clip(np.asarray(y), y_lo, y_hi)
        return height - margin - (yc - y_lo) / (y_hi - y_lo) * (height - 2 * margin)

    out = _header(width, height)
    out.append(f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}" '
               'fill="none" stroke="black" stroke-width="1"/>')
    tt = np.linspace(t_lo, min(t_hi, 0.0), 400)
    tt = tt[tt <= 0]
    if len(tt) > 1:
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(tt), py(-np.sqrt(-tt / 6.0))))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#888888" stroke-width="1.5" stroke-dasharray="2,2"/>')
    for t, y, _ in traj.pieces():
        if len(t) < 2:
            continue
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(t), py(y)))
        out.append(f'<polyline points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="1.2"/>')
    for p in traj.poles:
        x = float(px(p.t_p))
        out.append(f'<line x1="{x:.2f}" y1="{margin}" x2="{x:.2f}" y2="{height - margin}" '
                   'stroke="#c8553d" stroke-width="0.8" stroke-dasharray="4,3"/>')
    out.append(_text(width / 2, height - 12, "t"))
    out.append(_text(14, height / 2, "y", anchor="start"))
    out.append(_text(margin, height - margin + 16, f"{t_lo:.4g}"))
    out.append(_text(width - margin, height - margin + 16, f"{t_hi:.4g}"))
    out.append(_text(margin - 6, margin + 4, f"{y_hi:g}", anchor="end"))
    out.append(_text(margin - 6, height - margin + 4, f"{y_lo:g}", anchor="end"))
    if title:
        out.append(_text(width / 2, 24, title, size=14))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def atlas_svg(a_values, b_values, tags, width: int = 700, height: int = 560) -> str:
    """Heat map of verdicts; rows are a (increasing upwards), columns are b."""
    margin_l, margin_r, margin_t, margin_b = 60, 130, 30, 50
    na, nb = len(a_values), len(b_values)
    cw = (width - margin_l - margin_r) / max(nb, 1)
    ch = (height - margin_t - margin_b) / max(na, 1)
    out = _header(width, height)
    for i in range(na):
        for j in range(nb):
            x = margin_l + j * cw
            y = margin_t + (na - 1 - i) * ch
            color = TAG_COLORS.get(tags[i][j], "#000000")
            out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" fill="{color}"/>')
    x0, x1 = margin_l, width - margin_r
    y0, y1 = margin_t, height - margin_b
    out.append(f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{y1 - y0}" fill="none" stroke="black"/>')
    out.append(_text((x0 + x1) / 2, height - 12, "b = y'(0)"))
    out.append(_text(x0, y1 + 16, f"{b_values[0]:.4g}"))
    out.append(_text(x1, y1 + 16, f"{b_values[-1]:.4g}"))
    out.append(_text(x0 - 6, y1, f"{a_values[0]:.4g}", anchor="end"))
    out.append(_text(x0 - 6, y0 + 10, f"{a_values[-1]:.4g}", anchor="end"))
    out.append(_text(16, (y0 + y1) / 2, "a", anchor="start"))
    for k, (tag, color) in enumerate(TAG_COLORS.items()):
        ly = margin_t + 10 + 22 * k
        out.append(f'<rect x="{x1 + 15}" y="{ly}" width="14" height="14" fill="{color}"/>')
        out.append(_text(x1 + 35, ly + 12, tag, anchor="start"))
    out.append("</svg>")
    return "\n".join(out) + "\n"
