"""Static SVG drawings of binary statistics sets."""

from __future__ import annotations

import numpy as np

from .geometry import REPORT_TOL, contains_point
from .measures import rescaling_independence
from .theory import StatisticsSet

SIZE = 320
PAD = 20


def _xy(p) -> str:
    # probability square [0,1]^2 with y pointing up
    x = PAD + float(p[0]) * (SIZE - 2 * PAD)
    y = SIZE - PAD - float(p[1]) * (SIZE - 2 * PAD)
    return f"{x:.3f},{y:.3f}"


def statistics_set_svg(S: StatisticsSet, title: str = "") -> str:
    """Ambient square, the set, its largest inscribed scaled square and the corners it contains."""
    if not S.is_binary:
        raise ValueError("only binary statistics sets can be drawn")
    rep = rescaling_independence(S)
    r = rep.value
    shift = np.asarray(rep.witnesses["shift"], dtype=float)
    # witness square in average coordinates mapped back to probabilities
    inner = [(1 - (shift[0] + r * sx)) / 2 for sx in (-1, 1)], [(1 - (shift[1] + r * sy)) / 2 for sy in (-1, 1)]
    inner_pts = [(inner[0][0], inner[1][0]), (inner[0][1], inner[1][0]), (inner[0][1], inner[1][1]),
                 (inner[0][0], inner[1][1])]
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f"<title>{title}</title>",
        f'<polygon points="{" ".join(_xy(p) for p in square)}" fill="none" stroke="#000000" stroke-width="1"/>',
    ]
    V = S.geometry.vertices
    if len(V) >= 3:
        lines.append(f'<polygon points="{" ".join(_xy(p) for p in V)}" fill="#9ecae1" stroke="#08519c" '
                     f'stroke-width="1.5"/>')
    else:
        lines.append(f'<polyline points="{" ".join(_xy(p) for p in V)}" fill="none" stroke="#08519c" '
                     f'stroke-width="3"/>')
    if r > REPORT_TOL:
        lines.append(f'<polygon points="{" ".join(_xy(p) for p in inner_pts)}" fill="none" stroke="#e6550d" '
                     f'stroke-width="1.5" stroke-dasharray="4 2"/>')
    for c in square:
        if contains_point(S.geometry, c):
            x, y = _xy(c).split(",")
            lines.append(f'<circle cx="{x}" cy="{y}" r="5" fill="#d62728"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
