"""SVG rendering of coverage heatmaps and route overlays.

Cells are colored on a blue (weak) to yellow (strong) ramp over a declared
dBm range; blocked cells are dark gray; routes draw as polylines through
cell centers. Runs of equally-colored cells are merged into single rects
to keep files small. SVG output is text-diffable for golden tests.
"""

from __future__ import annotations

import numpy as np

from .errors import CTMapError

BUILDING_COLOR = "#3a3a3a"
RAMP_LOW = (30, 60, 200)    # blue
RAMP_HIGH = (255, 225, 40)  # yellow
COLOR_LEVELS = 48


def _lerp_color(t):
    t = min(1.0, max(0.0, t))
    return tuple(int(round(a + t * (b - a))) for a, b in zip(RAMP_LOW, RAMP_HIGH))


def _hex(rgb):
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def default_ramp(cov):
    values = cov.rss_dbm[~cov.blocked]
    if values.size == 0:
        return (-120.0, -10.0)
    lo = float(values.min())
    hi = float(values.max())
    if hi <= lo:
        hi = lo + 1.0
    return lo, hi


def render_svg(cov, routes=(), cell_px=1, ramp=None):
    """Render the heatmap plus route polylines; returns the SVG text.

    routes is a sequence of (cells, color, label) triples; every cell must
    lie inside the grid.
    """
    if ramp is None:
        ramp = default_ramp(cov)
    lo, hi = ramp
    if not lo < hi:
        raise CTMapError("color ramp min must be below max")
    for cells, color, label in routes:
        for c, r in cells:
            if not cov.in_grid(int(c), int(r)):
                raise CTMapError(
                    f"route {label!r} references cell ({c}, {r}) outside the grid")

    legend_h = 40
    width = cov.cols * cell_px
    height = cov.rows * cell_px + legend_h
    # quantize to a small palette so horizontal runs merge well
    levels = np.clip((cov.rss_dbm.astype(np.float64) - lo) / (hi - lo), 0.0, 1.0)
    levels = np.minimum((levels * COLOR_LEVELS).astype(np.int32), COLOR_LEVELS - 1)
    levels[cov.blocked] = -1

    palette = {i: _hex(_lerp_color((i + 0.5) / COLOR_LEVELS))
               for i in range(COLOR_LEVELS)}
    palette[-1] = BUILDING_COLOR

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for r in range(cov.rows):
        row = levels[r]
        c = 0
        y = r * cell_px
        while c < cov.cols:
            level = row[c]
            run = c + 1
            while run < cov.cols and row[run] == level:
                run += 1
            out.append(f'<rect x="{c * cell_px}" y="{y}" '
                       f'width="{(run - c) * cell_px}" height="{cell_px}" '
                       f'fill="{palette[int(level)]}"/>')
            c = run

    for cells, color, label in routes:
        points = " ".join(
            f"{(int(c) + 0.5) * cell_px:g},{(int(r) + 0.5) * cell_px:g}"
            for c, r in cells)
        out.append(f'<polyline points="{points}" fill="none" stroke="{color}" '
                   f'stroke-width="{max(1, cell_px)}" data-label="{label}"/>')

    # legend: gradient bar with the dBm scale endpoints
    bar_y = cov.rows * cell_px + 10
    bar_w = max(60, width // 3)
    seg = bar_w / COLOR_LEVELS
    for i in range(COLOR_LEVELS):
        out.append(f'<rect x="{10 + i * seg:g}" y="{bar_y}" width="{seg:g}" '
                   f'height="12" fill="{palette[i]}"/>')
    out.append(f'<text x="10" y="{bar_y + 26}" font-size="11" '
               f'font-family="sans-serif">{lo:.1f} dBm</text>')
    out.append(f'<text x="{10 + bar_w:g}" y="{bar_y + 26}" font-size="11" '
               f'font-family="sans-serif" text-anchor="end">{hi:.1f} dBm</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_svg_file(cov, path, routes=(), cell_px=1, ramp=None):
    text = render_svg(cov, routes=routes, cell_px=cell_px, ramp=ramp)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
