"""Minimal, byte-stable SVG rendering of a chart statistic path."""

from __future__ import annotations

from pathlib import Path

WIDTH, HEIGHT, MARGIN = 640, 360, 40


def render_svg(path, signal_step: int | None = None, title: str = "") -> str:
    """SVG text for ``path`` = sequence of (step, statistic, limit).

    The statistic is the only ``<polyline>``; limits are ``<path>`` elements
    (mirrored when the limit is symmetric, i.e. positive with a two-sided
    chart statistic that can go negative); a signal adds one ``<circle>``.
    """
    path = list(path)
    if not path:
        raise ValueError("cannot plot an empty statistic path")
    steps = [p[0] for p in path]
    values = [p[1] for p in path]
    limits = [p[2] for p in path]
    mirrored = min(values) < 0 and all(lim > 0 for lim in limits)
    ys = values + limits + ([-lim for lim in limits] if mirrored else []) + [0.0]
    y_lo, y_hi = min(ys), max(ys)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    x_lo, x_hi = steps[0], steps[-1] if steps[-1] > steps[0] else steps[0] + 1

    def sx(s):
        return MARGIN + (s - x_lo) / (x_hi - x_lo) * (WIDTH - 2 * MARGIN)

    def sy(v):
        return HEIGHT - MARGIN - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - 2 * MARGIN)

    def line(points):
        return " ".join(f"{sx(s):.2f},{sy(v):.2f}" for s, v in points)

    def limit_path(sign):
        pts = [(s, sign * lim) for s, lim in zip(steps, limits)]
        head, rest = pts[0], pts[1:] or [(x_hi, pts[0][1])]
        return (f'<path class="limit" d="M {sx(head[0]):.2f} {sy(head[1]):.2f} '
                + " ".join(f"L {sx(s):.2f} {sy(v):.2f}" for s, v in rest)
                + '" fill="none" stroke="#c0392b" stroke-dasharray="4 3"/>')

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{MARGIN}" y="{MARGIN - 12}" font-family="sans-serif" font-size="13">'
                   f"{_escape(title)}</text>")
    out.append(f'<path class="axis" d="M {MARGIN} {sy(0.0):.2f} L {WIDTH - MARGIN} {sy(0.0):.2f}" '
               f'stroke="#999999"/>')
    out.append(limit_path(1))
    if mirrored:
        out.append(limit_path(-1))
    out.append(f'<polyline class="statistic" points="{line(zip(steps, values))}" '
               f'fill="none" stroke="#1f4e79" stroke-width="1.5"/>')
    if signal_step is not None:
        v = values[steps.index(signal_step)]
        out.append(f'<circle class="signal" cx="{sx(signal_step):.2f}" cy="{sy(v):.2f}" r="5" '
                   f'fill="none" stroke="#c0392b" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_plot(path, file, signal_step: int | None = None, title: str = "") -> None:
    """Write the SVG for ``path`` to ``file`` (OSError if it cannot be written)."""
    svg = render_svg(path, signal_step, title)
    Path(file).write_text(svg, encoding="utf-8")
