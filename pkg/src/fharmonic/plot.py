"""E(t) against t as a hand-written SVG (no plotting library involved)."""
import csv
import math
import os

from .errors import ConfigurationError

WIDTH, HEIGHT = 640, 400
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 30, 50


def read_sweep(path):
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigurationError(f"{path}:0: cannot read sweep CSV: {exc.strerror}") from None
    if not rows:
        raise ConfigurationError(f"{path}:1: sweep CSV has no data rows")
    t, E = [], []
    for i, row in enumerate(rows, start=2):
        try:
            t.append(float(row["t"]))
            E.append(float(row["E"]))
        except (KeyError, TypeError, ValueError):
            raise ConfigurationError(f"{path}:{i}: expected numeric 't' and 'E' columns") from None
    if not all(math.isfinite(x) for x in t + E):
        raise ConfigurationError(f"{path}: non-finite values in 't' or 'E'")
    return t, E


def sweep_svg(t, E, title="E(t)"):
    E0 = E[0]
    lo, hi = min(E + [E0]), max(E + [E0])
    # rounding-level wiggles of a flat curve stay on the reference line
    pad = max(0.05 * (hi - lo), 1e-6 * (1.0 + abs(E0)))
    lo, hi = lo - pad, hi + pad
    t0, t1 = min(t), max(t)
    if t1 == t0:
        t1 = t0 + 1.0
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def X(x):
        return LEFT + (x - t0) / (t1 - t0) * pw

    def Y(y):
        return TOP + (hi - y) / (hi - lo) * ph

    pts = " ".join(f"{X(a):.2f},{Y(b):.2f}" for a, b in zip(t, E))
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           '<rect width="100%" height="100%" fill="white"/>',
           f'<text x="{WIDTH / 2:.0f}" y="20" text-anchor="middle" font-family="sans-serif" '
           f'font-size="14">{_esc(title)}</text>',
           f'<line x1="{LEFT}" y1="{TOP + ph}" x2="{LEFT + pw}" y2="{TOP + ph}" stroke="black"/>',
           f'<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{TOP + ph}" stroke="black"/>']
    for k in range(5):
        tv = t0 + (t1 - t0) * k / 4
        ev = lo + (hi - lo) * k / 4
        out.append(f'<text x="{X(tv):.2f}" y="{TOP + ph + 18}" text-anchor="middle" '
                   f'font-family="sans-serif" font-size="11">{tv:.3g}</text>')
        out.append(f'<text x="{LEFT - 6}" y="{Y(ev) + 4:.2f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">{ev:.6g}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.0f}" y="{HEIGHT - 8}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12">t</text>')
    out.append(f'<line x1="{LEFT}" y1="{Y(E0):.2f}" x2="{LEFT + pw}" y2="{Y(E0):.2f}" '
               f'stroke="gray" stroke-dasharray="6,4"/>')
    out.append(f'<text x="{LEFT + pw - 4}" y="{Y(E0) - 6:.2f}" text-anchor="end" '
               f'font-family="sans-serif" font-size="11" fill="gray">E(0)</text>')
    out.append(f'<polyline points="{pts}" fill="none" stroke="#1f5fa8" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(s):
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_plot(csv_path, svg_path):
    t, E = read_sweep(csv_path)
    svg = sweep_svg(t, E, title=f"E(t) along the conformal flow ({os.path.basename(csv_path)})")
    with open(svg_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return svg_path
