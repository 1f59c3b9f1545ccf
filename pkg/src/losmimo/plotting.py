"""Deterministic SVG line charts from result tables.

The output is a pure function of the input tables: coordinates are written
with fixed precision and no timestamps or ids are emitted.
"""

from dataclasses import dataclass
import csv
import io
import math
from xml.sax.saxutils import escape

from .errors import InvalidArgumentError

__all__ = ["Series", "read_table", "render_svg", "plot_tables", "AXIS_LABELS"]

AXIS_LABELS = {
    "M": "BS antennas M",
    "N": "user antennas N",
    "K": "users K",
    "E_u": "E_u (dB)",
    "E_b": "E_b (dB)",
    "p_u": "p_u (dB)",
    "kappa": "Rician factor (dB)",
    "d": "BS antenna spacing d (wavelengths)",
    "g_b": "BS correlation g_b",
    "g_u": "user correlation g_u",
    "alpha": "load exponent alpha",
}
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#e377c2", "#17becf", "#7f7f7f", "#bcbd22")
WIDTH, HEIGHT = 720, 460
LEFT, RIGHT, TOP, BOTTOM = 70, 200, 30, 55


@dataclass(frozen=True)
class Series:
    """One plotted line with an optional horizontal reference level."""

    label: str
    axis: str
    x: tuple
    y: tuple
    limit: float = None
    report: str = "individual"


def read_table(text, default_label="series"):
    """Parse a CSV produced by the CLI into a :class:`Series`.

    The y values are the Monte Carlo means, or the analytic lower bound
    where no Monte Carlo estimate was run.
    """
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(":")
            if key in ("series", "axis", "report") and key not in meta:
                meta[key] = value.strip()
        elif line.strip():
            body.append(line)
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    if not rows or "axis_value" not in rows[0]:
        raise InvalidArgumentError("table has no axis_value column or no rows")
    x, y, limits = [], [], []
    for row in rows:
        x.append(float(row["axis_value"]))
        mc = float(row["mc_mean"])
        y.append(mc if math.isfinite(mc) else float(row["rate_lower"]))
        limits.append(float(row["limit_rate"]))
    limit = limits[0] if all(math.isclose(v, limits[0], rel_tol=1e-9) for v in limits) else None
    return Series(label=meta.get("series", default_label), axis=meta.get("axis", "axis"),
                  x=tuple(x), y=tuple(y), limit=limit, report=meta.get("report", "individual"))


def _nice_ticks(lo, hi, count=6):
    if hi <= lo:
        pad = abs(lo) * 0.1 or 1.0
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    start = math.floor(lo / step) * step
    stop = math.ceil(hi / step) * step
    n = int(round((stop - start) / step))
    return [start + i * step for i in range(n + 1)]


def _num(v):
    return f"{v:.2f}"


def _tick_label(v):
    return f"{v:.6g}"


def render_svg(series, title=""):
    """SVG text with one ``<polyline>`` per series and one ``<line class="limit">``
    per distinct reference level."""
    if not series:
        raise InvalidArgumentError("nothing to plot")
    axes = {s.axis for s in series}
    if len(axes) != 1:
        raise InvalidArgumentError(f"tables do not share an axis: {sorted(axes)}")
    axis = axes.pop()
    limits = sorted({s.limit for s in series if s.limit is not None})
    xs = [v for s in series for v in s.x]
    ys = [v for s in series for v in s.y] + limits
    xt = _nice_ticks(min(xs), max(xs))
    yt = _nice_ticks(min(0.0, min(ys)), max(ys))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def px(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def py(v):
        return TOP + ph - (v - y0) / (y1 - y0) * ph

    ylabel = "sum rate (bits/s/Hz)" if series[0].report == "sum" else "rate per user (bits/s/Hz)"
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<g class="axes" stroke="black" fill="none">'
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></g>',
    ]
    for v in xt:
        out.append(f'<line class="tick" x1="{_num(px(v))}" y1="{TOP + ph}" x2="{_num(px(v))}" '
                   f'y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_num(px(v))}" y="{TOP + ph + 18}" text-anchor="middle">{_tick_label(v)}</text>')
    for v in yt:
        out.append(f'<line class="tick" x1="{LEFT - 5}" y1="{_num(py(v))}" x2="{LEFT}" '
                   f'y2="{_num(py(v))}" stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{_num(py(v) + 4)}" text-anchor="end">{_tick_label(v)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">'
               f'{escape(AXIS_LABELS.get(axis, axis))}</text>')
    out.append(f'<text x="16" y="{TOP + ph / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {TOP + ph / 2:.1f})">{ylabel}</text>')
    for v in limits:
        out.append(f'<line class="limit" x1="{LEFT}" y1="{_num(py(v))}" x2="{LEFT + pw}" '
                   f'y2="{_num(py(v))}" stroke="gray" stroke-dasharray="6 4"/>')
    for i, s in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{_num(px(a))},{_num(py(b))}" for a, b in zip(s.x, s.y))
        out.append(f'<polyline class="series" fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = TOP + 10 + 18 * i
        out.append(f'<rect x="{WIDTH - RIGHT + 12}" y="{ly - 4}" width="16" height="3" fill="{color}"/>')
        out.append(f'<text x="{WIDTH - RIGHT + 34}" y="{ly}">{escape(s.label)}</text>')
    if limits:
        ly = TOP + 10 + 18 * len(series)
        out.append(f'<text x="{WIDTH - RIGHT + 34}" y="{ly}" fill="gray">dashed: rate limit</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_tables(paths, out_path, title=""):
    """Render CSV files at ``paths`` into one SVG at ``out_path``."""
    series = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            series.append(read_table(fh.read(), default_label=str(path)))
    svg = render_svg(series, title=title)
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)
    return svg
