"""Hand-rendered SVG of the per-group propensity histograms.

No plotting dependency: the figure is assembled from rect, line, path,
circle, and text primitives. Output is a pure function of the inputs,
so identical histograms and reports give byte-identical files.

Marker semantics, bottom rows under the axis:
  black tick   suspected bin (one-sided presence)
  green X      raw test p-value below alpha, before correction
  red circle   significant after the FDR correction
"""

from __future__ import annotations

from .density import GroupHistograms
from .violation import ViolationReport

COLOR_CONTROL = "#ff7f0e"
COLOR_TREATED = "#1f77b4"
_COLOR_RAW = "#2ca02c"
_COLOR_FDR = "#d62728"

_WIDTH = 880.0
_HEIGHT = 460.0
_LEFT = 60.0
_RIGHT = 20.0
_TOP = 40.0
_BASE = 370.0


def _f(x: float) -> str:
    return f"{x:.2f}"


def render_histogram_svg(hist: GroupHistograms, report: ViolationReport) -> str:
    """Build the SVG document as a string."""
    if report.bins != hist.bins:
        raise ValueError(
            f"report has {report.bins} bins, histogram {hist.bins}"
        )
    bins = hist.bins
    plot_w = _WIDTH - _LEFT - _RIGHT
    plot_h = _BASE - _TOP
    bar_w = plot_w / bins
    frac0 = hist.counts0 / hist.n0
    frac1 = hist.counts1 / hist.n1
    ymax = max(float(frac0.max()), float(frac1.max()))
    if ymax <= 0.0:
        ymax = 1.0
    scale = plot_h / ymax

    def x_at(i: float) -> float:
        return _LEFT + i * bar_w

    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{_f(_WIDTH)}" height="{_f(_HEIGHT)}" '
        f'viewBox="0 0 {_f(_WIDTH)} {_f(_HEIGHT)}">',
        f'<rect x="0" y="0" width="{_f(_WIDTH)}" height="{_f(_HEIGHT)}" '
        'fill="#ffffff"/>',
        '<text x="60.00" y="24.00" font-family="sans-serif" font-size="15" '
        'fill="#000000">Propensity score histogram by treatment group</text>',
    ]
    for cls, frac, color in (
        ("bar-control", frac0, COLOR_CONTROL),
        ("bar-treated", frac1, COLOR_TREATED),
    ):
        for i in range(bins):
            h = float(frac[i]) * scale
            parts.append(
                f'<rect class="{cls}" x="{_f(x_at(i))}" '
                f'y="{_f(_BASE - h)}" width="{_f(bar_w)}" '
                f'height="{_f(h)}" fill="{color}" fill-opacity="0.55"/>'
            )
    parts.append(
        f'<line x1="{_f(_LEFT)}" y1="{_f(_BASE)}" x2="{_f(_WIDTH - _RIGHT)}" '
        f'y2="{_f(_BASE)}" stroke="#000000" stroke-width="1"/>'
    )
    parts.append(
        f'<line x1="{_f(_LEFT)}" y1="{_f(_TOP)}" x2="{_f(_LEFT)}" '
        f'y2="{_f(_BASE)}" stroke="#000000" stroke-width="1"/>'
    )
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        tx = x_at(tick * bins)
        parts.append(
            f'<line x1="{_f(tx)}" y1="{_f(_BASE)}" x2="{_f(tx)}" '
            f'y2="{_f(_BASE + 5)}" stroke="#000000" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_f(tx)}" y="{_f(_BASE + 20)}" '
            'font-family="sans-serif" font-size="12" fill="#000000" '
            f'text-anchor="middle">{tick:g}</text>'
        )
    parts.append(
        f'<text x="{_f(_LEFT - 8)}" y="{_f(_TOP + 4)}" '
        'font-family="sans-serif" font-size="12" fill="#000000" '
        f'text-anchor="end">{ymax:.3g}</text>'
    )
    parts.append(
        f'<text x="{_f(_LEFT - 8)}" y="{_f(_BASE + 4)}" '
        'font-family="sans-serif" font-size="12" fill="#000000" '
        'text-anchor="end">0</text>'
    )

    raw_alpha = {t.index for t in report.tests if t.p_raw < report.alpha}
    fdr = {t.index for t in report.tests if t.significant}
    for i in report.suspected:
        cx = x_at(i + 0.5)
        parts.append(
            f'<line class="mark-suspected" x1="{_f(cx)}" y1="{_f(_BASE + 8)}" '
            f'x2="{_f(cx)}" y2="{_f(_BASE + 16)}" stroke="#000000" '
            'stroke-width="1.5"/>'
        )
        if i in raw_alpha:
            cy = _BASE + 30.0
            parts.append(
                f'<path class="mark-raw" d="M {_f(cx - 4)} {_f(cy - 4)} '
                f'L {_f(cx + 4)} {_f(cy + 4)} M {_f(cx - 4)} {_f(cy + 4)} '
                f'L {_f(cx + 4)} {_f(cy - 4)}" stroke="{_COLOR_RAW}" '
                'stroke-width="1.5" fill="none"/>'
            )
        if i in fdr:
            parts.append(
                f'<circle class="mark-fdr" cx="{_f(cx)}" cy="{_f(_BASE + 45)}" '
                f'r="4.50" stroke="{_COLOR_FDR}" stroke-width="1.5" '
                'fill="none"/>'
            )

    legend = (
        (COLOR_CONTROL, "control (T=0)"),
        (COLOR_TREATED, "treated (T=1)"),
    )
    lx = _WIDTH - _RIGHT - 180.0
    for k, (color, label) in enumerate(legend):
        ly = _TOP + 10.0 + 18.0 * k
        parts.append(
            f'<rect x="{_f(lx)}" y="{_f(ly)}" width="12.00" height="12.00" '
            f'fill="{color}" fill-opacity="0.55"/>'
        )
        parts.append(
            f'<text x="{_f(lx + 18)}" y="{_f(ly + 10)}" '
            'font-family="sans-serif" font-size="12" '
            f'fill="#000000">{label}</text>'
        )
    marker_legend = (
        "tick: suspected bin",
        "X: raw p &lt; alpha",
        "circle: FDR significant",
    )
    for k, label in enumerate(marker_legend):
        ly = _TOP + 46.0 + 16.0 * k
        parts.append(
            f'<text x="{_f(lx)}" y="{_f(ly + 10)}" '
            'font-family="sans-serif" font-size="11" '
            f'fill="#444444">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_histogram_svg(
    hist: GroupHistograms, report: ViolationReport, path: str
) -> None:
    """Write the histogram figure to ``path`` as UTF-8 SVG."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_histogram_svg(hist, report))
