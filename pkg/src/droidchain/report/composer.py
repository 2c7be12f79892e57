from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence

from jinja2 import Environment, FileSystemLoader, select_autoescape

TEMPLATES_DIR = Path(__file__).parent / "templates"

env = Environment(
    loader=FileSystemLoader(str(TEMPLATES_DIR)),
    autoescape=select_autoescape(["html", "xml", "svg.j2"]),
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
)

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")

WIDTH, HEIGHT, MARGIN = 640, 400, 60


@dataclass(frozen=True)
class PlotSeries:
    name: str
    color: str
    points: str


def _step_points(cdf: Sequence[tuple[float, float]], x_min: float, x_max: float) -> list[tuple[float, float]]:
    pts: list[tuple[float, float]] = [(x_min, 0.0)]
    level = 0.0
    for x, f in cdf:
        pts.append((x, level))
        pts.append((x, f))
        level = f
    pts.append((x_max, level))
    return pts


def render_cdf_svg(
    series: Mapping[str, Sequence[tuple[float, float]]],
    title: str,
    x_label: str,
    x_max: Optional[float] = None,
) -> str:
    """Step-CDF line plot, one polyline per non-empty series."""
    xs = [x for cdf in series.values() for x, _ in cdf]
    lo = min([0.0, *xs])
    hi = x_max if x_max is not None else max([1.0, *xs])
    span = (hi - lo) or 1.0
    plot_w, plot_h = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN

    def sx(x: float) -> float:
        return MARGIN + (x - lo) / span * plot_w

    def sy(f: float) -> float:
        return HEIGHT - MARGIN - f * plot_h

    lines = []
    for i, (name, cdf) in enumerate(series.items()):
        if not cdf:
            continue
        pts = _step_points(cdf, lo, hi)
        lines.append(
            PlotSeries(
                name=name,
                color=PALETTE[i % len(PALETTE)],
                points=" ".join(f"{sx(x):.2f},{sy(f):.2f}" for x, f in pts),
            )
        )
    x_ticks = [(f"{sx(lo + span * t / 5):.2f}", f"{lo + span * t / 5:g}") for t in range(6)]
    y_ticks = [(f"{sy(t / 5):.2f}", f"{t / 5:.1f}") for t in range(6)]
    return env.get_template("cdf_plot.svg.j2").render(
        title=title,
        x_label=x_label,
        width=WIDTH,
        height=HEIGHT,
        left=MARGIN,
        right=WIDTH - MARGIN,
        top=MARGIN,
        bottom=HEIGHT - MARGIN,
        x_ticks=x_ticks,
        y_ticks=y_ticks,
        series=lines,
    )


def render_comparison_text(rows: Sequence[Mapping[str, Any]]) -> str:
    return env.get_template("comparison.txt.j2").render(rows=rows)


def render_run_summary(summary: Mapping[str, Any]) -> str:
    return env.get_template("run_summary.txt.j2").render(**summary)
