"""
Base picture renderer

基底 ℂ 上の曲線・臨界値・交点の基底値を SVG に描画します。
出力は閲覧用のみで、計算には使用しません。
"""

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from jinja2 import Environment, FileSystemLoader

from services.geometry.curves import BasePath
from services.geometry.models import ModelSpec
from tools.cli.config import TEMPLATES_DIR

CANVAS = 480
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b")


def _bounds(points: np.ndarray) -> tuple[float, float, float]:
    """(x_min, y_max, scale): the square view containing every point with a margin."""
    xs, ys = points.real, points.imag
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    span = max(x1 - x0, y1 - y0, 1.0) * 1.15
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    return cx - span / 2, cy + span / 2, CANVAS / span


def render_base_svg(
    model: ModelSpec,
    curves: Sequence[tuple[str, BasePath]],
    intersections: Iterable[complex] = (),
    title: str = "",
) -> str:
    """
    基底の図をレンダリングする

    Args:
        curves: (ラベル, 曲線) の列。ラベル順に描画する
        intersections: 交点の基底値
    """
    curves = sorted(curves, key=lambda item: item[0])
    polylines = [(label, np.asarray(path.polyline(1e-2)[1], dtype=complex)) for label, path in curves]
    critical = np.asarray(model.critical_values, dtype=complex)
    marks = np.asarray(sorted(set(complex(c) for c in intersections), key=lambda c: (c.real, c.imag)), dtype=complex)

    everything = np.concatenate([*(values for _, values in polylines), critical, marks, np.zeros(1, dtype=complex)])
    x_min, y_max, scale = _bounds(everything)

    def to_canvas(z: np.ndarray) -> list[tuple[float, float]]:
        return [(round((c.real - x_min) * scale, 2), round((y_max - c.imag) * scale, 2)) for c in np.atleast_1d(z)]

    context = {
        "title": title,
        "size": CANVAS,
        "curves": [
            {
                "label": label,
                "color": PALETTE[k % len(PALETTE)],
                "points": " ".join(f"{x},{y}" for x, y in to_canvas(values)),
                "anchor": to_canvas(values[:1])[0],
            }
            for k, (label, values) in enumerate(polylines)
        ],
        "critical": [{"x": x, "y": y, "value": f"{c:g}"} for (x, y), c in zip(to_canvas(critical), critical)]
        if critical.size
        else [],
        "marks": [{"x": x, "y": y} for x, y in to_canvas(marks)] if marks.size else [],
    }
    env = Environment(
        loader=FileSystemLoader(TEMPLATES_DIR),
        trim_blocks=True,
        lstrip_blocks=True,
        autoescape=True,
    )
    return env.get_template("base.svg.j2").render(context)


def write_base_svg(out_dir: Path, *args, **kwargs) -> Path:
    path = Path(out_dir) / "base.svg"
    path.write_text(render_base_svg(*args, **kwargs), encoding="utf-8")
    return path
