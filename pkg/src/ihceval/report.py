"""Report emission: JSON summaries, per-tile CSV mirrors, and SVG scatter
plots. All writers are byte-deterministic for fixed input; run timestamps
live in a separate metadata file written by the CLI.
"""

from __future__ import annotations

import csv
import json
import math

from .errors import IoError
from .stats import ALL_METRICS, SEG_METRICS, TEXTURE_METRICS


def jsonable(value):
    """Convert to something json.dump accepts: NaN -> None, inf -> 'inf'."""
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, dict):
        return {k: jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if hasattr(value, "__dataclass_fields__"):
        return {k: jsonable(getattr(value, k))
                for k in value.__dataclass_fields__}
    return value


def write_json(path, payload) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(jsonable(payload), f, indent=2, sort_keys=True,
                      allow_nan=False)
            f.write("\n")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def _csv_cell(value: float) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value) if isinstance(value, float) else str(value)


def write_records_csv(path, records) -> None:
    """One row per tile per model, metric sentinels as 'inf' / empty."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["tile_id", "model_id", "group", *ALL_METRICS])
            for rec in records:
                row = [rec.tile_id, rec.model_id, rec.group or ""]
                for metric in TEXTURE_METRICS:
                    row.append(_csv_cell(rec.value(metric)
                                         if rec.texture else None))
                for metric in SEG_METRICS:
                    row.append(_csv_cell(rec.value(metric)
                                         if rec.seg else None))
                writer.writerow(row)
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e


def _parse_cell(text: str) -> float:
    if text == "":
        return math.nan
    if text == "inf":
        return math.inf
    if text == "-inf":
        return -math.inf
    return float(text)


def read_records_csv(path):
    """Read back a records CSV written by write_records_csv."""
    from .segmetrics import SegScore
    from .stats import MetricRecord
    from .texture import TextureScore

    records = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for raw in csv.DictReader(f):
            texture = None
            if raw["mse"] != "" or raw["ssim"] != "":
                texture = TextureScore(mse=_parse_cell(raw["mse"]),
                                       psnr=_parse_cell(raw["psnr"]),
                                       ssim=_parse_cell(raw["ssim"]))
            seg = None
            if raw["dice"] != "":
                seg = SegScore(dice=_parse_cell(raw["dice"]),
                               iou=_parse_cell(raw["iou"]),
                               hausdorff=_parse_cell(raw["hausdorff"]),
                               tpr=_parse_cell(raw["tpr"]),
                               tnr=_parse_cell(raw["tnr"]),
                               gt_positive=0, pred_positive=0)
            records.append(MetricRecord(tile_id=raw["tile_id"],
                                        model_id=raw["model_id"],
                                        group=raw["group"] or None,
                                        texture=texture, seg=seg))
    return records


_MARKERS = ("circle", "square", "diamond", "triangle")
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")

_W, _H = 640, 480
_MARGIN = 60


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _marker_svg(kind: str, x: float, y: float, color: str) -> str:
    r = 4.0
    if kind == "circle":
        return (f'<circle class="pt" cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r}" '
                f'fill="{color}"/>')
    if kind == "square":
        return (f'<rect class="pt" x="{_fmt(x - r)}" y="{_fmt(y - r)}" '
                f'width="{2 * r}" height="{2 * r}" fill="{color}"/>')
    if kind == "diamond":
        pts = f"{_fmt(x)},{_fmt(y - r)} {_fmt(x + r)},{_fmt(y)} " \
              f"{_fmt(x)},{_fmt(y + r)} {_fmt(x - r)},{_fmt(y)}"
    else:
        pts = f"{_fmt(x)},{_fmt(y - r)} {_fmt(x + r)},{_fmt(y + r)} " \
              f"{_fmt(x - r)},{_fmt(y + r)}"
    return f'<polygon class="pt" points="{pts}" fill="{color}"/>'


def render_scatter(points, labels, out_path, title: str = "",
                   x_label: str = "", y_label: str = "") -> None:
    """Standalone SVG scatter plot; one marker style per distinct label."""
    points = list(points)
    labels = list(labels)
    if not points:
        raise ValueError("scatter plot needs at least one point")
    if len(labels) != len(points):
        raise ValueError("labels and points must align")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_lo == x_hi:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_lo == y_hi:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5

    def sx(x):
        return _MARGIN + (x - x_lo) / (x_hi - x_lo) * (_W - 2 * _MARGIN)

    def sy(y):
        return _H - _MARGIN - (y - y_lo) / (y_hi - y_lo) * (_H - 2 * _MARGIN)

    classes = sorted(set(labels))
    style = {
        cls: (_MARKERS[i % len(_MARKERS)], _COLORS[i % len(_COLORS)])
        for i, cls in enumerate(classes)
    }
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" '
        f'height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
    ]
    for i in range(5):
        fx = x_lo + (x_hi - x_lo) * i / 4
        fy = y_lo + (y_hi - y_lo) * i / 4
        px, py = sx(fx), sy(fy)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_H - _MARGIN}" '
                     f'x2="{_fmt(px)}" y2="{_H - _MARGIN + 5}" stroke="black"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{_H - _MARGIN + 18}" '
                     f'font-size="10" text-anchor="middle">{_fmt(fx)}</text>')
        parts.append(f'<line x1="{_MARGIN - 5}" y1="{_fmt(py)}" '
                     f'x2="{_MARGIN}" y2="{_fmt(py)}" stroke="black"/>')
        parts.append(f'<text x="{_MARGIN - 8}" y="{_fmt(py + 3)}" '
                     f'font-size="10" text-anchor="end">{_fmt(fy)}</text>')
    if title:
        parts.append(f'<text x="{_W // 2}" y="24" font-size="14" '
                     f'text-anchor="middle">{title}</text>')
    if x_label:
        parts.append(f'<text x="{_W // 2}" y="{_H - 16}" font-size="12" '
                     f'text-anchor="middle">{x_label}</text>')
    if y_label:
        parts.append(f'<text x="16" y="{_H // 2}" font-size="12" '
                     f'text-anchor="middle" '
                     f'transform="rotate(-90 16 {_H // 2})">{y_label}</text>')
    for (x, y), label in zip(points, labels):
        kind, color = style[label]
        parts.append(_marker_svg(kind, sx(x), sy(y), color))
    for i, cls in enumerate(classes):
        kind, color = style[cls]
        ly = _MARGIN + 16 * i
        parts.append(_marker_svg(kind, _W - _MARGIN + 16, ly, color))
        parts.append(f'<text x="{_W - _MARGIN + 26}" y="{_fmt(ly + 3)}" '
                     f'font-size="10">{cls}</text>')
    parts.append("</svg>")
    try:
        with open(out_path, "w", encoding="utf-8") as f:
            f.write("\n".join(parts))
            f.write("\n")
    except OSError as e:
        raise IoError(f"cannot write {out_path}: {e}") from e
