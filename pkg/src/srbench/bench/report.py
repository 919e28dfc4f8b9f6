"""Aggregate tables and scatter plots from benchmark records.

Reports are pure functions of the record list: identical records produce
byte-identical documents.  Aggregation is the arithmetic mean per model;
per-image records stay on disk so other statistics can be derived later.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from statistics import fmean

from ..errors import ConfigError, MetricError
from ..metrics.base import MetricStatus
from .records import BenchRecord

__all__ = ["ModelAggregate", "aggregate", "emit_table", "emit_scatter"]

_METRIC_ORDER = ("psnr", "ssim", "niqe", "runtime")
_DECIMALS = {"psnr": 2, "ssim": 4, "niqe": 3, "runtime": 3}
_TITLES = {"psnr": "PSNR (dB)", "ssim": "SSIM", "niqe": "NIQE", "runtime": "Runtime (s)"}


def _metric_sort_key(metric_id: str) -> tuple:
    try:
        return (0, _METRIC_ORDER.index(metric_id))
    except ValueError:
        return (1, metric_id)


def _title(metric_id: str) -> str:
    return _TITLES.get(metric_id, metric_id)


def _decimals(metric_id: str) -> int:
    return _DECIMALS.get(metric_id, 4)


def _format_value(metric_id: str, value: float | None) -> str:
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return f"{value:.{_decimals(metric_id)}f}"


@dataclass(frozen=True)
class ModelAggregate:
    model: str
    images: int
    errors: int
    means: dict[str, float] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    reported: dict[str, float] = field(default_factory=dict)
    error_messages: tuple[str, ...] = ()


def aggregate(records: list[BenchRecord]) -> list[ModelAggregate]:
    """Per-model arithmetic means, sorted ascending by measured PSNR.

    Models without a PSNR mean sort after scored ones; ties break by name.
    """
    if not records:
        raise ConfigError("no records to aggregate")
    by_model: dict[str, list[BenchRecord]] = {}
    order: list[str] = []
    for record in records:
        if record.model not in by_model:
            by_model[record.model] = []
            order.append(record.model)
        by_model[record.model].append(record)

    aggregates = []
    for model in order:
        rows = by_model[model]
        ok_rows = [r for r in rows if r.ok]
        errors = [r for r in rows if not r.ok]
        values: dict[str, list[float]] = {}
        infinite: dict[str, bool] = {}
        for row in ok_rows:
            for metric_id, result in row.metrics.items():
                if result.status is MetricStatus.OK:
                    values.setdefault(metric_id, []).append(result.value)
                elif result.status is MetricStatus.INFINITE:
                    infinite[metric_id] = True
                    values.setdefault(metric_id, [])
        means = {}
        counts = {}
        for metric_id, vals in values.items():
            contributing = len(vals) + (1 if infinite.get(metric_id) else 0)
            if infinite.get(metric_id):
                means[metric_id] = math.inf
            elif vals:
                means[metric_id] = fmean(vals)
            else:
                continue
            counts[metric_id] = contributing
        reported: dict[str, float] = {}
        for row in rows:
            if row.reported:
                reported = dict(row.reported)
                break
        messages = []
        for row in errors:
            if row.error not in messages:
                messages.append(row.error)
            if len(messages) == 3:
                break
        aggregates.append(
            ModelAggregate(
                model=model,
                images=len(ok_rows),
                errors=len(errors),
                means=means,
                counts=counts,
                reported=reported,
                error_messages=tuple(messages),
            )
        )

    def sort_key(agg: ModelAggregate):
        psnr = agg.means.get("psnr")
        if psnr is None:
            return (1, 0.0, agg.model)
        return (0, psnr, agg.model)

    return sorted(aggregates, key=sort_key)


def _columns(aggregates: list[ModelAggregate]) -> tuple[list[str], list[str]]:
    measured = sorted({m for agg in aggregates for m in agg.means}, key=_metric_sort_key)
    reported = sorted({m for agg in aggregates for m in agg.reported}, key=_metric_sort_key)
    return measured, reported


def emit_table(records: list[BenchRecord], format: str = "markdown") -> str:
    """One aggregate row per model in the requested format (markdown/csv/json)."""
    aggregates = aggregate(records)
    fmt = format.lower()
    if fmt == "json":
        return _table_json(aggregates)
    if fmt == "csv":
        return _table_csv(aggregates)
    if fmt == "markdown":
        return _table_markdown(aggregates)
    raise ConfigError(f"table format must be markdown, csv, or json, got {format!r}")


def _table_json(aggregates: list[ModelAggregate]) -> str:
    rows = []
    for agg in aggregates:
        if agg.images == 0:
            continue
        rows.append(
            {
                "model": agg.model,
                "images": agg.images,
                "errors": agg.errors,
                "means": {k: agg.means[k] for k in sorted(agg.means)},
                "counts": {k: agg.counts[k] for k in sorted(agg.counts)},
                "reported": {k: agg.reported[k] for k in sorted(agg.reported)},
            }
        )
    errored = [
        {"model": agg.model, "errors": agg.errors, "messages": list(agg.error_messages)}
        for agg in aggregates
        if agg.images == 0
    ]
    obj = {"rows": rows, "errored": sorted(errored, key=lambda e: e["model"])}
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _table_csv(aggregates: list[ModelAggregate]) -> str:
    measured, reported = _columns(aggregates)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = ["model", "images", "errors"]
    header += [m for m in measured]
    header += [f"reported_{m}" for m in reported]
    writer.writerow(header)
    for agg in aggregates:
        row = [agg.model, str(agg.images), str(agg.errors)]
        row += [_format_value(m, agg.means.get(m)) for m in measured]
        row += [_format_value(m, agg.reported.get(m)) for m in reported]
        writer.writerow(row)
    return buffer.getvalue()


def _table_markdown(aggregates: list[ModelAggregate]) -> str:
    measured, reported = _columns(aggregates)
    scored = [agg for agg in aggregates if agg.images > 0]
    failed = [agg for agg in aggregates if agg.images == 0]
    show_errors = any(agg.errors for agg in scored)

    header = ["Model", "Images"]
    if show_errors:
        header.append("Errors")
    header += [_title(m) for m in measured]
    header += [f"Reported {_title(m)}" for m in reported]

    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    for agg in scored:
        cells = [agg.model, str(agg.images)]
        if show_errors:
            cells.append(str(agg.errors))
        cells += [_format_value(m, agg.means.get(m)) or "-" for m in measured]
        cells += [_format_value(m, agg.reported.get(m)) or "-" for m in reported]
        lines.append("| " + " | ".join(cells) + " |")
    text = "\n".join(lines) + "\n"
    if failed:
        text += "\nErrored models:\n"
        for agg in sorted(failed, key=lambda a: a.model):
            first = agg.error_messages[0] if agg.error_messages else "(no message)"
            text += f"- {agg.model}: {agg.errors} errors (first: {first})\n"
    return text


def emit_scatter(
    records: list[BenchRecord],
    x: str,
    y: str,
    exclude: tuple[str, ...] = (),
) -> tuple[str, str]:
    """Scatter of model aggregates as (SVG document, CSV of the same points)."""
    aggregates = aggregate(records)
    for metric_id in (x, y):
        if not any(metric_id in agg.means for agg in aggregates):
            raise MetricError(f"metric {metric_id!r} absent from records")
    excluded = [agg.model for agg in aggregates if agg.model in set(exclude)]
    skipped = []
    points = []
    for agg in aggregates:
        if agg.model in set(exclude):
            continue
        vx, vy = agg.means.get(x), agg.means.get(y)
        if vx is None or vy is None or not (math.isfinite(vx) and math.isfinite(vy)):
            skipped.append(agg.model)
            continue
        points.append((agg.model, vx, vy))
    if not points:
        raise MetricError(f"no model has finite values for both {x!r} and {y!r}")

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["model", x, y])
    for model, vx, vy in points:
        writer.writerow([model, str(vx), str(vy)])
    return _scatter_svg(points, x, y, excluded, skipped), buffer.getvalue()


def _axis_range(values: list[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        pad = abs(lo) * 0.05 or 1.0
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.08
    return lo - pad, hi + pad


def _scatter_svg(
    points: list[tuple[str, float, float]],
    x_metric: str,
    y_metric: str,
    excluded: list[str],
    skipped: list[str],
) -> str:
    width, height = 640, 440
    left, right, top, bottom = 70, 20, 20, 70
    plot_w, plot_h = width - left - right, height - top - bottom
    x_lo, x_hi = _axis_range([p[1] for p in points])
    y_lo, y_hi = _axis_range([p[2] for p in points])

    def sx(v: float) -> float:
        return left + (v - x_lo) / (x_hi - x_lo) * plot_w

    def sy(v: float) -> float:
        return top + plot_h - (v - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#333"/>',
    ]
    ticks = 5
    for i in range(ticks):
        frac = i / (ticks - 1)
        vx = x_lo + frac * (x_hi - x_lo)
        px = sx(vx)
        parts.append(f'<line x1="{px:.1f}" y1="{top + plot_h}" x2="{px:.1f}" y2="{top + plot_h + 5}" stroke="#333"/>')
        parts.append(
            f'<text x="{px:.1f}" y="{top + plot_h + 18}" text-anchor="middle" font-size="11">{vx:.4g}</text>'
        )
        vy = y_lo + frac * (y_hi - y_lo)
        py = sy(vy)
        parts.append(f'<line x1="{left - 5}" y1="{py:.1f}" x2="{left}" y2="{py:.1f}" stroke="#333"/>')
        parts.append(
            f'<text x="{left - 8}" y="{py + 4:.1f}" text-anchor="end" font-size="11">{vy:.4g}</text>'
        )
    parts.append(
        f'<text x="{left + plot_w / 2:.1f}" y="{top + plot_h + 36}" text-anchor="middle" font-size="13">'
        f"{_title(x_metric)}</text>"
    )
    parts.append(
        f'<text x="16" y="{top + plot_h / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 16 {top + plot_h / 2:.1f})">{_title(y_metric)}</text>'
    )
    for model, vx, vy in points:
        px, py = sx(vx), sy(vy)
        parts.append(
            f'<circle cx="{px:.1f}" cy="{py:.1f}" r="4" fill="#2b6cb0" '
            f'data-model="{model}" data-x="{vx}" data-y="{vy}"/>'
        )
        parts.append(f'<text x="{px + 6:.1f}" y="{py - 6:.1f}" font-size="11">{model}</text>')
    legend = []
    if excluded:
        legend.append("excluded: " + ", ".join(sorted(excluded)))
    if skipped:
        legend.append("no data: " + ", ".join(sorted(skipped)))
    if legend:
        parts.append(
            f'<text x="{left}" y="{height - 10}" font-size="11" fill="#666">' + "; ".join(legend) + "</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
