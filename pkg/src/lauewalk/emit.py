"""Deterministic CSV / JSON / SVG writers for result envelopes."""

from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from typing import IO, Any

import numpy as np

__all__ = ["ResultEnvelope", "format_number", "to_csv", "to_json", "to_svg", "render", "write", "FORMATS"]

FORMATS = ("csv", "json", "svg")
DURATION_KEY = "duration_s"


@dataclass
class ResultEnvelope:
    """Resolved run metadata plus a rectangular data table."""

    meta: dict
    columns: tuple[str, ...]
    rows: list[tuple]
    duration_s: float | None = field(default=None)


def _plain(value: Any):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    return value


def format_number(value) -> str:
    """Shortest round-trip text; scientific notation outside [1e-6, 1e6)."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        x = float(value)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0.0 or 1e-6 <= abs(x) < 1e6:
            return repr(x)
        return np.format_float_scientific(x, unique=True, trim="-", exp_digits=2)
    return str(value)


def to_csv(env: ResultEnvelope) -> str:
    lines = []
    for key in sorted(env.meta):
        lines.append(f"# {key}: {json.dumps(_plain(env.meta[key]), sort_keys=True)}")
    lines.append(",".join(env.columns))
    for row in env.rows:
        lines.append(",".join(format_number(v) for v in row))
    if env.duration_s is not None:
        lines.append(f"# {DURATION_KEY}: {env.duration_s:.6f}")
    return "\n".join(lines) + "\n"


def to_json(env: ResultEnvelope) -> str:
    meta = _plain(env.meta)
    meta["columns"] = list(env.columns)
    if env.duration_s is not None:
        meta[DURATION_KEY] = round(env.duration_s, 6)
    rows = [dict(zip(env.columns, _plain(list(row)))) for row in env.rows]
    return json.dumps({"meta": meta, "rows": rows}, sort_keys=True, indent=1) + "\n"


def _numeric(column) -> bool:
    return all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in column)


def _chart(x, y, title, x_label, top, width=640, height=240) -> list[str]:
    left, right, pad_top, pad_bottom = 64, 16, 24, 32
    finite = [(a, b) for a, b in zip(x, y) if math.isfinite(a) and math.isfinite(b)]
    out = [f'<g transform="translate(0,{top})">']
    out.append(f'<text x="{left}" y="16" font-size="13">{title}</text>')
    w, h = width - left - right, height - pad_top - pad_bottom
    out.append(
        f'<rect x="{left}" y="{pad_top}" width="{w}" height="{h}" fill="none" stroke="#888"/>'
    )
    if finite:
        xs, ys = zip(*finite)
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        if x1 == x0:
            x1 = x0 + 1
        if y1 == y0:
            y1 = y0 + 1
        pts = " ".join(
            f"{left + (a - x0) / (x1 - x0) * w:.2f},{pad_top + h - (b - y0) / (y1 - y0) * h:.2f}"
            for a, b in finite
        )
        out.append(f'<polyline fill="none" stroke="#1f5fa8" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="4" y="{pad_top + 10}" font-size="10">{format_number(y1)}</text>')
        out.append(f'<text x="4" y="{pad_top + h}" font-size="10">{format_number(y0)}</text>')
        out.append(
            f'<text x="{left}" y="{pad_top + h + 14}" font-size="10">{format_number(x0)}</text>'
        )
        out.append(
            f'<text x="{left + w}" y="{pad_top + h + 14}" font-size="10" text-anchor="end">{format_number(x1)}</text>'
        )
    out.append(
        f'<text x="{left + w / 2}" y="{pad_top + h + 26}" font-size="11" text-anchor="middle">{x_label}</text>'
    )
    out.append("</g>")
    return out


def to_svg(env: ResultEnvelope) -> str:
    """One line chart per numeric column against the first column (or row number)."""
    cols = list(zip(*env.rows)) if env.rows else [[] for _ in env.columns]
    if cols and _numeric(cols[0]):
        x = [float(v) for v in cols[0]]
        x_label, series = env.columns[0], range(1, len(env.columns))
    else:
        x = [float(i) for i in range(len(env.rows))]
        x_label, series = "row", range(len(env.columns))
    charts = [k for k in series if cols and _numeric(cols[k])]
    height = 240
    body = []
    for n, k in enumerate(charts):
        body += _chart(x, [float(v) for v in cols[k]], env.columns[k], x_label, n * height)
    total = max(1, len(charts)) * height
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="640" height="{total}" '
        f'viewBox="0 0 640 {total}" font-family="sans-serif">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def render(env: ResultEnvelope, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(env)
    if fmt == "json":
        return to_json(env)
    if fmt == "svg":
        return to_svg(env)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def write(text: str, sink: IO[str] | str | None) -> None:
    """Write to a path, an open text stream, or stdout (``None`` / ``"-"``)."""
    if sink is None or sink == "-":
        sys.stdout.write(text)
        return
    if hasattr(sink, "write"):
        sink.write(text)
        return
    with open(sink, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
