"""CSV and static SVG writers.

Every file starts with a comment carrying the resolved run configuration as
one line of JSON, so an output can be regenerated from itself.  Numbers are
written with 17 significant digits through ``repr``-style formatting, which
is locale-independent and round-trips float64 exactly.
"""
import json
import math
from xml.sax.saxutils import escape

import numpy as np

from .trace import COLUMNS, Trace

SWEEP_COLUMNS = ("t_int", "form_factor", "area", "perimeter", "lobes")


class EmptyInputError(ValueError):
    pass


def _num(x):
    return format(float(x), ".17g")


def config_comment(config, prefix="#"):
    return f"{prefix} config: {json.dumps(config, sort_keys=True, separators=(',', ':'))}"


def csv_text(records, config=None):
    """Render trace records; columns not populated by the run are omitted."""
    if isinstance(records, Trace):
        records = records.records
    if not records:
        raise EmptyInputError("no records to write")
    present = set(records[0].populated())
    cols = [c for c in COLUMNS if c in present]
    lines = [config_comment(config)] if config is not None else []
    lines.append(",".join(cols))
    for r in records:
        values = [getattr(r, c) for c in cols]
        if any(v is None or not math.isfinite(v) for v in values):
            raise ValueError(f"record at t={r.t!r} has missing or non-finite fields")
        lines.append(",".join(_num(v) for v in values))
    return "\n".join(lines) + "\n"


def sweep_csv_text(rows, config=None):
    """``rows`` is [(T_int, FormFactorReport)] in grid order."""
    if not rows:
        raise EmptyInputError("no sweep points to write")
    lines = [config_comment(config)] if config is not None else []
    lines.append("# area: sum of |lobe areas| over one full drive period")
    lines.append(",".join(SWEEP_COLUMNS))
    for t_int, rep in rows:
        lines.append(",".join([_num(t_int), _num(rep.form_factor), _num(rep.area),
                               _num(rep.perimeter), str(len(rep.lobes))]))
    return "\n".join(lines) + "\n"


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_csv(records, path, config=None):
    _write(path, csv_text(records, config))


def emit_sweep_csv(rows, path, config=None):
    _write(path, sweep_csv_text(rows, config))


def read_csv(path):
    """Columns of a file written by ``emit_csv`` as a dict of float arrays."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


# --- SVG -------------------------------------------------------------------

_W, _H, _M = 480, 400, 56


def _ticks(lo, hi, n=5):
    if hi - lo <= 0:
        return [lo]
    return list(np.linspace(lo, hi, n))


def svg_text(x, y, title="", xlabel="x", ylabel="y", form_factor=None, markers=False, config=None):
    """Static SVG of one polyline with axes, tick labels and a title.

    ``markers`` draws a dot at every point (used for sweep grid points).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size == 0 or x.shape != y.shape:
        raise EmptyInputError("nothing to plot")
    if x.size < 2:
        raise EmptyInputError("a plot needs at least 2 points")
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5
    pw, ph = _W - 2 * _M, _H - 2 * _M

    def px(v):
        return _M + (v - x0) / (x1 - x0) * pw

    def py(v):
        return _H - _M - (v - y0) / (y1 - y0) * ph

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
           f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">']
    if config is not None:
        out.append(f"<!-- {escape(config_comment(config, prefix='').strip()).replace('--', '- -')} -->")
    out.append(f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>')
    out.append(f'<g stroke="black" stroke-width="1">'
               f'<line x1="{_M}" y1="{_H - _M}" x2="{_W - _M}" y2="{_H - _M}"/>'
               f'<line x1="{_M}" y1="{_M}" x2="{_M}" y2="{_H - _M}"/></g>')
    for v in _ticks(x0, x1):
        out.append(f'<line x1="{px(v):.2f}" y1="{_H - _M}" x2="{px(v):.2f}" y2="{_H - _M + 4}" stroke="black"/>'
                   f'<text x="{px(v):.2f}" y="{_H - _M + 16}" text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(y0, y1):
        out.append(f'<line x1="{_M - 4}" y1="{py(v):.2f}" x2="{_M}" y2="{py(v):.2f}" stroke="black"/>'
                   f'<text x="{_M - 6}" y="{py(v) + 4:.2f}" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{_W / 2}" y="{_H - 14}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="14" y="{_H / 2}" text-anchor="middle" '
               f'transform="rotate(-90 14 {_H / 2})">{escape(ylabel)}</text>')
    out.append(f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>')
    pts = " ".join(f"{px(a):.3f},{py(b):.3f}" for a, b in zip(x, y))
    out.append(f'<polyline fill="none" stroke="#1f4e9e" stroke-width="1.5" points="{pts}"/>')
    if markers:
        out.extend(f'<circle cx="{px(a):.3f}" cy="{py(b):.3f}" r="3" fill="#c0392b"/>'
                   for a, b in zip(x, y))
    if form_factor is not None:
        out.append(f'<text x="{_W - _M}" y="{_M + 12}" text-anchor="end">F = {form_factor:.4f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(x, y, path, **kwargs):
    _write(path, svg_text(x, y, **kwargs))


def emit_loop_svg(loop, path, report=None, **kwargs):
    pts = loop.points if hasattr(loop, "points") else np.asarray(loop, dtype=float)
    pts = np.asarray(pts, dtype=float).reshape(-1, 2) if len(pts) else np.empty((0, 2))
    f = report.form_factor if report is not None else None
    emit_svg(pts[:, 0], pts[:, 1], path, form_factor=f, **kwargs)


def emit_sweep_svg(rows, path, **kwargs):
    if not rows:
        raise EmptyInputError("no sweep points to plot")
    g = [r[0] for r in rows]
    f = [r[1].form_factor if hasattr(r[1], "form_factor") else r[1] for r in rows]
    emit_svg(g, f, path, markers=True, **kwargs)
