"""Standalone SVG rendering of predicted-vs-actual traces.

The base series is drawn solid; prediction traces cycle through dashed
and dotted strokes, in the order given.
"""

from __future__ import annotations

import numpy as np

from .dynamics import TimeSeries

_DASHES = ["8,4", "2,3", "8,4,2,4", "1,2"]
_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd"]

_WIDTH, _HEIGHT = 900, 420
_MARGIN = 50


def _scale(vals, lo, hi, out_lo, out_hi):
    if hi == lo:
        return np.full_like(np.asarray(vals, dtype=float), (out_lo + out_hi) / 2)
    return out_lo + (np.asarray(vals, dtype=float) - lo) * (out_hi - out_lo) / (hi - lo)


def _polyline(xs, ys, color, dash=None, width=1.5):
    pts = " ".join("%.2f,%.2f" % (x, y) for x, y in zip(xs, ys))
    dash_attr = ' stroke-dasharray="%s"' % dash if dash else ""
    return ('<polyline fill="none" stroke="%s" stroke-width="%.1f"%s points="%s"/>'
            % (color, width, dash_attr, pts))


def plot_forecast(series: TimeSeries, predictions: dict, window=None) -> str:
    """Render the series plus per-method prediction traces as an SVG string.

    predictions maps method name -> array aligned with series.values
    (non-finite entries are allowed and skipped).  window = (t_lo, t_hi)
    restricts the plotted time range.
    """
    t = series.times()
    if window is not None:
        lo, hi = window
        mask = (t >= lo) & (t <= hi)
        if not mask.any():
            raise ValueError("empty plot window")
    else:
        mask = np.ones(len(t), dtype=bool)
    t_v = t[mask]
    traces = [("series", series.values[mask], "#000000", None)]
    for i, (name, pred) in enumerate(predictions.items()):
        pred = np.asarray(pred, dtype=float)
        if len(pred) != len(series):
            raise ValueError("prediction %r not aligned with series" % name)
        traces.append((name, pred[mask], _COLORS[i % len(_COLORS)],
                       _DASHES[i % len(_DASHES)]))

    all_vals = np.concatenate([v[np.isfinite(v)] for _, v, _, _ in traces])
    v_lo, v_hi = float(all_vals.min()), float(all_vals.max())
    pad = 0.05 * (v_hi - v_lo or 1.0)
    v_lo, v_hi = v_lo - pad, v_hi + pad
    t_lo, t_hi = float(t_v[0]), float(t_v[-1])

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        'viewBox="0 0 %d %d">' % (_WIDTH, _HEIGHT),
        '<rect width="%d" height="%d" fill="white"/>' % (_WIDTH, _HEIGHT),
        '<rect x="%d" y="%d" width="%d" height="%d" fill="none" stroke="#888"/>'
        % (_MARGIN, _MARGIN, _WIDTH - 2 * _MARGIN, _HEIGHT - 2 * _MARGIN),
    ]
    for name, vals, color, dash in traces:
        good = np.isfinite(vals)
        xs = _scale(t_v[good], t_lo, t_hi, _MARGIN, _WIDTH - _MARGIN)
        ys = _scale(vals[good], v_lo, v_hi, _HEIGHT - _MARGIN, _MARGIN)
        parts.append(_polyline(xs, ys, color, dash))
    # legend
    y = 20
    x = _MARGIN
    for name, _vals, color, dash in traces:
        parts.append(_polyline([x, x + 30], [y, y], color, dash))
        parts.append('<text x="%d" y="%d" font-size="12">%s</text>'
                     % (x + 36, y + 4, name))
        x += 44 + 8 * len(name)
    parts.append('<text x="%d" y="%d" font-size="12">t [s]</text>'
                 % (_WIDTH // 2, _HEIGHT - 12))
    parts.append("</svg>")
    return "\n".join(parts)
