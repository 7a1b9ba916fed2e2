"""Plain-text SVG 1.1 output for trees and level curves.

Drawings are assembled from strings so that identical inputs give
byte-identical files.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .dessin import BranchedTree, edge_trace

SIDE_COLOURS = ("#1f4e9c", "#c8102e")
_SIZE = 480
_MARGIN = 24


def _num(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


class _Frame:
    """Affine map from a complex-plane box to SVG pixel coordinates."""

    def __init__(self, points: Sequence[complex], size: int = _SIZE, margin: int = _MARGIN):
        pts = np.asarray([p for p in points if np.isfinite(p)], dtype=complex)
        if pts.size == 0:
            pts = np.array([0j])
        lo_x, hi_x = pts.real.min(), pts.real.max()
        lo_y, hi_y = pts.imag.min(), pts.imag.max()
        span = max(hi_x - lo_x, hi_y - lo_y, 1e-9)
        self.scale = (size - 2 * margin) / span
        self.cx = (lo_x + hi_x) / 2
        self.cy = (lo_y + hi_y) / 2
        self.size = size

    def xy(self, z: complex) -> tuple[str, str]:
        x = self.size / 2 + (z.real - self.cx) * self.scale
        y = self.size / 2 - (z.imag - self.cy) * self.scale
        return _num(x), _num(y)


def _polyline(frame: _Frame, pts: Iterable[complex], stroke: str, width: float = 1.5, closed: bool = False) -> str:
    cells = []
    for z in pts:
        cell = ",".join(frame.xy(z))
        if not cells or cells[-1] != cell:
            cells.append(cell)
    coords = " ".join(cells)
    tag = "polygon" if closed else "polyline"
    return f'  <{tag} points="{coords}" fill="none" stroke="{stroke}" stroke-width="{_num(width)}"/>'


def _document(frame: _Frame, body: list[str], title: str) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{frame.size}" '
        f'height="{frame.size}" viewBox="0 0 {frame.size} {frame.size}">',
        f"  <title>{_escape(title)}</title>",
        f'  <rect x="0" y="0" width="{frame.size}" height="{frame.size}" fill="white"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def tree_svg(T: BranchedTree, title: str | None = None) -> str:
    traces = [edge_trace(T, e.id) for e in T.edges]
    frame = _Frame([z for tr in traces for z in tr] + [v.position for v in T.vertices])
    body = [_polyline(frame, tr, "#444444") for tr in traces]
    for v in T.vertices:
        x, y = frame.xy(v.position)
        body.append(
            f'  <circle cx="{x}" cy="{y}" r="5" fill="{SIDE_COLOURS[v.side]}" stroke="black" stroke-width="0.5"/>'
        )
    for e, tr in zip(T.edges, traces):
        x, y = frame.xy(tr[len(tr) // 2])
        body.append(f'  <text x="{x}" y="{y}" font-size="10" fill="#444444">{e.id + 1}</text>')
    return _document(frame, body, title or f"branched tree of {T.f.name or 'map'}")


def curves_svg(
    curves: Sequence[np.ndarray],
    markers: Sequence[tuple[complex, str]] = (),
    title: str = "level curves",
    frame_points: Sequence[complex] | None = None,
) -> str:
    """Closed or open curves plus labelled marker dots."""
    pts = list(frame_points) if frame_points is not None else [z for c in curves for z in c]
    pts += [z for z, _ in markers]
    frame = _Frame(pts)
    body = []
    for c in curves:
        closed = len(c) > 2 and abs(c[0] - c[-1]) < 1e-12
        body.append(_polyline(frame, c[:-1] if closed else c, "#1f4e9c", 1.2, closed))
    for z, colour in markers:
        if not np.isfinite(z):
            continue
        x, y = frame.xy(z)
        body.append(f'  <circle cx="{x}" cy="{y}" r="3" fill="{colour}"/>')
    return _document(frame, body, title)
