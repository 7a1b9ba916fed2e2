"""Matplotlib PNG figures for reports (Agg backend, no display needed)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dessin import BranchedTree, edge_trace  # noqa: E402
from .svg import SIDE_COLOURS  # noqa: E402

# PNG metadata would otherwise embed the matplotlib version
_META = {"Software": None}


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)
    return path


def curves_png(
    curves: Sequence[np.ndarray],
    path: str | Path,
    markers: Sequence[tuple[complex, str]] = (),
    title: str = "",
) -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    for c in curves:
        ax.plot(c.real, c.imag, color="#1f4e9c", lw=1.0)
    for z, colour in markers:
        if np.isfinite(z):
            ax.plot([z.real], [z.imag], "o", color=colour, ms=4)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def tree_png(T: BranchedTree, path: str | Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 5))
    for e in T.edges:
        tr = np.asarray(edge_trace(T, e.id))
        ax.plot(tr.real, tr.imag, color="#444444", lw=1.2)
        mid = tr[len(tr) // 2]
        ax.annotate(str(e.id + 1), (mid.real, mid.imag), fontsize=8, color="#444444")
    for v in T.vertices:
        ax.plot([v.position.real], [v.position.imag], "o", color=SIDE_COLOURS[v.side], ms=6, mec="black")
    ax.set_aspect("equal")
    ax.set_title(title or f"branched tree of {T.f.name or 'map'}")
    return _save(fig, path)


def residuals_png(ks: Sequence[complex], residuals: Sequence[float], threshold: float, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    radii = np.abs(np.asarray(ks))
    floor = np.maximum(np.asarray(residuals, dtype=float), 1e-18)
    ax.semilogy(radii, floor, "o", color="#1f4e9c")
    ax.axhline(threshold, color="#c8102e", ls="--", lw=1)
    ax.set_xlabel("|k|")
    ax.set_ylabel("|a1 + zeta a2 + zeta^2 a3|")
    return _save(fig, path)
