"""Preimages of the unit circle, traced by marching squares."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage import measure

from .algebra import RationalMap, critical_portrait, is_inf, poly_roots
from .tolerance import DEFAULT, ToleranceProfile


@dataclass(frozen=True)
class LevelSet:
    curves: list[np.ndarray]
    extent: float
    resolution: int


def default_extent(f: RationalMap, tol: ToleranceProfile = DEFAULT) -> float:
    """Half-width of a square that holds the interesting part of the picture."""
    pts = [c for c, _ in critical_portrait(f, tol).points]
    for p in (f.num, f.den):
        if p.degree > 0:
            pts += [z for z, _ in poly_roots(p, tol)]
    finite = [abs(z) for z in pts if not is_inf(z)]
    return 1.5 * max([1.0, *finite])


def preimage_circle(
    f: RationalMap, extent: float | None = None, resolution: int = 801, tol: ToleranceProfile = DEFAULT
) -> LevelSet:
    """Curves where ``|f(z)| = 1`` inside ``[-extent, extent]^2``.

    The field ``|num| - |den|`` is contoured instead of ``|f| - 1`` so poles
    do not spoil the grid.
    """
    extent = default_extent(f, tol) if extent is None else float(extent)
    axis = np.linspace(-extent, extent, resolution)
    Z = axis[None, :] + 1j * axis[:, None]
    num = np.polynomial.polynomial.polyval(Z, f.num.coeffs)
    den = np.polynomial.polynomial.polyval(Z, f.den.coeffs)
    field = np.abs(num) - np.abs(den)
    step = axis[1] - axis[0]
    curves = []
    for c in measure.find_contours(field, 0.0):
        rows, cols = c[:, 0], c[:, 1]
        curves.append((-extent + cols * step) + 1j * (-extent + rows * step))
    curves.sort(key=lambda c: (-len(c), round(float(c.real.min()), 9), round(float(c.imag.min()), 9)))
    return LevelSet(curves, extent, resolution)
