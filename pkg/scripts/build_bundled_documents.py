"""Regenerate the map documents shipped in ``src/ctpmaps/data``."""

from __future__ import annotations

import cmath
import math
from pathlib import Path

from ctpmaps.algebra import INF, RationalMap, fiber_solve, mixing_map, saenz_map
from ctpmaps.conditions import regular_points_near
from ctpmaps.documents import dump, from_map

DATA = Path(__file__).resolve().parents[1] / "src" / "ctpmaps" / "data"


def main() -> None:
    DATA.mkdir(exist_ok=True)
    S = saenz_map()
    b_s = complex(0.3, 0.4)
    dump(from_map(S, fiber_solve(S, b_s).points, name="S", base_point=b_s), DATA / "s.json")

    R = mixing_map()
    E = regular_points_near(1j)
    dump(from_map(R, [*E, INF], name="R", base_point=1j), DATA / "r.json")

    cubic = RationalMap([0, 0, 3, -2], name="3z^2-2z^3")
    fib = fiber_solve(cubic, 0.5).points
    dump(from_map(cubic, [*fib, 0j], name="3z^2-2z^3"), DATA / "notctp.json")

    z3 = RationalMap([0, 0, 0, 1], name="z^3")
    omega = cmath.exp(2j * math.pi / 3)
    dump(from_map(z3, [1, omega, 2, INF], name="z^3"), DATA / "z3.json")

    mc = RationalMap([0, 0, 0, 1, 0, 0, 1], name="z^6+z^3")
    roots = [0.1 ** (1 / 3) * cmath.exp(2j * math.pi * k / 3) for k in range(3)]
    dump(from_map(mc, [*roots, 0j, INF], name="z^6+z^3"), DATA / "mcmullen.json")


if __name__ == "__main__":
    main()
