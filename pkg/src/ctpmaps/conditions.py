"""Factorization conditions, stabilizer reports and cross-ratio checks.

The only inner factors searched for are power maps ``(z - c)^d``.  They
are found through the affine symmetry group of ``f``: if ``f`` commutes with
a rotation of order ``d`` about ``c`` then ``f`` is a function of
``(z - c)^d``.
"""

from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    INF,
    RationalMap,
    as_point,
    chordal,
    coefficient_distance,
    compose,
    critical_portrait,
    dedupe_points,
    fiber_solve,
    format_point,
    is_inf,
    mixing_map,
    power_map,
    same_point,
)
from .ctp import MarkedMap, finite_group
from .errors import BranchResolutionFailure, DegenerateQuadruple, GenericFiberUnavailable, InputError
from .lifting import arc_component_partition, standard_generators
from .perm import PermGroup, Permutation, stabilizers
from .tolerance import DEFAULT, ToleranceProfile

ZETA3 = cmath.exp(2j * math.pi / 3)


# ---------------------------------------------------------------------------
# affine symmetries


@dataclass(frozen=True)
class SymmetryGroup:
    """Rotations ``z -> zeta^k (z - center) + center`` with ``f`` invariant."""

    order: int
    center: complex

    @property
    def zeta(self) -> complex:
        return cmath.exp(2j * math.pi / self.order)

    def rotation(self, k: int = 1) -> tuple[complex, complex]:
        """(alpha, beta) with lambda(z) = alpha z + beta."""
        alpha = self.zeta**k
        return alpha, self.center * (1 - alpha)

    def elements(self) -> list[tuple[complex, complex]]:
        return [self.rotation(k) for k in range(self.order)]

    def to_text(self) -> str:
        return f"order: {self.order}\ncenter: {format_point(self.center)}\n"

    def as_dict(self) -> dict:
        return {"order": self.order, "center": format_point(self.center)}


def precompose_affine(f: RationalMap, alpha: complex, beta: complex) -> RationalMap:
    return RationalMap(f.num.compose_affine(alpha, beta), f.den.compose_affine(alpha, beta))


def generic_fiber(f: RationalMap, tol: ToleranceProfile = DEFAULT, retries: int = 16):
    portrait = critical_portrait(f, tol)
    avoid = list(portrait.values) + [f(INF)]
    for k in range(retries):
        w = (0.55 + 0.31 * k) * cmath.exp(1j * (0.7 + 1.3 * k))
        if any(chordal(w, v) < 1e-3 for v in avoid):
            continue
        fib = fiber_solve(f, w, tol)
        if fib.is_simple and len(fib) == f.degree and fib.min_separation() > 1e-6:
            if not any(is_inf(z) for z in fib.points):
                return fib
    raise GenericFiberUnavailable(f"no generic fiber after {retries} base points")


def _snap_root_of_unity(alpha: complex, max_order: int) -> complex:
    best = 1.0 + 0j
    for n in range(1, max_order + 1):
        k = round(cmath.phase(alpha) * n / (2 * math.pi))
        cand = cmath.exp(2j * math.pi * k / n)
        if abs(cand - alpha) < abs(best - alpha):
            best = cand
    return best


def affine_symmetries(f: RationalMap, tol: ToleranceProfile = DEFAULT) -> SymmetryGroup:
    """All affine ``lambda`` with ``f o lambda == f``; always a rotation group."""
    if f.degree < 2:
        raise InputError("need degree >= 2")
    fib = generic_fiber(f, tol)
    pts = fib.points
    z0, z1 = pts[0], pts[1]
    found: list[tuple[complex, complex]] = []
    for zj, zl in itertools.permutations(pts, 2):
        alpha = (zj - zl) / (z0 - z1)
        if abs(abs(alpha) - 1) > 1e-6:
            continue
        alpha = _snap_root_of_unity(alpha, f.degree)
        if alpha == 1:
            # a nontrivial translation cannot preserve a nonconstant map
            if abs(zj - z0) > 1e-8 * (1 + abs(z0)):
                continue
            beta = 0j
        else:
            centre = (zj - alpha * z0) / (1 - alpha)
            beta = centre * (1 - alpha)
        if not all(min(abs(alpha * z + beta - w) for w in pts) < 1e-6 * (1 + abs(z)) for z in pts):
            continue
        g = precompose_affine(f, alpha, beta)
        if coefficient_distance(g, f) < tol.coefficient:
            if not any(abs(alpha - a) < 1e-9 and abs(beta - b) < 1e-8 for a, b in found):
                found.append((alpha, beta))
    order = len(found)
    if order <= 1:
        return SymmetryGroup(1, 0j)
    gen = min(found, key=lambda ab: abs(ab[0] - cmath.exp(2j * math.pi / order)))
    centre = gen[1] / (1 - gen[0])
    return SymmetryGroup(order, centre)


# ---------------------------------------------------------------------------
# power factorization


@dataclass(frozen=True)
class PowerFactor:
    outer: RationalMap
    degree: int
    center: complex

    def inner(self) -> RationalMap:
        return power_map(self.degree, self.center)

    def as_dict(self) -> dict:
        return {
            "d": self.degree,
            "c": format_point(self.center),
            "g_numerator": [format_point(a) for a in self.outer.num.coeffs],
            "g_denominator": [format_point(a) for a in self.outer.den.coeffs],
        }


def is_rotation_orbit(points: Sequence[complex], d: int, centre: complex, radius: float = 1e-6) -> bool:
    if len(points) != d or any(is_inf(p) for p in points):
        return False
    first = points[0]
    if abs(first - centre) <= radius:
        return False
    zeta = cmath.exp(2j * math.pi / d)
    orbit = [centre + zeta**k * (first - centre) for k in range(d)]
    return all(any(same_point(p, q, radius) for q in points) for p in orbit)


def extract_power_factor(f: RationalMap, d: int, centre: complex, tol: ToleranceProfile = DEFAULT) -> RationalMap | None:
    """``g`` with ``f = g o (z - centre)^d``, or None if ``f`` is not of that form."""
    num = f.num.compose_affine(1.0, centre).coeffs
    den = f.den.compose_affine(1.0, centre).coeffs
    scale = max(np.max(np.abs(num)), np.max(np.abs(den)))
    parts = []
    for c in (num, den):
        off = np.array([a for i, a in enumerate(c) if i % d])
        if off.size and np.max(np.abs(off)) > tol.coefficient * scale * 10:
            return None
        parts.append(c[::d].copy())
    g = RationalMap(parts[0], parts[1])
    if coefficient_distance(compose(g, power_map(d, centre), tol), f) > tol.coefficient:
        return None
    return g


def power_factor(
    f: RationalMap, E_points: Iterable[complex], tol: ToleranceProfile = DEFAULT
) -> PowerFactor | None:
    """Largest power map ``(z - c)^d`` through which ``f`` factors with the
    marked points ``E_points`` forming one rotation orbit about ``c``."""
    pts = [as_point(p) for p in E_points]
    if not pts:
        raise InputError("need at least one marked point")
    sym = affine_symmetries(f, tol)
    for d in sorted((k for k in range(2, sym.order + 1) if sym.order % k == 0), reverse=True):
        if not is_rotation_orbit(pts, d, sym.center):
            continue
        g = extract_power_factor(f, d, sym.center, tol)
        if g is not None:
            return PowerFactor(g, d, sym.center)
    return None


# ---------------------------------------------------------------------------
# stabilizers


@dataclass(frozen=True)
class StabReport:
    group_order: int
    regular_labels: frozenset[int]
    marked_labels: frozenset[int]
    per_point: dict[int, frozenset[Permutation]]
    setwise: frozenset[Permutation]
    pointwise: frozenset[Permutation]
    pointwise_equal: bool
    nonempty_difference: bool
    setwise_containment: bool
    intersection_identity: bool
    k_star: int | None

    def as_dict(self) -> dict:
        return {
            "group_order": self.group_order,
            "regular_labels": [i + 1 for i in sorted(self.regular_labels)],
            "stab_point_orders": {str(a + 1): len(s) for a, s in sorted(self.per_point.items())},
            "stab_set_order": len(self.setwise),
            "stab_pointwise_order": len(self.pointwise),
            "pointwise_equal": self.pointwise_equal,
            "nonempty_difference": self.nonempty_difference,
            "setwise_containment": self.setwise_containment,
            "intersection_identity": self.intersection_identity,
            "k_star": self.k_star,
        }

    def to_text(self) -> str:
        lines = []
        for key, val in self.as_dict().items():
            if isinstance(val, dict):
                val = " ".join(f"{k}:{v}" for k, v in val.items())
            elif isinstance(val, list):
                val = ",".join(map(str, val))
            elif isinstance(val, bool):
                val = str(val).lower()
            lines.append(f"{key}: {val}")
        return "\n".join(lines) + "\n"


def stab_report_from_group(G: PermGroup, E: Iterable[int], A: Iterable[int] | None = None) -> StabReport:
    """Stabilizer predicates for regular labels ``E``.

    ``A`` defaults to ``E``; it matters only for ``setwise_containment``,
    which compares with the setwise stabilizer of the marked labels in the
    fiber.
    """
    E = frozenset(E)
    A = E if A is None else frozenset(A)
    st = stabilizers(G, E)
    marked_setwise = st.setwise if A == E else stabilizers(G, A).setwise
    stab_sets = st.per_point.values()
    pointwise_equal = all(s == st.pointwise for s in stab_sets)
    nonempty_difference = all(s - st.pointwise for s in stab_sets)
    setwise_containment = all(s <= marked_setwise for s in stab_sets)
    intersection_identity = all(st.pointwise == (s & st.setwise) for s in stab_sets)
    k_star = None
    exponent = math.lcm(*(t.order() for t in G.elements))
    for k in range(1, exponent + 1):
        if all(t**k in st.pointwise for s in stab_sets for t in s):
            k_star = k
            break
    return StabReport(
        G.order, E, A, st.per_point, st.setwise, st.pointwise,
        pointwise_equal, nonempty_difference, setwise_containment, intersection_identity, k_star,
    )


def stab_report(m: MarkedMap, orientation: str = "ccw") -> StabReport:
    """Stabilizer report of the regular set of a marked map."""
    if not m.E:
        raise InputError("regular set is empty")
    fiber = m.fiber()
    gens = standard_generators(m.f, m.base, m.tol, orientation, m.portrait)
    G = finite_group(gens, m.tol.group_order_bound)
    E = m.regular_labels(fiber)
    A = frozenset(i for i, z in enumerate(fiber.points) if m.contains(z))
    return stab_report_from_group(G, E, A)


# ---------------------------------------------------------------------------
# McMullen's condition (power-map case)


class McMullen(str, enum.Enum):
    SATISFIED_VIA_POWER_MAP = "satisfied-via-power-map"
    NOT_SATISFIED = "not-satisfied"
    NOT_SATISFIED_VIA_POWER_MAP = "not-satisfied-via-power-map"
    OUT_OF_SCOPE = "out-of-scope"


def power_image_count(m: MarkedMap, pf: PowerFactor) -> int:
    P = pf.inner()
    images = [P(a) for a in m.A] + [0j, INF]
    return len(dedupe_points(images, m.tol.membership))


def mcmullen_verdict(m: MarkedMap, orientation: str = "ccw") -> tuple[McMullen, PowerFactor | None]:
    """Check McMullen's condition with power-map inner factors.

    A failed stabilizer test is a definitive negative; a missing power
    factor alone is not.
    """
    if not m.E:
        return McMullen.OUT_OF_SCOPE, None
    pf = power_factor(m.f, m.E, m.tol)
    if pf is not None and power_image_count(m, pf) == 3:
        return McMullen.SATISFIED_VIA_POWER_MAP, pf
    if m.single_image and not stab_report(m, orientation).pointwise_equal:
        return McMullen.NOT_SATISFIED, pf
    return McMullen.NOT_SATISFIED_VIA_POWER_MAP, pf


def verify_factorization(f: RationalMap, outer: RationalMap, inner: RationalMap, tol: ToleranceProfile = DEFAULT) -> float:
    """Coefficient distance between ``f`` and ``outer o inner``."""
    return coefficient_distance(compose(outer, inner, tol), f)


# ---------------------------------------------------------------------------
# cross-ratio and the closed-form fiber of the mixing map


def cross_ratio(z0, z1, z2, z3) -> complex:
    """((z3 - z0)(z2 - z1)) / ((z2 - z0)(z3 - z1)); factors containing
    infinity are dropped, so ``cross_ratio(0, inf, a, w) == w / a``."""
    z = [as_point(p) for p in (z0, z1, z2, z3)]
    for p, q in itertools.combinations(z, 2):
        if (is_inf(p) and is_inf(q)) or (not is_inf(p) and not is_inf(q) and p == q):
            raise DegenerateQuadruple("cross-ratio needs four distinct points")

    def diff(i, j):
        if is_inf(z[i]) or is_inf(z[j]):
            return None
        return z[i] - z[j]

    num = [diff(3, 0), diff(2, 1)]
    den = [diff(2, 0), diff(3, 1)]
    top = math.prod(x for x in num if x is not None)
    bottom = math.prod(x for x in den if x is not None)
    return complex(top / bottom)


def regular_points_near(b: complex, target: complex = 1j * math.sqrt(3), tol: ToleranceProfile = DEFAULT) -> list[complex]:
    """Fiber points of the mixing map over ``b`` whose lift of ``[b, 0]``
    ends at ``target`` (``i*sqrt(3)`` by default)."""
    R = mixing_map()
    portrait = critical_portrait(R, tol)
    fib = fiber_solve(R, b, tol)
    part = arc_component_partition(R, b, 0j, fib, None, tol, portrait)
    for c, labels in part.groups.items():
        if abs(c - target) < 1e-6:
            return [fib.points[i] for i in sorted(labels)]
    raise InputError("no lift group ends at the target")


@dataclass(frozen=True)
class ClosedFormCheck:
    k: complex
    residual: float
    points: tuple[complex, complex, complex]
    signs: tuple[int, ...]
    chi: complex


def closed_form_candidates(k: complex):
    """All 64 sign choices for the closed-form points, as (signs, points)."""
    for signs in itertools.product((1, -1), repeat=6):
        pts = []
        for j in range(3):
            z = ZETA3**j
            t = 1 + k * z + k * k * z * z
            inner = signs[2 * j] * cmath.sqrt(t)
            pts.append(signs[2 * j + 1] * 1j * cmath.sqrt(1 + 2 * k * z + 2 * inner))
        yield signs, tuple(pts)


def closed_form_check(k: complex, tol: ToleranceProfile = DEFAULT) -> ClosedFormCheck:
    k = complex(k)
    b = k**3
    if k == 0 or abs(b - 1) < 1e-9:
        raise InputError("k must be nonzero with k^3 != 1")
    R = mixing_map()
    E = regular_points_near(b, tol=tol)
    best = None
    for signs, pts in closed_form_candidates(k):
        if any(abs(R(p) - b) > 1e-8 * (1 + abs(b)) for p in pts):
            continue
        matched = [min(range(3), key=lambda i: abs(p - E[i])) for p in pts]
        if sorted(matched) != [0, 1, 2] or any(abs(p - E[i]) > 1e-8 for p, i in zip(pts, matched)):
            continue
        res = abs(pts[0] + ZETA3 * pts[1] + ZETA3**2 * pts[2])
        if best is None or res < best[0]:
            best = (res, signs, pts)
    if best is None:
        raise BranchResolutionFailure(f"no branch choice reproduces the regular fiber points at k={k}")
    res, signs, pts = best
    chi = cross_ratio(pts[0], pts[1], pts[2], INF)
    return ClosedFormCheck(k, float(res), pts, signs, chi)


def appendix_residual(k: complex, tol: ToleranceProfile = DEFAULT) -> float:
    return closed_form_check(k, tol).residual


def sample_annulus(n: int = 20, rmin: float = 0.05, rmax: float = 0.5, seed: int = 0) -> list[complex]:
    """Deterministic sample of ``k`` in the annulus ``rmin <= |k| <= rmax``."""
    rng = np.random.default_rng(seed)
    radii = rng.uniform(rmin, rmax, n)
    angles = rng.uniform(0, 2 * math.pi, n)
    return [complex(r * cmath.exp(1j * a)) for r, a in zip(radii, angles)]
