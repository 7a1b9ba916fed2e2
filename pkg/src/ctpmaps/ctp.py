"""Marked maps and the finite CTP decision for four-point postcritical sets.

With ``B = f(A) ∪ V_f`` of size four and a nonempty regular set ``E`` whose
image is one point ``b``, every curve that could be essential encloses ``b``
together with exactly one critical value ``v``.  Its relevant preimage
component contains one point ``c`` over ``v`` and the fiber labels whose
lift of an arc ``b -> v`` ends at ``c``.  Twisting the arc by monodromy only
replaces ``E`` by another set of its orbit, so checking every pair
``(c, F)`` with ``F`` in the orbit of ``E`` decides the question.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .algebra import (
    INF,
    CriticalPortrait,
    Fiber,
    RationalMap,
    as_point,
    chordal,
    critical_portrait,
    dedupe_points,
    fiber_solve,
    format_point,
    point_key,
    same_point,
    sphere_sort_key,
)
from .errors import InputError, MarkedPointOnPoleOfAmbiguity
from .lifting import (
    PathSpec,
    StandardGenerators,
    arc_component_partition,
    concatenate,
    lift_path,
    loop_monodromy,
    standard_generators,
    track_fiber,
    validated_arc,
)
from .perm import PermGroup, Permutation, generate, orbit_of_set
from .tolerance import DEFAULT, ToleranceProfile


class Kind(str, enum.Enum):
    TRIVIAL = "trivial"
    BRANCHED = "branched"
    REGULAR = "regular"
    MIXING = "mixing"


class Verdict(str, enum.Enum):
    CTP = "CTP"
    NOT_CTP = "NOT_CTP"
    TRIVIALLY_CTP = "TRIVIALLY_CTP"
    UNDECIDED = "UNDECIDED"


class Method(str, enum.Enum):
    THREE_POINT = "three-point"
    FAST_PATH = "marked1-fastpath"
    FINITE_CHECK = "finite-check"
    OUT_OF_SCOPE = "out-of-scope"


@dataclass
class MarkedMap:
    f: RationalMap
    A: tuple[complex, ...]
    B: tuple[complex, ...]
    E: tuple[complex, ...]
    kind: Kind
    portrait: CriticalPortrait = field(repr=False)
    tol: ToleranceProfile = field(default=DEFAULT, repr=False)

    @property
    def image_of_regular(self) -> tuple[complex, ...]:
        return tuple(dedupe_points((self.f(a) for a in self.E), self.tol.membership))

    @property
    def single_image(self) -> bool:
        return len(self.image_of_regular) == 1

    @property
    def base(self) -> complex:
        if not self.single_image:
            raise InputError("regular points do not share one image")
        return self.image_of_regular[0]

    @property
    def exceptional(self) -> tuple[complex, ...]:
        """Marked points over critical values (``A`` minus ``E``)."""
        return tuple(a for a in self.A if not any(same_point(a, e, self.tol.membership) for e in self.E))

    def contains(self, z: complex) -> bool:
        return any(same_point(z, a, self.tol.membership) for a in self.A)

    def fiber(self) -> Fiber:
        return fiber_solve(self.f, self.base, self.tol)

    def regular_labels(self, fiber: Fiber) -> frozenset[int]:
        return frozenset(fiber.label_of(e, self.tol.membership) for e in self.E)


def classify(f: RationalMap, A: Iterable, tol: ToleranceProfile = DEFAULT) -> MarkedMap:
    A = tuple(as_point(a) for a in A)
    if len(dedupe_points(A, tol.membership)) != len(A):
        raise InputError("marked points must be distinct")
    if len(A) < 3:
        raise InputError("need at least three marked points")
    if f.degree < 2:
        raise InputError("need degree >= 2")
    portrait = critical_portrait(f, tol)
    images = [f(a) for a in A]
    B = tuple(sorted(dedupe_points(list(images) + list(portrait.values), tol.membership), key=sphere_sort_key))
    E = []
    for a, w in zip(A, images):
        over_critical = any(same_point(w, v, tol.membership) for v in portrait.values)
        _check_unambiguous(f, a, w, tol)
        if not over_critical:
            E.append(a)
    if len(A) == 3:
        kind = Kind.TRIVIAL
    elif not E:
        kind = Kind.BRANCHED
    elif len(E) == len(A):
        kind = Kind.REGULAR
    else:
        kind = Kind.MIXING
    return MarkedMap(f, A, B, tuple(E), kind, portrait, tol)


def _check_unambiguous(f: RationalMap, a: complex, w: complex, tol: ToleranceProfile) -> None:
    fib = fiber_solve(f, w, tol)
    near = [z for z in fib.points if chordal(z, a) <= tol.cluster * 10]
    if len(near) > 1:
        raise MarkedPointOnPoleOfAmbiguity(
            f"marked point {format_point(a)} is within the cluster radius of {len(near)} fiber points"
        )


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class Witness:
    """An essential preimage component: over ``value``, through ``point``,
    meeting the marked fiber labels ``labels``; ``count`` marked points."""

    value: complex
    point: complex
    labels: frozenset[int]
    count: int
    twist: Permutation | None = None

    def as_dict(self) -> dict:
        return {
            "value": format_point(self.value),
            "point": format_point(self.point),
            "labels": [i + 1 for i in sorted(self.labels)],
            "count": self.count,
        }


@dataclass(frozen=True)
class CtpReport:
    verdict: Verdict
    method: Method
    witness: Witness | None = None
    orbit_size: int = 0
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "method": self.method.value,
            "witness": None if self.witness is None else self.witness.as_dict(),
            "orbit_size": self.orbit_size,
        }

    def to_text(self) -> str:
        d = self.as_dict()
        lines = [f"verdict: {d['verdict']}", f"method: {d['method']}"]
        w = d["witness"]
        if w is None:
            lines.append("witness: none")
        else:
            lines.append(
                f"witness: value={w['value']} point={w['point']} "
                f"labels={','.join(map(str, w['labels']))} count={w['count']}"
            )
        lines.append(f"orbit_size: {d['orbit_size']}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# the decision


def ctp_decide(
    m: MarkedMap,
    orientation: str = "ccw",
    relabel: Sequence[int] | None = None,
) -> CtpReport:
    """Decide CTP where the finite reduction applies; UNDECIDED elsewhere.

    ``relabel`` permutes fiber labels before the search; the verdict must
    not depend on it.
    """
    tol = m.tol
    if len(m.A) == 3 or len(m.B) == 3:
        return CtpReport(Verdict.TRIVIALLY_CTP, Method.THREE_POINT)
    if not m.E:
        return CtpReport(Verdict.UNDECIDED, Method.OUT_OF_SCOPE, note="branched marked map")
    if not m.single_image:
        return CtpReport(Verdict.NOT_CTP, Method.FAST_PATH, witness=_split_image_witness(m, orientation))
    if len(m.B) != 4:
        return CtpReport(Verdict.UNDECIDED, Method.OUT_OF_SCOPE, note=f"{len(m.B)} postcritical points")

    b = m.base
    fiber = m.fiber()
    if relabel is not None:
        fiber = fiber.relabeled(relabel)
    gens = standard_generators(m.f, b, tol, orientation, m.portrait)
    if relabel is None:
        rho = {v: gens.rho[v] for v in gens.ordered}
    else:
        rho = {v: loop_monodromy(m.f, gens.loops[v], fiber, tol, m.portrait) for v in gens.ordered}
    group = generate({format_point(v, 10): p for v, p in rho.items()}, tol.group_order_bound)
    orbit = orbit_of_set(group, m.regular_labels(fiber))
    limit = len(m.A) - 1
    for v in sorted(m.portrait.values, key=sphere_sort_key):
        part = arc_component_partition(m.f, b, v, fiber, None, tol, m.portrait)
        for c in sorted(part.groups, key=point_key):
            bonus = 1 if m.contains(c) else 0
            for F in orbit:
                count = len(part.groups[c] & F) + bonus
                if 1 < count < limit:
                    return CtpReport(
                        Verdict.NOT_CTP, Method.FINITE_CHECK, Witness(v, c, F, count), len(orbit)
                    )
    return CtpReport(Verdict.CTP, Method.FINITE_CHECK, orbit_size=len(orbit))


def finite_group(gens: StandardGenerators, bound: int | None = None) -> PermGroup:
    """Group generated by the loops around finite critical values."""
    return generate({format_point(v, 10): gens.rho[v] for v in gens.ordered}, bound)


def monodromy(m: MarkedMap, orientation: str = "ccw") -> tuple[StandardGenerators, PermGroup]:
    gens = standard_generators(m.f, m.base, m.tol, orientation, m.portrait)
    return gens, finite_group(gens, m.tol.group_order_bound)


def _split_image_witness(m: MarkedMap, orientation: str) -> Witness:
    """Two regular points with different images lie on one lift of an arc."""
    tol = m.tol
    a0 = m.E[0]
    b0 = m.f(a0)
    a1 = next(a for a in m.E if not same_point(m.f(a), b0, tol.membership))
    b1 = m.f(a1)
    fiber = fiber_solve(m.f, b0, tol)
    gens = standard_generators(m.f, b0, tol, orientation, m.portrait)
    group = finite_group(gens, tol.group_order_bound)
    arc = validated_arc(b0, b1, m.portrait.values, tol)
    start = fiber.label_of(a0, tol.membership)
    target = None
    ends, _ = track_fiber(m.f, arc, fiber, tol, m.portrait)
    for label, z in enumerate(ends):
        if same_point(complex(z), a1, 1e-6):
            target = label
    if target is None:
        raise InputError("no lift of the connecting arc reaches the second point")
    twist = next(t for t in group.elements if t(start) == target)
    return Witness(b1, a1, frozenset({start}), 2, twist)


def twisted_arc(m: MarkedMap, witness: Witness, orientation: str = "ccw") -> PathSpec:
    """Loop realizing ``witness.twist`` followed by the arc to ``witness.value``."""
    a0 = m.E[0]
    b0 = m.f(a0)
    gens = standard_generators(m.f, b0, m.tol, orientation, m.portrait)
    word = _word_for(gens, witness.twist)
    arc = validated_arc(b0, witness.value, m.portrait.values, m.tol)
    return concatenate(*word, arc) if word else arc


def _word_for(gens: StandardGenerators, target: Permutation) -> list[PathSpec]:
    """Loops (applied first to last) whose monodromy is ``target``."""
    steps = []
    for v in gens.ordered:
        steps.append((gens.rho[v], gens.loops[v]))
        steps.append((gens.rho[v].inverse(), gens.loops[v].reversed()))
    ident = Permutation.identity(target.degree)
    prev = {ident: None}
    frontier = [ident]
    while frontier and target not in prev:
        nxt = []
        for cur in frontier:
            for perm, loop in steps:
                new = perm * cur
                if new not in prev:
                    prev[new] = (cur, loop)
                    nxt.append(new)
        frontier = nxt
    loops = []
    cur = target
    while prev[cur] is not None:
        cur, loop = prev[cur][0], prev[cur][1]
        loops.append(loop)
    return list(reversed(loops))


def recount_witness(m: MarkedMap, report: CtpReport, orientation: str = "ccw") -> int:
    """Recount the witness by lifting single points, independently of the
    grouping used by the decision."""
    w = report.witness
    if w is None:
        raise InputError("report has no witness")
    tol = m.tol
    if report.method is Method.FAST_PATH:
        a0 = m.E[0]
        path = twisted_arc(m, w, orientation)
        end, _ = lift_path(m.f, path, a0, tol, m.portrait)
        reached = 1 if same_point(end, w.point, 1e-6) else 0
        return 1 + reached
    b = m.base
    fiber = m.fiber()
    arc = validated_arc(b, w.value, m.portrait.values, tol)
    hits = 0
    for label in sorted(w.labels):
        end, _ = lift_path(m.f, arc, fiber.points[label], tol, m.portrait)
        if same_point(end, w.point, 1e-6):
            hits += 1
    return hits + (1 if m.contains(w.point) else 0)


def with_regular_set(m: MarkedMap, points: Iterable[complex]) -> MarkedMap:
    """Same map with ``E`` replaced by ``points`` and the rest of ``A`` kept."""
    return classify(m.f, tuple(points) + m.exceptional, m.tol)


__all__ = [
    "CtpReport",
    "INF",
    "Kind",
    "MarkedMap",
    "Method",
    "Verdict",
    "Witness",
    "classify",
    "ctp_decide",
    "finite_group",
    "monodromy",
    "recount_witness",
    "twisted_arc",
    "with_regular_set",
]
