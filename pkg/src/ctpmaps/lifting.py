"""Continuation of fibers along paths on the sphere.

All preimages of the path's start are tracked together.  Each tracked point
lives in one of two affine charts (``z`` when ``|z| <= 1``, ``u = 1/z``
otherwise), so lifts can pass through or end at infinity.  A step is
accepted only when Newton's method converges for every point and no point
moves more than a third of the current minimal separation of the fiber,
which rules out jumping between sheets.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    INF,
    CriticalPortrait,
    Fiber,
    RationalMap,
    as_point,
    chordal,
    critical_portrait,
    fiber_solve,
    format_point,
    is_inf,
    same_point,
)
from .errors import (
    AmbiguousMatching,
    InputError,
    LiftCollision,
    PartitionInconsistent,
    PathTooCloseToCriticalValue,
    RoutingFailure,
    StepUnderflow,
)
from .perm import Permutation
from .tolerance import DEFAULT, ToleranceProfile

ORIENTATIONS = ("ccw", "cw")
_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Segment:
    """Straight piece.  A piece ending (or starting) at infinity is the ray
    through its finite endpoint, interpolated linearly in ``1/w``."""

    start: complex
    end: complex

    def __post_init__(self):
        if is_inf(self.start) and is_inf(self.end):
            raise InputError("segment between infinity and itself")
        if not is_inf(self.start) and not is_inf(self.end) and abs(self.start - self.end) <= 1e-12:
            raise InputError("consecutive anchors coincide")
        if (is_inf(self.start) and self.end == 0) or (is_inf(self.end) and self.start == 0):
            raise InputError("ray through the origin is undefined")

    def homogeneous(self, s: float) -> tuple[complex, complex]:
        a, b = self.start, self.end
        if is_inf(b):
            return (1.0 + 0j, (1.0 - s) / a)
        if is_inf(a):
            return (1.0 + 0j, s / b)
        return ((1.0 - s) * a + s * b, 1.0 + 0j)

    def distance_to(self, v: complex) -> float:
        a, b = self.start, self.end
        if is_inf(a) or is_inf(b):
            if is_inf(v):
                return 0.0
            if v == 0:
                return math.inf
            p, q = (1.0 / a, 0j) if is_inf(b) else (0j, 1.0 / b)
            return _point_segment(1.0 / v, p, q)
        if is_inf(v):
            return math.inf
        return _point_segment(v, a, b)

    def reversed(self) -> "Segment":
        return Segment(self.end, self.start)


@dataclass(frozen=True)
class Arc:
    center: complex
    radius: float
    start_angle: float
    turns: float

    def __post_init__(self):
        if not self.radius > 0:
            raise InputError("circle radius must be positive")

    @property
    def start(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * self.start_angle)

    @property
    def end(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * (self.start_angle + 2 * math.pi * self.turns))

    def homogeneous(self, s: float) -> tuple[complex, complex]:
        w = self.center + self.radius * cmath.exp(1j * (self.start_angle + 2 * math.pi * self.turns * s))
        return (w, 1.0 + 0j)

    def distance_to(self, v: complex) -> float:
        if is_inf(v):
            return math.inf
        if abs(self.turns) >= 1:
            return abs(abs(v - self.center) - self.radius)
        s = np.linspace(0.0, 1.0, 2049)
        pts = self.center + self.radius * np.exp(1j * (self.start_angle + 2 * np.pi * self.turns * s))
        return float(np.min(np.abs(pts - v)))

    def reversed(self) -> "Arc":
        return Arc(self.center, self.radius, self.start_angle + 2 * math.pi * self.turns, -self.turns)


def _point_segment(v: complex, a: complex, b: complex) -> float:
    d = b - a
    t = ((v - a) * d.conjugate()).real / (abs(d) ** 2)
    t = min(1.0, max(0.0, t))
    return abs(v - (a + t * d))


@dataclass(frozen=True)
class PathSpec:
    """A path on the sphere built from segments and circular arcs.

    ``kind`` is ``polyline``, ``circular`` or ``chain`` (a concatenation).
    """

    pieces: tuple
    kind: str = "chain"

    @classmethod
    def polyline(cls, anchors: Sequence[complex]) -> "PathSpec":
        anchors = [as_point(a) for a in anchors]
        if len(anchors) < 2:
            raise InputError("a polyline needs two anchors")
        return cls(tuple(Segment(a, b) for a, b in zip(anchors, anchors[1:])), "polyline")

    @classmethod
    def circular(cls, center: complex, radius: float, start_angle: float = 0.0, turns: float = 1.0) -> "PathSpec":
        return cls((Arc(complex(center), float(radius), float(start_angle), float(turns)),), "circular")

    @property
    def start(self) -> complex:
        return self.pieces[0].start

    @property
    def end(self) -> complex:
        return self.pieces[-1].end

    def is_closed(self, eps: float = 1e-12) -> bool:
        return same_point(self.start, self.end, eps)

    def then(self, other: "PathSpec") -> "PathSpec":
        """Traverse ``self`` first, then ``other``."""
        if not same_point(self.end, other.start, 1e-9):
            raise InputError("paths do not connect")
        return PathSpec(self.pieces + other.pieces, "chain")

    def reversed(self) -> "PathSpec":
        return PathSpec(tuple(p.reversed() for p in reversed(self.pieces)), self.kind)

    def point(self, t: float) -> complex:
        n = len(self.pieces)
        k = min(int(t * n), n - 1)
        w0, w1 = self.pieces[k].homogeneous(t * n - k)
        return INF if w1 == 0 else w0 / w1

    def distance_to(self, v: complex, skip_last: bool = False) -> float:
        pieces = self.pieces[:-1] if skip_last else self.pieces
        return min((p.distance_to(v) for p in pieces), default=math.inf)


def concatenate(*paths: PathSpec) -> PathSpec:
    """``concatenate(g1, g2)`` traverses ``g1`` first."""
    out = paths[0]
    for p in paths[1:]:
        out = out.then(p)
    return out


# ---------------------------------------------------------------------------
# the tracker


def _horner(coefs: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate rows of ascending coefficients at x (one row per point)."""
    out = coefs[:, -1].copy()
    for j in range(coefs.shape[1] - 2, -1, -1):
        out = out * x + coefs[:, j]
    return out


def _hom_chordal(x1, y1, x2, y2):
    num = np.abs(x1 * y2 - x2 * y1)
    return 2.0 * num / (np.sqrt(np.abs(x1) ** 2 + np.abs(y1) ** 2) * np.sqrt(np.abs(x2) ** 2 + np.abs(y2) ** 2))


@dataclass
class LiftTrace:
    """Samples (t, point) for every tracked label; t is the path parameter."""

    t: list[float] = field(default_factory=list)
    points: list[np.ndarray] = field(default_factory=list)

    def of_label(self, label: int) -> list[tuple[float, complex]]:
        return [(t, complex(p[label])) for t, p in zip(self.t, self.points)]

    def write_csv(self, fh, labels: Iterable[int] | None = None) -> None:
        """One row per sample: ``label,t,re,im`` (``inf`` for the point at infinity)."""
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "t", "re", "im"])
        labels = range(len(self.points[0])) if labels is None else labels
        for lab in labels:
            for t, z in self.of_label(lab):
                if is_inf(z):
                    writer.writerow([lab + 1, f"{t:.12g}", "inf", "inf"])
                else:
                    writer.writerow([lab + 1, f"{t:.12g}", f"{z.real:.15g}", f"{z.imag:.15g}"])


class _Tracker:
    def __init__(self, f: RationalMap, tol: ToleranceProfile):
        P, Q = f.homogeneous()
        self.f = f
        self.tol = tol
        self.P, self.Q = P, Q
        self.Pr, self.Qr = P[::-1].copy(), Q[::-1].copy()
        d = np.arange(1, P.size)
        self.dP, self.dQ = P[1:] * d, Q[1:] * d
        self.dPr, self.dQr = self.Pr[1:] * d, self.Qr[1:] * d

    # points are kept as (chart, coord): chart True means coord = z
    @staticmethod
    def from_points(points: Sequence[complex]):
        chart = np.array([not is_inf(z) and abs(z) <= 1.0 for z in points])
        coord = np.array([z if c else (0j if is_inf(z) else 1.0 / z) for z, c in zip(points, chart)], dtype=complex)
        return chart, coord

    @staticmethod
    def to_points(chart, coord) -> np.ndarray:
        out = np.empty(coord.size, dtype=complex)
        for i, (c, x) in enumerate(zip(chart, coord)):
            if c:
                out[i] = x
            else:
                out[i] = INF if x == 0 else 1.0 / x
        return out

    @staticmethod
    def homog(chart, coord):
        x = np.where(chart, coord, 1.0 + 0j)
        y = np.where(chart, 1.0 + 0j, coord)
        return x, y

    def newton(self, chart, coord, w0: complex, w1: complex):
        A = np.where(chart[:, None], w1 * self.P - w0 * self.Q, w1 * self.Pr - w0 * self.Qr)
        dA = np.where(chart[:, None], w1 * self.dP - w0 * self.dQ, w1 * self.dPr - w0 * self.dQr)
        absA = np.abs(A)
        x = coord.copy()
        for _ in range(8):
            F = _horner(A, x)
            dF = _horner(dA, x)
            with np.errstate(divide="ignore", invalid="ignore"):
                dx = F / dF
            if not np.all(np.isfinite(dx)):
                return None
            x = x - dx
            # converged: tiny step, or a residual at rounding level (near
            # branch points the attainable accuracy is coarser)
            noise = 64 * _EPS * _horner(absA, np.abs(x).astype(complex)).real
            done = (np.abs(dx) <= self.tol.path_tracking) | (np.abs(_horner(A, x)) <= noise)
            if np.all(done):
                flip = np.abs(x) > 1.0
                new_chart = chart.copy()
                new_chart[flip] = ~chart[flip]
                with np.errstate(divide="ignore"):
                    x = np.where(flip, 1.0 / np.where(x == 0, 1.0, x), x)
                return new_chart, x
        return None

    def separation(self, chart, coord) -> float:
        if coord.size < 2:
            return math.inf
        x, y = self.homog(chart, coord)
        D = _hom_chordal(x[:, None], y[:, None], x[None, :], y[None, :])
        np.fill_diagonal(D, np.inf)
        return float(D.min())

    def track_piece(self, piece, chart, coord, s_end: float, t0: float, t_scale: float, trace: LiftTrace | None):
        tol = self.tol
        s = 0.0
        h = 1.0 / 64
        accepts = 0
        x0, y0 = self.homog(chart, coord)
        sep = self.separation(chart, coord)
        while s < s_end - 1e-15:
            h = min(h, s_end - s)
            w0, w1 = piece.homogeneous(s + h)
            res = self.newton(chart, coord, w0, w1)
            ok = False
            if res is not None:
                nchart, ncoord = res
                x1, y1 = self.homog(nchart, ncoord)
                moved = float(np.max(_hom_chordal(x0, y0, x1, y1)))
                nsep = self.separation(nchart, ncoord)
                ok = moved < min(sep, nsep) / 3.0 or coord.size == 1 and moved < 0.05
            if ok:
                s += h
                chart, coord, x0, y0, sep = nchart, ncoord, x1, y1, nsep
                if trace is not None:
                    trace.t.append(t0 + t_scale * s)
                    trace.points.append(self.to_points(chart, coord))
                if sep <= 10 * tol.path_tracking:
                    raise LiftCollision("tracked lifts collided; refine the path")
                accepts += 1
                if accepts >= 4:
                    h *= 2.0
                    accepts = 0
            else:
                h /= 2.0
                accepts = 0
                if h < 1e-12:
                    raise StepUnderflow(f"step underflow at parameter {t0 + t_scale * s:.6g}")
        return chart, coord


def _check_clearance(path: PathSpec, values: Sequence[complex], target: complex | None, clearance: float) -> None:
    for v in values:
        if target is not None and same_point(v, target, 1e-9):
            d = path.distance_to(v, skip_last=True)
        else:
            d = path.distance_to(v)
        if d <= clearance:
            raise PathTooCloseToCriticalValue(f"path passes within {d:.3g} of critical value {format_point(v)}")


def track_fiber(
    f: RationalMap,
    path: PathSpec,
    fiber: Fiber,
    tol: ToleranceProfile = DEFAULT,
    portrait: CriticalPortrait | None = None,
    keep_trace: bool = False,
) -> tuple[np.ndarray, LiftTrace | None]:
    """Lift ``path`` from every point of ``fiber``; return the endpoints.

    If the path ends at a critical value the last stretch of length
    ``tol.terminal_stop`` is not tracked; endpoints are then the nearest
    points of the solved fiber over that value.
    """
    portrait = portrait or critical_portrait(f, tol)
    if not same_point(fiber.base, path.start, 1e-9):
        raise InputError("fiber base differs from the path start")
    if not fiber.is_simple:
        raise InputError("base fiber must consist of simple points")
    end = path.end
    terminal = next((v for v in portrait.values if same_point(v, end, tol.membership)), None)
    _check_clearance(path, portrait.values, terminal, tol.clearance)
    if fiber.min_separation() <= 10 * tol.path_tracking:
        raise LiftCollision("degenerate base fiber")
    tracker = _Tracker(f, tol)
    chart, coord = tracker.from_points(fiber.points)
    trace = LiftTrace() if keep_trace else None
    if trace is not None:
        trace.t.append(0.0)
        trace.points.append(np.array(fiber.points, dtype=complex))
    n = len(path.pieces)
    for k, piece in enumerate(path.pieces):
        last = k == n - 1
        s_end = 1.0 - tol.terminal_stop if (last and terminal is not None) else 1.0
        chart, coord = tracker.track_piece(piece, chart, coord, s_end, k / n, 1.0 / n, trace)
    points = tracker.to_points(chart, coord)
    if terminal is not None:
        target = fiber_solve(f, terminal, tol)
        points = np.array([_nearest(target, z) for z in points], dtype=complex)
        if trace is not None:
            trace.t.append(1.0)
            trace.points.append(points.copy())
    return points, trace


def _nearest(fib: Fiber, z: complex) -> complex:
    d = [chordal(z, w) for w in fib.points]
    i = int(np.argmin(d))
    if len(fib.points) > 1:
        guard = fib.min_separation() / 3.0
        if d[i] >= guard:
            raise AmbiguousMatching(f"endpoint {format_point(z)} is not near a single fiber point")
    return fib.points[i]


def lift_path(
    f: RationalMap,
    path: PathSpec,
    start: complex,
    tol: ToleranceProfile = DEFAULT,
    portrait: CriticalPortrait | None = None,
) -> tuple[complex, list[tuple[float, complex]]]:
    """Endpoint and trace of the unique lift of ``path`` starting at ``start``."""
    portrait = portrait or critical_portrait(f, tol)
    b = path.start
    if chordal(f(start), b) > 1e-8 * (1 + (0 if is_inf(b) else abs(b))):
        raise InputError("start point is not over the path start")
    fiber = fiber_solve(f, b, tol)
    label = fiber.label_of(start, radius=1e-6)
    points, trace = track_fiber(f, path, fiber, tol, portrait, keep_trace=True)
    return complex(points[label]), trace.of_label(label)


def match_endpoints(fiber: Fiber, endpoints: Sequence[complex]) -> Permutation:
    guard = fiber.min_separation() / 3.0
    images = []
    for z in endpoints:
        hits = [j for j, w in enumerate(fiber.points) if chordal(z, w) < guard]
        if len(hits) != 1:
            raise AmbiguousMatching(f"endpoint {format_point(z)} matches {len(hits)} fiber points")
        images.append(hits[0])
    if sorted(images) != list(range(len(fiber))):
        raise AmbiguousMatching("lifted endpoints do not form a bijection")
    return Permutation(images)


def loop_monodromy(
    f: RationalMap,
    loop: PathSpec,
    fiber: Fiber,
    tol: ToleranceProfile = DEFAULT,
    portrait: CriticalPortrait | None = None,
) -> Permutation:
    """Permutation of fiber labels induced by lifting a closed loop."""
    if not loop.is_closed(1e-9):
        raise InputError("loop is not closed")
    endpoints, _ = track_fiber(f, loop, fiber, tol, portrait)
    return match_endpoints(fiber, endpoints)


# ---------------------------------------------------------------------------
# standard generators


@dataclass
class StandardGenerators:
    """Small loops around each finite critical value, all based at ``base``.

    ``ordered`` lists the finite critical values in the order whose product
    ``rho[v_n] * ... * rho[v_1]`` is the loop around all of them; ``rho[INF]``
    (present when infinity is a critical value) is its inverse.
    """

    base: complex
    fiber: Fiber
    rho: dict[complex, Permutation]
    loops: dict[complex, PathSpec]
    ordered: tuple[complex, ...]
    orientation: str = "ccw"

    def named(self) -> dict[str, Permutation]:
        return {format_point(v, 10): p for v, p in self.rho.items()}

    def finite_product(self) -> Permutation:
        out = Permutation.identity(len(self.fiber))
        for v in self.ordered:
            out = self.rho[v] * out
        return out


def _route(b: complex, v: complex, values: Sequence[complex], radius: float, clearance: float, attempts: int = 64):
    """Arm from b to the circle of ``radius`` about v, avoiding other values."""
    others = [w for w in values if not is_inf(w) and not same_point(w, v, 1e-12)]
    for k in range(attempts + 1):
        if k == 0:
            anchors = [b]
        else:
            mag = 0.15 * ((k + 1) // 2) * (1 if k % 2 else -1)
            mid = (b + v) / 2 + 1j * (v - b) * mag
            anchors = [b, mid]
        last = anchors[-1]
        entry = v + radius * (last - v) / abs(last - v)
        arm = PathSpec.polyline(anchors + [entry])
        arm_ok = all(arm.distance_to(w) > max(clearance, 0.5 * radius) for w in others)
        circle_ok = all(abs(w - v) > radius + clearance for w in others)
        if arm_ok and circle_ok and arm.distance_to(v, skip_last=True) > radius * 0.999:
            return arm, entry
    raise RoutingFailure(f"could not route a loop to {format_point(v)}")


def lollipop(b: complex, v: complex, values: Sequence[complex], tol: ToleranceProfile, orientation: str = "ccw") -> PathSpec:
    finite = [w for w in values if not is_inf(w)]
    dists = [abs(w - v) for w in finite if not same_point(w, v, 1e-12)]
    dists.append(abs(b - v))
    radius = min(0.5 * min(dists), 0.1)
    arm, entry = _route(b, v, values, radius, tol.clearance)
    turns = 1.0 if orientation == "ccw" else -1.0
    circle = PathSpec.circular(v, radius, cmath.phase(entry - v), turns)
    return concatenate(arm, circle, arm.reversed())


def standard_generators(
    f: RationalMap,
    b: complex,
    tol: ToleranceProfile = DEFAULT,
    orientation: str = "ccw",
    portrait: CriticalPortrait | None = None,
) -> StandardGenerators:
    if orientation not in ORIENTATIONS:
        raise InputError(f"orientation must be one of {ORIENTATIONS}")
    portrait = portrait or critical_portrait(f, tol)
    b = as_point(b)
    if is_inf(b) or any(chordal(b, v) <= 2 * tol.clearance for v in portrait.values):
        raise PathTooCloseToCriticalValue("base point too close to a critical value")
    fiber = fiber_solve(f, b, tol)
    finite = [v for v in portrait.values if not is_inf(v)]
    rho: dict[complex, Permutation] = {}
    loops: dict[complex, PathSpec] = {}
    for v in finite:
        loop = lollipop(b, v, portrait.values, tol, orientation)
        loops[v] = loop
        rho[v] = loop_monodromy(f, loop, fiber, tol, portrait)
    ordered = sorted(finite, key=lambda v: _arm_angle(b, loops[v], finite))
    if orientation == "cw":
        # clockwise generators compose to the big loop in the opposite order
        ordered.reverse()
    ordered = tuple(ordered)
    gens = StandardGenerators(b, fiber, rho, loops, ordered, orientation)
    if any(is_inf(v) for v in portrait.values):
        rho[INF] = gens.finite_product().inverse()
    return gens


def _arm_angle(b: complex, loop: PathSpec, finite: Sequence[complex]) -> float:
    first = loop.pieces[0]
    direction = first.end - b
    centroid = sum(finite) / len(finite)
    ref = b - centroid if abs(b - centroid) > 1e-12 else 1.0
    return (cmath.phase(direction) - cmath.phase(ref)) % (2 * math.pi)


# ---------------------------------------------------------------------------
# arcs to critical values


@dataclass(frozen=True)
class ArcPartition:
    """Labels grouped by the point over ``target_value`` where their lift ends."""

    target_value: complex
    groups: dict[complex, frozenset[int]]
    arc: PathSpec | None = None
    trace: LiftTrace | None = field(default=None, compare=False, repr=False)

    def group_of(self, label: int) -> complex:
        for c, labels in self.groups.items():
            if label in labels:
                return c
        raise KeyError(label)


def validated_arc(
    b: complex,
    v: complex,
    values: Sequence[complex],
    tol: ToleranceProfile = DEFAULT,
    attempts: int = 64,
) -> PathSpec:
    """Straight arc from b to v (a ray when v is infinity), bent at its
    midpoint when needed to keep clear of the other critical values."""
    for k in range(attempts + 1):
        if k == 0:
            path = PathSpec.polyline([b, v])
        else:
            mag = 0.1 * ((k + 1) // 2) * (1 if k % 2 else -1)
            if is_inf(v):
                mid = b * (1 + 1j * mag) if b != 0 else 1j * mag
            else:
                mid = (b + v) / 2 + 1j * (v - b) * mag
            try:
                path = PathSpec.polyline([b, mid, v])
            except InputError:
                continue
        try:
            _check_clearance(path, values, v, tol.clearance * 10)
        except PathTooCloseToCriticalValue:
            continue
        return path
    raise RoutingFailure(f"no clear arc from {format_point(b)} to {format_point(v)}")


def arc_component_partition(
    f: RationalMap,
    b: complex,
    v: complex,
    fiber: Fiber | None = None,
    arc: PathSpec | None = None,
    tol: ToleranceProfile = DEFAULT,
    portrait: CriticalPortrait | None = None,
    keep_trace: bool = False,
) -> ArcPartition:
    portrait = portrait or critical_portrait(f, tol)
    fiber = fiber or fiber_solve(f, b, tol)
    arc = arc or validated_arc(b, v, portrait.values, tol)
    endpoints, trace = track_fiber(f, arc, fiber, tol, portrait, keep_trace=keep_trace)
    target = fiber_solve(f, v, tol)
    groups: dict[complex, set[int]] = {c: set() for c in target.points}
    for label, z in enumerate(endpoints):
        hits = [c for c in target.points if chordal(c, complex(z)) <= 1e-9 or c == z]
        if len(hits) != 1:
            raise AmbiguousMatching(f"lift of label {label + 1} does not end on the fiber over {format_point(v)}")
        groups[hits[0]].add(label)
    for c, m in zip(target.points, target.multiplicities):
        if len(groups[c]) != m:
            raise PartitionInconsistent(
                f"{len(groups[c])} lifts end at {format_point(c)} but its local degree is {m}"
            )
    return ArcPartition(as_point(v), {c: frozenset(s) for c, s in groups.items()}, arc, trace)
