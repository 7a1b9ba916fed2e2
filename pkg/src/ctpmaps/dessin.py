"""Branched trees of Belyi polynomials and the combinatorics on them.

For a polynomial with exactly two finite critical values ``v0`` and ``v1``
the preimage of the segment ``[v0, v1]`` is a plane tree.  Its edges are in
bijection with the fiber over a base point ``b`` inside the segment, so the
monodromy group acts on edges by acting on fiber labels.

Edge ids are fiber labels (0-based); vertex ids are 0-based as well, side-0
vertices first.  Text output is 1-based throughout.
"""

from __future__ import annotations

import cmath
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .algebra import (
    CriticalPortrait,
    Fiber,
    RationalMap,
    as_point,
    critical_portrait,
    fiber_solve,
    format_point,
    is_inf,
    point_key,
)
from .errors import ChaseStalled, DisconnectedPreimage, InputError, NoCenter, NotBelyiPolynomial
from .lifting import PathSpec, arc_component_partition, loop_monodromy
from .perm import PermGroup, Permutation, generate
from .tolerance import DEFAULT, ToleranceProfile


class Vertex(NamedTuple):
    id: int
    position: complex
    side: int
    local_degree: int


class Edge(NamedTuple):
    id: int
    v0: int
    v1: int


class Ref(NamedTuple):
    """Reference to a tree element: ``kind`` is ``"edge"`` or ``"vertex"``."""

    kind: str
    id: int


def edge(i: int) -> Ref:
    return Ref("edge", i)


def vertex(i: int) -> Ref:
    return Ref("vertex", i)


@dataclass
class BranchedTree:
    f: RationalMap
    base: complex
    critical_values: tuple[complex, complex]
    fiber: Fiber
    vertices: list[Vertex]
    edges: list[Edge]
    rotation: dict[int, tuple[int, ...]]
    generators: dict[str, Permutation]
    half_edges: dict[int, tuple[list[complex], list[complex]]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._incident: dict[int, list[int]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            self._incident[e.v0].append(e.id)
            self._incident[e.v1].append(e.id)
        self._paths: dict[int, dict[int, tuple[int, ...]]] = {}

    @property
    def degree(self) -> int:
        return len(self.edges)

    def incident(self, v: int) -> list[int]:
        return list(self._incident[v])

    def endpoints(self, e: int) -> tuple[int, int]:
        ed = self.edges[e]
        return ed.v0, ed.v1

    def other_end(self, e: int, v: int) -> int:
        a, b = self.endpoints(e)
        return b if v == a else a

    def adjacent(self, e: int, e2: int) -> int | None:
        """Common endpoint of two distinct edges, if any."""
        if e == e2:
            return None
        common = set(self.endpoints(e)) & set(self.endpoints(e2))
        return common.pop() if common else None

    def vertex_at(self, z: complex, radius: float = 1e-6) -> int:
        best = min(self.vertices, key=lambda v: abs(v.position - z))
        if abs(best.position - z) > radius * (1 + abs(z)):
            raise InputError(f"no tree vertex at {format_point(z)}")
        return best.id

    def edges_at(self, z: complex) -> list[int]:
        return self.incident(self.vertex_at(z))

    def path_edges(self, u: int, v: int) -> tuple[int, ...]:
        """Edges on the unique path between two vertices."""
        if u not in self._paths:
            self._paths[u] = self._bfs(u)
        return self._paths[u][v]

    def _bfs(self, root: int) -> dict[int, tuple[int, ...]]:
        out = {root: ()}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for e in self._incident[x]:
                y = self.other_end(e, x)
                if y not in out:
                    out[y] = out[x] + (e,)
                    queue.append(y)
        return out

    def adjacency_text(self) -> str:
        return "".join(f"edge {e.id + 1}: {e.v0 + 1} -- {e.v1 + 1}\n" for e in self.edges)

    def describe(self) -> str:
        lines = [f"degree {self.degree}", f"base {format_point(self.base)}"]
        for v in self.vertices:
            lines.append(
                f"vertex {v.id + 1}: side {v.side} at {format_point(v.position)} degree {v.local_degree}"
            )
        lines.append(self.adjacency_text().rstrip("\n"))
        for v, cyc in self.rotation.items():
            lines.append(f"rotation {v + 1}: " + " ".join(str(e + 1) for e in cyc))
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# construction


def belyi_values(f: RationalMap, portrait: CriticalPortrait) -> tuple[complex, complex]:
    if not f.is_polynomial:
        raise NotBelyiPolynomial("branched trees are built for polynomials only")
    finite = sorted((v for v in portrait.values if not is_inf(v)), key=lambda v: (v.real, v.imag))
    if len(finite) != 2:
        raise NotBelyiPolynomial(f"need exactly two finite critical values, found {len(finite)}")
    return finite[0], finite[1]


def build_tree(
    f: RationalMap,
    b: complex | None = None,
    tol: ToleranceProfile = DEFAULT,
    portrait: CriticalPortrait | None = None,
) -> BranchedTree:
    """Tree over the segment joining the two finite critical values.

    ``b`` defaults to the midpoint of that segment.
    """
    portrait = portrait or critical_portrait(f, tol)
    v0, v1 = belyi_values(f, portrait)
    b = (v0 + v1) / 2 if b is None else as_point(b)
    s = ((b - v0) / (v1 - v0))
    if abs(s.imag) > 1e-9 or not 1e-6 < s.real < 1 - 1e-6:
        raise InputError("base point must lie inside the segment between the critical values")
    fiber = fiber_solve(f, b, tol)
    d = len(fiber)
    ends = []
    halves = []
    for v in (v0, v1):
        part = arc_component_partition(
            f, b, v, fiber, PathSpec.polyline([b, v]), tol, portrait, keep_trace=True
        )
        ends.append(part)
        halves.append(part.trace)

    vertices: list[Vertex] = []
    owner = [[-1] * d, [-1] * d]
    for side, part in enumerate(ends):
        for c in sorted(part.groups, key=point_key):
            vid = len(vertices)
            vertices.append(Vertex(vid, c, side, len(part.groups[c])))
            for label in part.groups[c]:
                owner[side][label] = vid
    edges = [Edge(i, owner[0][i], owner[1][i]) for i in range(d)]
    _check_tree(len(vertices), edges)

    gens = {f"rho{side}": _circle_generator(f, b, v, fiber, tol, portrait) for side, v in enumerate((v0, v1))}
    rotation = {}
    for vtx in vertices:
        cyc = _cycle_through(gens[f"rho{vtx.side}"], owner[vtx.side].index(vtx.id))
        labels = {i for i in range(d) if owner[vtx.side][i] == vtx.id}
        if set(cyc) != labels:
            raise DisconnectedPreimage(
                f"monodromy around {format_point(vtx.position)} disagrees with the edges at that vertex"
            )
        rotation[vtx.id] = cyc

    half_edges = {}
    for i in range(d):
        half_edges[i] = tuple([complex(p[i]) for p in tr.points] for tr in halves)
    return BranchedTree(f, b, (v0, v1), fiber, vertices, edges, rotation, gens, half_edges)


def _circle_generator(f, b, v, fiber, tol, portrait) -> Permutation:
    # a circle about v through b meets the segment only at b
    loop = PathSpec.circular(v, abs(b - v), cmath.phase(b - v), 1.0)
    return loop_monodromy(f, loop, fiber, tol, portrait)


def _cycle_through(p: Permutation, start: int) -> tuple[int, ...]:
    cyc = [start]
    j = p(start)
    while j != start:
        cyc.append(j)
        j = p(j)
    k = cyc.index(min(cyc))
    return tuple(cyc[k:] + cyc[:k])


def _check_tree(n_vertices: int, edges: Sequence[Edge]) -> None:
    if n_vertices != len(edges) + 1:
        raise DisconnectedPreimage(f"{n_vertices} vertices for {len(edges)} edges")
    parent = list(range(n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edges:
        a, b = find(e.v0), find(e.v1)
        if a == b:
            raise DisconnectedPreimage("preimage of the segment contains a cycle")
        parent[a] = b


# ---------------------------------------------------------------------------
# subtrees


@dataclass(frozen=True)
class SubtreeQuery:
    items: tuple[Ref, ...]
    edges: frozenset[int]
    vertices: frozenset[int]
    leaves: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def interior_vertices(self) -> frozenset[int]:
        return self.vertices - self.leaves

    def meets_only_at(self, other: "SubtreeQuery", v: int) -> bool:
        """True when the two subtrees intersect in exactly the vertex ``v``."""
        return not (self.edges & other.edges) and self.vertices & other.vertices == {v}


def minimal_subtree(T: BranchedTree, items: Iterable[Ref]) -> SubtreeQuery:
    items = tuple(items)
    if not items:
        raise InputError("need at least one tree element")
    anchors: list[int] = []
    for ref in items:
        if ref.kind == "edge":
            anchors.extend(T.endpoints(ref.id))
        elif ref.kind == "vertex":
            anchors.append(ref.id)
        else:
            raise InputError(f"unknown tree element kind {ref.kind!r}")
    root = anchors[0]
    edges: set[int] = set()
    for a in anchors[1:]:
        edges.update(T.path_edges(root, a))
    verts = {root}
    for e in edges:
        verts.update(T.endpoints(e))
    count = {v: 0 for v in verts}
    for e in edges:
        for v in T.endpoints(e):
            count[v] += 1
    leaves = frozenset(v for v, k in count.items() if k == 1)
    return SubtreeQuery(items, frozenset(edges), frozenset(verts), leaves)


# ---------------------------------------------------------------------------
# the action on edges


def edge_action(T: BranchedTree, tau: Permutation, e: int) -> int:
    if tau.degree != T.degree:
        raise InputError("permutation degree differs from the number of edges")
    return tau(e)


def check_power_consistency(T: BranchedTree) -> bool:
    """A power of a side generator fixing an edge fixes every edge sharing
    that edge's endpoint on the same side, and the exponent is a multiple of
    the endpoint's local degree."""
    for side in (0, 1):
        rho = T.generators[f"rho{side}"]
        for k in range(1, rho.order()):
            power = rho**k
            for e in T.edges:
                if power(e.id) != e.id:
                    continue
                c = e.v0 if side == 0 else e.v1
                if k % T.vertices[c].local_degree:
                    return False
                if any(power(e2) != e2 for e2 in T.incident(c)):
                    return False
    return True


def monodromy_group(T: BranchedTree) -> PermGroup:
    return generate(T.generators)


# ---------------------------------------------------------------------------
# chase


def chase_conditions(T: BranchedTree, G: PermGroup, e: int, e2: int, tau: Permutation) -> int | None:
    """Common vertex ``c`` when ``tau`` meets all three chase conditions."""
    moved, moved2 = tau(e), tau(e2)
    c = T.adjacent(moved, moved2)
    if c is None:
        return None
    first = minimal_subtree(T, [edge(e), edge(moved)])
    if first.size != G.norm[tau] + 1:
        return None
    second = minimal_subtree(T, [edge(e2), edge(moved2)])
    if not first.meets_only_at(second, c):
        return None
    return c


def chase(T: BranchedTree, G: PermGroup, e: int, e2: int, exhaustive: bool = True) -> Permutation:
    """Move ``e`` toward ``e2`` one edge at a time until both images meet.

    When the stepwise walk stalls and ``exhaustive`` is set, the group is
    searched for a least-norm element meeting the conditions instead.
    """
    if e == e2:
        raise InputError("chase needs two distinct edges")
    tau = Permutation.identity(T.degree)
    limit = T.degree**2
    for _ in range(limit + 1):
        if chase_conditions(T, G, e, e2, tau) is not None:
            return tau
        cur, cur2 = tau(e), tau(e2)
        target = _next_edge_toward(T, cur, cur2)
        step = next((s for _n, _k, s in G.norm_one() if s(cur) == target), None)
        if step is None:
            break
        tau = step * tau
    if exhaustive:
        # elements are stored in breadth-first order, so the first hit has least norm
        found = chase_brute_force(T, G, e, e2)
        if found:
            return found[0]
    raise ChaseStalled(f"no element moves edges {e + 1}, {e2 + 1} to a common endpoint")


def _next_edge_toward(T: BranchedTree, e: int, e2: int) -> int:
    # path between the nearest endpoints, then its first edge
    best = None
    for u in T.endpoints(e):
        for v in T.endpoints(e2):
            p = T.path_edges(u, v)
            if e in p or e2 in p:
                continue
            if best is None or len(p) < len(best):
                best = p
    if not best:
        return e2
    return best[0]


def chase_brute_force(T: BranchedTree, G: PermGroup, e: int, e2: int) -> list[Permutation]:
    """Every group element meeting the chase conditions."""
    return [t for t in G.elements if chase_conditions(T, G, e, e2, t) is not None]


def minimal_norm_movers(G: PermGroup, e: int, e2: int) -> list[Permutation]:
    """All elements of least norm sending edge ``e`` to ``e2``."""
    movers = [t for t in G.elements if t(e) == e2]
    if not movers:
        return []
    least = min(G.norm[t] for t in movers)
    return [t for t in movers if G.norm[t] == least]


# ---------------------------------------------------------------------------
# centre of a marked configuration


def center_candidates(
    T: BranchedTree, G: PermGroup, marked: Iterable[int], extra_vertices: Iterable[int] = ()
) -> list[int]:
    marked = sorted(set(marked))
    if len(marked) < 2:
        raise InputError("need at least two marked edges")
    extra = set(extra_vertices)
    out = []
    for c in (v.id for v in T.vertices):
        if extra - {c}:
            continue
        if all(_balanced(T, c, tau, marked) for tau in G.elements):
            out.append(c)
    return out


def _balanced(T: BranchedTree, c: int, tau: Permutation, marked: Sequence[int]) -> bool:
    arms = [minimal_subtree(T, [vertex(c), edge(tau(e))]) for e in marked]
    if len({a.size for a in arms}) != 1:
        return False
    return all(a.meets_only_at(b, c) for a, b in itertools.combinations(arms, 2))


def marked_center(
    T: BranchedTree, G: PermGroup, marked: Iterable[int], extra_vertices: Iterable[int] = ()
) -> int:
    found = center_candidates(T, G, marked, extra_vertices)
    if len(found) != 1:
        raise NoCenter(f"{len(found)} vertices balance the marked edges under the whole group")
    return found[0]


def edge_trace(T: BranchedTree, e: int) -> list[complex]:
    """Points along edge ``e`` from its side-0 end to its side-1 end."""
    to_v0, to_v1 = T.half_edges[e]
    return list(reversed(to_v0)) + to_v1[1:]


__all__ = [
    "BranchedTree",
    "Edge",
    "Ref",
    "SubtreeQuery",
    "Vertex",
    "build_tree",
    "center_candidates",
    "chase",
    "chase_brute_force",
    "chase_conditions",
    "check_power_consistency",
    "edge",
    "edge_action",
    "edge_trace",
    "marked_center",
    "minimal_norm_movers",
    "minimal_subtree",
    "monodromy_group",
    "vertex",
]
