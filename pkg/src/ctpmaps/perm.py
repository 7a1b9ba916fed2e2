"""Permutations of fiber labels and the groups they generate.

Labels are 0-based inside the library.  Cycle notation, as printed by the
CLI and stored in golden files, is 1-based: ``(1 11 12 4 8 9)``.

Composition follows function notation: ``(p * q)(i) == p(q(i))``, so
``q`` acts first.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import InputError, OrderBound
from .tolerance import DEFAULT


class Permutation:
    __slots__ = ("images", "_hash")

    def __init__(self, images: Iterable[int]):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(len(images))):
            raise InputError(f"not a bijection of 0..{len(images) - 1}: {images}")
        self.images = images
        self._hash = hash(images)

    @classmethod
    def identity(cls, degree: int) -> "Permutation":
        return cls(range(degree))

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], degree: int) -> "Permutation":
        """Build from 0-based cycles."""
        images = list(range(degree))
        for cyc in cycles:
            for k, a in enumerate(cyc):
                images[a] = cyc[(k + 1) % len(cyc)]
        return cls(images)

    @classmethod
    def parse(cls, text: str, degree: int) -> "Permutation":
        """Parse 1-based cycle notation such as ``(1 2 3)(4 5)``."""
        text = text.strip()
        if text in ("", "()", "id"):
            return cls.identity(degree)
        cycles = []
        for body in re.findall(r"\(([^()]*)\)", text):
            labels = [int(tok) - 1 for tok in re.split(r"[\s,]+", body.strip()) if tok]
            cycles.append(labels)
        return cls.from_cycles(cycles, degree)

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        if other.degree != self.degree:
            raise InputError("degree mismatch in composition")
        mine = self.images
        return Permutation(mine[j] for j in other.images)

    def __pow__(self, k: int) -> "Permutation":
        if k < 0:
            return self.inverse() ** (-k)
        out = Permutation.identity(self.degree)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "Permutation":
        inv = [0] * self.degree
        for i, j in enumerate(self.images):
            inv[j] = i
        return Permutation(inv)

    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images))

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return self._hash

    def cycles(self, include_fixed: bool = False) -> list[tuple[int, ...]]:
        seen = [False] * self.degree
        out = []
        for start in range(self.degree):
            if seen[start]:
                continue
            cyc = [start]
            seen[start] = True
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen[j] = True
                j = self.images[j]
            if len(cyc) > 1 or include_fixed:
                out.append(tuple(cyc))
        return out

    def cycle_type(self) -> tuple[int, ...]:
        """Cycle lengths in descending order, fixed points included."""
        return tuple(sorted((len(c) for c in self.cycles(include_fixed=True)), reverse=True))

    def order(self) -> int:
        return math.lcm(*self.cycle_type()) if self.degree else 1

    def fixed_points(self) -> list[int]:
        return [i for i, j in enumerate(self.images) if i == j]

    def apply_set(self, labels: Iterable[int]) -> frozenset[int]:
        return frozenset(self.images[i] for i in labels)

    def cycle_notation(self) -> str:
        cyc = self.cycles()
        if not cyc:
            return "()"
        return "".join("(" + " ".join(str(a + 1) for a in c) + ")" for c in cyc)

    def __repr__(self) -> str:
        return f"Permutation({self.cycle_notation()}, degree={self.degree})"


def cycle_notation(p: Permutation) -> str:
    return p.cycle_notation()


@dataclass
class PermGroup:
    """Fully enumerated permutation group with word norms.

    The norm of an element is its distance from the identity in the Cayley
    graph whose edges are all nonidentity powers of the named generators,
    so any power of a single generator costs 1.
    """

    generators: dict[str, Permutation]
    degree: int
    norm: dict[Permutation, int] = field(repr=False)
    elements: list[Permutation] = field(repr=False)
    steps: list[tuple[str, int, Permutation]] = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def __contains__(self, p: Permutation) -> bool:
        return p in self.norm

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def is_transitive(self) -> bool:
        return len(orbit_of_point(self, 0)) == self.degree

    def norm_one(self) -> list[tuple[str, int, Permutation]]:
        """All nonidentity generator powers as (name, exponent, element)."""
        return list(self.steps)


def generate(gens: Mapping[str, Permutation], bound: int | None = None) -> PermGroup:
    """Enumerate the group generated by ``gens`` by breadth-first search."""
    bound = DEFAULT.group_order_bound if bound is None else bound
    gens = dict(gens)
    if not gens:
        raise InputError("need at least one generator")
    degrees = {g.degree for g in gens.values()}
    if len(degrees) != 1:
        raise InputError("generators of different degrees")
    degree = degrees.pop()
    steps: list[tuple[str, int, Permutation]] = []
    for name, g in gens.items():
        for k in range(1, g.order()):
            steps.append((name, k, g**k))
    ident = Permutation.identity(degree)
    norm = {ident: 0}
    elements = [ident]
    queue = deque([ident])
    while queue:
        cur = queue.popleft()
        n = norm[cur]
        for _name, _k, s in steps:
            nxt = s * cur
            if nxt not in norm:
                norm[nxt] = n + 1
                elements.append(nxt)
                if len(elements) > bound:
                    raise OrderBound(f"group order exceeds {bound}")
                queue.append(nxt)
    return PermGroup(gens, degree, norm, elements, steps)


def orbit_of_point(G: PermGroup, a: int) -> list[int]:
    seen = [a]
    known = {a}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        for _n, _k, s in G.steps:
            y = s(x)
            if y not in known:
                known.add(y)
                seen.append(y)
                queue.append(y)
    return seen


def orbit_of_set(G: PermGroup, E: Iterable[int]) -> list[frozenset[int]]:
    """Distinct images of a label set, in breadth-first discovery order."""
    E = frozenset(E)
    if not E:
        raise InputError("marked subset must be nonempty")
    if max(E) >= G.degree or min(E) < 0:
        raise InputError("labels outside the fiber")
    out = [E]
    known = {E}
    queue = deque([E])
    while queue:
        cur = queue.popleft()
        for _n, _k, s in G.steps:
            img = s.apply_set(cur)
            if img not in known:
                known.add(img)
                out.append(img)
                queue.append(img)
    return out


@dataclass(frozen=True)
class Stabilizers:
    per_point: dict[int, frozenset[Permutation]]
    setwise: frozenset[Permutation]
    pointwise: frozenset[Permutation]


def stabilizers(G: PermGroup, E: Iterable[int]) -> Stabilizers:
    E = frozenset(E)
    if not E or max(E) >= G.degree:
        raise InputError("labels outside the fiber")
    per_point = {a: frozenset(t for t in G.elements if t(a) == a) for a in sorted(E)}
    setwise = frozenset(t for t in G.elements if t.apply_set(E) == E)
    pointwise = frozenset.intersection(*per_point.values())
    return Stabilizers(per_point, setwise, pointwise)
