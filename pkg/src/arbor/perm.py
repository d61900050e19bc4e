"""Exact permutations on {1..d} and enumerated subgroups of Sym(d).

Composition is right-to-left everywhere: (g*h)(x) = g(h(x)), matching the
cocycle identity used by the tree-automorphism modules.  Groups are stored
with their full element set, produced by plain closure enumeration under a
configurable cap; at the degrees used here (d <= 10) this beats cleverer
algorithms on simplicity and auditability.

Text form of a permutation: one-line image notation "2,3,1" (images of
1, 2, 3 in order).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

from .errors import CapExceeded, DegreeMismatch, ParseError, PreconditionError, DEFAULT_GROUP_CAP


@dataclass(frozen=True, order=True)
class Perm:
    degree: int
    images: tuple[int, ...]

    def __post_init__(self):
        if len(self.images) != self.degree or set(self.images) != set(range(1, self.degree + 1)):
            raise PreconditionError(f"{self.images} is not a permutation of 1..{self.degree}")

    def __call__(self, point: int) -> int:
        return self.images[point - 1]

    def __mul__(self, other: "Perm") -> "Perm":
        if self.degree != other.degree:
            raise DegreeMismatch(f"degree {self.degree} vs {other.degree}")
        return Perm(self.degree, tuple(self.images[i - 1] for i in other.images))

    def inverse(self) -> "Perm":
        inv = [0] * self.degree
        for i, j in enumerate(self.images, start=1):
            inv[j - 1] = i
        return Perm(self.degree, tuple(inv))

    @property
    def is_identity(self) -> bool:
        return all(i == j for i, j in enumerate(self.images, start=1))

    def fixes(self, point: int) -> bool:
        return self.images[point - 1] == point

    @property
    def text(self) -> str:
        return ",".join(str(i) for i in self.images)

    def __str__(self):
        return self.text


def identity_perm(degree: int) -> Perm:
    return Perm(degree, tuple(range(1, degree + 1)))


def cycle_perm(degree: int, *cycle: int) -> Perm:
    images = list(range(1, degree + 1))
    for a, c in zip(cycle, cycle[1:]):
        images[a - 1] = c
    if cycle:
        images[cycle[-1] - 1] = cycle[0]
    return Perm(degree, tuple(images))


def parse_perm(text: str, degree: int | None = None) -> Perm:
    try:
        images = tuple(int(part) for part in text.strip().split(","))
    except ValueError as exc:
        raise ParseError(f"bad permutation {text!r}") from exc
    if degree is not None and len(images) != degree:
        raise ParseError(f"expected degree {degree}, got {len(images)} images")
    try:
        return Perm(len(images), images)
    except PreconditionError as exc:
        raise ParseError(str(exc)) from exc


class PermGroup:
    """A subgroup of Sym(d) with its element set fully enumerated."""

    def __init__(self, degree: int, generators: tuple[Perm, ...], elements: frozenset[Perm]):
        self.degree = degree
        self.generators = generators
        self.elements = elements
        self.order = len(elements)

    @classmethod
    def from_generators(cls, generators, degree: int | None = None,
                        cap: int = DEFAULT_GROUP_CAP) -> "PermGroup":
        gens = tuple(generators)
        if degree is None:
            if not gens:
                raise PreconditionError("degree required for the trivial group")
            degree = gens[0].degree
        for g in gens:
            if g.degree != degree:
                raise DegreeMismatch("generators of mixed degree")
        elements = {identity_perm(degree)}
        frontier = [g for g in gens if g not in elements]
        elements.update(frontier)
        while frontier:
            new = []
            for g in gens:
                for h in frontier:
                    p = g * h
                    if p not in elements:
                        elements.add(p)
                        new.append(p)
                        if len(elements) > cap:
                            raise CapExceeded(f"group order exceeds cap {cap}")
            frontier = new
        return cls(degree, gens, frozenset(elements))

    @classmethod
    def from_elements(cls, elements, degree: int) -> "PermGroup":
        elems = frozenset(elements)
        gens = tuple(sorted(g for g in elems if not g.is_identity))
        return cls(degree, gens, elems)

    def __contains__(self, perm: Perm) -> bool:
        return perm in self.elements

    def __iter__(self):
        return iter(sorted(self.elements))

    def __eq__(self, other):
        return isinstance(other, PermGroup) and self.degree == other.degree \
            and self.elements == other.elements

    def __hash__(self):
        return hash((self.degree, self.elements))

    def orbit(self, point: int) -> set[int]:
        seen = {point}
        frontier = [point]
        while frontier:
            x = frontier.pop()
            for g in self.generators:
                y = g(x)
                if y not in seen:
                    seen.add(y)
                    frontier.append(y)
        return seen

    def is_transitive(self) -> bool:
        return len(self.orbit(1)) == self.degree

    def is_free_action(self) -> bool:
        """No non-identity element fixes a point of {1..d}."""
        return all(not g.fixes(p)
                   for g in self.elements if not g.is_identity
                   for p in range(1, self.degree + 1))

    def point_stabilizer(self, point: int) -> "PermGroup":
        if not 1 <= point <= self.degree:
            raise PreconditionError(f"point {point} out of range")
        stab = frozenset(g for g in self.elements if g.fixes(point))
        return PermGroup.from_elements(stab, self.degree)

    def generated_by_point_stabilizers(self) -> bool:
        stab_elements: set[Perm] = set()
        for p in range(1, self.degree + 1):
            stab_elements.update(self.point_stabilizer(p).elements)
        sub = PermGroup.from_generators(tuple(stab_elements), degree=self.degree,
                                        cap=max(DEFAULT_GROUP_CAP, self.order))
        return sub.elements == self.elements

    def is_2_transitive(self) -> bool:
        if self.degree < 2:
            raise PreconditionError("2-transitivity needs degree >= 2")
        # transitive on ordered pairs of distinct points
        pair = (1, 2)
        seen = {pair}
        frontier = [pair]
        while frontier:
            x, y = frontier.pop()
            for g in self.generators:
                img = (g(x), g(y))
                if img not in seen:
                    seen.add(img)
                    frontier.append(img)
        return len(seen) == self.degree * (self.degree - 1)

    def is_abelian(self) -> bool:
        elems = sorted(self.elements)
        return all(a * b == b * a for i, a in enumerate(elems) for b in elems[i:])

    def is_simple(self) -> bool:
        """Brute force: every non-identity normal closure is the whole group."""
        if self.order == 1:
            return False
        for g in self.elements:
            if g.is_identity:
                continue
            closure = PermGroup.from_generators(
                tuple({h * g * h.inverse() for h in self.elements}),
                degree=self.degree, cap=max(DEFAULT_GROUP_CAP, self.order))
            if closure.order != self.order:
                return False
        return True


def trivial_group(degree: int) -> PermGroup:
    return PermGroup.from_generators((), degree=degree)


def symmetric_group(degree: int) -> PermGroup:
    if degree == 1:
        return trivial_group(1)
    gens = (cycle_perm(degree, 1, 2), cycle_perm(degree, *range(1, degree + 1)))
    return PermGroup.from_generators(gens)


def alternating_group(degree: int) -> PermGroup:
    if degree < 3:
        return trivial_group(degree)
    gens = tuple(cycle_perm(degree, 1, 2, k) for k in range(3, degree + 1))
    return PermGroup.from_generators(gens)


def full_symmetric_elements(degree: int) -> frozenset[Perm]:
    return frozenset(Perm(degree, images) for images in permutations(range(1, degree + 1)))


def group_from_perm_texts(texts, degree: int | None = None) -> PermGroup:
    perms = [parse_perm(t, degree) for t in texts if t.strip()]
    if degree is None and perms:
        degree = perms[0].degree
    if degree is None:
        raise ParseError("no permutations and no degree given")
    return PermGroup.from_generators(perms, degree=degree)
