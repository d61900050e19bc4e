"""Partial automorphisms of finite balls: the truncation currency.

A BallAut maps B(center, radius) onto B(image of center, radius),
preserving adjacency.  Composition demands aligned centers/radii;
misalignment is an error, never an implicit re-centering.

Serialization: center and radius on the first two lines, then one
"v → image" line per vertex in lexicographic order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .errors import ParseError, PreconditionError
from .tree import Vertex, ball, distance, parse_vertex


@dataclass(frozen=True)
class BallAut:
    center: Vertex
    radius: int
    pairs: tuple[tuple[Vertex, Vertex], ...]  # sorted by source vertex

    def __post_init__(self):
        if tuple(sorted(self.pairs)) != self.pairs:
            raise PreconditionError("mapping pairs must be sorted (canonical form)")

    @staticmethod
    def make(center: Vertex, radius: int, mapping: dict[Vertex, Vertex]) -> "BallAut":
        return BallAut(center, radius, tuple(sorted(mapping.items())))

    @cached_property
    def mapping(self) -> dict[Vertex, Vertex]:
        return dict(self.pairs)

    @property
    def image_center(self) -> Vertex:
        return self.mapping[self.center]

    def __call__(self, v: Vertex) -> Vertex:
        try:
            return self.mapping[v]
        except KeyError as exc:
            raise PreconditionError(f"{v} outside the ball of {self.center} radius {self.radius}") from exc

    def validate(self):
        """Check the mapping is an adjacency-preserving bijection of the ball."""
        domain = ball(self.center, self.radius)
        if sorted(self.mapping) != domain:
            raise PreconditionError("domain is not the stated ball")
        images = set(self.mapping.values())
        if len(images) != len(self.mapping):
            raise PreconditionError("mapping is not injective")
        c_img = self.image_center
        for v, w in self.mapping.items():
            if distance(self.center, v) != distance(c_img, w):
                raise PreconditionError("mapping does not preserve distance to center")
        for v, w in self.mapping.items():
            if v == self.center:
                continue
            p = _step_towards(v, self.center)
            if distance(self.mapping[p], w) != 1:
                raise PreconditionError("mapping does not preserve adjacency")

    def compose(self, other: "BallAut") -> "BallAut":
        """self∘other; other's image ball must be self's domain ball."""
        if other.radius != self.radius or other.image_center != self.center:
            raise PreconditionError("misaligned composition of ball automorphisms")
        return BallAut.make(
            other.center, other.radius,
            {v: self.mapping[w] for v, w in other.mapping.items()})

    def inverse(self) -> "BallAut":
        return BallAut.make(self.image_center, self.radius,
                            {w: v for v, w in self.mapping.items()})

    def restrict(self, center: Vertex, radius: int) -> "BallAut":
        """Restriction to a smaller ball inside the domain."""
        sub = {}
        for v in ball(center, radius):
            if v not in self.mapping:
                raise PreconditionError("restriction target leaves the domain")
            sub[v] = self.mapping[v]
        return BallAut.make(center, radius, sub)

    @property
    def is_identity(self) -> bool:
        return all(v == w for v, w in self.pairs)

    def agrees_with(self, other: "BallAut") -> bool:
        return self.pairs == other.pairs

    def to_text(self) -> str:
        lines = [f"center={self.center.text}", f"radius={self.radius}"]
        lines.extend(f"{v.text} → {w.text}" for v, w in self.pairs)
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str, degree: int) -> "BallAut":
        lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
        if len(lines) < 2 or not lines[0].startswith("center=") or not lines[1].startswith("radius="):
            raise ParseError("expected 'center=' and 'radius=' header lines")
        center = parse_vertex(lines[0][7:], degree)
        try:
            radius = int(lines[1][7:])
        except ValueError as exc:
            raise ParseError("bad radius") from exc
        mapping = {}
        for ln in lines[2:]:
            if "→" not in ln:
                raise ParseError(f"bad mapping line {ln!r}")
            left, right = ln.split("→", 1)
            mapping[parse_vertex(left, degree)] = parse_vertex(right, degree)
        return BallAut.make(center, radius, mapping)


def _step_towards(v: Vertex, target: Vertex) -> Vertex:
    from .tree import geodesic

    return geodesic(v, target).vertices[1]


def identity_ball_aut(center: Vertex, radius: int) -> BallAut:
    return BallAut.make(center, radius, {v: v for v in ball(center, radius)})


def restrict_finitary(g, x: Vertex, k: int) -> BallAut:
    """Restriction of a finitary automorphism to B(x, k)."""
    return BallAut.make(x, k, {v: g.apply(v) for v in ball(x, k)})
