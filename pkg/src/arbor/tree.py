"""Addressing and combinatorial geometry of the d-regular labelled tree.

Vertices are label words over {1..d} with no two consecutive labels equal,
read as the reduced edge-label path from a fixed base vertex b (the empty
word).  The tree itself is never materialized: every operation is address
arithmetic, with explicit caps on anything that enumerates.

Text form of a vertex: labels joined by ".", the empty string being b.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .errors import CapExceeded, DegreeMismatch, ParseError, PreconditionError, DEFAULT_VERTEX_CAP


@dataclass(frozen=True, order=True)
class Vertex:
    # order=True makes lexicographic address order the natural sort order;
    # degree sorts first but is constant within any one tree.
    degree: int
    address: tuple[int, ...] = ()

    def __post_init__(self):
        if self.degree < 3:
            raise PreconditionError(f"degree must be >= 3, got {self.degree}")
        prev = 0
        for a in self.address:
            if not 1 <= a <= self.degree:
                raise PreconditionError(f"label {a} out of range 1..{self.degree}")
            if a == prev:
                raise PreconditionError(f"address {self.address} backtracks at label {a}")
            prev = a

    def __len__(self):
        return len(self.address)

    @property
    def is_base(self) -> bool:
        return not self.address

    @property
    def text(self) -> str:
        return ".".join(str(a) for a in self.address)

    def __str__(self):
        return "⟨b⟩" if self.is_base else "⟨%s⟩" % self.text

    def parent(self) -> "Vertex":
        if self.is_base:
            raise PreconditionError("base vertex has no parent")
        return Vertex(self.degree, self.address[:-1])

    def child(self, label: int) -> "Vertex":
        return Vertex(self.degree, self.address + (label,))

    def step(self, label: int) -> "Vertex":
        """Cross the edge labelled `label`: towards the parent if that is the
        inward label, otherwise to the corresponding child."""
        if self.address and self.address[-1] == label:
            return self.parent()
        return self.child(label)

    def neighbors(self) -> list["Vertex"]:
        return [self.step(a) for a in range(1, self.degree + 1)]


def base_vertex(degree: int) -> Vertex:
    return Vertex(degree)


def parse_vertex(text: str, degree: int) -> Vertex:
    text = text.strip()
    if text in ("", "b", "⟨b⟩"):
        return Vertex(degree)
    text = text.strip("⟨⟩")
    try:
        labels = tuple(int(part) for part in text.split("."))
    except ValueError as exc:
        raise ParseError(f"bad vertex {text!r}") from exc
    try:
        return Vertex(degree, labels)
    except PreconditionError as exc:
        raise ParseError(str(exc)) from exc


def _check_same_tree(u: Vertex, v: Vertex):
    if u.degree != v.degree:
        raise DegreeMismatch(f"degree {u.degree} vs {v.degree}")


def common_prefix_length(u: Vertex, v: Vertex) -> int:
    n = 0
    for a, c in zip(u.address, v.address):
        if a != c:
            break
        n += 1
    return n


def edge_label(u: Vertex, v: Vertex) -> int:
    """Label of the edge joining two adjacent vertices (l(e) = l(ē))."""
    _check_same_tree(u, v)
    if len(u) == len(v) + 1 and u.address[:-1] == v.address:
        return u.address[-1]
    if len(v) == len(u) + 1 and v.address[:-1] == u.address:
        return v.address[-1]
    raise PreconditionError(f"{u} and {v} are not adjacent")


def distance(u: Vertex, v: Vertex) -> int:
    """d(u,v) = |u| + |v| - 2·|common prefix|.

    No junction adjustment is needed: if the labels following the common
    prefix agreed, the prefix would extend, contradicting maximality.
    (Stated and tested against a BFS oracle.)
    """
    _check_same_tree(u, v)
    k = common_prefix_length(u, v)
    return len(u) + len(v) - 2 * k


@dataclass(frozen=True)
class PathSpec:
    """A reduced path, as its ordered vertex sequence."""

    vertices: tuple[Vertex, ...]
    kind: str = "finite"  # finite | ray-prefix | biinfinite-window

    def __post_init__(self):
        if not self.vertices:
            raise PreconditionError("empty path")
        if self.kind not in ("finite", "ray-prefix", "biinfinite-window"):
            raise PreconditionError(f"bad path kind {self.kind!r}")
        for a, c in zip(self.vertices, self.vertices[1:]):
            if distance(a, c) != 1:
                raise PreconditionError(f"{a} and {c} not adjacent in path")
        for a, c in zip(self.vertices, self.vertices[2:]):
            if a == c:
                raise PreconditionError("path backtracks")

    def __len__(self):
        return len(self.vertices)

    def __iter__(self) -> Iterator[Vertex]:
        return iter(self.vertices)


def geodesic(u: Vertex, v: Vertex) -> PathSpec:
    """The unique reduced path from u to v."""
    _check_same_tree(u, v)
    k = common_prefix_length(u, v)
    up = [Vertex(u.degree, u.address[:n]) for n in range(len(u), k, -1)]
    down = [Vertex(u.degree, v.address[:n]) for n in range(k, len(v) + 1)]
    return PathSpec(tuple(up + down))


def sphere(center: Vertex, n: int, cap: int = DEFAULT_VERTEX_CAP) -> list[Vertex]:
    """All vertices at distance exactly n from center, in lexicographic order."""
    if n < 0:
        raise PreconditionError("sphere radius must be >= 0")
    d = center.degree
    if n == 0:
        return [center]
    expected = d * (d - 1) ** (n - 1)
    if expected > cap:
        raise CapExceeded(f"sphere size {expected} exceeds cap {cap}")
    out: list[Vertex] = []

    def grow(vertex: Vertex, inward: Optional[int], remaining: int):
        if remaining == 0:
            out.append(vertex)
            return
        for a in range(1, d + 1):
            if a == inward:
                continue
            grow(vertex.step(a), a, remaining - 1)

    grow(center, None, n)
    out.sort()
    assert len(out) == expected
    return out


def ball(center: Vertex, n: int, cap: int = DEFAULT_VERTEX_CAP) -> list[Vertex]:
    """B(center, n), lexicographically ordered."""
    out: list[Vertex] = []
    for r in range(n + 1):
        out.extend(sphere(center, r, cap=cap))
        if len(out) > cap:
            raise CapExceeded(f"ball size exceeds cap {cap}")
    out.sort()
    return out


def project_to_path(path: PathSpec, v: Vertex) -> Vertex:
    """Nearest-point projection of v onto the path (unique for reduced paths)."""
    best = None
    best_d = None
    for x in path.vertices:
        dx = distance(x, v)
        if best_d is None or dx < best_d:
            best, best_d = x, dx
    return best


@dataclass(frozen=True)
class DirectedEdge:
    origin: Vertex
    label: int

    def __post_init__(self):
        if not 1 <= self.label <= self.origin.degree:
            raise PreconditionError(f"edge label {self.label} out of range")

    @property
    def terminus(self) -> Vertex:
        return self.origin.step(self.label)

    @property
    def inverse(self) -> "DirectedEdge":
        return DirectedEdge(self.terminus, self.label)

    def __str__(self):
        return f"({self.origin}→{self.terminus})"


@dataclass(frozen=True)
class HalfTreeSpec:
    """One component of the tree minus a geometric edge, rooted at `side`."""

    cut_edge: DirectedEdge
    side: Vertex

    def __post_init__(self):
        if self.side not in (self.cut_edge.origin, self.cut_edge.terminus):
            raise PreconditionError("side must be an endpoint of the cut edge")

    @property
    def far(self) -> Vertex:
        o, t = self.cut_edge.origin, self.cut_edge.terminus
        return t if self.side == o else o


def in_half_tree(half: HalfTreeSpec, v: Vertex) -> bool:
    """True iff the reduced path from v to the far endpoint passes through side."""
    return distance(v, half.far) == distance(v, half.side) + 1


def convex_hull(vertices: Iterable[Vertex]) -> set[Vertex]:
    """Union of pairwise geodesics (the smallest subtree containing the input)."""
    vs = list(vertices)
    hull: set[Vertex] = set(vs)
    for i, u in enumerate(vs):
        for v in vs[i + 1:]:
            hull.update(geodesic(u, v).vertices)
    return hull
