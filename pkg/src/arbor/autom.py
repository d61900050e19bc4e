"""Finitary tree automorphisms and their dynamical classification.

An automorphism is stored as the image of the base vertex plus a finite
cocycle map of local permutations.  An entry at x prescribes the local
action c(g, v) for x itself and for every vertex v below x, until a
deeper entry overrides it; vertices under no entry are label-respecting.
The cocycle of such an element is eventually constant along every ray
(exactly the shape of the local actions in the discreteness witnesses),
and the class is closed under composition and inverse via the cocycle
identity c(gh,x) = c(g,hx)·c(h,x).

Consistency across the edge into x forces one constraint per stored
entry: the entry must send the inward label of x where the inherited
permutation sends it (for entries at b there is nothing to match).
Canonical form stores only entries that differ from the inherited
permutation, so equality is field equality.

Distances to minimal sets are tracked as *doubled* integers so that the
midpoint of an inverted edge needs no floating point: an inversion's
minimal set is its geometric edge, at twice-distance 2·d(v, nearer
endpoint) + 1 from a vertex v.

Serialization (line oriented, bit-exact round trip):

    d=3 base=1.2
    1 : 2,1,3
    2.3 : 1,3,2
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DegreeMismatch, ParseError, PreconditionError
from .perm import Perm, identity_perm, parse_perm
from .tree import (
    HalfTreeSpec,
    PathSpec,
    Vertex,
    ball,
    base_vertex,
    distance,
    geodesic,
    in_half_tree,
    parse_vertex,
)


@dataclass(frozen=True)
class FinitaryAut:
    degree: int
    base_image: Vertex
    cocycle: tuple[tuple[Vertex, Perm], ...] = ()

    def __post_init__(self):
        if self.base_image.degree != self.degree:
            raise DegreeMismatch("base image degree mismatch")
        entries: dict[Vertex, Perm] = {}
        for x, p in self.cocycle:
            if x.degree != self.degree or p.degree != self.degree:
                raise DegreeMismatch("cocycle entry degree mismatch")
            if x in entries:
                raise PreconditionError(f"duplicate cocycle entry at {x}")
            entries[x] = p
        if tuple(sorted(self.cocycle)) != self.cocycle:
            raise PreconditionError("cocycle entries must be sorted (canonical form)")
        for x, p in self.cocycle:
            inherited = _effective(entries, self.degree, x, proper=True)
            if p == inherited:
                raise PreconditionError(f"redundant cocycle entry at {x} (canonical form)")
            if not x.is_base:
                inward = x.address[-1]
                if p(inward) != inherited(inward):
                    raise PreconditionError(
                        f"entry at {x} must agree with the inherited permutation "
                        f"on the inward label {inward}")

    @staticmethod
    def make(degree: int, base_image: Vertex, cocycle: dict[Vertex, Perm] | None = None) -> "FinitaryAut":
        """Canonicalize: drop entries equal to what they would inherit."""
        raw = dict(cocycle or {})
        kept: dict[Vertex, Perm] = {}
        for x in sorted(raw, key=lambda v: (len(v), v.address)):
            inherited = _effective(kept, degree, x, proper=True)
            if raw[x] != inherited:
                kept[x] = raw[x]
        return FinitaryAut(degree, base_image, tuple(sorted(kept.items())))

    @property
    def support(self) -> tuple[Vertex, ...]:
        return tuple(x for x, _ in self.cocycle)

    @property
    def is_identity(self) -> bool:
        return self.base_image.is_base and not self.cocycle

    @property
    def is_label_respecting(self) -> bool:
        return not self.cocycle

    def local(self, x: Vertex) -> Perm:
        """The local permutation c(g, x): the deepest entry at or above x."""
        return _effective(dict(self.cocycle), self.degree, x, proper=False)

    def apply(self, v: Vertex) -> Vertex:
        """Walk v's address from b, passing each label through the governing
        local permutation, re-reducing on the image side."""
        if v.degree != self.degree:
            raise DegreeMismatch("vertex degree mismatch")
        entries = dict(self.cocycle)
        eff = entries.get(base_vertex(self.degree), identity_perm(self.degree))
        img = list(self.base_image.address)
        src: tuple[int, ...] = ()
        for a in v.address:
            out = eff(a)
            if img and img[-1] == out:
                img.pop()
            else:
                img.append(out)
            src = src + (a,)
            eff = entries.get(Vertex(self.degree, src), eff)
        return Vertex(self.degree, tuple(img))

    def inverse_apply(self, u: Vertex) -> Vertex:
        """The vertex v with g(v) = u, found by walking the image geodesic."""
        if u.degree != self.degree:
            raise DegreeMismatch("vertex degree mismatch")
        entries = dict(self.cocycle)
        src = base_vertex(self.degree)
        eff = entries.get(src, identity_perm(self.degree))
        img = self.base_image
        while img != u:
            t = _first_step_label(img, u)
            a = eff.inverse()(t)
            src = src.child(a)
            eff = entries.get(src, eff)
            img = img.step(t)
        return src

    def compose(self, other: "FinitaryAut") -> "FinitaryAut":
        """self∘other, via the cocycle identity c(gh,x) = c(g, hx)·c(h, x).

        The product's cocycle can only change across an edge where one
        factor's does, so its entries live at finitely many known
        candidates; each is kept iff it differs from its parent's value.
        """
        if self.degree != other.degree:
            raise DegreeMismatch("composing automorphisms of different degree")
        base = self.apply(other.base_image)

        def value(x: Vertex) -> Perm:
            return self.local(other.apply(x)) * other.local(x)

        candidates = set(other.support)
        for y in self.support:
            candidates.add(other.inverse_apply(y))
            if not y.is_base:
                candidates.add(other.inverse_apply(y.parent()))
        entries = {}
        b = base_vertex(self.degree)
        for x in candidates:
            val = value(x)
            inherited = identity_perm(self.degree) if x.is_base else value(x.parent())
            if val != inherited:
                entries[x] = val
        if b not in entries and not value(b).is_identity:
            entries[b] = value(b)
        return FinitaryAut.make(self.degree, base, entries)

    def inverse(self) -> "FinitaryAut":
        """c(g^{-1}, v) = c(g, g^{-1}v)^{-1}, with entries at the images of
        this element's change edges."""
        def value(v: Vertex) -> Perm:
            return self.local(self.inverse_apply(v)).inverse()

        candidates = set()
        for x in self.support:
            candidates.add(self.apply(x))
            if not x.is_base:
                candidates.add(self.apply(x.parent()))
        entries = {}
        b = base_vertex(self.degree)
        for v in candidates:
            val = value(v)
            inherited = identity_perm(self.degree) if v.is_base else value(v.parent())
            if val != inherited:
                entries[v] = val
        if b not in entries and not value(b).is_identity:
            entries[b] = value(b)
        return FinitaryAut.make(self.degree, self.inverse_apply(b), entries)

    def __mul__(self, other: "FinitaryAut") -> "FinitaryAut":
        return self.compose(other)

    def power(self, n: int) -> "FinitaryAut":
        if n < 0:
            return self.inverse().power(-n)
        out = identity_aut(self.degree)
        for _ in range(n):
            out = out.compose(self)
        return out

    def to_text(self) -> str:
        lines = [f"d={self.degree} base={self.base_image.text}"]
        lines.extend(f"{x.text} : {p.text}" for x, p in self.cocycle)
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_text(text: str) -> "FinitaryAut":
        lines = [ln for ln in (raw.strip() for raw in text.splitlines()) if ln]
        if not lines or not lines[0].startswith("d="):
            raise ParseError("expected header 'd=<n> base=<address>'")
        header = lines[0].split()
        try:
            degree = int(header[0][2:])
        except (ValueError, IndexError) as exc:
            raise ParseError("bad degree in header") from exc
        if len(header) < 2 or not header[1].startswith("base="):
            raise ParseError("missing base= in header")
        base = parse_vertex(header[1][5:], degree)
        entries = {}
        for ln in lines[1:]:
            if ":" not in ln:
                raise ParseError(f"bad cocycle line {ln!r}")
            left, right = ln.split(":", 1)
            x = parse_vertex(left, degree)
            p = parse_perm(right, degree)
            if x in entries:
                raise ParseError(f"duplicate cocycle entry {left.strip()!r}")
            # identity entries matter: they cancel an inherited permutation
            entries[x] = p
        return FinitaryAut.make(degree, base, entries)


def _effective(entries: dict[Vertex, Perm], degree: int, x: Vertex, proper: bool) -> Perm:
    """Deepest entry at an ancestor of x (or x itself unless proper=True)."""
    prefixes = range(len(x) - (1 if proper else 0), -1, -1)
    for n in prefixes:
        p = entries.get(Vertex(degree, x.address[:n]))
        if p is not None:
            return p
    return identity_perm(degree)


def _first_step_label(x: Vertex, target: Vertex) -> int:
    if x == target:
        raise PreconditionError("no step from a vertex to itself")
    k = len(x)
    if len(target) > k and target.address[:k] == x.address:
        return target.address[k]
    return x.address[-1]


def identity_aut(degree: int) -> FinitaryAut:
    return FinitaryAut.make(degree, base_vertex(degree))


def label_respecting(b_image: Vertex) -> FinitaryAut:
    """The unique label-respecting automorphism sending b to b_image."""
    return FinitaryAut.make(b_image.degree, b_image)


def sigma(degree: int, label: int) -> FinitaryAut:
    """The label-respecting inversion of the edge with label `label` at b."""
    return label_respecting(base_vertex(degree).child(label))


def displacement(g: FinitaryAut, v: Vertex) -> int:
    return distance(v, g.apply(v))


class Kind(enum.Enum):
    ELLIPTIC = "Elliptic"
    INVERSION = "Inversion"
    HYPERBOLIC = "Hyperbolic"


@dataclass(frozen=True)
class Classification:
    """Outcome of classifying an automorphism.

    translation_length is 0 unless hyperbolic.  The witness is the vertex
    of the minimal set nearest the base vertex (unique, being a nearest
    point projection onto a convex set): the fixed vertex for elliptics,
    the nearer endpoint of the inverted edge, or the start of a one-period
    axis window oriented toward the attracting end.
    """

    kind: Kind
    translation_length: int
    fixed_vertex: Optional[Vertex] = None
    inverted_edge: Optional[tuple[Vertex, Vertex]] = None
    axis_window: Optional[PathSpec] = None

    def __post_init__(self):
        if self.kind == Kind.HYPERBOLIC:
            if self.translation_length < 1 or self.axis_window is None:
                raise PreconditionError("hyperbolic needs ell >= 1 and an axis window")
            if len(self.axis_window) != self.translation_length + 1:
                raise PreconditionError("axis window must span one translation period")
        elif self.translation_length != 0:
            raise PreconditionError("non-hyperbolic translation length must be 0")

    @property
    def witness(self) -> Vertex:
        if self.kind == Kind.ELLIPTIC:
            return self.fixed_vertex
        if self.kind == Kind.INVERSION:
            return self.inverted_edge[0]
        return self.axis_window.vertices[0]

    def describe(self) -> str:
        if self.kind == Kind.ELLIPTIC:
            return f"Elliptic ℓ=0 witness={self.fixed_vertex}"
        if self.kind == Kind.INVERSION:
            u, v = self.inverted_edge
            return f"Inversion edge=({u},{v})"
        return f"Hyperbolic ℓ={self.translation_length} axis_start={self.witness}"


def classify(g: FinitaryAut) -> Classification:
    """Descend from b toward the minimal set: each step toward g(v) lowers
    the displacement by exactly 2 until it is minimal, which pins the kind."""
    v = base_vertex(g.degree)
    w = g.apply(v)
    dist = distance(v, w)
    while True:
        if dist == 0:
            return Classification(Kind.ELLIPTIC, 0, fixed_vertex=v)
        x1 = geodesic(v, w).vertices[1]
        w1 = g.apply(x1)
        d1 = distance(x1, w1)
        if d1 == dist - 2:
            v, w, dist = x1, w1, d1
            continue
        assert d1 == dist, "displacement can only stay or drop by 2"
        if dist == 1 and g.apply(w) == v:
            return Classification(Kind.INVERSION, 0, inverted_edge=(v, w))
        return Classification(
            Kind.HYPERBOLIC, dist,
            axis_window=PathSpec(geodesic(v, w).vertices, kind="biinfinite-window"))


def fixed_set_in_ball(g: FinitaryAut, center: Vertex, n: int) -> set[Vertex]:
    """Fixed vertices of an elliptic automorphism within B(center, n)."""
    cls = classify(g)
    if cls.kind != Kind.ELLIPTIC:
        raise PreconditionError(f"fixed_set_in_ball needs an elliptic input, got {cls.kind.value}")
    return {v for v in ball(center, n) if g.apply(v) == v}


def axis_vertex(g: FinitaryAut, cls: Classification, index: int) -> Vertex:
    """Vertex at signed position `index` along the axis; window occupies 0..ℓ."""
    ell = cls.translation_length
    window = cls.axis_window.vertices
    shift, pos = divmod(index, ell)
    v = window[pos]
    if shift > 0:
        for _ in range(shift):
            v = g.apply(v)
    elif shift < 0:
        ginv = g.inverse()
        for _ in range(-shift):
            v = ginv.apply(v)
    return v


def axis_nearest(g: FinitaryAut, cls: Classification, v: Vertex) -> tuple[int, int]:
    """(axis index, distance) of the nearest axis vertex to v.

    The distance along the axis is unimodal in the index, so a local walk
    from the window start finds the projection exactly.
    """
    if cls.kind != Kind.HYPERBOLIC:
        raise PreconditionError("axis_nearest needs a hyperbolic classification")
    cache: dict[int, Vertex] = {}

    def at(i: int) -> Vertex:
        if i not in cache:
            cache[i] = axis_vertex(g, cls, i)
        return cache[i]

    i = 0
    best = distance(v, at(0))
    while True:
        down = distance(v, at(i - 1))
        up = distance(v, at(i + 1))
        if down < best:
            i, best = i - 1, down
        elif up < best:
            i, best = i + 1, up
        else:
            return i, best


def axis_vertices_in_ball(g: FinitaryAut, cls: Classification, center: Vertex, radius: int) -> set[Vertex]:
    """All axis vertices within B(center, radius)."""
    i0, d0 = axis_nearest(g, cls, center)
    out: set[Vertex] = set()
    if d0 > radius:
        return out
    for direction in (1, -1):
        i = i0
        while True:
            x = axis_vertex(g, cls, i)
            if distance(center, x) > radius:
                break
            out.add(x)
            i += direction
    return out


def twice_distance_to_min_set(g: FinitaryAut, cls: Classification, v: Vertex) -> int:
    """2·d(v, X(g)), exact (odd for inversions: midpoint bookkeeping)."""
    if cls.kind == Kind.ELLIPTIC:
        for u in geodesic(v, cls.fixed_vertex):
            if g.apply(u) == u:
                return 2 * distance(v, u)
        raise AssertionError("witness vertex must be fixed")
    if cls.kind == Kind.INVERSION:
        x, y = cls.inverted_edge
        return 2 * min(distance(v, x), distance(v, y)) + 1
    _, d = axis_nearest(g, cls, v)
    return 2 * d


def _min_set_vertex_hits(g: FinitaryAut, cls: Classification, u: Vertex) -> bool:
    """Whether u lies in X(g) (as a vertex; inversions have none)."""
    if cls.kind == Kind.ELLIPTIC:
        return g.apply(u) == u
    return False


def _min_set_contains_midpoint(g: FinitaryAut, cls: Classification, u: Vertex, w: Vertex) -> bool:
    """Whether the midpoint of the edge {u,w} lies in X(g)."""
    if cls.kind == Kind.ELLIPTIC:
        return g.apply(u) == u and g.apply(w) == w
    if cls.kind == Kind.INVERSION:
        return set(cls.inverted_edge) == {u, w}
    return False


def min_sets_intersect(g: FinitaryAut, cg: Classification, h: FinitaryAut, ch: Classification) -> bool:
    """Geometric intersection test for two elliptic/inversion minimal sets.

    Two convex subsets of a tree intersect iff they intersect along the
    geodesic between any two of their points, so a bridge scan is exact.
    """
    bridge = geodesic(cg.witness, ch.witness).vertices
    for u in bridge:
        if _min_set_vertex_hits(g, cg, u) and _min_set_vertex_hits(h, ch, u):
            return True
    for u, w in zip(bridge, bridge[1:]):
        if _min_set_contains_midpoint(g, cg, u, w) and _min_set_contains_midpoint(h, ch, u, w):
            return True
    # the bridge endpoints sit in (or adjacent to) the minimal sets, but an
    # inverted edge can stick out sideways; scan its endpoints' edges too
    for aut, cls, other, other_cls in ((g, cg, h, ch), (h, ch, g, cg)):
        if cls.kind == Kind.INVERSION:
            u, w = cls.inverted_edge
            if _min_set_contains_midpoint(other, other_cls, u, w):
                return True
    return False


def min_set_twice_gap(g: FinitaryAut, cg: Classification, h: FinitaryAut, ch: Classification) -> int:
    """2·d(X(g), X(h)) for disjoint elliptic/inversion minimal sets."""
    bridge = geodesic(cg.witness, ch.witness).vertices

    def entry_points(aut, cls):
        if cls.kind == Kind.ELLIPTIC:
            return [i for i, u in enumerate(bridge) if aut.apply(u) == u]
        return [i for i, u in enumerate(bridge) if u in cls.inverted_edge]

    gi = entry_points(g, cg)
    hi = entry_points(h, ch)
    if not gi or not hi:
        raise PreconditionError("minimal sets do not meet the witness bridge")
    gap = min(abs(i - j) for i in gi for j in hi)
    extra = (1 if cg.kind == Kind.INVERSION else 0) + (1 if ch.kind == Kind.INVERSION else 0)
    return 2 * gap + extra


def tits_product_check(phi: FinitaryAut, psi: FinitaryAut) -> Classification:
    """Product of two elliptic/inversion elements with disjoint minimal sets;
    guaranteed hyperbolic."""
    cp = classify(phi)
    cq = classify(psi)
    for cls in (cp, cq):
        if cls.kind == Kind.HYPERBOLIC:
            raise PreconditionError("inputs must be elliptic or inversions")
    if min_sets_intersect(phi, cp, psi, cq):
        raise PreconditionError("minimal sets intersect")
    result = classify(phi.compose(psi))
    assert result.kind == Kind.HYPERBOLIC
    return result


@dataclass(frozen=True)
class CommonFixedResult:
    """Outcome of the purely-elliptic fixed point search: exactly one of a
    common fixed vertex, a common fixed geometric edge (midpoint), or a
    hyperbolic obstruction word in the generators."""

    vertex: Optional[Vertex] = None
    edge: Optional[tuple[Vertex, Vertex]] = None
    obstruction: Optional[FinitaryAut] = None


def common_fixed_vertex(gens: Sequence[FinitaryAut]) -> CommonFixedResult:
    if not gens:
        raise PreconditionError("need at least one generator")
    classes = []
    for g in gens:
        cls = classify(g)
        if cls.kind == Kind.HYPERBOLIC:
            return CommonFixedResult(obstruction=g)
        classes.append(cls)
    for i, (g, cg) in enumerate(zip(gens, classes)):
        for h, ch in zip(gens[i + 1:], classes[i + 1:]):
            if not min_sets_intersect(g, cg, h, ch):
                word = g.compose(h)
                assert classify(word).kind == Kind.HYPERBOLIC
                return CommonFixedResult(obstruction=word)
    # pairwise intersections + Helly: a common point exists; it lies within
    # reach of the witnesses (each intersection step stays in the running hull)
    b = base_vertex(gens[0].degree)
    witnesses = [cls.witness for cls in classes]
    spread = max((distance(u, v) for u in witnesses for v in witnesses), default=0)
    radius = max(distance(b, w) for w in witnesses) + len(gens) * spread + 2
    candidates = ball(b, radius)
    fixed = [v for v in candidates if all(g.apply(v) == v for g in gens)]
    if fixed:
        best = min(fixed, key=lambda v: (len(v), v.address))
        return CommonFixedResult(vertex=best)
    for u in candidates:
        for a in range(1, u.degree + 1):
            w = u.child(a)
            if all(_min_set_contains_midpoint(g, cls, u, w) for g, cls in zip(gens, classes)):
                return CommonFixedResult(edge=(u, w))
    raise AssertionError("pairwise-intersecting convex sets must share a point")


def enumerate_words(gens: Sequence[FinitaryAut], max_length: int) -> list[FinitaryAut]:
    """All distinct products of the generators and their inverses up to the
    given word length (canonical-form deduplication), identity included."""
    if not gens:
        raise PreconditionError("need at least one generator")
    degree = gens[0].degree
    letters = []
    for g in gens:
        letters.append(g)
        inv = g.inverse()
        if inv not in letters:
            letters.append(inv)
    seen = {identity_aut(degree)}
    frontier = list(seen)
    for _ in range(max_length):
        new = []
        for w in frontier:
            for a in letters:
                x = a.compose(w)
                if x not in seen:
                    seen.add(x)
                    new.append(x)
        frontier = new
    return sorted(seen, key=lambda g: (len(g.base_image), g.base_image.address, g.cocycle))


def _forward_ray(g: FinitaryAut, cls: Classification, length: int) -> list[Vertex]:
    """Axis vertices from the window start in the attracting direction."""
    return [axis_vertex(g, cls, i) for i in range(length + 1)]


def _backward_ray(g: FinitaryAut, cls: Classification, length: int) -> list[Vertex]:
    return [axis_vertex(g, cls, -i) for i in range(length + 1)]


def _same_end(ray_a: list[Vertex], ray_b: list[Vertex]) -> bool:
    tail = set(ray_b)
    return ray_a[-1] in tail and ray_a[-2] in tail


def axis_inside_half_tree(g: FinitaryAut, cls: Classification, half: HalfTreeSpec) -> bool:
    """Exact: the axis avoids the far endpoint of the cut edge iff it stays
    on one side; the window start then decides which."""
    _, gap = axis_nearest(g, cls, half.far)
    return gap >= 1 and in_half_tree(half, cls.axis_window.vertices[0])


def hyperbolic_in_half_tree(
    gens: Sequence[FinitaryAut],
    half: HalfTreeSpec,
    word_budget: int = 6,
    power_budget: int = 8,
) -> Optional[FinitaryAut]:
    """Bounded search for a hyperbolic element with axis inside the half-tree:
    push a conjugate g = f·h·f⁻¹ toward the attracting end of some h whose
    attracting end lies beyond the cut.  Semi-decision: None on exhaustion.
    """
    words = enumerate_words(gens, word_budget)
    hyperbolics = []
    for w in words:
        cls = classify(w)
        if cls.kind == Kind.HYPERBOLIC:
            hyperbolics.append((w, cls))
    if not hyperbolics:
        return None
    b = base_vertex(gens[0].degree)
    ray_len = max(
        8,
        2 * (distance(b, half.side) + 2)
        + max(cls.translation_length for _, cls in hyperbolics) * (power_budget + 2),
    )
    for h, ch in hyperbolics:
        forward = _forward_ray(h, ch, ray_len)
        if not any(in_half_tree(half, v) for v in forward):
            continue
        repelling = _backward_ray(h, ch, ray_len)
        for f in words:
            g = f.compose(h).compose(f.inverse())
            cg = classify(g)
            if cg.kind != Kind.HYPERBOLIC:
                continue
            if _same_end(_forward_ray(g, cg, ray_len), repelling):
                continue
            if _same_end(_backward_ray(g, cg, ray_len), repelling):
                continue
            conj = g
            for _ in range(power_budget + 1):
                cc = classify(conj)
                if cc.kind == Kind.HYPERBOLIC and axis_inside_half_tree(conj, cc, half):
                    return conj
                conj = h.compose(conj).compose(h.inverse())
    return None
