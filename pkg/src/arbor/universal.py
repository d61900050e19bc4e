"""Universal groups with prescribed local action, and their finite quotients.

U(F) is the group of all tree automorphisms whose local permutation at
every vertex lies in F.  For finitary elements membership reduces to a
finite check over the cocycle support.  The vertex stabilizer is captured
at finite depth two independent ways: the wreath-type tower F(n) acting on
coordinate tuples, and a brute-force enumeration of all ball automorphisms
with allowed local actions; `tower_isomorphism_check` transports one onto
the other along the anchor-built address map and compares element sets.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Optional

from .autom import FinitaryAut, identity_aut, label_respecting, sigma
from .ballaut import BallAut
from .errors import CapExceeded, DegreeMismatch, PreconditionError, DEFAULT_GROUP_CAP
from .perm import Perm, PermGroup, identity_perm
from .rng import ALGORITHM, Xoshiro256
from .tree import Vertex, ball, base_vertex, edge_label, sphere


@dataclass(frozen=True)
class UniversalGroupSpec:
    degree: int
    local_group: PermGroup

    def __post_init__(self):
        if self.local_group.degree != self.degree:
            raise DegreeMismatch("local group degree must equal the tree degree")

    def __str__(self):
        return f"U(F) with |F|={self.local_group.order} on degree {self.degree}"


def local_action(g: FinitaryAut, x: Vertex) -> Perm:
    """c(g, x); for finitary elements this is the stored cocycle entry."""
    return g.local(x)


def local_action_from_evaluation(g: FinitaryAut, x: Vertex) -> Perm:
    """Independent reconstruction of c(g, x) from images of the star at x."""
    gx = g.apply(x)
    images = [0] * g.degree
    for a in range(1, g.degree + 1):
        images[a - 1] = edge_label(gx, g.apply(x.step(a)))
    return Perm(g.degree, tuple(images))


def in_universal(g: FinitaryAut, spec: UniversalGroupSpec) -> bool:
    """Finitary membership: the identity is always in F, so checking the
    finite cocycle support decides membership in U(F)."""
    if g.degree != spec.degree:
        raise DegreeMismatch("element degree mismatch")
    return all(p in spec.local_group for _, p in g.cocycle)


def transitivity_witness(spec: UniversalGroupSpec, target: Vertex) -> FinitaryAut:
    """The label-respecting element with b ↦ target (in U(F) for every F)."""
    if target.degree != spec.degree:
        raise DegreeMismatch("target degree mismatch")
    return label_respecting(target)


def freeproduct_normal_form(g: FinitaryAut) -> tuple[int, ...]:
    """Normal form of a label-respecting element as a repetition-free word in
    the base edge inversions; letters apply right to left."""
    if not g.is_label_respecting:
        raise PreconditionError("normal form requires a label-respecting element")
    return g.base_image.address


def word_of_inversions(degree: int, letters: tuple[int, ...]) -> FinitaryAut:
    """Evaluate a word in the base edge inversions (rightmost letter first)."""
    return reduce(lambda acc, a: acc.compose(sigma(degree, a)),
                  letters, identity_aut(degree))


def nondiscreteness_witness(spec: UniversalGroupSpec, n: int) -> Optional[FinitaryAut]:
    """If F does not act freely, an element of U(F) fixing B(b,n) pointwise
    but moving a vertex of S(b,n+1); None when the action is free."""
    if n < 0:
        raise PreconditionError("n must be >= 0")
    F = spec.local_group
    fixing = sorted(
        (p, point)
        for p in F.elements if not p.is_identity
        for point in range(1, spec.degree + 1) if p.fixes(point)
    )
    if not fixing:
        return None
    perm, point = fixing[0]
    if n == 0:
        support = base_vertex(spec.degree)
    else:
        support = _least_address_ending_in(spec.degree, n, point)
    return FinitaryAut.make(spec.degree, base_vertex(spec.degree), {support: perm})


def _least_address_ending_in(degree: int, length: int, last: int) -> Vertex:
    """Lexicographically least repetition-free address of the given length
    whose final label is `last` (so the fixed label points inward)."""
    labels: list[int] = []
    for pos in range(length - 1):
        remaining = length - 1 - pos
        for a in range(1, degree + 1):
            if labels and labels[-1] == a:
                continue
            if remaining == 1 and a == last:
                continue
            labels.append(a)
            break
    labels.append(last)
    return Vertex(degree, tuple(labels))


@dataclass(frozen=True)
class TowerLevel:
    """One finite quotient of the vertex stabilizer.

    domain lists the coordinate tuples (first entry in 1..d, later entries
    in 1..d-1) in lexicographic order; group permutes their 1-based
    positions.  address_map sends sphere vertices to coordinates; anchors
    are the chosen elements a_i ∈ F with a_i(i) = d.
    """

    n: int
    degree: int
    domain: tuple[tuple[int, ...], ...]
    group: PermGroup
    address_map: tuple[tuple[Vertex, tuple[int, ...]], ...]
    anchors: tuple[tuple[int, Perm], ...]
    previous: Optional["TowerLevel"] = None

    @property
    def order(self) -> int:
        return self.group.order

    @cached_property
    def _coord_of(self) -> dict[Vertex, tuple[int, ...]]:
        return dict(self.address_map)

    @cached_property
    def _pos_of(self) -> dict[tuple[int, ...], int]:
        return {coord: pos for pos, coord in enumerate(self.domain, start=1)}

    def coordinate(self, v: Vertex) -> tuple[int, ...]:
        return self._coord_of[v]

    def position(self, coord: tuple[int, ...]) -> int:
        return self._pos_of[coord]

    def closed_form_order(self, spec: UniversalGroupSpec) -> int:
        """|F|·|F_d|^(Σ_{j=1}^{n−1} d(d−1)^(j−1))."""
        F = spec.local_group
        stab = F.point_stabilizer(spec.degree)
        exponent = sum(spec.degree * (spec.degree - 1) ** (j - 1) for j in range(1, self.n))
        return F.order * stab.order ** exponent

    def project_images(self, perm: Perm) -> Perm:
        """Induced permutation on the previous level (forget last coordinate)."""
        if self.previous is None:
            raise PreconditionError("level 1 has no projection")
        prev = self.previous
        images = [0] * len(prev.domain)
        for pos, coord in enumerate(self.domain, start=1):
            src = prev.position(coord[:-1])
            dst = prev.position(self.domain[perm(pos) - 1][:-1])
            images[src - 1] = dst
        return Perm(len(prev.domain), tuple(images))


def _anchors(spec: UniversalGroupSpec) -> dict[int, Perm]:
    F = spec.local_group
    anchors = {}
    for i in range(1, spec.degree + 1):
        candidates = sorted(p for p in F.elements if p(i) == spec.degree)
        if not candidates:
            raise PreconditionError("anchors need a transitive local group")
        anchors[i] = candidates[0]
    return anchors


def tower(spec: UniversalGroupSpec, n: int, cap: int = DEFAULT_GROUP_CAP) -> TowerLevel:
    """The wreath-type tower level F(n) with its anchor-built address map."""
    if n < 1:
        raise PreconditionError("tower level must be >= 1")
    F = spec.local_group
    if not F.is_transitive():
        raise PreconditionError("tower requires a transitive local group")
    d = spec.degree
    anchors = _anchors(spec)
    stab = sorted(F.point_stabilizer(d).elements)

    domain = tuple((i,) for i in range(1, d + 1))
    group = PermGroup(d, F.generators, F.elements)
    amap = {v: (v.address[0],) for v in sphere(base_vertex(d), 1)}
    level = TowerLevel(1, d, domain, group, tuple(sorted(amap.items())), tuple(sorted(anchors.items())))

    for m in range(1, n):
        prev_domain = level.domain
        width = len(prev_domain)
        next_order = level.group.order * len(stab) ** width
        if next_order > cap:
            raise CapExceeded(f"tower order {next_order} exceeds cap {cap}")
        domain = tuple(coord + (j,) for coord in prev_domain for j in range(1, d))
        index = {coord: pos for pos, coord in enumerate(domain, start=1)}
        blocks = [level.position(coord[:-1]) for coord in domain]
        lasts = [coord[-1] for coord in domain]

        def lift(perm_prev: Perm, fibers: tuple[Perm, ...]) -> Perm:
            images = [0] * len(domain)
            for pos0 in range(len(domain)):
                block = blocks[pos0]
                images[pos0] = index[prev_domain[perm_prev(block) - 1] + (fibers[block - 1](lasts[pos0]),)]
            return Perm(len(domain), tuple(images))

        id_fibers = tuple(identity_perm(d) for _ in range(width))
        elements = set()
        for perm_prev in level.group.elements:
            for fibers in itertools.product(stab, repeat=width):
                elements.add(lift(perm_prev, fibers))
        generators = [lift(gen, id_fibers) for gen in level.group.generators]
        for block in range(width):
            for h in F.point_stabilizer(d).generators:
                fibers = list(id_fibers)
                fibers[block] = h
                generators.append(lift(identity_perm(len(prev_domain)), tuple(fibers)))
        assert len(elements) == next_order
        group = PermGroup(len(domain), tuple(generators), frozenset(elements))

        amap = {}
        for v in sphere(base_vertex(d), m + 1):
            parent = v.parent()
            i = v.address[m - 1]
            j = v.address[m]
            amap[v] = level.coordinate(parent) + (anchors[i](j),)
        level = TowerLevel(m + 1, d, domain, group,
                           tuple(sorted(amap.items())), tuple(sorted(anchors.items())),
                           previous=level)
    return level


@dataclass(frozen=True)
class BallStabilizerOracle:
    """Brute-force enumeration of all automorphisms of B(b,n) fixing b whose
    local action at every interior vertex lies in F."""

    n: int
    degree: int
    sphere_vertices: tuple[Vertex, ...]
    group: PermGroup


def _interior_choice_table(spec: UniversalGroupSpec):
    """bucket[a][v] = allowed local permutations c with c(a) = v."""
    F = spec.local_group
    table: dict[int, dict[int, list[Perm]]] = {}
    for a in range(1, spec.degree + 1):
        table[a] = {}
        for p in sorted(F.elements):
            table[a].setdefault(p(a), []).append(p)
    return table


def ball_stabilizer_group(spec: UniversalGroupSpec, n: int,
                          cap: int = DEFAULT_GROUP_CAP) -> BallStabilizerOracle:
    d = spec.degree
    b = base_vertex(d)
    sph = tuple(sphere(b, n))
    if n == 0:
        return BallStabilizerOracle(0, d, sph, PermGroup.from_elements({identity_perm(1)}, 1))
    F = spec.local_group
    interior = [v for r in range(n) for v in sphere(b, r)]
    predicted = F.order
    for v in interior:
        if not v.is_base:
            predicted *= F.point_stabilizer(v.address[-1]).order
    if predicted > cap:
        raise CapExceeded(f"oracle enumeration {predicted} exceeds cap {cap}")
    table = _interior_choice_table(spec)

    assignments: list[dict[Vertex, Perm]] = []

    def extend(idx: int, chosen: dict[Vertex, Perm]):
        if idx == len(interior):
            assignments.append(dict(chosen))
            return
        x = interior[idx]
        if x.is_base:
            options = sorted(F.elements)
        else:
            inward = x.address[-1]
            value = chosen[x.parent()](inward)
            options = table[inward].get(value, [])
        for p in options:
            chosen[x] = p
            extend(idx + 1, chosen)
        chosen.pop(x, None)

    extend(0, {})
    assert len(assignments) == predicted

    position = {v: i for i, v in enumerate(sph, start=1)}
    elements = set()
    for chosen in assignments:
        images = [0] * len(sph)
        for i, v in enumerate(sph, start=1):
            out: list[int] = []
            prefix = b
            for a in v.address:
                out.append(chosen[prefix](a))
                prefix = prefix.child(a)
            images[i - 1] = position[Vertex(d, tuple(out))]
        elements.add(Perm(len(sph), tuple(images)))
    assert len(elements) == predicted
    group = PermGroup.from_elements(elements, len(sph))
    return BallStabilizerOracle(n, d, sph, group)


def tower_isomorphism_check(spec: UniversalGroupSpec, n: int,
                            cap: int = DEFAULT_GROUP_CAP) -> bool:
    """Transport the ball-stabilizer oracle along the address map b_n and
    compare element sets with the tower group."""
    level = tower(spec, n, cap=cap)
    oracle = ball_stabilizer_group(spec, n, cap=cap)
    coord_pos = {v: level.position(level.coordinate(v)) for v in oracle.sphere_vertices}
    transported = set()
    for perm in oracle.group.elements:
        images = [0] * len(level.domain)
        for i, v in enumerate(oracle.sphere_vertices, start=1):
            images[coord_pos[v] - 1] = coord_pos[oracle.sphere_vertices[perm(i) - 1]]
        transported.add(Perm(len(level.domain), tuple(images)))
    return frozenset(transported) == level.group.elements


def sample_stabilizer(spec: UniversalGroupSpec, n: int, seed: int) -> BallAut:
    """Uniform sample from the ball stabilizer at depth n (seeded, exact:
    independent uniform local choices parametrize the group bijectively)."""
    if not spec.local_group.is_transitive():
        raise PreconditionError("sampling requires a transitive local group")
    d = spec.degree
    b = base_vertex(d)
    rng = Xoshiro256(seed)
    if n == 0:
        return BallAut.make(b, 0, {b: b})
    F = spec.local_group
    table = _interior_choice_table(spec)
    chosen: dict[Vertex, Perm] = {}
    for r in range(n):
        for x in sphere(b, r):
            if x.is_base:
                chosen[x] = rng.choice(sorted(F.elements))
            else:
                inward = x.address[-1]
                value = chosen[x.parent()](inward)
                chosen[x] = rng.choice(table[inward][value])
    mapping = {}
    for v in ball(b, n):
        out: list[int] = []
        prefix = b
        for a in v.address:
            out.append(chosen[prefix](a))
            prefix = prefix.child(a)
        mapping[v] = Vertex(d, tuple(out))
    return BallAut.make(b, n, mapping)


SAMPLER_ALGORITHM = ALGORITHM


def relabel_conjugator(labelling: dict[Vertex, int], degree: int, radius: int) -> BallAut:
    """The unique τ with τ(b) = b and new-labelling = old ∘ τ on B(b,radius).

    `labelling[v]` is the new label of the edge joining v to its parent,
    for every non-base v in the ball.  Built by the inductive extension
    τ|E(x) = l|E(τx)⁻¹ ∘ l'|E(x).
    """
    b = base_vertex(degree)
    for r in range(radius):
        for x in sphere(b, r):
            seen = set() if x.is_base else {labelling[x]}
            for a in range(1, degree + 1):
                if not x.is_base and x.address[-1] == a:
                    continue
                child = x.child(a)
                if child not in labelling:
                    raise PreconditionError(f"labelling missing edge to {child}")
                lab = labelling[child]
                if not 1 <= lab <= degree or lab in seen:
                    raise PreconditionError(f"labelling not legal at {x}")
                seen.add(lab)
    mapping = {b: b}
    for r in range(radius):
        for x in sphere(b, r):
            tx = mapping[x]
            for a in range(1, degree + 1):
                if not x.is_base and x.address[-1] == a:
                    continue
                child = x.child(a)
                lam = labelling[child]
                assert tx.is_base or tx.address[-1] != lam
                mapping[child] = tx.child(lam)
    return BallAut.make(b, radius, mapping)


def default_labelling(degree: int, radius: int) -> dict[Vertex, int]:
    """The labelling the address scheme itself uses (l' = l)."""
    b = base_vertex(degree)
    return {v: v.address[-1] for v in ball(b, radius) if not v.is_base}
