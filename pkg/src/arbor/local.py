"""k-closures, truncated independence, and local-to-global probes.

Everything here is computed at explicit finite truncations and every
result carries its (k, depth, budget) provenance.  Membership answers are
tri-state: word-budget profiles can certify "yes" (a certificate word is
retained) but never "no"; only exact profiles — prescribed local actions,
or the Baumslag-Solitar coset arithmetic — can refute.

Group orders of truncated closures are computed by exact counting, not
element enumeration: processing the ball level by level, each newly
completed k-ball constraint multiplies the count by the number of ways to
extend a realized partial map, which is the index of one fixator
restriction in another ([Fix(A) : Fix(B(x,k))]).  The backends supply
those indices exactly (local-permutation combinatorics for universal
groups, fixing-modulus arithmetic for Baumslag-Solitar); a brute stitched
enumeration cross-checks the counts at small depth in the tests.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from math import lcm
from typing import Iterable, Optional, Sequence

from . import bass_serre as bs
from .autom import (
    Classification,
    FinitaryAut,
    Kind,
    axis_vertex,
    classify,
    enumerate_words,
)
from .ballaut import BallAut, restrict_finitary
from .errors import ArborError, CapExceeded, PreconditionError, DEFAULT_GROUP_CAP
from .perm import Perm, PermGroup
from .tree import (
    PathSpec,
    Vertex,
    ball,
    base_vertex,
    distance,
    edge_label,
    geodesic,
    project_to_path,
    sphere,
)
from .universal import UniversalGroupSpec


class PurelyEllipticSoFar(ArborError):
    """No hyperbolic element was found within the exploration budget."""


def restrict(g: FinitaryAut, x: Vertex, k: int) -> BallAut:
    """h ↦ h|B(x,k) as a ball automorphism."""
    return restrict_finitary(g, x, k)


def pattern_local_action(pattern: BallAut, v: Vertex) -> Perm:
    """The local permutation a ball pattern induces at an interior vertex."""
    degree = v.degree
    images = [0] * degree
    for a in range(1, degree + 1):
        images[a - 1] = edge_label(pattern(v), pattern(v.step(a)))
    return Perm(degree, tuple(images))


class Answer(enum.Enum):
    YES_ON_REGION = "yes_on_region"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class LocalProfile:
    """Realized k-ball restriction data for a generating set.

    Word profiles are lower approximations (exact=False): a missing
    pattern refutes nothing.  Exact profiles answer membership with a
    decision procedure instead of a stored table.
    """

    k: int
    exact: bool
    word_budget: Optional[int] = None

    def covers(self, x: Vertex) -> bool:
        raise NotImplementedError

    def matches(self, x: Vertex, pattern: BallAut) -> Optional[bool]:
        raise NotImplementedError

    def certificate(self, x: Vertex, pattern: BallAut) -> Optional[FinitaryAut]:
        return None


@dataclass(frozen=True)
class WordProfile(LocalProfile):
    region_center: Vertex = None
    region_radius: int = 0
    patterns: dict = field(default_factory=dict)  # Vertex -> {pairs: certificate}

    def covers(self, x: Vertex) -> bool:
        return x in self.patterns

    def matches(self, x: Vertex, pattern: BallAut) -> Optional[bool]:
        if not self.covers(x):
            raise PreconditionError(f"profile does not cover {x}")
        if pattern.pairs in self.patterns[x]:
            return True
        return None  # a word budget cannot refute

    def certificate(self, x: Vertex, pattern: BallAut) -> Optional[FinitaryAut]:
        return self.patterns.get(x, {}).get(pattern.pairs)

    def pattern_count(self, x: Vertex) -> int:
        return len(self.patterns[x])


def build_profile(gens: Sequence[FinitaryAut], k: int, word_budget: int,
                  region_center: Vertex, region_radius: int,
                  cap: int = DEFAULT_GROUP_CAP) -> WordProfile:
    """Enumerate words up to the budget and record their k-ball restrictions
    at every vertex of the region, keeping one certificate per pattern."""
    words = enumerate_words(gens, word_budget)
    if len(words) > cap:
        raise CapExceeded(f"word enumeration {len(words)} exceeds cap {cap}")
    patterns: dict[Vertex, dict] = {}
    for x in ball(region_center, region_radius):
        table: dict = {}
        for w in words:
            p = restrict(w, x, k)
            table.setdefault(p.pairs, w)
        patterns[x] = table
    return WordProfile(k=k, exact=False, word_budget=word_budget,
                       region_center=region_center, region_radius=region_radius,
                       patterns=patterns)


@dataclass(frozen=True)
class UniversalProfile(LocalProfile):
    """Exact k-ball patterns of U(F): a ball map is a restriction of a
    U(F) element iff its local action lies in F at every interior vertex
    (any such partial map extends greedily, reusing the parent's
    permutation for the inward constraint)."""

    spec: UniversalGroupSpec = None

    def covers(self, x: Vertex) -> bool:
        return True

    def matches(self, x: Vertex, pattern: BallAut) -> Optional[bool]:
        for v in ball(x, self.k - 1):
            if pattern_local_action(pattern, v) not in self.spec.local_group:
                return False
        return True


def universal_profile(spec: UniversalGroupSpec, k: int) -> UniversalProfile:
    return UniversalProfile(k=k, exact=True, spec=spec)


@dataclass(frozen=True)
class KClosureResult:
    answer: Answer
    refuted_at: Optional[Vertex] = None
    unknown_at: tuple[Vertex, ...] = ()


def in_k_closure(h: FinitaryAut, profile: LocalProfile,
                 region_center: Vertex, region_radius: int) -> KClosureResult:
    """Does h agree with a realized pattern on B(x, k) for every x in the
    region?  "no" requires an exact profile; word profiles return unknown."""
    unknown = []
    for x in ball(region_center, region_radius):
        verdict = profile.matches(x, restrict(h, x, profile.k))
        if verdict is False:
            return KClosureResult(Answer.NO, refuted_at=x)
        if verdict is None:
            unknown.append(x)
    if unknown:
        return KClosureResult(Answer.UNKNOWN, unknown_at=tuple(unknown))
    return KClosureResult(Answer.YES_ON_REGION)


# ---------------------------------------------------------------------------
# truncated independence of path fixators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathDecomposition:
    """Per-path-vertex factors of a truncated path fixator."""

    path: PathSpec
    k: int
    depth: int
    factor_orders: tuple[int, ...]
    factor_generators: dict  # path vertex -> list of BallAut-style maps


@dataclass(frozen=True)
class IndependenceReport:
    holds: bool
    fix_order: int
    factor_orders: tuple[int, ...]
    k: int
    depth: int
    source: str
    enumeration_checked: bool = False
    recombination_samples: int = 0
    failure_witness: Optional[str] = None

    @property
    def factor_product(self) -> int:
        out = 1
        for f in self.factor_orders:
            out *= f
        return out


def _region_vertices(path: PathSpec, depth: int) -> list[Vertex]:
    region = set()
    for x in path.vertices:
        region.update(ball(x, depth))
    return sorted(region)


def _free_choice_vertices(spec: UniversalGroupSpec, path: PathSpec, k: int, depth: int):
    """(vertex, allowed local permutations) for every vertex of the region
    that still has a choice; identity-forced and choiceless vertices are
    omitted.  A vertex's choices sit inside the factor of its projection."""
    F = spec.local_group
    choices = []
    path_set = set(path.vertices)
    for v in _region_vertices(path, depth):
        dist_to_path = min(distance(v, x) for x in path.vertices)
        if dist_to_path >= depth:
            continue  # no complete star inside the region
        if v in path_set:
            pinned_labels = set()
            for u in v.neighbors():
                if u in path_set or min(distance(u, x) for x in path.vertices) <= k - 1:
                    pinned_labels.add(edge_label(v, u))
            allowed = [c for c in sorted(F.elements) if all(c(a) == a for a in pinned_labels)]
            choices.append((v, allowed))
        elif dist_to_path <= k - 2:
            continue  # all neighbours pinned: local action forced to identity
        elif dist_to_path == k - 1:
            inward = edge_label(v, _step_to_path(v, path))
            allowed = [c for c in sorted(F.elements) if c(inward) == inward]
            choices.append((v, allowed))
        else:
            # below the pinned collar: one coset constraint on the inward label
            inward = edge_label(v, _step_to_path(v, path))
            stab = F.point_stabilizer(inward)
            allowed = sorted(stab.elements)
            choices.append((v, allowed))
    return choices


def _step_to_path(v: Vertex, path: PathSpec) -> Vertex:
    target = project_to_path(path, v)
    return geodesic(v, target).vertices[1]


def independence_check_universal(spec: UniversalGroupSpec, path: PathSpec,
                                 k: int, depth: int,
                                 enum_cap: int = 5000) -> IndependenceReport:
    """|Fix(C^{k-1})| at truncation equals the product of the factor orders
    for U(F), by exact counting of the independent local choices; the count
    is cross-checked by brute enumeration whenever it fits under enum_cap,
    and factor tuples are recombined explicitly."""
    if depth < k:
        raise PreconditionError("depth must be at least k")
    choices = _free_choice_vertices(spec, path, k, depth)
    fix_order = 1
    for _, allowed in choices:
        fix_order *= len(allowed)
    factor_orders = []
    for x in path.vertices:
        side = 1
        for v, allowed in choices:
            if project_to_path(path, v) == x:
                side *= len(allowed)
        factor_orders.append(side)

    enumeration_checked = False
    if fix_order <= enum_cap:
        enumeration_checked = True
        count = _enumerate_truncated_fixator_count(spec, path, k, depth, choices)
        assert count == fix_order, "counting disagrees with brute enumeration"

    product = 1
    for f in factor_orders:
        product *= f
    holds = fix_order == product
    samples = _recombination_spot_checks(spec, path, k, depth, choices)
    return IndependenceReport(
        holds=holds, fix_order=fix_order, factor_orders=tuple(factor_orders),
        k=k, depth=depth, source=str(spec),
        enumeration_checked=enumeration_checked, recombination_samples=samples)


def _collar(path: PathSpec, k: int, region: Iterable[Vertex]) -> list[Vertex]:
    return [v for v in region
            if min(distance(v, x) for x in path.vertices) <= k - 1]


def _verify_fixator_map(spec, path, k, depth, mapping) -> None:
    """Independent validity check of one region map: bijective, fixes the
    collar pointwise, and its local action lies in F at every full-star
    vertex."""
    region = _region_vertices(path, depth)
    assert sorted(mapping) == region
    assert len(set(mapping.values())) == len(mapping)
    for v in _collar(path, k, region):
        assert mapping[v] == v
    region_set = set(region)
    for v in region:
        if all(u in region_set for u in v.neighbors()):
            images = [0] * spec.degree
            for a in range(1, spec.degree + 1):
                images[a - 1] = edge_label(mapping[v], mapping[v.step(a)])
            assert Perm(spec.degree, tuple(images)) in spec.local_group


def _enumerate_truncated_fixator_count(spec, path, k, depth, choices) -> int:
    """Brute oracle: materialize the region map of every choice assignment,
    verify each one, and count distinct maps."""
    stacks = [allowed for _, allowed in choices]
    vertices = [v for v, _ in choices]
    seen = set()
    for combo in itertools.product(*stacks) if stacks else [()]:
        assignment = dict(zip(vertices, combo))
        mapping = _region_map_from_choices(spec, path, depth, assignment)
        _verify_fixator_map(spec, path, k, depth, mapping)
        seen.add(tuple(sorted(mapping.items())))
    return len(seen)


def _recombination_spot_checks(spec, path, k, depth, choices, samples: int = 8) -> int:
    """Recombine factor elements: choose the local actions on each side of
    the path from *independent* picks, build the combined region map, and
    verify it is a genuine member of the truncated fixator."""
    sides = {x: i for i, x in enumerate(path.vertices)}
    checked = 0
    for pick in range(samples):
        assignment = {}
        for idx, (v, allowed) in enumerate(choices):
            side = sides[project_to_path(path, v)]
            assignment[v] = allowed[(pick * (side + 2) + idx) % len(allowed)]
        mapping = _region_map_from_choices(spec, path, depth, assignment)
        _verify_fixator_map(spec, path, k, depth, mapping)
        checked += 1
    return checked


def _region_map_from_choices(spec, path, depth, assignment) -> dict[Vertex, Vertex]:
    """Build the region self-map induced by chosen local actions.

    A deep choice is a coset representative relative to its parent: the
    actual local permutation at v is actual(parent)∘choice(v), which keeps
    the inward edge label consistent with where the ancestors sent it.
    """
    from .perm import identity_perm

    idp = identity_perm(spec.degree)
    mapping = {}
    actual = {}
    for x in path.vertices:
        mapping[x] = x
        actual[x] = assignment.get(x, idp)
    region = _region_vertices(path, depth)
    by_dist = {}
    for v in region:
        by_dist.setdefault(min(distance(v, x) for x in path.vertices), []).append(v)
    for dist_level in range(1, depth + 1):
        for v in sorted(by_dist.get(dist_level, [])):
            parent = _step_to_path(v, path)
            label = edge_label(v, parent)
            out = actual[parent](label)
            mapping[v] = mapping[parent].step(out)
            actual[v] = actual[parent] * assignment.get(v, idp)
    return mapping


def independence_check_bs(m: int, n: int, k: int, depth: int) -> IndependenceReport:
    """Truncated independence at the base edge of the BS(m,n) tree.

    Fix(C^{k-1}) ≤ Stab(⟨a⟩) = ⟨a⟩, so every order is a ratio of fixing
    moduli; the product rule fails exactly when the side moduli share more
    than the collar modulus, and a non-realizable factor tuple witnesses it.
    """
    params = bs.BSParams(m, n)
    base = bs.bs_base_vertex(params)
    t_inv = bs.BSVertex.of(bs.BSWord.t_letter(params, -1))
    collar = sorted(set(bs.bs_ball(params, base, k - 1)) | set(bs.bs_ball(params, t_inv, k - 1)),
                    key=lambda v: (v.depth, str(v)))
    region = sorted(set(bs.bs_ball(params, base, depth)) | set(bs.bs_ball(params, t_inv, depth)),
                    key=lambda v: (v.depth, str(v)))
    w_collar = bs.set_fix_modulus(collar)

    def side_of(v):
        return base if bs.bs_distance(v, base) < bs.bs_distance(v, t_inv) else t_inv

    sides = {base: [], t_inv: []}
    for v in region:
        sides[side_of(v)].append(v)
    m_region = bs.set_fix_modulus(region)
    assert m_region % w_collar == 0
    fix_order = m_region // w_collar
    factor_orders = []
    side_moduli = []
    for x in (base, t_inv):
        m_side = bs.set_fix_modulus(sides[x])
        side_moduli.append(m_side)
        factor_orders.append(lcm(w_collar, m_side) // w_collar)
    product = factor_orders[0] * factor_orders[1]
    holds = fix_order == product

    witness = None
    if not holds:
        # the tuple (a^{w_collar} on one side, identity on the other) is a
        # factor pair; realizing it needs s ≡ w (side₁), s ≡ 0 (side₂),
        # s ≡ 0 (collar) — report the unsolvable system
        sol = bs.crt_merge(w_collar % side_moduli[0], side_moduli[0], 0, side_moduli[1])
        merged = None if sol is None else bs.crt_merge(sol[0], sol[1], 0, w_collar)
        if merged is None:
            witness = (f"tuple (a^{w_collar}|side(⟨a⟩), id|side(t⁻¹⟨a⟩)) is not realizable: "
                       f"s ≡ {w_collar % side_moduli[0]} mod {side_moduli[0]}, "
                       f"s ≡ 0 mod {side_moduli[1]}, s ≡ 0 mod {w_collar} has no solution")
        else:
            witness = "product count fails although the canonical tuple recombines"
    return IndependenceReport(
        holds=holds, fix_order=fix_order, factor_orders=tuple(factor_orders),
        k=k, depth=depth, source=f"BS({m},{n}) base edge",
        failure_witness=witness)


def independence_check_words(gens: Sequence[FinitaryAut], path: PathSpec,
                             k: int, depth: int, word_budget: int = 4) -> IndependenceReport:
    """Explored-word variant (lower approximation; exact for finite groups
    once the budget exhausts them)."""
    words = enumerate_words(gens, word_budget)
    region = _region_vertices(path, depth)
    collar = [v for v in region if min(distance(v, x) for x in path.vertices) <= k - 1]
    fixator = [w for w in words if all(w.apply(v) == v for v in collar)]
    restrictions = {tuple(w.apply(v) for v in region) for w in fixator}
    factor_orders = []
    for x in path.vertices:
        side = [v for v in region if project_to_path(path, v) == x]
        factor_orders.append(len({tuple(w.apply(v) for v in side) for w in fixator}))
    product = 1
    for f in factor_orders:
        product *= f
    return IndependenceReport(
        holds=len(restrictions) == product, fix_order=len(restrictions),
        factor_orders=tuple(factor_orders), k=k, depth=depth,
        source=f"words(budget={word_budget})")


def p_k_independence_check(source, path: Optional[PathSpec], k: int, depth: int,
                           **kwargs) -> IndependenceReport:
    """Dispatch on the group source: U(F) spec, BS parameters, or words."""
    if isinstance(source, UniversalGroupSpec):
        return independence_check_universal(source, path, k, depth, **kwargs)
    if isinstance(source, bs.BSParams):
        return independence_check_bs(source.m, source.n, k, depth)
    return independence_check_words(list(source), path, k, depth, **kwargs)


def path_decomposition(spec: UniversalGroupSpec, path: PathSpec,
                       k: int, depth: int) -> PathDecomposition:
    """Materialize per-vertex factor data (orders plus one generator map per
    factor choice vertex) for reporting."""
    choices = _free_choice_vertices(spec, path, k, depth)
    factor_orders = []
    gens: dict[Vertex, list] = {x: [] for x in path.vertices}
    for x in path.vertices:
        side = 1
        for v, allowed in choices:
            if project_to_path(path, v) == x:
                side *= len(allowed)
                if len(allowed) > 1:
                    assignment = {v: allowed[1]}
                    gens[x].append(_region_map_from_choices(spec, path, depth, assignment))
        factor_orders.append(side)
    return PathDecomposition(path=path, k=k, depth=depth,
                             factor_orders=tuple(factor_orders), factor_generators=gens)


# ---------------------------------------------------------------------------
# commutator realization along a hyperbolic axis
# ---------------------------------------------------------------------------


def commutator_realization(n_hyp: FinitaryAut, phi_factor: BallAut,
                           k: int, depth: int) -> BallAut:
    """Solve [n, ψ] = φ for ψ fixing the thickened axis, given φ supported
    on the subtree hanging at one axis vertex.

    ψ is assembled from the two-sided recursion: pieces with positive index
    inherit the initial identity choices, pieces with negative index are
    ψ_i = (n|_i)⁻¹ ∘ φ_{i+ℓ} ∘ ψ_{i+ℓ} ∘ n|_i, which telescopes to
    n⁻ʲ φ nʲ on the subtree at c_{-jℓ}.  The returned window is wide
    enough that the commutator equals φ exactly on B(c₀, depth).
    """
    cls = classify(n_hyp)
    if cls.kind != Kind.HYPERBOLIC:
        raise PreconditionError("need a hyperbolic element")
    ell = cls.translation_length
    c0 = phi_factor.center
    # the commutator chain visits ψ at distance up to depth + ℓ from c0
    work_radius = depth + ell
    if phi_factor.radius < work_radius:
        raise PreconditionError(
            f"factor radius {phi_factor.radius} too small to close the recursion "
            f"(need {work_radius})")
    # c0 must sit on the axis
    idx0, gap = _axis_index_of(n_hyp, cls, c0)
    if gap != 0:
        raise PreconditionError("factor must be centred on an axis vertex")

    axis_positions = range(idx0 - work_radius - ell, idx0 + work_radius + ell + 1)
    axis_points = {i: axis_vertex(n_hyp, cls, i) for i in axis_positions}
    collar = {v for i in axis_points
              for v in ball(axis_points[i], k - 1)} if k >= 1 else set()
    for v in collar:
        if v in phi_factor.mapping and phi_factor(v) != v:
            raise PreconditionError("factor must fix the thickened axis")
    for v, img in phi_factor.pairs:
        if img != v and _axis_projection_index(n_hyp, cls, v, idx0) != idx0:
            raise PreconditionError("factor must be supported on the subtree at its centre")

    n_inv = n_hyp.inverse()

    def psi_map(v: Vertex) -> Vertex:
        proj = _axis_projection_index(n_hyp, cls, v, idx0)
        offset = proj - idx0
        if offset >= 0 or offset % ell != 0:
            return v
        j = -offset // ell
        u = v
        for _ in range(j):
            u = n_hyp.apply(u)
        u = phi_factor(u)
        for _ in range(j):
            u = n_inv.apply(u)
        return u

    psi = BallAut.make(c0, work_radius, {v: psi_map(v) for v in ball(c0, work_radius)})
    # verify the defining equation exactly on the stated ball
    psi_inv = psi.inverse()
    for v in ball(c0, depth):
        u = psi_inv(v)
        u = n_inv.apply(u)
        u = psi(u)
        u = n_hyp.apply(u)
        if u != phi_factor(v):
            raise AssertionError(f"commutator disagrees with the factor at {v}")
    for v in collar:
        if distance(v, c0) <= work_radius:
            assert psi(v) == v
    return psi


def _axis_index_of(g: FinitaryAut, cls: Classification, v: Vertex) -> tuple[int, int]:
    from .autom import axis_nearest

    return axis_nearest(g, cls, v)


def _axis_projection_index(g: FinitaryAut, cls: Classification, v: Vertex, hint: int) -> int:
    idx, _ = _axis_index_of(g, cls, v)
    return idx


def axis_subtree_factor(n_hyp: FinitaryAut, support: Vertex, perm: Perm,
                        k: int, depth: int) -> BallAut:
    """A factor for the commutator construction: the restriction of the
    element with one cocycle entry below `support`, cut to the working
    window around the axis vertex nearest the base."""
    cls = classify(n_hyp)
    ell = cls.translation_length
    c0 = axis_vertex(n_hyp, cls, 0)
    g = FinitaryAut.make(n_hyp.degree, base_vertex(n_hyp.degree), {support: perm})
    return restrict(g, c0, depth + ell)


# ---------------------------------------------------------------------------
# rigidity probe (level-2 decomposition of the 1-ball fixator)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RigidityReport:
    a: Optional[int]
    status: str  # "exact" | "observed" | "unknown"
    remark: str
    block_certificates: tuple = ()


def rigidity_probe(source, word_budget: int = 4, depth: int = 2) -> RigidityReport:
    """Decompose the level-2 image of Fix(B(b,1)) inside the product of the
    d point-stabilizer copies and report how many factors are filled."""
    if isinstance(source, UniversalGroupSpec):
        return _rigidity_exact(source)
    return _rigidity_words(list(source), word_budget)


def _rigidity_exact(spec: UniversalGroupSpec) -> RigidityReport:
    F = spec.local_group
    d = spec.degree
    if F.order == 1:
        raise PreconditionError("hypothesis failure: local action is not 2-transitive")
    if F.is_free_action():
        return RigidityReport(
            a=0, status="exact",
            remark="free local action: level-2 fixator image is trivial "
                   "(discrete case of the dichotomy)")
    if not F.is_2_transitive():
        raise PreconditionError("hypothesis failure: local action is not 2-transitive")
    stab = F.point_stabilizer(d)
    if stab.is_abelian() or not stab.is_simple():
        raise PreconditionError("hypothesis failure: point stabilizer is not "
                                "non-abelian simple")
    b = base_vertex(d)
    certificates = []
    for i in range(1, d + 1):
        block_stab = F.point_stabilizer(i)
        for h in block_stab.generators:
            g = FinitaryAut.make(d, b, {b.child(i): h})
            assert all(g.apply(v) == v for v in ball(b, 1))
            moved_blocks = {w.address[0] for w in sphere(b, 2) if g.apply(w) != w}
            assert moved_blocks <= {i}
            certificates.append((i, h, g))
    return RigidityReport(
        a=d, status="exact",
        remark="every point-stabilizer copy is realized independently by an "
               "element fixing B(b,1) and supported in one block",
        block_certificates=tuple(certificates))


def _rigidity_words(gens: Sequence[FinitaryAut], word_budget: int) -> RigidityReport:
    if not gens:
        raise PreconditionError("need generators")
    d = gens[0].degree
    b = base_vertex(d)
    words = enumerate_words(gens, word_budget)
    local_perms = {w.local(b) for w in words if w.apply(b) == b}
    F_obs = PermGroup.from_generators(tuple(local_perms), degree=d)
    if F_obs.order == 1:
        raise PreconditionError("hypothesis failure: local action is not 2-transitive")
    if F_obs.is_free_action():
        return RigidityReport(a=0, status="observed",
                              remark="explored local action is free (discrete case)")
    if not F_obs.is_2_transitive():
        raise PreconditionError("hypothesis failure: local action is not 2-transitive")
    k_words = [w for w in words if all(w.apply(v) == v for v in ball(b, 1))]
    filled = set()
    for w in k_words:
        for i in range(1, d + 1):
            if any(w.apply(u) != u for u in sphere(b, 2) if u.address[0] == i):
                filled.add(i)
    a_obs = len(filled)
    if a_obs < d:
        return RigidityReport(a=None, status="unknown",
                              remark=f"word budget saw {a_obs} filled blocks; a lower "
                                     "approximation cannot certify a < d")
    return RigidityReport(a=d, status="observed",
                          remark="all blocks filled by explored words")


# ---------------------------------------------------------------------------
# closure chain probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainRow:
    k: int
    order: int
    strict_decrease: bool
    certificate: Optional[str] = None


@dataclass(frozen=True)
class ChainReport:
    rows: tuple[ChainRow, ...]
    depth: int
    source: str
    exact: bool
    budget: Optional[int] = None

    def orders(self) -> list[int]:
        return [r.order for r in self.rows]


def closure_chain_probe(source, k_max: int, depth: int,
                        word_budget: int = 4) -> ChainReport:
    """Orders of the truncated k-closure stabilizers for k = 1..k_max.

    The reported group is the stabilizer-of-b part of the stitched oracle
    at B(b, depth); orders are non-increasing in k by construction.
    """
    if isinstance(source, UniversalGroupSpec):
        orders = [_chain_order_universal(source, k, depth) for k in range(1, k_max + 1)]
        rows = _rows_with_strictness(orders, certificates={})
        return ChainReport(rows=rows, depth=depth, source=str(source), exact=True)
    if isinstance(source, bs.BSParams):
        orders = [_chain_order_bs(source, k, depth) for k in range(1, k_max + 1)]
        certificates = {}
        for k in range(1, k_max):
            if orders[k - 1] > orders[k]:
                sep = bs_separating_element(source, k, depth)
                certificates[k] = sep.describe() if sep else None
        rows = _rows_with_strictness(orders, certificates)
        return ChainReport(rows=rows, depth=depth,
                           source=f"BS({source.m},{source.n})", exact=True)
    gens = list(source)
    orders = [_chain_order_enumerated(gens, k, depth, word_budget)
              for k in range(1, k_max + 1)]
    rows = _rows_with_strictness(orders, certificates={})
    return ChainReport(rows=rows, depth=depth, source="words", exact=False,
                       budget=word_budget)


def _rows_with_strictness(orders: list[int], certificates: dict) -> tuple[ChainRow, ...]:
    rows = []
    for i, order in enumerate(orders):
        k = i + 1
        strict = i > 0 and orders[i - 1] > order
        if i > 0 and order > orders[i - 1]:
            raise AssertionError("closure chain must be non-increasing")
        rows.append(ChainRow(k=k, order=order, strict_decrease=strict,
                             certificate=certificates.get(k - 1)))
    return tuple(rows)


def _chain_order_universal(spec: UniversalGroupSpec, k: int, depth: int) -> int:
    """|F| choices at b and one point-stabilizer coset per deeper interior
    vertex, counted constraint by constraint as each k-ball completes."""
    F = spec.local_group
    b = base_vertex(spec.degree)

    def stab_order(label: int) -> int:
        return F.point_stabilizer(label).order

    order = F.order
    for v in ball(b, min(k, depth) - 1):
        if not v.is_base:
            order *= stab_order(v.address[-1])
    for j in range(k + 1, depth + 1):
        for x in sphere(b, j - k):
            for p in _descendants_at(x, k - 1):
                order *= stab_order(p.address[-1])
    return order


def _descendants_at(x: Vertex, dist: int) -> list[Vertex]:
    """Descendants of x (away from b) at the given distance below it."""
    out = [x]
    for _ in range(dist):
        nxt = []
        for v in out:
            for a in range(1, v.degree + 1):
                if v.is_base or a != v.address[-1]:
                    nxt.append(v.child(a))
        out = nxt
    return out


def _chain_order_bs(params: bs.BSParams, k: int, depth: int) -> int:
    """Fixing-modulus ratios: the extension count of a completed k-ball is
    [Fix(A) : Fix(B(x,k))] computed on the coset tree translated to x."""
    base = bs.bs_base_vertex(params)
    order = bs.set_fix_modulus(bs.bs_ball(params, base, min(k, depth)))
    for j in range(k + 1, depth + 1):
        for x in bs.bs_ball(params, base, j - k):
            if x.depth != j - k:
                continue
            shift = x.rep.inverse()
            ball_x = [bs.bs_act(shift, v) for v in bs.bs_ball(params, x, k)]
            partial = [bs.bs_act(shift, v) for v in bs.bs_ball(params, x, k)
                       if bs.bs_distance(v, base) <= j - 1]
            m_ball = bs.set_fix_modulus(ball_x)
            m_partial = bs.set_fix_modulus(partial)
            assert m_ball % m_partial == 0
            order *= m_ball // m_partial
    return order


def _chain_order_enumerated(gens: Sequence[FinitaryAut], k: int, depth: int,
                            word_budget: int, cap: int = DEFAULT_GROUP_CAP) -> int:
    """Stitched enumeration against explored word patterns.

    Seed with the realized patterns at b that fix b, then complete one
    constraint shell at a time: a constraint at x contributes the realized
    patterns agreeing with the partial map on B(x,k)'s assigned part, and
    distinct constraints of one shell control disjoint new vertices.
    """
    if depth < k:
        raise PreconditionError("depth must be at least k")
    b = base_vertex(gens[0].degree)
    words = enumerate_words(gens, word_budget)
    patterns: dict[Vertex, list] = {}
    for x in ball(b, depth - k):
        patterns[x] = sorted({restrict(w, x, k).pairs for w in words})

    partials: list[dict] = []
    for pairs in patterns[b]:
        mapping = dict(pairs)
        if mapping[b] == b:
            partials.append(mapping)
    for j in range(k + 1, depth + 1):
        for x in sphere(b, j - k):
            grown = []
            for mapping in partials:
                extensions = set()
                for pairs in patterns[x]:
                    pat = dict(pairs)
                    if all(mapping[u] == img for u, img in pat.items() if u in mapping):
                        extensions.add(tuple(sorted(
                            (u, img) for u, img in pat.items() if u not in mapping)))
                for ext in extensions:
                    bigger = dict(mapping)
                    bigger.update(dict(ext))
                    grown.append(bigger)
                    if len(grown) > cap:
                        raise CapExceeded("stitched enumeration exceeds cap")
            partials = grown
    return len(partials)


@dataclass(frozen=True)
class BSSeparator:
    """A stabilizer-truncation element in the k-oracle but not the (k+1)-oracle:
    one a-power on the half-tree behind a neighbour of the base, identity
    elsewhere."""

    direction: str
    exponent: int
    k: int
    depth: int
    failing_center: str
    checked_centers: int

    def describe(self) -> str:
        return (f"a^{self.exponent} on the half-tree behind {self.direction}, identity "
                f"elsewhere: every {self.k}-ball in B(⟨a⟩,{self.depth}) is realized "
                f"({self.checked_centers} centres checked) but the {self.k + 1}-ball at "
                f"{self.failing_center} admits no realizing group element")


def _bs_halftree_map_realizable(params, center, radius, direction, exponent,
                                in_half) -> bool:
    """Is the patchwork (a^exponent beyond `direction`, id elsewhere),
    restricted to B(center, radius), the restriction of a group element?

    Any candidate g with g·center = image(center) is w·aˢ·center_rep⁻¹ for
    one integer s; each ball vertex adds a congruence on s.
    """
    mapping = {}
    for v in bs.bs_ball(params, center, radius):
        if in_half(v):
            mapping[v] = bs.bs_act(bs.BSWord.a_power(params, exponent), v)
        else:
            mapping[v] = v
    x_rep = center.rep
    hx_rep = mapping[center].rep
    shift_src = x_rep.inverse()
    shift_dst = hx_rep.inverse()
    solution: Optional[tuple[int, int]] = (0, 1)
    for v, img in mapping.items():
        src = bs.bs_act(shift_src, v)
        dst = bs.bs_act(shift_dst, img)
        prog = bs.translation_solutions(src, dst)
        if prog is None:
            return False
        solution = bs.crt_merge(solution[0], solution[1], prog[0], prog[1])
        if solution is None:
            return False
    return True


def bs_separating_element(params: bs.BSParams, k: int, depth: int,
                          max_multiplier: int = 8) -> Optional[BSSeparator]:
    """Search the half-tree patchwork family for a certified element of the
    k-oracle missing from the (k+1)-oracle.

    Exponents are multiples of the fixing modulus of the (k-1)-thickened
    edge towards the chosen direction, so the candidate fixes everything a
    k-ball can see across the cut.
    """
    base = bs.bs_base_vertex(params)
    for direction in bs.bs_neighbors(base):
        thick = sorted(
            set(bs.bs_ball(params, base, k - 1)) | set(bs.bs_ball(params, direction, k - 1)),
            key=lambda v: (v.depth, str(v)))
        modulus = bs.set_fix_modulus(thick)

        def in_half(v, direction=direction):
            return bs.bs_distance(v, direction) < bs.bs_distance(v, base)

        for c in range(1, max_multiplier + 1):
            exponent = c * modulus
            centers_k = [x for x in bs.bs_ball(params, base, depth - k)]
            if not all(
                _bs_halftree_map_realizable(params, x, k, direction, exponent, in_half)
                for x in centers_k
            ):
                continue
            failing = None
            for x in bs.bs_ball(params, base, max(0, depth - k - 1)):
                if not _bs_halftree_map_realizable(params, x, k + 1, direction,
                                                   exponent, in_half):
                    failing = x
                    break
            if failing is not None:
                return BSSeparator(direction=str(direction), exponent=exponent,
                                   k=k, depth=depth, failing_center=str(failing),
                                   checked_centers=len(centers_k))
    return None


# ---------------------------------------------------------------------------
# minimal invariant subtree, from explored hyperbolic axes
# ---------------------------------------------------------------------------


def minimal_subtree_approx(gens: Sequence[FinitaryAut], word_budget: int,
                           radius: int = 4) -> set[Vertex]:
    """Convex hull of the axes of all explored hyperbolic words, cut to
    B(b, radius): a lower approximation of the minimal invariant subtree."""
    from .autom import axis_vertices_in_ball
    from .tree import convex_hull

    words = enumerate_words(gens, word_budget)
    b = base_vertex(gens[0].degree)
    axis_points: set[Vertex] = set()
    for w in words:
        cls = classify(w)
        if cls.kind == Kind.HYPERBOLIC:
            axis_points.update(axis_vertices_in_ball(w, cls, b, radius))
    if not axis_points:
        raise PurelyEllipticSoFar(
            f"no hyperbolic word within budget {word_budget}")
    hull = convex_hull(axis_points)
    return {v for v in hull if distance(v, b) <= radius}
