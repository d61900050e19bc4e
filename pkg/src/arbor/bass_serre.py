"""Baumslag-Solitar groups, Britton reduction, and their Bass-Serre trees.

BS(m,n) = ⟨a,t | t⁻¹aᵐt = aⁿ⟩.  Words are kept in the canonical normal
form a^{e₀} t^{δ₁} a^{e₁} … t^{δᵣ} a^{eᵣ} with no pinches (t⁻¹aᵉt, m|e or
t aᵉ t⁻¹, n|e) and every non-final exponent reduced modulo m (before a t
letter) or n (before a t⁻¹ letter); equality of group elements is equality
of normal forms.  Exponents are arbitrary-precision: the computations here
produce c·nʲ and c·mʲ quickly.

Tree vertices are left cosets w⟨a⟩, canonically the normal form with the
final exponent dropped.  A vertex has m outgoing neighbours w aⁱ t⟨a⟩
(i mod m) and n incoming ones w aʲ t⁻¹⟨a⟩ (j mod n), giving the (m+n)-
regular Bass-Serre tree; arrows follow the t direction.

The key exact primitive: for any coset w⟨a⟩, the exponents s with
a^s w⟨a⟩ = w⟨a⟩ form M_w·Z, with M_w computed by pushing a^s through the
t-syllables of w (each crossing demands a divisibility and scales by n/m
or m/n).  Fixators of finite vertex sets are then lcm's, and every
truncated independence/closure question below reduces to congruences.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Optional

from .errors import CapExceeded, ParseError, PreconditionError, DEFAULT_VERTEX_CAP


@dataclass(frozen=True)
class BSParams:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise PreconditionError("m and n must be positive")
        if self.m == 1 and self.n == 1:
            raise PreconditionError("BS(1,1) acts on a line, not a tree")

    @property
    def degree(self) -> int:
        return self.m + self.n


# internal word encoding: segs = [e0, d1, e1, d2, e2, ...] with d in {+1,-1}


def _append_t(params: BSParams, segs: list, d: int):
    m, n = params.m, params.n
    if len(segs) >= 3 and segs[-2] == -d:
        e = segs[-1]
        if d == 1 and e % m == 0:  # t^{-1} a^e t = a^{en/m}
            segs.pop(); segs.pop()
            segs[-1] += e // m * n
            return
        if d == -1 and e % n == 0:  # t a^e t^{-1} = a^{em/n}
            segs.pop(); segs.pop()
            segs[-1] += e // n * m
            return
    segs.append(d)
    segs.append(0)


def _append_a(segs: list, e: int):
    segs[-1] += e


def _normalize(params: BSParams, segs: list) -> tuple:
    """Reduce non-final exponents into their coset range; carries stay
    divisible, so no new pinches appear."""
    m, n = params.m, params.n
    out = list(segs)
    i = 0
    while i + 2 < len(out):
        d_next = out[i + 1]
        modulus, scale = (m, n) if d_next == 1 else (n, m)
        q, r = divmod(out[i], modulus)
        out[i] = r
        out[i + 2] += q * scale
        i += 2
    return tuple(out)


@dataclass(frozen=True)
class BSWord:
    params: BSParams
    segs: tuple

    def __post_init__(self):
        if len(self.segs) % 2 == 0:
            raise PreconditionError("segment list must alternate exponent, letter, …")

    @staticmethod
    def make(params: BSParams, letters: Iterable[tuple[str, int]]) -> "BSWord":
        """Build from (kind, value) letters, kind 'a' (value = exponent) or
        't' (value = ±1), reducing and normalizing on the fly."""
        segs = [0]
        for kind, value in letters:
            if kind == "a":
                _append_a(segs, value)
            elif kind == "t":
                _append_t(params, segs, value)
            else:
                raise PreconditionError(f"unknown letter kind {kind!r}")
        return BSWord(params, _normalize(params, segs))

    @staticmethod
    def identity(params: BSParams) -> "BSWord":
        return BSWord(params, (0,))

    @staticmethod
    def a_power(params: BSParams, e: int) -> "BSWord":
        return BSWord(params, (e,))

    @staticmethod
    def t_letter(params: BSParams, d: int = 1) -> "BSWord":
        return BSWord.make(params, [("t", d)])

    @property
    def is_identity(self) -> bool:
        return self.segs == (0,)

    @property
    def syllable_count(self) -> int:
        return len(self.segs) // 2

    def letters(self) -> list[tuple[str, int]]:
        out = []
        if self.segs[0]:
            out.append(("a", self.segs[0]))
        for i in range(1, len(self.segs), 2):
            out.append(("t", self.segs[i]))
            if self.segs[i + 1]:
                out.append(("a", self.segs[i + 1]))
        return out

    def __mul__(self, other: "BSWord") -> "BSWord":
        if self.params != other.params:
            raise PreconditionError("mixed BS parameters")
        segs = list(self.segs)
        _append_a(segs, other.segs[0])
        for i in range(1, len(other.segs), 2):
            _append_t(self.params, segs, other.segs[i])
            _append_a(segs, other.segs[i + 1])
        return BSWord(self.params, _normalize(self.params, segs))

    def inverse(self) -> "BSWord":
        letters = []
        for kind, value in reversed(self.letters()):
            letters.append((kind, -value))
        return BSWord.make(self.params, letters)

    def power(self, k: int) -> "BSWord":
        if k < 0:
            return self.inverse().power(-k)
        out = BSWord.identity(self.params)
        for _ in range(k):
            out = out * self
        return out

    @property
    def is_a_power(self) -> bool:
        return len(self.segs) == 1

    def __str__(self):
        if self.is_identity:
            return "1"
        parts = []
        for kind, value in self.letters():
            if kind == "a":
                if value == 1:
                    parts.append("a")
                elif value == -1:
                    parts.append("A")
                else:
                    parts.append(f"a^{value}")
            else:
                parts.append("t" if value == 1 else "T")
        return " ".join(parts)


def britton_reduce(word: BSWord) -> BSWord:
    """Canonical form (idempotent: words are kept reduced throughout)."""
    return BSWord.make(word.params, word.letters())


_TOKEN_RE = re.compile(r"([aAtT])(?:\^(-?\d+))?")


def parse_bs_word(params: BSParams, text: str) -> BSWord:
    stripped = text.replace(" ", "")
    if stripped in ("", "1"):
        return BSWord.identity(params)
    letters = []
    pos = 0
    while pos < len(stripped):
        match = _TOKEN_RE.match(stripped, pos)
        if not match:
            raise ParseError(f"bad word syntax at {stripped[pos:]!r}")
        letter, exp = match.group(1), match.group(2)
        value = int(exp) if exp is not None else 1
        if letter in "aA":
            letters.append(("a", value if letter == "a" else -value))
        else:
            if exp is not None and abs(value) != 1:
                for _ in range(abs(value)):
                    letters.append(("t", (1 if letter == "t" else -1) * (1 if value > 0 else -1)))
                pos = match.end()
                continue
            letters.append(("t", value if letter == "t" else -value))
        pos = match.end()
    return BSWord.make(params, letters)


@dataclass(frozen=True)
class BSVertex:
    """A left coset w⟨a⟩: the normal form with its final exponent dropped."""

    rep: BSWord

    def __post_init__(self):
        if self.rep.segs[-1] != 0:
            raise PreconditionError("coset representative must drop the final a-power")

    @staticmethod
    def of(word: BSWord) -> "BSVertex":
        segs = list(word.segs)
        segs[-1] = 0
        return BSVertex(BSWord(word.params, tuple(segs)))

    @property
    def params(self) -> BSParams:
        return self.rep.params

    @property
    def depth(self) -> int:
        """Distance from the base coset ⟨a⟩ (one edge per t-syllable)."""
        return self.rep.syllable_count

    def __str__(self):
        return "⟨a⟩" if self.rep.is_identity else f"{self.rep}⟨a⟩"


def bs_base_vertex(params: BSParams) -> BSVertex:
    return BSVertex.of(BSWord.identity(params))


def bs_act(word: BSWord, vertex: BSVertex) -> BSVertex:
    """Left multiplication action on cosets."""
    return BSVertex.of(word * vertex.rep)


def bs_neighbors(vertex: BSVertex) -> list[BSVertex]:
    """m outgoing neighbours w aⁱt⟨a⟩ and n incoming ones w aʲt⁻¹⟨a⟩."""
    params = vertex.params
    out = []
    for i in range(params.m):
        out.append(BSVertex.of(vertex.rep * BSWord.make(params, [("a", i), ("t", 1)])))
    for j in range(params.n):
        out.append(BSVertex.of(vertex.rep * BSWord.make(params, [("a", j), ("t", -1)])))
    assert len(set(out)) == params.degree, "Bass-Serre neighbours must be distinct"
    return out


def bs_ball(params: BSParams, center: BSVertex, radius: int,
            cap: int = DEFAULT_VERTEX_CAP) -> list[BSVertex]:
    """BFS ball in the Bass-Serre tree (deterministic order)."""
    seen = {center}
    order = [center]
    frontier = [center]
    for _ in range(radius):
        new = []
        for v in frontier:
            for w in bs_neighbors(v):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
                    new.append(w)
                    if len(seen) > cap:
                        raise CapExceeded(f"Bass-Serre ball exceeds cap {cap}")
        frontier = new
    return order


def bs_distance(u: BSVertex, v: BSVertex) -> int:
    """Tree distance, via the normal form of u⁻¹·v.

    In u⁻¹v's normal form each t-syllable crosses exactly one edge of the
    geodesic, so the distance is the syllable count.
    """
    return (u.rep.inverse() * v.rep).syllable_count


def coset_fix_modulus(vertex: BSVertex) -> int:
    """M with {s : a^s·w⟨a⟩ = w⟨a⟩} = M·Z.

    Push a^s through w's syllables: each t crossing requires m | current
    exponent and scales by n/m (and dually for t⁻¹).
    """
    params = vertex.params
    m, n = params.m, params.n
    modulus = 1
    factor = Fraction(1)
    for i in range(1, len(vertex.rep.segs), 2):
        d = vertex.rep.segs[i]
        required = m if d == 1 else n
        current = modulus * factor  # integral by induction
        assert current.denominator == 1
        modulus *= required // gcd(required, int(current))
        factor *= Fraction(n, m) if d == 1 else Fraction(m, n)
    return modulus


def set_fix_modulus(vertices: Iterable[BSVertex]) -> int:
    """{s : a^s fixes every listed coset} = (lcm of the per-vertex moduli)·Z."""
    out = 1
    for v in vertices:
        out = lcm(out, coset_fix_modulus(v))
    return out


_translation_cache: dict = {}


def translation_solutions(source: BSVertex, target: BSVertex) -> Optional[tuple[int, int]]:
    """The set {s : a^s·source = target} as (offset, modulus), or None.

    Solutions, when they exist, form one residue class modulo the source's
    fixing modulus; probe one period (memoized: the closure probes revisit
    the same coset pairs constantly).
    """
    key = (source, target)
    if key in _translation_cache:
        return _translation_cache[key]
    modulus = coset_fix_modulus(source)
    params = source.params
    result = None
    for s in range(modulus):
        if bs_act(BSWord.a_power(params, s), source) == target:
            result = (s, modulus)
            break
    _translation_cache[key] = result
    return result


def crt_merge(c1: int, m1: int, c2: int, m2: int) -> Optional[tuple[int, int]]:
    """Solve s ≡ c1 (m1), s ≡ c2 (m2); None when incompatible."""
    g = gcd(m1, m2)
    if (c2 - c1) % g != 0:
        return None
    l = lcm(m1, m2)
    step = m1 // g
    k = ((c2 - c1) // g * pow(step, -1, m2 // g)) % (m2 // g) if m2 != g else 0
    s = c1 + m1 * k
    return s % l, l


@dataclass(frozen=True)
class SideMove:
    """One verified instance: a^{c·nʲ} moves (t⁻¹a)ʲ t⁻¹⟨a⟩."""

    c: int
    j: int
    vertex: str
    image: str


@dataclass(frozen=True)
class IndependenceFailureCertificate:
    """Everything needed to re-verify the truncated independence failure of
    BS(m,n) at the base edge by plain coset arithmetic."""

    m: int
    n: int
    k: int
    depth: int
    witness_exponent: int
    fixed_vertices: tuple[str, ...]
    moved_vertex: str
    moved_image: str
    side_moves: tuple[SideMove, ...]

    def describe(self) -> str:
        lines = [
            f"BS({self.m},{self.n}) independence failure at k={self.k}, depth={self.depth}:",
            f"  a^{self.witness_exponent} fixes the (k-1)-neighbourhood of the edge "
            f"(⟨a⟩, t⁻¹⟨a⟩) [{len(self.fixed_vertices)} vertices]",
            f"  yet moves {self.moved_vertex} to {self.moved_image},",
            "  and every a^(c·n^j) (0<c<n, j≤depth) moves a vertex on the t⁻¹ side:",
        ]
        for mv in self.side_moves:
            lines.append(f"    a^{mv.c * self.n ** mv.j} moves {mv.vertex} → {mv.image}")
        return "\n".join(lines)


def pk_failure_witness(m: int, n: int, k: int, depth: int) -> IndependenceFailureCertificate:
    """Construct and verify the truncated independence-failure certificate.

    All claims are re-verified through bs_act; the witness exponent is the
    exact generator of {s : a^s fixes B(e, k-1)} (a multiple of n^k).
    """
    if gcd(m, n) != 1:
        raise PreconditionError(f"need gcd(m,n)=1, got gcd={gcd(m, n)}")
    if m < 2 or n < 2:
        raise PreconditionError("solvable case excluded: need m, n >= 2")
    if k < 1 or depth < k:
        raise PreconditionError("need k >= 1 and depth >= k")
    params = BSParams(m, n)
    base = bs_base_vertex(params)
    t_inv = BSVertex.of(BSWord.t_letter(params, -1))

    edge_ball = sorted(
        set(bs_ball(params, base, k - 1)) | set(bs_ball(params, t_inv, k - 1)),
        key=lambda v: (v.depth, str(v)))
    witness_exp = set_fix_modulus(edge_ball)
    witness = BSWord.a_power(params, witness_exp)
    for v in edge_ball:
        if bs_act(witness, v) != v:
            raise AssertionError("witness must fix the thickened edge")
    assert witness_exp % n ** k == 0

    moved = None
    for v in bs_ball(params, base, depth):
        image = bs_act(witness, v)
        if image != v:
            moved = (v, image)
            break
    if moved is None:
        raise PreconditionError(f"depth {depth} too small to exhibit the witness moving")

    tail = BSWord.make(params, [("t", -1), ("a", 1)])
    side_moves = []
    for j in range(1, depth + 1):
        spot = BSVertex.of(tail.power(j) * BSWord.t_letter(params, -1))
        for c in range(1, n):
            elem = BSWord.a_power(params, c * n ** j)
            assert bs_act(elem, t_inv) == t_inv  # in the t⁻¹-side fixator pool
            image = bs_act(elem, spot)
            if image == spot:
                raise AssertionError("side vertex unexpectedly fixed")
            side_moves.append(SideMove(c, j, str(spot), str(image)))
    return IndependenceFailureCertificate(
        m=m, n=n, k=k, depth=depth,
        witness_exponent=witness_exp,
        fixed_vertices=tuple(str(v) for v in edge_ball),
        moved_vertex=str(moved[0]), moved_image=str(moved[1]),
        side_moves=tuple(side_moves))


def mirror_side_moves(m: int, n: int, depth: int) -> list[SideMove]:
    """The mirrored check on the T_⟨a⟩ side: a^{c·mʲ} moves (t a)ʲ t⟨a⟩."""
    params = BSParams(m, n)
    base = bs_base_vertex(params)
    tail = BSWord.make(params, [("t", 1), ("a", 1)])
    out = []
    for j in range(1, depth + 1):
        spot = BSVertex.of(tail.power(j) * BSWord.t_letter(params, 1))
        for c in range(1, m):
            elem = BSWord.a_power(params, c * m ** j)
            assert bs_act(elem, base) == base
            image = bs_act(elem, spot)
            if image == spot:
                raise AssertionError("mirrored side vertex unexpectedly fixed")
            out.append(SideMove(c, j, str(spot), str(image)))
    return out
