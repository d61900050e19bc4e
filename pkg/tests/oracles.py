"""Independent brute-force oracles.

These deliberately avoid the library's address arithmetic: the tree is
materialized as an explicit adjacency graph (vertices = reduced label
words, edges = parent/child pairs, straight from the definition) and
queries run BFS on it.  Derived expected values in the tests come from
here.
"""

from collections import deque

from arbor.tree import Vertex


def materialize_ball(degree: int, radius: int):
    """Adjacency dict of B(b, radius) built from parent/child edges only."""
    root = ()
    adjacency = {root: set()}
    frontier = [root]
    for _ in range(radius):
        new = []
        for word in frontier:
            for label in range(1, degree + 1):
                if word and word[-1] == label:
                    continue
                child = word + (label,)
                adjacency.setdefault(child, set())
                adjacency[child].add(word)
                adjacency[word].add(child)
                new.append(child)
        frontier = new
    return adjacency


def bfs_distances(adjacency, source):
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adjacency[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def bfs_distance(degree: int, u: Vertex, v: Vertex, radius: int | None = None) -> int:
    if radius is None:
        radius = len(u) + len(v) + 1
    adjacency = materialize_ball(degree, radius)
    return bfs_distances(adjacency, u.address)[v.address]


def bfs_path(degree: int, u: Vertex, v: Vertex) -> list[Vertex]:
    """A shortest path found by BFS predecessor tracking."""
    radius = len(u) + len(v) + 1
    adjacency = materialize_ball(degree, radius)
    prev = {u.address: None}
    queue = deque([u.address])
    while queue:
        x = queue.popleft()
        if x == v.address:
            break
        for w in sorted(adjacency[x]):
            if w not in prev:
                prev[w] = x
                queue.append(w)
    path = []
    cur = v.address
    while cur is not None:
        path.append(Vertex(degree, cur))
        cur = prev[cur]
    return list(reversed(path))


def sphere_count(degree: int, n: int) -> int:
    """Count vertices at BFS distance n from the base vertex by enumeration."""
    adjacency = materialize_ball(degree, n)
    dist = bfs_distances(adjacency, ())
    return sum(1 for d in dist.values() if d == n)


def bs_word_pool(params, radius, exponent_range):
    """Group elements v·aˢ·u⁻¹ over ball cosets u,v and |s| < exponent_range:
    every element realizing any ball pattern centred in the radius has this
    shape, so restriction sets built from the pool are complete."""
    from arbor.bass_serre import BSWord, bs_ball, bs_base_vertex

    base = bs_base_vertex(params)
    reps = [v.rep for v in bs_ball(params, base, radius)]
    pool = []
    for v in reps:
        for u in reps:
            for s in range(exponent_range):
                pool.append(v * BSWord.a_power(params, s) * u.inverse())
    return pool


def bs_stitched_order(params, k, depth, pool):
    """Definition-faithful stitched enumeration: restrict every pool element
    to each k-ball, then count the maps h with h(base)=base all of whose
    k-ball restrictions are realized."""
    from arbor.bass_serre import bs_act, bs_ball, bs_base_vertex

    base = bs_base_vertex(params)
    patterns = {}
    for x in bs_ball(params, base, depth - k):
        pats = set()
        ball_x = bs_ball(params, x, k)
        for w in pool:
            pats.add(tuple(sorted((str(v), str(bs_act(w, v))) for v in ball_x)))
        patterns[x] = sorted(pats)
    partials = []
    for pairs in patterns[base]:
        mapping = dict(pairs)
        if mapping[str(base)] == str(base):
            partials.append(mapping)
    for j in range(k + 1, depth + 1):
        shell = [v for v in bs_ball(params, base, j - k) if v.depth == j - k]
        for x in shell:
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
            partials = grown
    return len(partials)


def mulclose(generators, identity, cap=10**6):
    """Plain closure of a generating set under a binary operation via *."""
    elements = {identity}
    elements.update(generators)
    frontier = list(elements)
    while frontier:
        new = []
        for g in generators:
            for h in frontier:
                p = g * h
                if p not in elements:
                    elements.add(p)
                    new.append(p)
                    if len(elements) > cap:
                        raise RuntimeError("oracle closure exceeded cap")
        frontier = new
    return elements
