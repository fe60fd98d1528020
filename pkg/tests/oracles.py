"""Independent brute-force oracles shared by the test modules.

Nothing here calls the flow code: half-trek systems are searched by explicit
enumeration, and graph families are built from scratch.
"""

from __future__ import annotations

import itertools
import random

from lfhtc.cnf import CnfFormula
from lfhtc.graph import LatentFactorGraph


def half_treks(g: LatentFactorGraph, y: int):
    """(left, right, target, latent) for every half-trek from observed node y.

    Sides are sets of tagged nodes ("o", i) / ("l", h). The right side of a
    latent half-trek is a simple directed path that may revisit y.
    """
    out = []

    def walk(path, left, latent):
        right = {("o", i) for i in path}
        if latent is not None:
            right.add(("l", latent))
        out.append((frozenset(left), frozenset(right), path[-1], latent))
        for u, w in g.directed:
            if u == path[-1] and w not in path:
                walk(path + [w], left, latent)

    walk([y], {("o", y)}, None)
    for h, c in g.latent_edges:
        if c != y:
            continue
        for h2, w in g.latent_edges:
            if h2 == h:
                walk([w], {("o", y), ("l", h)}, h)
    return out


def system_exists(g: LatentFactorGraph, v: int, A: set[int], Z: set[int], H: set[int]) -> bool:
    """Is there a half-trek system without sided intersection from a subset of A
    onto pa(v) | Z, where the half-trek to each z in Z is y <- h -> z with h in H?"""
    parents = [u for u, w in g.directed if w == v]
    targets = sorted(set(parents)) + sorted(Z)
    options = []
    for tgt in targets:
        cands = []
        for y in A:
            for left, right, end, latent in half_treks(g, y):
                if end != tgt:
                    continue
                if tgt in Z and not (latent in H and len(right) == 2):
                    continue
                cands.append((left, right))
        options.append(cands)

    def place(i, used_left, used_right):
        if i == len(targets):
            return True
        for left, right in options[i]:
            if left & used_left or right & used_right:
                continue
            if place(i + 1, used_left | left, used_right | right):
                return True
        return False

    return place(0, frozenset(), frozenset())


def allowed_nodes(g: LatentFactorGraph, v: int, Z: set[int], H: set[int]) -> set[int]:
    head = Z | {v}
    blocked_latents = {h for h, c in g.latent_edges if c in head} - H
    banned = head | {c for h, c in g.latent_edges if h in blocked_latents}
    return set(range(g.d)) - banned


def small_graph_family():
    """Latent-factor graphs with d <= 4 and at most two latent nodes.

    d <= 3: every directed edge set, cycles included. d = 4: every acyclic
    edge set. Latent child sets have size >= 2; graphs are kept up to
    relabelling of the observed nodes.
    """
    seen = set()
    for d in range(2, 5):
        pairs = [(u, w) for u in range(d) for w in range(d) if u != w]
        child_sets = [c for r in range(2, d + 1) for c in itertools.combinations(range(d), r)]
        latent_choices = [()] + [(c,) for c in child_sets] + list(itertools.combinations(child_sets, 2))
        perms = list(itertools.permutations(range(d)))
        for r in range(len(pairs) + 1):
            for edges in itertools.combinations(pairs, r):
                if d == 4 and not _acyclic(d, edges):
                    continue
                for kids in latent_choices:
                    key = min(
                        (
                            tuple(sorted((p[u], p[w]) for u, w in edges)),
                            tuple(sorted(tuple(sorted(p[x] for x in c)) for c in kids)),
                        )
                        for p in perms
                    )
                    if (d, key) in seen:
                        continue
                    seen.add((d, key))
                    yield LatentFactorGraph(
                        tuple(str(i + 1) for i in range(d)),
                        tuple(f"h{j + 1}" for j in range(len(kids))),
                        tuple(edges),
                        tuple((j, x) for j, c in enumerate(kids) for x in c),
                    )


def _acyclic(d: int, edges) -> bool:
    indeg = [0] * d
    for _, w in edges:
        indeg[w] += 1
    stack = [i for i in range(d) if indeg[i] == 0]
    count = 0
    while stack:
        u = stack.pop()
        count += 1
        for a, b in edges:
            if a == u:
                indeg[b] -= 1
                if indeg[b] == 0:
                    stack.append(b)
    return count == d


def random_graph(
    rng: random.Random, max_d: int = 6, max_ell: int = 3, acyclic: bool = False, large_bias: float = 0.0
) -> LatentFactorGraph:
    """Random latent-factor graph; ``large_bias`` is the chance a factor gets >= 4 children when d allows."""
    d = rng.randint(2, max_d)
    ell = rng.randint(0, max_ell)
    p = rng.choice([0.2, 0.35, 0.5])
    edges = []
    for u in range(d):
        for w in range(d):
            if u == w or (acyclic and u > w):
                continue
            if rng.random() < p:
                edges.append((u, w))
    ledges = []
    for h in range(ell):
        size = rng.randint(4, d) if d >= 4 and rng.random() < large_bias else rng.randint(2, d)
        for c in sorted(rng.sample(range(d), size)):
            ledges.append((h, c))
    return LatentFactorGraph(
        tuple(str(i + 1) for i in range(d)),
        tuple(f"h{j + 1}" for j in range(ell)),
        tuple(edges),
        tuple(ledges),
    )


# ---------------------------------------------------------------------------
# CNF families


def _all_clauses(n: int):
    lits = [l for i in range(1, n + 1) for l in (i, -i)]
    return [c for r in range(len(lits) + 1) for c in itertools.combinations(lits, r)]


def _orbit_key(n: int, clauses) -> tuple:
    best = None
    for perm in itertools.permutations(range(1, n + 1)):
        for flips in itertools.product((1, -1), repeat=n):
            def m(lit):
                i = abs(lit) - 1
                return perm[i] * flips[i] * (1 if lit > 0 else -1)

            key = tuple(sorted(tuple(sorted(m(l) for l in c)) for c in clauses))
            if best is None or key < best:
                best = key
    return best


def small_cnf_family(max_vars: int = 3, max_clauses: int = 3):
    """Every formula with <= max_vars variables and <= max_clauses clauses (clauses are
    arbitrary literal subsets, the empty clause included), one per orbit under
    variable renaming and polarity flips. Returns (orbit representatives, raw count)."""
    reps = {}
    raw = 0
    for n in range(max_vars + 1):
        clauses = _all_clauses(n)
        for m in range(max_clauses + 1):
            for f in itertools.combinations_with_replacement(clauses, m):
                raw += 1
                reps.setdefault((n, _orbit_key(n, f)), CnfFormula.of(n, f))
    return list(reps.values()), raw


def random_cnf(rng: random.Random, n: int = 4) -> CnfFormula:
    m = rng.randint(1, 4)
    clauses = []
    for _ in range(m):
        size = rng.randint(1, 3)
        vars_ = rng.sample(range(1, n + 1), size)
        clauses.append(tuple(x if rng.random() < 0.5 else -x for x in vars_))
    return CnfFormula.of(n, clauses)
