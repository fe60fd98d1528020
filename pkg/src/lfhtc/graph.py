"""Latent-factor graphs, mixed graphs and the structural queries on them.

Nodes are stored by dense index with a label table; node sets are Python
ints used as bitsets (bit ``i`` set means observed node ``i`` is a member).
Latent node sets use a separate index space. File order fixes every index.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class GraphFormatError(ValueError):
    """Invalid graph description (bad JSON, unknown node, invariant violation)."""


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def to_mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True, eq=False)
class LatentFactorGraph:
    """Observed nodes, latent source nodes, and the edge sets between them.

    ``directed`` holds observed->observed index pairs, ``latent_edges`` holds
    (latent index, observed index) pairs. Both keep file order.
    """

    observed: tuple[str, ...]
    latent: tuple[str, ...]
    directed: tuple[tuple[int, int], ...]
    latent_edges: tuple[tuple[int, int], ...]
    _pa: tuple[int, ...] = field(init=False, repr=False)
    _ch: tuple[int, ...] = field(init=False, repr=False)
    _lch: tuple[int, ...] = field(init=False, repr=False)
    _lpa: tuple[int, ...] = field(init=False, repr=False)
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        d, ell = len(self.observed), len(self.latent)
        labels = list(self.observed) + list(self.latent)
        if len(set(labels)) != len(labels):
            dup = next(x for x in labels if labels.count(x) > 1)
            raise GraphFormatError(f"duplicate label {dup!r}")
        pa, ch = [0] * d, [0] * d
        lch, lpa = [0] * ell, [0] * d
        for u, w in self.directed:
            if not (0 <= u < d and 0 <= w < d):
                raise GraphFormatError(f"unknown endpoint in edge {(u, w)}")
            if u == w:
                raise GraphFormatError(f"self-loop at {self.observed[u]!r}")
            pa[w] |= 1 << u
            ch[u] |= 1 << w
        for h, w in self.latent_edges:
            if not (0 <= h < ell and 0 <= w < d):
                raise GraphFormatError(f"unknown endpoint in latent edge {(h, w)}")
            lch[h] |= 1 << w
            lpa[w] |= 1 << h
        object.__setattr__(self, "_pa", tuple(pa))
        object.__setattr__(self, "_ch", tuple(ch))
        object.__setattr__(self, "_lch", tuple(lch))
        object.__setattr__(self, "_lpa", tuple(lpa))
        index = {x: ("observed", i) for i, x in enumerate(self.observed)}
        index.update({x: ("latent", i) for i, x in enumerate(self.latent)})
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_edges(
        cls,
        observed: Sequence[str],
        latent: Sequence[str] = (),
        directed: Iterable[tuple[str, str]] = (),
        latent_edges: Iterable[tuple[str, str]] = (),
    ) -> "LatentFactorGraph":
        """Build from labelled edges; validates like the JSON reader."""
        return _build(list(observed), list(latent), list(directed), list(latent_edges))

    # sizes and lookup
    @property
    def d(self) -> int:
        return len(self.observed)

    @property
    def ell(self) -> int:
        return len(self.latent)

    @property
    def all_observed(self) -> int:
        return (1 << self.d) - 1

    def index(self, label: str) -> int:
        try:
            kind, i = self._index[label]
        except KeyError:
            raise KeyError(f"node {label!r} not in graph") from None
        return i

    def kind(self, label: str) -> str:
        return self._index[label][0]

    def obs_index(self, label: str) -> int:
        kind, i = self._index.get(label, (None, None))
        if kind != "observed":
            raise KeyError(f"{label!r} is not an observed node of the graph")
        return i

    def lat_index(self, label: str) -> int:
        kind, i = self._index.get(label, (None, None))
        if kind != "latent":
            raise KeyError(f"{label!r} is not a latent node of the graph")
        return i

    def obs_mask(self, labels: Iterable[str]) -> int:
        return to_mask(self.obs_index(x) for x in labels)

    def lat_mask(self, labels: Iterable[str]) -> int:
        return to_mask(self.lat_index(x) for x in labels)

    def obs_labels(self, mask: int) -> frozenset[str]:
        return frozenset(self.observed[i] for i in bits(mask))

    def lat_labels(self, mask: int) -> frozenset[str]:
        return frozenset(self.latent[i] for i in bits(mask))

    # bitset queries
    def pa_mask(self, v: int) -> int:
        return self._pa[v]

    def ch_mask(self, v: int) -> int:
        return self._ch[v]

    def latent_children(self, h: int) -> int:
        return self._lch[h]

    def latent_parents(self, v: int) -> int:
        return self._lpa[v]

    def pa_latent_of(self, nodes: int) -> int:
        out = 0
        for v in bits(nodes):
            out |= self._lpa[v]
        return out

    def children_of_latents(self, hs: int) -> int:
        out = 0
        for h in bits(hs):
            out |= self._lch[h]
        return out

    def children_of_observed(self, nodes: int) -> int:
        out = 0
        for v in bits(nodes):
            out |= self._ch[v]
        return out

    def htr_mask(self, sources: int, avoid: int = 0) -> int:
        """Observed nodes outside ``sources`` reachable by a latent-factor half-trek.

        A half-trek starts at a source and either follows directed edges, or
        first steps to a latent parent not in ``avoid`` and on to its children.
        """
        frontier = self.children_of_observed(sources)
        frontier |= self.children_of_latents(self.pa_latent_of(sources) & ~avoid)
        seen = frontier
        while frontier:
            nxt = self.children_of_observed(frontier) & ~seen
            seen |= nxt
            frontier = nxt
        return seen & ~sources

    def large_latents(self, min_children: int = 4) -> int:
        """Latent nodes with at least ``min_children`` children."""
        return to_mask(h for h in range(self.ell) if popcount(self._lch[h]) >= min_children)

    def to_json(self) -> dict:
        return {
            "observed": list(self.observed),
            "latent": list(self.latent),
            "directed": [[self.observed[u], self.observed[w]] for u, w in self.directed],
            "latent_edges": [[self.latent[h], self.observed[w]] for h, w in self.latent_edges],
        }

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LatentFactorGraph)
            and self.observed == other.observed
            and self.latent == other.latent
            and set(self.directed) == set(other.directed)
            and set(self.latent_edges) == set(other.latent_edges)
        )

    def __hash__(self) -> int:
        return hash((self.observed, self.latent, frozenset(self.directed), frozenset(self.latent_edges)))


@dataclass(frozen=True, eq=False)
class MixedGraph:
    """Observed nodes with directed edges and unordered bidirected edges."""

    observed: tuple[str, ...]
    directed: tuple[tuple[int, int], ...]
    bidirected: frozenset[tuple[int, int]]
    _pa: tuple[int, ...] = field(init=False, repr=False)
    _ch: tuple[int, ...] = field(init=False, repr=False)
    _sib: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        d = len(self.observed)
        if len(set(self.observed)) != d:
            dup = next(x for x in self.observed if self.observed.count(x) > 1)
            raise GraphFormatError(f"duplicate label {dup!r}")
        pa, ch, sib = [0] * d, [0] * d, [0] * d
        for u, w in self.directed:
            if u == w:
                raise GraphFormatError(f"self-loop at {self.observed[u]!r}")
            pa[w] |= 1 << u
            ch[u] |= 1 << w
        norm = set()
        for u, w in self.bidirected:
            if u == w:
                raise GraphFormatError(f"bidirected self-loop at {self.observed[u]!r}")
            sib[u] |= 1 << w
            sib[w] |= 1 << u
            norm.add((min(u, w), max(u, w)))
        object.__setattr__(self, "bidirected", frozenset(norm))
        object.__setattr__(self, "_pa", tuple(pa))
        object.__setattr__(self, "_ch", tuple(ch))
        object.__setattr__(self, "_sib", tuple(sib))

    @classmethod
    def from_edges(
        cls,
        observed: Sequence[str],
        directed: Iterable[tuple[str, str]] = (),
        bidirected: Iterable[tuple[str, str]] = (),
    ) -> "MixedGraph":
        idx = {x: i for i, x in enumerate(observed)}
        try:
            dd = tuple(dict.fromkeys((idx[u], idx[w]) for u, w in directed))
            bb = frozenset((idx[u], idx[w]) for u, w in bidirected)
        except KeyError as exc:
            raise GraphFormatError(f"unknown endpoint {exc.args[0]!r}") from None
        return cls(tuple(observed), dd, bb)

    @property
    def d(self) -> int:
        return len(self.observed)

    def index(self, label: str) -> int:
        return self.observed.index(label)

    def pa_mask(self, v: int) -> int:
        return self._pa[v]

    def ch_mask(self, v: int) -> int:
        return self._ch[v]

    def sib_mask(self, v: int) -> int:
        return self._sib[v]

    def obs_labels(self, mask: int) -> frozenset[str]:
        return frozenset(self.observed[i] for i in bits(mask))

    def htr_mask(self, v: int) -> int:
        """Nodes other than ``v`` reachable by a half-trek from ``v``."""
        seen = self._ch[v] | self._sib[v]
        frontier = seen
        while frontier:
            nxt = 0
            for u in bits(frontier):
                nxt |= self._ch[u]
            nxt &= ~seen
            seen |= nxt
            frontier = nxt
        return seen & ~(1 << v)

    def bidirected_labels(self) -> set[frozenset[str]]:
        return {frozenset((self.observed[u], self.observed[w])) for u, w in self.bidirected}

    def to_json(self) -> dict:
        return {
            "observed": list(self.observed),
            "directed": [[self.observed[u], self.observed[w]] for u, w in self.directed],
            "bidirected": [[self.observed[u], self.observed[w]] for u, w in sorted(self.bidirected)],
        }

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MixedGraph)
            and self.observed == other.observed
            and set(self.directed) == set(other.directed)
            and self.bidirected == other.bidirected
        )

    def __hash__(self) -> int:
        return hash((self.observed, frozenset(self.directed), self.bidirected))


def _build(observed, latent, directed, latent_edges) -> LatentFactorGraph:
    labels = observed + latent
    seen = set()
    for x in labels:
        if not isinstance(x, str):
            raise GraphFormatError(f"node labels must be strings, got {x!r}")
        if x in seen:
            raise GraphFormatError(f"duplicate label {x!r}")
        seen.add(x)
    oi = {x: i for i, x in enumerate(observed)}
    li = {x: i for i, x in enumerate(latent)}

    def check(edge, where):
        if not (isinstance(edge, (list, tuple)) and len(edge) == 2):
            raise GraphFormatError(f"{where}: edge must be a pair, got {edge!r}")
        u, w = edge
        for x in (u, w):
            if x not in oi and x not in li:
                raise GraphFormatError(f"{where}: unknown endpoint {x!r}")
        if u == w:
            raise GraphFormatError(f"{where}: self-loop at {u!r}")
        if w in li:
            raise GraphFormatError(f"{where}: latent node with parent: {u!r} -> {w!r}")
        return u, w

    dd: dict[tuple[int, int], None] = {}
    for e in directed:
        u, w = check(e, "directed")
        if u in li:
            raise GraphFormatError(f"directed: edge {u!r} -> {w!r} leaves a latent node; list it under latent_edges")
        dd[(oi[u], oi[w])] = None
    ll: dict[tuple[int, int], None] = {}
    for e in latent_edges:
        h, w = check(e, "latent_edges")
        if h not in li:
            raise GraphFormatError(f"latent_edges: tail {h!r} is not latent")
        ll[(li[h], oi[w])] = None
    return LatentFactorGraph(tuple(observed), tuple(latent), tuple(dd), tuple(ll))


def _load_json(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict) or "observed" not in data:
        raise GraphFormatError("graph file must be a JSON object with an 'observed' list")
    return data


def parse_graph(text: str) -> LatentFactorGraph:
    """Read a latent-factor graph from its JSON description."""
    data = _load_json(text)
    if "bidirected" in data:
        raise GraphFormatError("file describes a mixed graph (has 'bidirected'); use parse_mixed_graph")
    return _build(
        list(data.get("observed", [])),
        list(data.get("latent", [])),
        list(data.get("directed", [])),
        list(data.get("latent_edges", [])),
    )


def parse_mixed_graph(text: str) -> MixedGraph:
    data = _load_json(text)
    observed = list(data.get("observed", []))
    if data.get("latent"):
        raise GraphFormatError("mixed graphs have no latent nodes")
    idx = {x: i for i, x in enumerate(observed)}
    if len(idx) != len(observed):
        dup = next(x for x in observed if observed.count(x) > 1)
        raise GraphFormatError(f"duplicate label {dup!r}")

    def pairs(key):
        out = []
        for e in data.get(key, []):
            if not (isinstance(e, (list, tuple)) and len(e) == 2):
                raise GraphFormatError(f"{key}: edge must be a pair, got {e!r}")
            for x in e:
                if x not in idx:
                    raise GraphFormatError(f"{key}: unknown endpoint {x!r}")
            if e[0] == e[1]:
                raise GraphFormatError(f"{key}: self-loop at {e[0]!r}")
            out.append((idx[e[0]], idx[e[1]]))
        return out

    return MixedGraph(tuple(observed), tuple(dict.fromkeys(pairs("directed"))), frozenset(pairs("bidirected")))


def parse_any_graph(text: str) -> LatentFactorGraph | MixedGraph:
    data = _load_json(text)
    return parse_mixed_graph(text) if "bidirected" in data else parse_graph(text)


def pa_observed(g: LatentFactorGraph, v: str) -> frozenset[str]:
    return g.obs_labels(g.pa_mask(g.obs_index(v)))


def pa_latent(g: LatentFactorGraph, nodes: Iterable[str]) -> frozenset[str]:
    return g.lat_labels(g.pa_latent_of(g.obs_mask(nodes)))


def htr(g: LatentFactorGraph, sources: Iterable[str], avoid: Iterable[str] = ()) -> frozenset[str]:
    return g.obs_labels(g.htr_mask(g.obs_mask(sources), g.lat_mask(avoid)))


def latent_projection(g: LatentFactorGraph) -> MixedGraph:
    bi = set()
    for h in range(g.ell):
        kids = list(bits(g.latent_children(h)))
        bi.update(itertools.combinations(kids, 2))
    return MixedGraph(g.observed, g.directed, frozenset(bi))


def bidirected_expansion(m: MixedGraph) -> LatentFactorGraph:
    """One fresh latent parent with exactly two children per bidirected edge."""
    taken = set(m.observed)
    latent, ledges = [], []
    for u, w in sorted(m.bidirected):
        name = f"h_{m.observed[u]}_{m.observed[w]}"
        while name in taken:
            name += "'"
        taken.add(name)
        ledges += [(len(latent), u), (len(latent), w)]
        latent.append(name)
    return LatentFactorGraph(m.observed, tuple(latent), m.directed, tuple(ledges))


def stabilizer(g: LatentFactorGraph) -> list[tuple[int, ...]]:
    """All observed-node permutations fixing every latent child set (brute force)."""
    kids = [g.latent_children(h) for h in range(g.ell)]
    out = []
    for p in itertools.permutations(range(g.d)):
        if all(to_mask(p[i] for i in bits(k)) == k for k in kids):
            out.append(p)
    return out


def canonical_form(g: LatentFactorGraph, perms: Iterable[Sequence[int]]) -> tuple:
    """Lexicographically smallest relabelled edge list over the permutation group.

    ``perms`` maps observed index ``i`` to ``perm[i]``; every element must carry
    the family of latent child sets onto itself.
    """
    child_sets = sorted(tuple(sorted(bits(g.latent_children(h)))) for h in range(g.ell))
    best = None
    for p in perms:
        if sorted(p) != list(range(g.d)):
            raise ValueError(f"{tuple(p)} is not a permutation of {g.d} nodes")
        moved = sorted(tuple(sorted(p[i] for i in s)) for s in child_sets)
        if moved != child_sets:
            raise ValueError(f"permutation {tuple(p)} does not preserve the latent edges")
        key = tuple(sorted((p[u], p[w]) for u, w in g.directed))
        if best is None or key < best:
            best = key
    if best is None:
        raise ValueError("empty permutation group")
    return (best, tuple(child_sets))


def relabel(g: LatentFactorGraph, perm: Sequence[int]) -> LatentFactorGraph:
    """Move the structure at observed index ``i`` to index ``perm[i]`` (labels stay put)."""
    return LatentFactorGraph(
        g.observed,
        g.latent,
        tuple((perm[u], perm[w]) for u, w in g.directed),
        tuple((h, perm[w]) for h, w in g.latent_edges),
    )
