"""Integer max-flow with node capacities, by node splitting and BFS augmentation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Hashable, Sequence

INF = None  # marker for an unbounded node or arc capacity


@dataclass
class FlowNetwork:
    """Directed network with node and arc capacities.

    Node capacity ``None`` means unbounded; the source and sink are always
    unbounded. ``infinity`` is the finite stand-in used for unbounded
    capacities; any value at least the true max-flow gives the same answer.
    """

    source: Hashable = "s"
    sink: Hashable = "t"
    infinity: int | None = None
    nodes: list = field(default_factory=list)
    node_cap: dict = field(default_factory=dict)
    arcs: list = field(default_factory=list)

    def __post_init__(self):
        self._pos = {}
        for x in (self.source, self.sink):
            self.add_node(x, INF)

    def add_node(self, x: Hashable, cap: int | None = 1) -> None:
        if x in self._pos:
            if x not in (self.source, self.sink):
                self.node_cap[x] = cap
            return
        self._pos[x] = len(self.nodes)
        self.nodes.append(x)
        self.node_cap[x] = INF if x in (self.source, self.sink) else cap

    def add_arc(self, u: Hashable, w: Hashable, cap: int | None = INF) -> None:
        if w == self.source:
            raise ValueError("arcs into the source are not allowed")
        if u == self.sink:
            raise ValueError("arcs out of the sink are not allowed")
        for x in (u, w):
            if x not in self._pos:
                self.add_node(x)
        if cap is not None and cap <= 0:
            raise ValueError(f"arc capacity must be positive, got {cap}")
        self.arcs.append((u, w, cap))

    def arc_set(self) -> set:
        return {(u, w) for u, w, _ in self.arcs}


class _Residual:
    """Adjacency-list residual graph over integer vertices."""

    __slots__ = ("head", "cap", "adj")

    def __init__(self, n: int):
        self.head: list[int] = []
        self.cap: list[int] = []
        self.adj: list[list[int]] = [[] for _ in range(n)]

    def add(self, u: int, w: int, c: int) -> int:
        e = len(self.head)
        self.head += [w, u]
        self.cap += [c, 0]
        self.adj[u].append(e)
        self.adj[w].append(e + 1)
        return e

    def augment(self, s: int, t: int, limit: int) -> int:
        value = 0
        head, cap, adj = self.head, self.cap, self.adj
        n = len(adj)
        while value < limit:
            pred = [-1] * n
            pred[s] = -2
            queue = deque([s])
            while queue and pred[t] == -1:
                u = queue.popleft()
                for e in adj[u]:
                    w = head[e]
                    if cap[e] > 0 and pred[w] == -1:
                        pred[w] = e
                        queue.append(w)
            if pred[t] == -1:
                break
            # bottleneck along the path
            push = limit - value
            w = t
            while w != s:
                e = pred[w]
                push = min(push, cap[e])
                w = head[e ^ 1]
            w = t
            while w != s:
                e = pred[w]
                cap[e] -= push
                cap[e ^ 1] += push
                w = head[e ^ 1]
            value += push
        return value


def max_flow(net: FlowNetwork) -> tuple[int, list[list]]:
    """Maximum s-t flow value and a decomposition into unit paths.

    Each returned path lists the network nodes it visits, from source to sink.
    """
    n = len(net.nodes)
    if net.infinity is not None:
        big = net.infinity
    else:
        big = 1 + sum(1 for x in net.nodes if net.node_cap[x] is not None and net.node_cap[x] > 0)
        big += sum(c for _, _, c in net.arcs if c is not None)
    pos = net._pos
    res = _Residual(2 * n)
    for x in net.nodes:
        i = pos[x]
        c = net.node_cap[x]
        res.add(2 * i, 2 * i + 1, big if c is None else c)
    arc_edges = []
    for u, w, c in net.arcs:
        e = res.add(2 * pos[u] + 1, 2 * pos[w], big if c is None else c)
        arc_edges.append((e, c if c is not None else big))
    s, t = 2 * pos[net.source], 2 * pos[net.sink] + 1
    value = res.augment(s, t, big)
    return value, _decompose(net, res, arc_edges, value)


def _decompose(net: FlowNetwork, res: _Residual, arc_edges, value: int) -> list[list]:
    """Peel unit paths off the flow on the original arcs, cancelling cycles."""
    out_arcs: dict[int, list[list]] = {}
    for (e, c), (u, w, _) in zip(arc_edges, net.arcs):
        f = c - res.cap[e]
        if f > 0:
            out_arcs.setdefault(net._pos[u], []).append([net._pos[w], f])
    s, t = net._pos[net.source], net._pos[net.sink]
    paths = []
    for _ in range(value):
        path = [s]
        where = {s: 0}
        used: list[list] = []
        while path[-1] != t:
            u = path[-1]
            arc = next(a for a in out_arcs.get(u, []) if a[1] > 0)
            w = arc[0]
            if w in where:
                # cancel the cycle w -> ... -> u -> w and retry from w
                k = where[w]
                for a in used[k:]:
                    a[1] -= 1
                arc[1] -= 1
                for x in path[k + 1:]:
                    del where[x]
                del path[k + 1:]
                del used[k:]
                continue
            used.append(arc)
            where[w] = len(path)
            path.append(w)
        for a in used:
            a[1] -= 1
        paths.append([net.nodes[i] for i in path])
    return paths


def brute_force_disjoint_paths(net: FlowNetwork) -> int:
    """Largest family of internally node-disjoint s-t paths (exponential oracle).

    Only meaningful when every internal node has capacity 1 and arcs are
    unbounded, which is the regime used by the criterion.
    """
    succ: dict = {}
    for u, w, _ in net.arcs:
        succ.setdefault(u, []).append(w)
    s, t = net.source, net.sink
    simple: list[frozenset] = []

    def walk(u, seen):
        for w in succ.get(u, ()):
            if w == t:
                simple.append(frozenset(seen))
            elif w not in seen and w != s:
                walk(w, seen | {w})

    walk(s, frozenset())
    direct = sum(1 for p in simple if not p)
    inner = sorted({p for p in simple if p}, key=len)

    best = 0

    def pick(i, used, count):
        nonlocal best
        best = max(best, count)
        for j in range(i, len(inner)):
            if not (inner[j] & used):
                pick(j + 1, used | inner[j], count + 1)

    pick(0, frozenset(), 0)
    # a direct s->t arc carries unbounded flow; report it as one path per arc
    return best + direct


def paths_are_disjoint(paths: Sequence[Sequence], source, sink) -> bool:
    seen = set()
    for p in paths:
        for x in p[1:-1]:
            if x in seen or x in (source, sink):
                return False
            seen.add(x)
    return True
