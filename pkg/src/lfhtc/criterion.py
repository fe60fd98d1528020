"""Latent-factor half-trek criterion: triples, flow graphs and the recursive search.

Also contains the half-trek criterion for mixed graphs, run natively on the
mixed graph so that two half-treks may share the source side of a bidirected
edge without that counting as a latent-node intersection.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .flow import FlowNetwork, _Residual, max_flow
from .graph import LatentFactorGraph, MixedGraph, bits, popcount, to_mask


class MalformedTripleError(ValueError):
    """A triple violates the cardinality or disjointness rules of the criterion."""


@dataclass(frozen=True)
class HtcTriple:
    v: str
    Y: frozenset = frozenset()
    Z: frozenset = frozenset()
    H: frozenset = frozenset()

    def to_json(self) -> dict:
        return {"v": self.v, "Y": sorted(self.Y), "Z": sorted(self.Z), "H": sorted(self.H)}


@dataclass(frozen=True)
class HalfTrek:
    """A half-trek as its node sequence.

    ``kind`` is ``"directed"`` for y -> x1 -> ... -> w, ``"latent"`` for
    y <- h -> x1 -> ... -> w (``nodes[1]`` is h) and ``"bidirected"`` for
    y <-> x1 -> ... -> w in a mixed graph.
    """

    nodes: tuple[str, ...]
    kind: str = "directed"

    @property
    def source(self) -> str:
        return self.nodes[0]

    @property
    def target(self) -> str:
        return self.nodes[-1]

    def left(self) -> frozenset:
        if self.kind == "latent":
            return frozenset(self.nodes[:2])
        return frozenset(self.nodes[:1])

    def right(self) -> frozenset:
        if self.kind == "directed":
            return frozenset(self.nodes)
        return frozenset(self.nodes[1:])

    def to_json(self) -> dict:
        return {"kind": self.kind, "nodes": list(self.nodes)}


def no_sided_intersection(system: Sequence[HalfTrek]) -> bool:
    for a, b in itertools.combinations(system, 2):
        if a.left() & b.left() or a.right() & b.right():
            return False
    return True


@dataclass
class CertificateEntry:
    v: str
    triple: HtcTriple
    system: tuple[HalfTrek, ...] = ()
    trivial: bool = False

    def to_json(self) -> dict:
        out = self.triple.to_json()
        out["trivial"] = self.trivial
        out["system"] = [t.to_json() for t in self.system]
        return out


@dataclass
class Certificate:
    """Nodes in the order they were solved, each with its witness."""

    entries: list[CertificateEntry] = field(default_factory=list)

    @property
    def order(self) -> list[str]:
        return [e.v for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> list[dict]:
        return [e.to_json() for e in self.entries]

    @classmethod
    def from_json(cls, data) -> "Certificate":
        if isinstance(data, dict) and "certificate" in data:
            data = data["certificate"]
        if not isinstance(data, list):
            raise ValueError("certificate must be a JSON list")
        entries = []
        for i, e in enumerate(data):
            try:
                t = HtcTriple(e["v"], frozenset(e.get("Y", [])), frozenset(e.get("Z", [])), frozenset(e.get("H", [])))
                system = tuple(HalfTrek(tuple(s["nodes"]), s.get("kind", "directed")) for s in e.get("system", []))
            except (KeyError, TypeError) as exc:
                raise ValueError(f"certificate entry {i}: malformed ({exc})") from None
            entries.append(CertificateEntry(t.v, t, system, bool(e.get("trivial", False))))
        return cls(entries)


# ---------------------------------------------------------------------------
# flow graph


def build_flow_graph(g: LatentFactorGraph, v: str, allowed: Iterable[str], Z: Iterable[str]) -> FlowNetwork:
    """The node-capacitated network whose max-flow decides a triple.

    Nodes are tagged tuples: ("V", a) and ("L", h) for the unprimed copies,
    ("V'", w) and ("L'", h) for the primed copies, plus "s" and "t".
    """
    vi = g.obs_index(v)
    A = g.obs_mask(allowed)
    zm = g.obs_mask(Z)
    targets = g.pa_mask(vi) | zm
    net = FlowNetwork(infinity=max(1, popcount(g.pa_mask(vi)) + popcount(zm)))
    O, L = g.observed, g.latent
    for a in bits(A):
        net.add_node(("V", O[a]))
    for h in range(g.ell):
        net.add_node(("L", L[h]))
    for w in range(g.d):
        net.add_node(("V'", O[w]))
    for h in range(g.ell):
        net.add_node(("L'", L[h]))
    for a in bits(A):
        net.add_arc("s", ("V", O[a]))
    for a in bits(A):
        for h in bits(g.latent_parents(a)):
            net.add_arc(("V", O[a]), ("L", L[h]))
    for a in bits(A):
        net.add_arc(("V", O[a]), ("V'", O[a]))
    for h in range(g.ell):
        net.add_arc(("L", L[h]), ("L'", L[h]))
    for h, w in g.latent_edges:
        net.add_arc(("L'", L[h]), ("V'", O[w]))
    for u, w in g.directed:
        if not (zm >> w) & 1:
            net.add_arc(("V'", O[u]), ("V'", O[w]))
    for w in bits(targets):
        net.add_arc(("V'", O[w]), "t")
    return net


def _decode_paths(paths: list[list]) -> tuple[HalfTrek, ...]:
    treks = []
    for p in paths:
        inner = p[1:-1]
        y = inner[0][1]
        if inner[1][0] == "L":
            nodes = [y, inner[1][1]] + [x[1] for x in inner[3:]]
            treks.append(HalfTrek(tuple(nodes), "latent"))
        else:
            nodes = [y] + [x[1] for x in inner[2:]]
            treks.append(HalfTrek(tuple(nodes), "directed"))
    return tuple(sorted(treks, key=lambda t: t.nodes))


def _flow_value(g: LatentFactorGraph, v: int, A: int, Z: int) -> int:
    """Max-flow value of the criterion network, built directly on integers."""
    d, ell = g.d, g.ell
    targets = g.pa_mask(v) | Z
    need = popcount(targets)
    if need == 0:
        return 0
    if popcount(A) < need:
        return -1
    big = need
    # vertex layout: unprimed observed, primed observed, unprimed latent, primed latent
    po, lu, lp = d, 2 * d, 2 * d + ell
    n = 2 * d + 2 * ell
    s, t = 2 * n, 2 * n + 1
    res = _Residual(2 * n + 2)
    add = res.add
    for a in bits(A):
        add(s, 2 * a, big)
        add(2 * a, 2 * a + 1, 1)
        add(2 * a + 1, 2 * (po + a), big)
        for h in bits(g.latent_parents(a)):
            add(2 * a + 1, 2 * (lu + h), big)
    for w in range(d):
        add(2 * (po + w), 2 * (po + w) + 1, 1)
    for h in range(ell):
        add(2 * (lu + h), 2 * (lu + h) + 1, 1)
        add(2 * (lu + h) + 1, 2 * (lp + h), big)
        add(2 * (lp + h), 2 * (lp + h) + 1, 1)
    for h, w in g.latent_edges:
        add(2 * (lp + h) + 1, 2 * (po + w), big)
    for u, w in g.directed:
        if not (Z >> w) & 1:
            add(2 * (po + u) + 1, 2 * (po + w), big)
    for w in bits(targets):
        add(2 * (po + w) + 1, t, big)
    return res.augment(s, t, need)


# ---------------------------------------------------------------------------
# single triples


def _validate(g: LatentFactorGraph, t: HtcTriple) -> tuple[int, int, int, int]:
    try:
        v = g.obs_index(t.v)
        Y = g.obs_mask(t.Y)
        Z = g.obs_mask(t.Z)
        H = g.lat_mask(t.H)
    except KeyError as exc:
        raise MalformedTripleError(str(exc.args[0])) from None
    pa = g.pa_mask(v)
    if len(t.Y) != popcount(pa) + len(t.H):
        raise MalformedTripleError(f"|Y| = {len(t.Y)} but |pa(v)| + |H| = {popcount(pa) + len(t.H)}")
    if len(t.Z) != len(t.H):
        raise MalformedTripleError(f"|Z| = {len(t.Z)} differs from |H| = {len(t.H)}")
    if Z & pa:
        raise MalformedTripleError("Z meets the observed parents of v")
    if Y & (Z | (1 << v)):
        raise MalformedTripleError("Y meets Z or contains v")
    return v, Y, Z, H


def check_triple(g: LatentFactorGraph, t: HtcTriple) -> tuple[bool, tuple[HalfTrek, ...] | None]:
    """Decide whether ``t`` satisfies the criterion for ``t.v``.

    Returns (True, half-trek system) or (False, None). Raises
    MalformedTripleError when the triple is not well formed.
    """
    v, Y, Z, H = _validate(g, t)
    shared = g.pa_latent_of(Y) & g.pa_latent_of(Z | (1 << v))
    if shared & ~H:
        return False, None
    need = popcount(g.pa_mask(v)) + popcount(Z)
    if need == 0:
        return True, ()
    value, paths = max_flow(build_flow_graph(g, t.v, t.Y, t.Z))
    if value != need:
        return False, None
    return True, _decode_paths(paths)


# ---------------------------------------------------------------------------
# search


def _allowed(g: LatentFactorGraph, v: int, Z: int, H: int, solved: int | None) -> int:
    head = Z | (1 << v)
    banned = head | g.children_of_latents(g.pa_latent_of(head) & ~H)
    if solved is not None:
        banned |= g.htr_mask(head, H) & ~solved
    return g.all_observed & ~banned


def _search(g: LatentFactorGraph, v: int, solved: int | None, k: int, latents: str):
    pa = g.pa_mask(v)
    if latents == "large":
        pool = list(bits(g.large_latents()))
    elif latents == "all":
        pool = list(range(g.ell))
    else:
        raise ValueError(f"latents must be 'large' or 'all', got {latents!r}")
    for size in range(0, min(k, len(pool)) + 1):
        for hs in itertools.combinations(pool, size):
            H = to_mask(hs)
            za = g.children_of_latents(H) & ~(pa | (1 << v))
            if solved is not None:
                za &= solved
            zs = list(bits(za))
            if len(zs) < size:
                continue
            for zc in itertools.combinations(zs, size):
                Z = to_mask(zc)
                A = _allowed(g, v, Z, H, solved)
                need = popcount(pa) + size
                if _flow_value(g, v, A, Z) == need:
                    return A, Z, H
    return None


def find_triple_with_system(
    g: LatentFactorGraph, v: str, solved: Iterable[str] | None, k: int, latents: str = "large"
) -> tuple[HtcTriple, tuple[HalfTrek, ...]] | None:
    if k < 0:
        raise ValueError("k must be nonnegative")
    vi = g.obs_index(v)
    sm = None if solved is None else g.obs_mask(solved)
    hit = _search(g, vi, sm, k, latents)
    if hit is None:
        return None
    A, Z, H = hit
    if popcount(g.pa_mask(vi)) + popcount(Z) == 0:
        return HtcTriple(v), ()
    value, paths = max_flow(build_flow_graph(g, v, g.obs_labels(A), g.obs_labels(Z)))
    system = _decode_paths(paths)
    Y = frozenset(t.source for t in system)
    return HtcTriple(v, Y, g.obs_labels(Z), g.lat_labels(H)), system


def find_triple(
    g: LatentFactorGraph, v: str, solved: Iterable[str] | None, k: int, latents: str = "large"
) -> HtcTriple | None:
    """First triple for ``v`` in search order, or None.

    ``solved=None`` drops the solved-node filters and decides the bare
    single-node problem. ``latents="all"`` lets H range over every latent node
    instead of those with at least four children.
    """
    hit = find_triple_with_system(g, v, solved, k, latents)
    return None if hit is None else hit[0]


def lfhtc_identifiable(g: LatentFactorGraph, k: int = 2, latents: str = "large") -> tuple[bool, Certificate]:
    """Recursive solve of every observed node; returns (all solved, certificate).

    After each newly solved node the scan restarts from the first unsolved
    node in file order, so earlier nodes get the first chance to use it.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    cert = Certificate()
    S = 0
    for v in range(g.d):
        if g.pa_mask(v) == 0:
            S |= 1 << v
            cert.entries.append(CertificateEntry(g.observed[v], HtcTriple(g.observed[v]), (), True))
    progress = True
    while progress and S != g.all_observed:
        progress = False
        for v in range(g.d):
            if (S >> v) & 1:
                continue
            hit = _search(g, v, S, k, latents)
            if hit is None:
                continue
            A, Z, H = hit
            label = g.observed[v]
            value, paths = max_flow(build_flow_graph(g, label, g.obs_labels(A), g.obs_labels(Z)))
            system = _decode_paths(paths)
            t = HtcTriple(label, frozenset(x.source for x in system), g.obs_labels(Z), g.lat_labels(H))
            cert.entries.append(CertificateEntry(label, t, system))
            S |= 1 << v
            progress = True
            break
    return S == g.all_observed, cert


def lfhtc_decide(g: LatentFactorGraph, k: int = 2) -> bool:
    """Verdict only, without building witnesses (used by the census)."""
    S = 0
    for v in range(g.d):
        if g.pa_mask(v) == 0:
            S |= 1 << v
    progress = True
    while progress and S != g.all_observed:
        progress = False
        for v in range(g.d):
            if not (S >> v) & 1 and _search(g, v, S, k, "large") is not None:
                S |= 1 << v
                progress = True
    return S == g.all_observed


def verify_certificate(g: LatentFactorGraph, cert: Certificate) -> list[str]:
    """Replay a certificate; returns a list of problems (empty when valid)."""
    problems = []
    solved: set[str] = set()
    for i, e in enumerate(cert.entries):
        t = e.triple
        if t.v in solved:
            problems.append(f"entry {i}: {t.v} solved twice")
            continue
        try:
            vi = g.obs_index(t.v)
        except KeyError as exc:
            problems.append(f"entry {i}: {exc.args[0]}")
            continue
        if e.trivial:
            if g.pa_mask(vi):
                problems.append(f"entry {i}: {t.v} marked trivial but has observed parents")
            solved.add(t.v)
            continue
        try:
            ok, system = check_triple(g, t)
        except MalformedTripleError as exc:
            problems.append(f"entry {i}: malformed triple: {exc}")
            continue
        if not ok:
            problems.append(f"entry {i}: triple for {t.v} fails the criterion")
            continue
        head = g.obs_mask(t.Z | {t.v})
        need = g.obs_mask(t.Z) | (g.obs_mask(t.Y) & g.htr_mask(head, g.lat_mask(t.H)))
        missing = g.obs_labels(need) - solved
        if missing:
            problems.append(f"entry {i}: {t.v} needs {sorted(missing)} solved first")
            continue
        solved.add(t.v)
    return problems


# ---------------------------------------------------------------------------
# mixed graphs


def build_htc_flow_graph(m: MixedGraph, v: int, allowed: int) -> FlowNetwork:
    """Left copies ("L", y) for allowed sources, right copies ("R", w) for all nodes."""
    O = m.observed
    net = FlowNetwork(infinity=max(1, popcount(m.pa_mask(v))))
    for y in bits(allowed):
        net.add_arc("s", ("L", O[y]))
        net.add_arc(("L", O[y]), ("R", O[y]))
        for w in bits(m.sib_mask(y)):
            net.add_arc(("L", O[y]), ("R", O[w]))
    for w in range(m.d):
        net.add_node(("R", O[w]))
    for u, w in m.directed:
        net.add_arc(("R", O[u]), ("R", O[w]))
    for p in bits(m.pa_mask(v)):
        net.add_arc(("R", O[p]), "t")
    return net


def _htc_flow_value(m: MixedGraph, v: int, allowed: int) -> int:
    pa = m.pa_mask(v)
    need = popcount(pa)
    d = m.d
    s, t = 4 * d, 4 * d + 1
    res = _Residual(4 * d + 2)
    add = res.add
    for y in bits(allowed):
        add(s, 2 * y, need)
        add(2 * y, 2 * y + 1, 1)
        add(2 * y + 1, 2 * (d + y), need)
        for w in bits(m.sib_mask(y)):
            add(2 * y + 1, 2 * (d + w), need)
    for w in range(d):
        add(2 * (d + w), 2 * (d + w) + 1, 1)
    for u, w in m.directed:
        add(2 * (d + u) + 1, 2 * (d + w), need)
    for p in bits(pa):
        add(2 * (d + p) + 1, t, need)
    return res.augment(s, t, need)


def _htc_allowed(m: MixedGraph, v: int, solved: int) -> int:
    banned = (1 << v) | m.sib_mask(v) | (m.htr_mask(v) & ~solved)
    return ((1 << m.d) - 1) & ~banned


def htc_identifiable(m: MixedGraph) -> tuple[bool, Certificate]:
    """Recursive half-trek criterion on a mixed graph (same solve order rule as above)."""
    cert = Certificate()
    full = (1 << m.d) - 1
    S = 0
    for v in range(m.d):
        if m.pa_mask(v) == 0:
            S |= 1 << v
            cert.entries.append(CertificateEntry(m.observed[v], HtcTriple(m.observed[v]), (), True))
    progress = True
    while progress and S != full:
        progress = False
        for v in range(m.d):
            if (S >> v) & 1:
                continue
            A = _htc_allowed(m, v, S)
            if _htc_flow_value(m, v, A) != popcount(m.pa_mask(v)):
                continue
            value, paths = max_flow(build_htc_flow_graph(m, v, A))
            system = []
            for p in paths:
                inner = p[1:-1]
                y = inner[0][1]
                rest = [x[1] for x in inner[1:]]
                if rest[0] == y:
                    system.append(HalfTrek(tuple(rest), "directed"))
                else:
                    system.append(HalfTrek(tuple([y] + rest), "bidirected"))
            system.sort(key=lambda x: x.nodes)
            label = m.observed[v]
            t = HtcTriple(label, frozenset(x.source for x in system))
            cert.entries.append(CertificateEntry(label, t, tuple(system)))
            S |= 1 << v
            progress = True
            break
    return S == full, cert


def htc_decide(m: MixedGraph) -> bool:
    full = (1 << m.d) - 1
    S = 0
    for v in range(m.d):
        if m.pa_mask(v) == 0:
            S |= 1 << v
    progress = True
    while progress and S != full:
        progress = False
        for v in range(m.d):
            if not (S >> v) & 1 and _htc_flow_value(m, v, _htc_allowed(m, v, S)) == popcount(m.pa_mask(v)):
                S |= 1 << v
                progress = True
    return S == full


# ---------------------------------------------------------------------------
# explicit half-trek enumeration (used by oracles and audits)


def enumerate_half_treks(g: LatentFactorGraph, source: str) -> list[HalfTrek]:
    """Every latent-factor half-trek leaving ``source`` whose right side is a simple path.

    The two sides are separate, so a latent half-trek may come back to its
    source on the right, matching the primed copies in the flow graph.
    """
    y = g.obs_index(source)
    out: list[HalfTrek] = []

    def extend(right: list[int], latent: int | None):
        nodes = [g.observed[y]]
        if latent is not None:
            nodes.append(g.latent[latent])
            nodes += [g.observed[i] for i in right]
        else:
            nodes += [g.observed[i] for i in right[1:]]
        out.append(HalfTrek(tuple(nodes), "latent" if latent is not None else "directed"))
        for w in bits(g.ch_mask(right[-1])):
            if w not in right:
                extend(right + [w], latent)

    extend([y], None)
    for h in bits(g.latent_parents(y)):
        for w in bits(g.latent_children(h)):
            extend([w], h)
    return out
