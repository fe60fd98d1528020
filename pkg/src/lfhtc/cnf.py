"""Reduction from CNF satisfiability to the single-node criterion problem.

Each clause becomes a parent w_k of a target node v; each variable gets a
cluster of occurrence nodes for x_i and another for not-x_i, two large latent
factors that force choosing one polarity, and pairwise latents inside each
cluster.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .criterion import find_triple_with_system
from .graph import LatentFactorGraph

MAX_VARIABLES = 8
MAX_BRUTE_FORCE = 20


class CnfBudgetError(ValueError):
    """The formula is too large for the exponential procedures here."""


@dataclass(frozen=True)
class CnfFormula:
    n: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("variable count must be nonnegative")
        for c in self.clauses:
            for lit in c:
                if lit == 0:
                    raise ValueError("zero literal")
                if abs(lit) > self.n:
                    raise ValueError(f"literal {lit} outside variables 1..{self.n}")

    @classmethod
    def of(cls, n: int, clauses) -> "CnfFormula":
        return cls(n, tuple(tuple(c) for c in clauses))

    def satisfied_by(self, assignment: dict[int, bool] | tuple[bool, ...]) -> bool:
        val = (lambda i: assignment[i]) if isinstance(assignment, dict) else (lambda i: assignment[i - 1])
        return all(any(val(abs(l)) == (l > 0) for l in c) for c in self.clauses)


def parse_dimacs(text: str) -> CnfFormula:
    n = None
    m = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed problem line {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ValueError(f"line {lineno}: malformed problem line {line!r}") from None
            continue
        if n is None:
            raise ValueError(f"line {lineno}: clause before the 'p cnf' header")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ValueError(f"line {lineno}: bad literal {tok!r}") from None
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                if abs(lit) > n:
                    raise ValueError(f"line {lineno}: literal {lit} exceeds declared {n} variables")
                current.append(lit)
    if n is None:
        raise ValueError("missing 'p cnf' header")
    if current:
        clauses.append(tuple(current))
    if m is not None and len(clauses) != m:
        raise ValueError(f"header declares {m} clauses, found {len(clauses)}")
    return CnfFormula(n, tuple(clauses))


def occurrences(f: CnfFormula) -> tuple[list[list[int]], list[list[int]]]:
    """For every variable, the clause index of each positive / negative occurrence, left to right."""
    pos = [[] for _ in range(f.n + 1)]
    neg = [[] for _ in range(f.n + 1)]
    for k, c in enumerate(f.clauses):
        for lit in c:
            (pos if lit > 0 else neg)[abs(lit)].append(k)
    return pos, neg


def reduce_cnf(f: CnfFormula) -> tuple[LatentFactorGraph, str]:
    M = len(f.clauses)
    pos, neg = occurrences(f)
    observed = ["v"] + [f"w{k + 1}" for k in range(M)]
    latent = [f"h_w{k + 1}_v" for k in range(M)]
    directed = [(f"w{k + 1}", "v") for k in range(M)]
    ledges = []
    for k in range(M):
        ledges += [(f"h_w{k + 1}_v", f"w{k + 1}"), (f"h_w{k + 1}_v", "v")]
    pairwise_latents, pairwise_edges = [], []
    for i in range(1, f.n + 1):
        us = [f"u{i}_{j + 1}" for j in range(len(pos[i]))]
        ubars = [f"ubar{i}_{j + 1}" for j in range(len(neg[i]))]
        observed += us + ubars + [f"u{i}", f"ubar{i}", f"q{i}"]
        for name, k in zip(us, pos[i]):
            directed.append((name, f"w{k + 1}"))
        for name, k in zip(ubars, neg[i]):
            directed.append((name, f"w{k + 1}"))
        latent += [f"h{i}", f"hbar{i}"]
        ledges += [(f"h{i}", a) for a in us + [f"u{i}", f"q{i}", "v"]]
        ledges += [(f"hbar{i}", a) for a in ubars + [f"ubar{i}", f"q{i}", "v"]]
        for cluster in ([f"u{i}"] + us, [f"ubar{i}"] + ubars):
            for a, b in itertools.combinations(cluster, 2):
                h = f"h_{a}_{b}"
                pairwise_latents.append(h)
                pairwise_edges += [(h, a), (h, b)]
    g = LatentFactorGraph.from_edges(observed, latent + pairwise_latents, directed, ledges + pairwise_edges)
    return g, "v"


def expected_size(f: CnfFormula) -> int:
    """Closed-form node count of the reduction graph."""
    pos, neg = occurrences(f)
    total = 1 + 2 * len(f.clauses)
    for i in range(1, f.n + 1):
        a, b = len(pos[i]), len(neg[i])
        total += a + b + 5 + (a + 1) * a // 2 + (b + 1) * b // 2
    return total


def sat_via_lfhtc(f: CnfFormula) -> bool:
    """Decide satisfiability through the criterion on the reduction graph (exponential)."""
    if f.n > MAX_VARIABLES:
        raise CnfBudgetError(f"{f.n} variables exceed the budget of {MAX_VARIABLES}")
    g, v = reduce_cnf(f)
    return find_triple_with_system(g, v, None, k=g.ell, latents="large") is not None


def brute_force_sat(f: CnfFormula) -> bool:
    if f.n > MAX_BRUTE_FORCE:
        raise CnfBudgetError(f"{f.n} variables exceed the brute-force limit of {MAX_BRUTE_FORCE}")
    return any(f.satisfied_by(a) for a in itertools.product((False, True), repeat=f.n))


def assignment_from_triple(f: CnfFormula, Y) -> dict[int, bool]:
    """Read an assignment off the source set of a witness: x_i true iff Y meets the x_i cluster."""
    pos, _ = occurrences(f)
    out = {}
    for i in range(1, f.n + 1):
        cluster = {f"u{i}"} | {f"u{i}_{j + 1}" for j in range(len(pos[i]))}
        out[i] = bool(cluster & set(Y))
    return out
