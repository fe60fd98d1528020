"""Small named graphs used in examples, tests and the CLI data directory."""

from __future__ import annotations

from .graph import LatentFactorGraph, MixedGraph, latent_projection


def _one_factor(n: int, edges, children=None) -> LatentFactorGraph:
    obs = [str(i) for i in range(1, n + 1)]
    kids = obs if children is None else [str(c) for c in children]
    return LatentFactorGraph.from_edges(
        obs, ["h1"], [(str(a), str(b)) for a, b in edges], [("h1", c) for c in kids]
    )


def sequential_treatment() -> LatentFactorGraph:
    """Two treatments, three outcomes, a covariate and one latent confounder."""
    obs = ["Z", "T1", "O1", "O2", "T2", "O3"]
    directed = [
        ("T1", "O1"), ("O1", "O2"), ("O2", "T2"), ("T2", "O3"),
        ("T1", "O2"), ("T1", "T2"), ("T1", "O3"), ("O1", "T2"),
    ]
    latent_edges = [("L", "Z"), ("L", "O1"), ("L", "O2"), ("L", "O3")]
    return LatentFactorGraph.from_edges(obs, ["L"], directed, latent_edges)


def dense_chain() -> LatentFactorGraph:
    """One factor on five nodes with six edges: more parameters than moments."""
    return _one_factor(5, [(1, 2), (2, 3), (3, 4), (4, 5), (1, 3), (3, 5)])


def identifiable_chain() -> LatentFactorGraph:
    """One global factor, edges 2->3->4->5 and 3->5; identifiable by the criterion."""
    return _one_factor(5, [(2, 3), (3, 4), (4, 5), (3, 5)])


def finite_not_identifiable() -> LatentFactorGraph:
    """One global factor, edges 1->3, 2->3, 3->4, 4->5; finite-to-one only."""
    return _one_factor(5, [(1, 3), (2, 3), (3, 4), (4, 5)])


def infinite_to_one() -> LatentFactorGraph:
    """One global factor, edges 1->2, 3->4, 4->5, 3->5."""
    return _one_factor(5, [(1, 2), (3, 4), (4, 5), (3, 5)])


def partial_factor() -> LatentFactorGraph:
    """Factor on {1, 3, 4} with the chain of ``identifiable_chain``."""
    return _one_factor(5, [(2, 3), (3, 4), (4, 5), (3, 5)], children=[1, 3, 4])


def three_factors() -> LatentFactorGraph:
    """Infinite-to-one graph whose latent projection is HTC-identifiable."""
    obs = [str(i) for i in range(1, 6)]
    latent_edges = [("h1", c) for c in "1234"] + [("h2", "4"), ("h2", "5"), ("h3", "3"), ("h3", "5")]
    return LatentFactorGraph.from_edges(obs, ["h1", "h2", "h3"], [("4", "5"), ("3", "5")], latent_edges)


def two_factor_tree() -> LatentFactorGraph:
    """Factors on {1,2,3,4} and {4,5,6} with edges 1->2->3 and 4->5, 4->6."""
    obs = [str(i) for i in range(1, 7)]
    latent_edges = [("h1", c) for c in "1234"] + [("h2", c) for c in "456"]
    directed = [("1", "2"), ("2", "3"), ("4", "5"), ("4", "6")]
    return LatentFactorGraph.from_edges(obs, ["h1", "h2"], directed, latent_edges)


def projection(g: LatentFactorGraph) -> MixedGraph:
    return latent_projection(g)


EXAMPLES = {
    "sequential_treatment": sequential_treatment,
    "dense_chain": dense_chain,
    "identifiable_chain": identifiable_chain,
    "finite_not_identifiable": finite_not_identifiable,
    "infinite_to_one": infinite_to_one,
    "partial_factor": partial_factor,
    "three_factors": three_factors,
    "two_factor_tree": two_factor_tree,
}
