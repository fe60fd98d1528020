import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from lfhtc.criterion import (
    Certificate,
    HalfTrek,
    HtcTriple,
    MalformedTripleError,
    build_flow_graph,
    check_triple,
    enumerate_half_treks,
    find_triple,
    find_triple_with_system,
    htc_identifiable,
    lfhtc_decide,
    lfhtc_identifiable,
    no_sided_intersection,
    verify_certificate,
)
from lfhtc.flow import max_flow
from lfhtc.graph import LatentFactorGraph, MixedGraph, latent_projection
from lfhtc.zoo import (
    EXAMPLES,
    finite_not_identifiable,
    identifiable_chain,
    infinite_to_one,
    partial_factor,
    sequential_treatment,
    three_factors,
    two_factor_tree,
)

from oracles import allowed_nodes, random_graph, system_exists


def T(v, Y=(), Z=(), H=()):
    return HtcTriple(v, frozenset(Y), frozenset(Z), frozenset(H))


def test_worked_triples_are_accepted():
    g = identifiable_chain()
    for t in [T("4", "23", "1", ["h1"]), T("3", "24", "1", ["h1"]), T("5", "234", "1", ["h1"])]:
        ok, system = check_triple(g, t)
        assert ok, t
        assert no_sided_intersection(system)
        parents = {g.observed[u] for u, w in g.directed if g.observed[w] == t.v}
        assert {s.target for s in system} == parents | set(t.Z)
        assert {s.source for s in system} == set(t.Y)


def test_worked_triple_system_for_node_4():
    ok, system = check_triple(identifiable_chain(), T("4", "23", "1", ["h1"]))
    assert ok
    assert set(system) == {HalfTrek(("3",), "directed"), HalfTrek(("2", "h1", "1"), "latent")}


def test_triple_fails_without_the_factor_in_H():
    # dropping H leaves Z without a partner, which breaks |Z| = |H|
    with pytest.raises(MalformedTripleError):
        check_triple(identifiable_chain(), T("4", "23", "1"))
    # with Z and H both empty, 3 shares h1 with 4 and H does not cover it
    ok, _ = check_triple(identifiable_chain(), T("4", "3"))
    assert not ok


def test_source_node_trivially_passes():
    for name, build in EXAMPLES.items():
        g = build()
        for v in range(g.d):
            if g.pa_mask(v) == 0:
                assert check_triple(g, T(g.observed[v])) == (True, ())


@pytest.mark.parametrize(
    "t, message",
    [
        (T("4", "2", "1", ["h1"]), "|Y|"),
        (T("4", "23", "", ["h1"]), "|Z|"),
        (T("4", "34", "1", ["h1"]), "Y"),
        (T("4", "12", "3", ["h1"]), "parents"),
        (T("9"), "9"),
    ],
)
def test_malformed_triples(t, message):
    with pytest.raises(MalformedTripleError, match=message):
        check_triple(identifiable_chain(), t)


def test_find_triple_worked_example():
    g = identifiable_chain()
    assert find_triple(g, "3", {"1", "2", "4"}, 2) == T("3", "24", "1", ["h1"])
    assert find_triple(g, "5", {"1", "2", "3", "4"}, 2) == T("5", "234", "1", ["h1"])


def test_find_triple_none_for_finite_not_identifiable():
    g = finite_not_identifiable()
    others = [x for x in g.observed if x != "3"]
    for r in range(len(others) + 1):
        for solved in itertools.combinations(others, r):
            hit = find_triple(g, "3", set(solved), 1)
            # only pre-solving both descendants of 3 unlocks it, which the recursion never does
            assert (hit is not None) == ({"4", "5"} <= set(solved))
    _, cert = lfhtc_identifiable(g, 2)
    assert cert.order == ["1", "2"]


def test_flow_graph_arcs_for_worked_flow_example():
    g = finite_not_identifiable()
    net = build_flow_graph(g, "4", ["2", "3", "5"], ["1"])
    arcs = net.arc_set()
    assert ("s", ("V", "2")) in arcs and ("s", ("V", "1")) not in arcs
    assert (("V", "2"), ("L", "h1")) in arcs
    assert (("L'", "h1"), ("V'", "1")) in arcs
    # edges into Z are dropped
    assert not any(w == ("V'", "1") and u[0] == "V'" for u, w in arcs)
    assert {u for u, w in arcs if w == "t"} == {("V'", "3"), ("V'", "1")}
    assert max_flow(net)[0] == 2


def test_flow_graph_with_nothing_allowed():
    g = identifiable_chain()
    assert max_flow(build_flow_graph(g, "4", [], []))[0] == 0
    assert max_flow(build_flow_graph(g, "1", [], []))[0] == 0


@pytest.mark.parametrize(
    "build, expected",
    [
        (sequential_treatment, True),
        (identifiable_chain, True),
        (partial_factor, True),
        (two_factor_tree, True),
        (finite_not_identifiable, False),
        (infinite_to_one, False),
        (three_factors, False),
    ],
)
def test_whole_graph_verdicts(build, expected):
    g = build()
    ok, cert = lfhtc_identifiable(g, k=2)
    assert ok is expected
    assert lfhtc_decide(g, 2) is expected
    assert verify_certificate(g, cert) == []


def test_solve_order_restarts_after_each_success():
    ok, cert = lfhtc_identifiable(identifiable_chain(), k=1)
    assert ok
    assert cert.order == ["1", "2", "4", "3", "5"]
    assert [e.triple for e in cert.entries[2:]] == [
        T("4", "23", "1", ["h1"]),
        T("3", "24", "1", ["h1"]),
        T("5", "234", "1", ["h1"]),
    ]


def test_k_zero_cannot_use_factor():
    assert not lfhtc_identifiable(identifiable_chain(), k=0)[0]
    with pytest.raises(ValueError):
        lfhtc_identifiable(identifiable_chain(), k=-1)


def test_certificate_json_round_trip_and_tampering():
    g = identifiable_chain()
    _, cert = lfhtc_identifiable(g, 1)
    again = Certificate.from_json(cert.to_json())
    assert verify_certificate(g, again) == []
    assert Certificate.from_json({"certificate": cert.to_json()}).order == cert.order
    # moving node 3 ahead of node 4 breaks the solve-order precondition
    swapped = Certificate(cert.entries[:2] + [cert.entries[3], cert.entries[2]] + cert.entries[4:])
    assert verify_certificate(g, swapped)
    bad = cert.to_json()
    bad[2]["H"] = []
    assert verify_certificate(g, Certificate.from_json(bad))
    with pytest.raises(ValueError):
        Certificate.from_json({"nope": 1})


def test_htc_on_projections():
    assert htc_identifiable(latent_projection(partial_factor()))[0]
    assert not htc_identifiable(latent_projection(identifiable_chain()))[0]
    assert htc_identifiable(latent_projection(three_factors()))[0]


def test_htc_instrumental_variable():
    # z -> x -> y with x <-> y: z is an instrument for x -> y
    m = MixedGraph.from_edges(["z", "x", "y"], [("z", "x"), ("x", "y")], [("x", "y")])
    ok, cert = htc_identifiable(m)
    assert ok
    entry = cert.entries[cert.order.index("y")]
    assert entry.triple.Y == {"z"}
    # without the instrument the edge is not identifiable
    m2 = MixedGraph.from_edges(["x", "y"], [("x", "y")], [("x", "y")])
    assert not htc_identifiable(m2)[0]


def test_enumerate_half_treks_sides():
    treks = enumerate_half_treks(identifiable_chain(), "2")
    assert HalfTrek(("2", "3", "5"), "directed") in treks
    assert HalfTrek(("2", "h1", "1"), "latent") in treks
    t = HalfTrek(("2", "h1", "1"), "latent")
    assert t.left() == {"2", "h1"} and t.right() == {"h1", "1"}


def _brute_force_single_node(g, v, k, large_only):
    """Any (Z, H) with |H| <= k for which some half-trek system exists, no solved filter."""
    pool = [h for h in range(g.ell) if not large_only or bin(g.latent_children(h)).count("1") >= 4]
    parents = {u for u, w in g.directed if w == v}
    for r in range(min(k, len(pool)) + 1):
        for H in itertools.combinations(pool, r):
            ch = {c for h, c in g.latent_edges if h in H} - parents - {v}
            for Z in itertools.combinations(sorted(ch), r):
                if system_exists(g, v, allowed_nodes(g, v, set(Z), set(H)), set(Z), set(H)):
                    return True
    return False


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_unrestricted_search_matches_brute_force(seed):
    rng = random.Random(seed)
    g = random_graph(rng, max_d=5, max_ell=2)
    for v in range(g.d):
        hit = find_triple_with_system(g, g.observed[v], None, 2, latents="all")
        assert (hit is not None) == _brute_force_single_node(g, v, 2, large_only=False)
        if hit is not None:
            t, system = hit
            assert check_triple(g, t)[0]
            assert no_sided_intersection(system)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_certificates_always_verify(seed):
    rng = random.Random(seed)
    g = random_graph(rng, max_d=6, max_ell=3)
    ok, cert = lfhtc_identifiable(g, 2)
    assert verify_certificate(g, cert) == []
    assert ok == (set(cert.order) == set(g.observed))
    assert ok == lfhtc_decide(g, 2)


def test_cyclic_graph_runs():
    g = LatentFactorGraph.from_edges(
        ["1", "2", "3", "4"], ["h"], [("1", "2"), ("2", "3"), ("3", "2"), ("3", "4")],
        [("h", x) for x in "1234"],
    )
    ok, cert = lfhtc_identifiable(g, 2)
    assert verify_certificate(g, cert) == []
