import itertools

import numpy as np
import pytest

from lfhtc.census import (
    GLOBAL6,
    TWOFACTOR6,
    BudgetError,
    CensusRow,
    LatentPattern,
    canonical_keys,
    census,
    default_jobs,
    enumerate_masks,
    pattern_group,
    rows_to_csv,
)
from lfhtc.graph import canonical_form, stabilizer


def _brute_force_classes(p, max_edges):
    """Isomorphism classes of acyclic edge sets, by trying every group element on every graph."""
    d = p.d
    perms = pattern_group(p)
    slots = [(u, w) for u in range(d) for w in range(d) if u != w]
    classes = set()
    for r in range(max_edges + 1):
        for edges in itertools.combinations(slots, r):
            g = p.graph(sum(1 << (u * d + w) for u, w in edges))
            if not _acyclic(g):
                continue
            classes.add(min(tuple(sorted((q[u], q[w]) for u, w in edges)) for q in perms))
    return classes


def _acyclic(g):
    seen, done = set(), set()

    def visit(u):
        if u in done:
            return True
        if u in seen:
            return False
        seen.add(u)
        ok = all(visit(w) for w in range(g.d) if (g.ch_mask(u) >> w) & 1)
        done.add(u)
        return ok

    return all(visit(u) for u in range(g.d))


def test_group_sizes():
    assert len(pattern_group(GLOBAL6)) == 720
    group = pattern_group(TWOFACTOR6)
    assert len(group) == 12
    assert all(p[3] == 3 for p in group)
    assert sorted(group) == sorted(stabilizer(TWOFACTOR6.graph(0)))


@pytest.mark.parametrize(
    "pattern",
    [LatentPattern(4, ((0, 1, 2, 3),)), LatentPattern(4, ((0, 1, 2),)), LatentPattern(5, ((0, 1, 2), (2, 3, 4)))],
)
def test_enumeration_matches_brute_force(pattern):
    max_edges = 4
    masks = enumerate_masks(pattern, max_edges)
    assert len(masks) == len(_brute_force_classes(pattern, max_edges))


def test_enumeration_totals():
    masks = enumerate_masks(TWOFACTOR6, 3)
    counts = [sum(1 for m in masks if bin(m).count("1") == e) for e in range(4)]
    assert counts == [1, 8, 63, 391]
    masks = enumerate_masks(GLOBAL6, 4)
    assert [sum(1 for m in masks if bin(m).count("1") == e) for e in range(5)] == [1, 1, 4, 13, 51]


def test_keys_agree_with_canonical_form():
    p = TWOFACTOR6
    perms = pattern_group(p)
    masks = np.array(enumerate_masks(p, 2), dtype=np.int64)
    for m in masks:
        g = p.graph(int(m))
        for q in perms[:4]:
            moved = sum(1 << (q[u] * p.d + q[w]) for u, w in g.directed)
            assert canonical_keys(p.d, perms, np.array([moved]))[0] == m
            assert canonical_form(p.graph(moved), perms) == canonical_form(g, perms)


def test_small_census_rows():
    rows = census(TWOFACTOR6, 2, with_htc=True)
    got = [(r.edges, r.total, r.finite_to_one, r.lfhtc, r.htc) for r in rows]
    assert got == [(0, 1, 1, 1, 1), (1, 8, 6, 6, 4), (2, 63, 45, 43, 24)]


def test_parallel_matches_serial():
    serial = census(GLOBAL6, 4, jobs=1)
    parallel = census(GLOBAL6, 4, jobs=2)
    assert rows_to_csv(serial) == rows_to_csv(parallel)


@pytest.mark.slow
def test_global_factor_table():
    rows = census(GLOBAL6, 9)
    assert [r.total for r in rows] == [1, 1, 4, 13, 51, 163, 407, 796, 1169, 1291]
    assert [r.lfhtc for r in rows] == [1, 1, 4, 13, 50, 134, 250, 234, 64, 4]
    assert sum(r.finite_to_one for r in rows) == 3344


def test_csv_format():
    rows = [CensusRow(0, 1, 1, 1, 1), CensusRow(1, 8, 6, 6, 4)]
    assert rows_to_csv(rows) == "edges,total,finite_to_one,lfhtc,htc\n0,1,1,1,1\n1,8,6,6,4\ntotal,9,7,7,5\n"
    assert rows_to_csv([CensusRow(0, 1, 1, 1)]).splitlines()[0] == "edges,total,finite_to_one,lfhtc"


def test_row_check():
    with pytest.raises(AssertionError):
        CensusRow(3, 5, 2, 3).check()


def test_pattern_file_and_budget():
    p = LatentPattern.from_json('{"d": 6, "latent": [[1, 2, 3, 4], [4, 5, 6]]}')
    assert p == TWOFACTOR6
    with pytest.raises(ValueError):
        LatentPattern(3, ((0, 5),))
    with pytest.raises(BudgetError):
        enumerate_masks(LatentPattern(8, ((0, 1),)), 1)


def test_default_jobs(monkeypatch):
    monkeypatch.delenv("LFHTC_JOBS", raising=False)
    assert default_jobs() == 1
    monkeypatch.setenv("LFHTC_JOBS", "3")
    assert default_jobs() == 3
    monkeypatch.setenv("LFHTC_JOBS", "many")
    with pytest.raises(ValueError):
        default_jobs()
