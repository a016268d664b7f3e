"""Coset enumeration, table verification and permutation extraction."""
from __future__ import annotations

import copy
import itertools

import pytest
from hypothesis import given, strategies as st

from amalgam import grouporacle as go
from amalgam import presentation as pr
from amalgam.todd_coxeter import (EnumerationOverflow, default_max_cosets, permutation_action,
                                  perm_order, todd_coxeter, verify_table, word_permutation)

S3 = (("a", "b"), [(1, 1), (2, 2), (1, 2) * 3])
PSL27 = (("a", "b"), [(1, 1), (2, 2, 2), (1, 2) * 7, (1, 2, 1, -2) * 4])


def s3_order_oracle():
    """|<(0 1), (1 2)>| by closure over explicit permutations."""
    a, b = (1, 0, 2), (0, 2, 1)
    seen = {(0, 1, 2)}
    frontier = [(0, 1, 2)]
    while frontier:
        x = frontier.pop()
        for g in (a, b):
            y = tuple(g[i] for i in x)
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return len(seen)


# -- examples --------------------------------------------------------------------------

@pytest.mark.parametrize("strategy", ["hlt", "felsch"])
def test_s3(strategy):
    gens, rels = S3
    t = todd_coxeter(gens, rels, strategy=strategy)
    assert t.index == s3_order_oracle() == 6
    assert verify_table(t, rels)


def test_index_over_subgroup():
    gens, rels = S3
    assert todd_coxeter(gens, rels, [(1,)]).index == 3


@pytest.mark.parametrize("strategy", ["hlt", "felsch"])
def test_psl27(strategy):
    gens, rels = PSL27
    t = todd_coxeter(gens, rels, strategy=strategy)
    assert t.index == 168 and verify_table(t, rels)


def test_sl32_table_presentation():
    p = pr.edge_group_presentation("A2", 2)
    t = todd_coxeter(p.generators, p.relators)
    assert t.index == go.order_formula("SL", 3, 2)


@given(st.integers(2, 40))
def test_dihedral_orders(n):
    rels = [(1, 1), (2, 2), (1, 2) * n]
    for strategy in ("hlt", "felsch"):
        t = todd_coxeter(("a", "b"), rels, strategy=strategy)
        assert t.index == 2 * n and verify_table(t, rels)


@given(st.integers(1, 30), st.integers(1, 30))
def test_abelian_orders(m, n):
    rels = [(1,) * m, (2,) * n, (1, 2, -1, -2)]
    assert todd_coxeter(("a", "b"), rels).index == m * n


def test_trivial_group():
    t = todd_coxeter(("a",), [(1,)])
    assert t.index == 1 and verify_table(t, [(1,)])


# -- verification -----------------------------------------------------------------------

def test_corrupted_table_fails_verification():
    gens, rels = S3
    t = todd_coxeter(gens, rels)
    bad = copy.deepcopy(t)
    col = bad.columns[0][0]
    bad.table[1][col], bad.table[2][col] = bad.table[2][col], bad.table[1][col]
    assert not verify_table(bad, rels)


def test_verify_rejects_wrong_relator():
    gens, rels = S3
    t = todd_coxeter(gens, rels)
    assert not verify_table(t, [(1, 2)])


# -- permutations -------------------------------------------------------------------------

def test_s3_permutations():
    gens, rels = S3
    perms = permutation_action(todd_coxeter(gens, rels))
    a, b = perms["a"], perms["b"]
    ab = word_permutation([a, b], (1, 2))
    assert perm_order(ab) == 3
    assert word_permutation([a, b], ()) == tuple(range(6))


def test_psl27_regular_action():
    gens, rels = PSL27
    t = todd_coxeter(gens, rels)
    perms = permutation_action(t)
    ps = [perms["a"], perms["b"]]
    for r in rels:
        assert word_permutation(ps, r) == tuple(range(168))
    for w in itertools.product((1, 2, -2), repeat=4):
        p = word_permutation(ps, w)
        assert 168 % perm_order(p) == 0
        if p != tuple(range(168)):
            assert all(p[i] != i for i in range(168))


# -- limits, determinism ---------------------------------------------------------------------

def test_overflow_raises():
    gens, rels = PSL27
    with pytest.raises(EnumerationOverflow) as info:
        todd_coxeter(gens, rels, max_cosets=20)
    assert info.value.max_cosets == 20


def test_env_override(monkeypatch):
    monkeypatch.setenv("AMALGAM_MAX_COSETS", "30")
    assert default_max_cosets() == 30
    with pytest.raises(EnumerationOverflow):
        todd_coxeter(*PSL27)


def test_malformed_subgroup_word():
    with pytest.raises(ValueError):
        todd_coxeter(*S3, subgroup=[(3,)])


@pytest.mark.parametrize("strategy", ["hlt", "felsch"])
def test_deterministic_tables(strategy):
    gens, rels = PSL27
    a = todd_coxeter(gens, rels, strategy=strategy).to_csv()
    b = todd_coxeter(gens, rels, strategy=strategy).to_csv()
    assert a == b
    assert a.splitlines()[0] == "coset,generator,image"


def test_strategy_independence_on_steinberg_presentation():
    p = pr.edge_group_presentation("C2", 2, strategy="steinberg")
    h = todd_coxeter(p.generators, p.relators, strategy="hlt")
    f = todd_coxeter(p.generators, p.relators, strategy="felsch")
    assert h.index == f.index == go.order_formula("Sp", 4, 2)
