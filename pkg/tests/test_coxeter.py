"""Coxeter lengths, normal forms, balls and twisted involutions."""
from __future__ import annotations

import itertools
from collections import deque

import pytest
from hypothesis import given, strategies as st

from amalgam.coxeter import (CoxeterSystem, format_word, parse_word, twisted_decomposition,
                             twisted_involutions)
from amalgam.diagram import parse_diagram

from conftest import cycle_text, path_text

SYSTEMS = {
    "A2": path_text(2),
    "C2": path_text(2, 4),
    "A1xA1": "v 1\nv 2\n",
    "affA2": cycle_text(3),
    "cycle8": cycle_text(8),
}


def system(name):
    return CoxeterSystem.from_diagram(parse_diagram(SYSTEMS[name]))


def oracle_lengths(sys_, radius):
    """BFS over the integer reflection representation, built independently.

    s_i acts on simple roots by alpha_j -> alpha_j - A[i][j] alpha_i; elements
    are compared as matrices, so the BFS depth is the exact length.
    """
    n = sys_.rank
    A = sys_.cartan

    def refl(i):
        rows = [[int(r == c) for c in range(n)] for r in range(n)]
        for j in range(n):
            rows[i][j] -= A[i][j]
        return tuple(map(tuple, rows))

    def mul(x, y):
        return tuple(tuple(sum(x[r][k] * y[k][c] for k in range(n)) for c in range(n))
                     for r in range(n))

    gens = [refl(i) for i in range(n)]
    e = tuple(tuple(int(r == c) for c in range(n)) for r in range(n))
    dist = {e: 0}
    todo = deque([e])
    while todo:
        x = todo.popleft()
        if dist[x] == radius:
            continue
        for g in gens:
            y = mul(x, g)
            if y not in dist:
                dist[y] = dist[x] + 1
                todo.append(y)
    return dist, gens, mul, e


def oracle_word_length(sys_, w, radius):
    dist, gens, mul, e = oracle_lengths(sys_, radius)
    m = e
    for i in w:
        m = mul(m, gens[i])
    return dist[m]


# -- lengths -------------------------------------------------------------------------

@pytest.mark.parametrize("name, word, length", [
    ("A2", (0, 1, 0), 3),
    ("A2", (0, 0), 0),
    ("affA2", (0, 1, 2, 0, 1, 2), 6),
])
def test_length_examples(name, word, length):
    sys_ = system(name)
    assert sys_.length(word) == length
    assert sys_.is_reduced(word) == (len(word) == length)


def test_aff_a2_length_matches_oracle():
    assert oracle_word_length(system("affA2"), (0, 1, 2, 0, 1, 2), 6) == 6


@pytest.mark.parametrize("name", ["A2", "C2", "A1xA1", "affA2", "cycle8"])
def test_lengths_match_oracle_on_ball(name):
    sys_ = system(name)
    radius = 6 if name != "cycle8" else 4
    dist, _, _, _ = oracle_lengths(sys_, radius)
    ball = sys_.enumerate_ball(radius)
    for l, words in ball.items():
        assert sum(1 for d in dist.values() if d == l) == len(words)
        for w in words:
            assert sys_.length(w) == l


@given(st.sampled_from(["A2", "C2", "affA2"]), st.lists(st.integers(0, 2), max_size=8))
def test_random_word_length(name, w):
    sys_ = system(name)
    w = tuple(i % sys_.rank for i in w)
    assert sys_.length(w) == oracle_word_length(sys_, w, len(w))


@given(st.sampled_from(["A2", "C2", "affA2", "cycle8"]), st.lists(st.integers(0, 7), max_size=7))
def test_exchange_property(name, w):
    """If s_i w is shorter, some reduced word for w starts with s_i."""
    sys_ = system(name)
    w = sys_.normal_form(tuple(i % sys_.rank for i in w))
    for i in range(sys_.rank):
        if sys_.length((i,) + w) < len(w):
            rest = sys_.normal_form((i,) + w)
            assert sys_.equal((i,) + rest, w)
            assert sys_.is_reduced((i,) + rest)


# -- normal forms ------------------------------------------------------------------

def test_a2_normal_form_is_shortlex():
    sys_ = system("A2")
    assert sys_.normal_form((1, 0, 1)) == (0, 1, 0)
    elements = {}
    for n in range(4):
        for w in itertools.product(range(2), repeat=n):
            key = sys_.matrix(w)
            best = elements.get(key)
            if best is None or (len(w), w) < (len(best), best):
                elements[key] = w
    assert len(elements) == 6
    for key, w in elements.items():
        assert sys_.normal_form(w) == w


@given(st.sampled_from(["A2", "C2", "affA2"]), st.lists(st.integers(0, 2), max_size=8))
def test_normal_form_idempotent_and_inverse(name, w):
    sys_ = system(name)
    w = tuple(i % sys_.rank for i in w)
    nf = sys_.normal_form(w)
    assert sys_.normal_form(nf) == nf
    assert sys_.multiply(w, sys_.inverse(w)) == ()
    assert sys_.normal_form(()) == ()


def test_word_format_round_trip():
    assert format_word((0, 1, 0)) == "1.2.1"
    assert parse_word("1.2.1") == (0, 1, 0)
    assert format_word(()) == "e"


# -- balls -----------------------------------------------------------------------------

@pytest.mark.parametrize("name, radius, counts", [
    ("A2", 3, [1, 2, 2, 1]),
    ("affA2", 2, [1, 3, 6]),
])
def test_ball_counts(name, radius, counts):
    assert system(name).growth_counts(radius) == counts


def test_ball_radius_zero():
    assert system("C2").enumerate_ball(0) == {0: [()]}


def test_ball_counts_invariant_under_relabelling():
    d = parse_diagram("v 1\nv 2\nv 3\ne 1 2 m=4\ne 2 3 m=3\ne 3 1 m=3")
    d2 = d.relabel({"1": "3", "2": "1", "3": "2"})
    a = CoxeterSystem.from_diagram(d).growth_counts(6)
    b = CoxeterSystem.from_diagram(d2).growth_counts(6)
    assert a == b


# -- twisted involutions ---------------------------------------------------------------

def test_a1xa1_swap():
    sys_ = system("A1xA1")
    rep = twisted_involutions(sys_, (1, 0), 2)
    assert rep.inv == rep.delta_image == frozenset({(), (0, 1)})
    w = twisted_decomposition(sys_, (1, 0), (0, 1))
    assert len(w) == 1


def antipodal(n):
    return tuple((i + n // 2) % n for i in range(n))


def test_cycle8_twisted_sets_agree():
    sys_ = system("cycle8")
    rep = twisted_involutions(sys_, antipodal(8), 8)
    assert rep.equal_up_to_R and () in rep.inv
    assert all(len(u) % 2 == 0 for u in rep.inv)
    for u in rep.inv:
        w = twisted_decomposition(sys_, antipodal(8), u)
        assert 2 * len(w) == len(u)
        theta_w_inv = tuple(antipodal(8)[i] for i in reversed(w))
        assert sys_.equal(w + theta_w_inv, u)


def test_identity_decomposes_trivially():
    assert twisted_decomposition(system("cycle8"), antipodal(8), ()) == ()


@pytest.mark.parametrize("theta", [(0, 1, 2, 3, 4, 5, 6, 7), (1, 0, 3, 2, 5, 4, 7, 6)])
def test_theta_validation(theta):
    with pytest.raises(ValueError):
        twisted_involutions(system("cycle8"), theta, 2)


def test_twisted_decomposition_rejects_non_involution():
    with pytest.raises(ValueError):
        twisted_decomposition(system("cycle8"), antipodal(8), (0,))
