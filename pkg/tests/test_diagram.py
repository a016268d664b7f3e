"""Diagram parsing, finite-type recognition, spanning trees and double covers."""
from __future__ import annotations

import itertools

import pytest
from hypothesis import given, strategies as st

from amalgam.coxeter import BallCapExceeded, CoxeterSystem
from amalgam.diagram import (Diagram, DiagramError, DiagramSyntaxError, Edge,
                             classify_subdiagrams, double_cover, finite_type_name,
                             format_diagram, girth, loop_fiber_type, parse_diagram,
                             spanning_tree_and_loops, tree_condition_violations)

from conftest import SIX_VERTEX_TEXT, cycle_text, family_text, path_text


@st.composite
def diagrams(draw, max_n=5, labels=(2, 3, 4, 6)):
    n = draw(st.integers(1, max_n))
    verts = [str(i) for i in range(1, n + 1)]
    edges = []
    for u, v in itertools.combinations(verts, 2):
        m = draw(st.sampled_from(labels))
        if m != 2:
            edges.append(Edge(u, v, m))
    return Diagram(tuple(verts), tuple(edges))


def connected(d):
    return d.is_connected()


def ball_is_finite(d, subset, cap=10 ** 4):
    """Oracle: the parabolic subgroup is finite iff its ball stops growing."""
    sub = d.subdiagram(subset)
    sys_ = CoxeterSystem.from_diagram(sub)
    try:
        counts = sys_.growth_counts(40, cap=cap)
    except BallCapExceeded:
        return False
    return counts[-1] == 0


# -- parsing -----------------------------------------------------------------------

def test_parse_single_edge():
    d = parse_diagram("v 1\nv 2\ne 1 2 m=3")
    assert d.vertices == ("1", "2")
    assert len(d.edges) == 1 and d.label("1", "2") == 3


def test_parse_six_vertex_diagram(six_vertex):
    assert len(six_vertex.vertices) == 6
    assert len(six_vertex.edges) == 6
    assert all(e.m == 3 for e in six_vertex.edges)


@pytest.mark.parametrize("text, fragment", [
    ("v 1\ne 1 1 m=3", "self-edge"),
    ("v 1\nv 2\ne 1 2 m=3\ne 2 1 m=3", "duplicate"),
    ("v 1\nv 2\ne 1 2 m=5", "label"),
    ("v 1\nv 1", "duplicate"),
    ("w 1", "unknown"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(DiagramError, match=fragment):
        parse_diagram(text)


def test_syntax_error_reports_position():
    with pytest.raises(DiagramSyntaxError) as info:
        parse_diagram("v 1\nv 2\ne 1 2 m=x")
    assert info.value.line == 3


def test_non_adjacent_label_is_two(six_vertex):
    assert six_vertex.label("1", "2") == 2


def test_c2_orientation_preserved():
    d = parse_diagram("v 1\nv 2\ne 2 1 m=4")
    e = d.edge("1", "2")
    assert (e.u, e.v) == ("2", "1") and e.tag == "C2"


@given(diagrams())
def test_format_parse_round_trip(d):
    d2 = parse_diagram(format_diagram(d))
    assert d2.vertices == d.vertices
    assert {(e.sorted_ends(), e.m) for e in d2.edges} == {(e.sorted_ends(), e.m) for e in d.edges}
    assert format_diagram(d2) == format_diagram(d)


# -- finite types ------------------------------------------------------------------

@pytest.mark.parametrize("text, expected", [
    (path_text(3), True),
    (cycle_text(3), False),
])
def test_three_spherical_examples(text, expected):
    rep = classify_subdiagrams(parse_diagram(text), 3)
    assert rep.three_spherical is expected
    assert not rep.has_C2_2


def test_triangle_rank3_is_infinite():
    d = parse_diagram(cycle_text(3))
    assert finite_type_name(d, ("1", "2", "3")) == "infinite"
    assert not ball_is_finite(d, ("1", "2", "3"))


@pytest.mark.parametrize("q, expected", [(2, True), (3, False)])
def test_c2_2_flag(q, expected):
    d = parse_diagram("v 1\nv 2\ne 1 2 m=4")
    assert classify_subdiagrams(d, q).has_C2_2 is expected


@pytest.mark.parametrize("text, subset, name", [
    (path_text(3), ("1", "2", "3"), "A3"),
    (path_text(3, 4), ("1", "2"), "B2"),
    ("v 1\nv 2\nv 3\ne 1 2 m=4\ne 2 3 m=3", ("1", "2", "3"), "B3"),
    ("v 1\nv 2\ne 1 2 m=6", ("1", "2"), "G2"),
    ("v 1\nv 2\nv 3", ("1", "3"), "A1xA1"),
])
def test_finite_type_names(text, subset, name):
    assert finite_type_name(parse_diagram(text), subset) == name


@given(diagrams(max_n=4))
def test_rank3_classification_matches_ball_oracle(d):
    rep = classify_subdiagrams(d, 3)
    for sub, name in rep.finite_type_of.items():
        assert (name != "infinite") == ball_is_finite(d, sub)


@given(diagrams(max_n=5, labels=(2, 3, 4)))
def test_three_spherical_implies_girth_at_least_four(d):
    if classify_subdiagrams(d, 3).three_spherical:
        assert girth(d) >= 4


# -- trees and loops ---------------------------------------------------------------

def test_path_is_a_tree():
    td = spanning_tree_and_loops(parse_diagram(path_text(3)))
    assert td.r == 0 and td.excess == () and td.loops == ()


def test_six_vertex_loop(six_vertex):
    td = spanning_tree_and_loops(six_vertex)
    assert td.r == 1
    assert td.excess == (("5", "6"),)
    assert set(td.loops[0]) == {"3", "4", "5", "6"} and len(td.loops[0]) == 4


@pytest.mark.parametrize("k, l", [(4, 1), (5, 2), (6, 3)])
def test_family_loop_length(k, l):
    td = spanning_tree_and_loops(parse_diagram(family_text(k, l)))
    assert td.r == 1
    assert sorted(td.loops[0], key=int) == [str(i) for i in range(1, k + 1)]


@given(diagrams(max_n=6).filter(connected))
def test_tree_and_loops_properties(d):
    td = spanning_tree_and_loops(d)
    assert len(td.tree) == len(d.vertices) - 1
    assert td.r == len(d.edges) - len(d.vertices) + 1 == len(td.excess)
    tree_d = Diagram(d.vertices, tuple(Edge(u, v, 3) for u, v in td.tree))
    assert tree_d.is_connected()
    for (i, j), loop in zip(td.excess, td.loops):
        assert {i, j} <= set(loop)
        for a, b in zip(loop, loop[1:] + loop[:1]):
            assert d.edge(a, b) is not None
    assert spanning_tree_and_loops(d) == td


def test_disconnected_rejected():
    with pytest.raises(DiagramError, match="disconnected"):
        spanning_tree_and_loops(parse_diagram("v 1\nv 2"))


def test_tree_conditions_hold_for_uniform_degree(six_vertex):
    assert tree_condition_violations(six_vertex) == []


def test_tree_condition_flags_mixed_degree_loop():
    d = parse_diagram("v 1 e=3\nv 2\nv 3\nv 4\ne 1 2 m=3\ne 2 3 m=3\ne 3 4 m=3\ne 4 1 m=3")
    td = spanning_tree_and_loops(d)
    assert td.excess and any("degree 3" in msg for msg in tree_condition_violations(d))


def test_tree_condition_allows_power_of_two_ratio():
    d = parse_diagram("v 1 e=2\nv 2\nv 3\nv 4\ne 1 2 m=3\ne 2 3 m=3\ne 3 4 m=3\ne 4 1 m=3")
    assert tree_condition_violations(d) == []


# -- covers -------------------------------------------------------------------------

def test_six_vertex_cover(six_vertex):
    c = double_cover(six_vertex, {("5", "6"): 1})
    assert len(c.cover.vertices) == 12 and len(c.cover.edges) == 12
    assert all(c.deck[v] != v and c.deck[c.deck[v]] == v for v in c.cover.vertices)
    assert c.cover.is_connected()


def test_square_cover_is_eight_cycle(square):
    s = spanning_tree_and_loops(square).excess[0]
    c = double_cover(square, {s: 1})
    assert c.cover.is_connected()
    assert all(len(c.cover.neighbors(v)) == 2 for v in c.cover.vertices)
    assert girth(c.cover) == 8
    fib = loop_fiber_type(c, ("1", "2", "3", "4"), 1)
    assert fib.kind == "single_double_loop" and len(fib.cycles[0]) == 8


def test_trivial_omega_rejected(six_vertex):
    with pytest.raises(DiagramError, match="disconnected cover"):
        double_cover(six_vertex, {("5", "6"): 0})


def test_fiber_with_trivial_monodromy():
    d = parse_diagram(family_text(4, 0) + "v 5\nv 6\nv 7\nv 8\n"
                      "e 4 5 m=3\ne 5 6 m=3\ne 6 7 m=3\ne 7 8 m=3\ne 8 5 m=3")
    td = spanning_tree_and_loops(d)
    assert td.r == 2
    omega = {td.excess[0]: 0, td.excess[1]: 1}
    c = double_cover(d, omega)
    fib = loop_fiber_type(c, td.loops[0], 0)
    assert fib.kind == "two_disjoint_loops"
    assert [len(cy) for cy in fib.cycles] == [4, 4]


def test_fiber_rejects_non_cycle(six_vertex):
    c = double_cover(six_vertex, {("5", "6"): 1})
    with pytest.raises(DiagramError):
        loop_fiber_type(c, ("1", "2", "3"))


@given(diagrams(max_n=6, labels=(2, 3)).filter(connected), st.data())
def test_cover_invariants(d, data):
    td = spanning_tree_and_loops(d)
    if td.r == 0 or girth(d) <= 3:
        return
    bits = data.draw(st.lists(st.integers(0, 1), min_size=td.r, max_size=td.r))
    if not any(bits):
        bits[0] = 1
    c = double_cover(d, dict(zip(td.excess, bits)))
    assert len(c.cover.vertices) == 2 * len(d.vertices)
    assert len(c.cover.edges) == 2 * len(d.edges)
    for s, loop, b in zip(td.excess, td.loops, bits):
        fib = loop_fiber_type(c, loop, b)
        assert (fib.kind == "single_double_loop") == (b == 1)


def test_six_vertex_text_is_deterministic():
    a = spanning_tree_and_loops(parse_diagram(SIX_VERTEX_TEXT))
    b = spanning_tree_and_loops(parse_diagram(SIX_VERTEX_TEXT))
    assert a == b


def test_trivial_cover_on_request(six_vertex):
    c = double_cover(six_vertex, {("5", "6"): 0}, allow_trivial=True)
    assert not c.cover.is_connected()
    assert len(c.cover.components()) == 2
    fib = loop_fiber_type(c, ("3", "4", "5", "6"), 0)
    assert fib.kind == "two_disjoint_loops" and [len(x) for x in fib.cycles] == [4, 4]
