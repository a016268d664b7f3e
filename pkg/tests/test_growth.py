"""Growth series, growth rates and the lattice criterion."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from amalgam.coxeter import CoxeterSystem
from amalgam.diagram import Diagram, Edge, parse_diagram
from amalgam.growth import (GrowthSeries, bisect_root, dominates, dominating_diagram,
                            growth_rate, growth_series, lattice_check, p_m,
                            dominating_closed_form, poincare_polynomial, series_coefficients,
                            spherical_subsets, t)

from conftest import cycle_text, path_text


def as_rational(g: GrowthSeries):
    return sympy.Poly(list(reversed(g.numerator)), t).as_expr() / \
        sympy.Poly(list(reversed(g.denominator)), t).as_expr()


def ball_counts(d, L):
    return CoxeterSystem.from_diagram(d).growth_counts(L)


# -- Poincare polynomials -----------------------------------------------------------

@pytest.mark.parametrize("text, subset, expected", [
    ("v 1", ("1",), 1 + t),
    (path_text(2, 4), ("1", "2"), (1 + t) * (1 + t + t ** 2 + t ** 3)),
    (path_text(2), ("1", "2"), (1 + t) * (1 + t + t ** 2)),
])
def test_poincare_examples(text, subset, expected):
    p = poincare_polynomial(parse_diagram(text), subset)
    assert sympy.expand(p.as_expr() - expected) == 0


@pytest.mark.parametrize("text", [
    path_text(2), path_text(3), path_text(4),
    "v 1\nv 2\nv 3\ne 1 2 m=4\ne 2 3 m=3",
    "v 1\nv 2\ne 1 2 m=6",
    "v 1\nv 2\nv 3\nv 4\ne 1 2 m=3\ne 2 3 m=3\ne 2 4 m=3",
    "v 1\nv 2\nv 3\nv 4\ne 1 2 m=3\ne 2 3 m=4\ne 3 4 m=3",
])
def test_poincare_at_one_is_group_order(text):
    d = parse_diagram(text)
    p = poincare_polynomial(d)
    assert p.eval(1) == sum(ball_counts(d, 40))
    assert list(reversed([int(c) for c in p.all_coeffs()])) == \
        [c for c in ball_counts(d, p.degree())]


def test_poincare_rejects_infinite():
    with pytest.raises(ValueError):
        poincare_polynomial(parse_diagram(cycle_text(3)))


# -- spherical subsets ----------------------------------------------------------------

@pytest.mark.parametrize("d, count", [
    (dominating_diagram(3), 7),
    (parse_diagram(path_text(3)), 8),
    (parse_diagram(cycle_text(3)), 7),
])
def test_spherical_subset_counts(d, count):
    subsets = spherical_subsets(d)
    assert len(subsets) == count
    assert () in subsets


def test_dominating_spherical_subsets_are_small():
    assert all(len(J) <= 2 for J in spherical_subsets(dominating_diagram(5)))


# -- growth series ----------------------------------------------------------------------

@pytest.mark.parametrize("n", range(3, 9))
def test_dominating_denominator_identity(n):
    g = growth_series(dominating_diagram(n))
    assert g == dominating_closed_form(n)
    target = 2 * (1 + t) * (1 + t + t ** 2 + t ** 3) / (
        2 * (1 - (n - 1) * t) * (1 + t + t ** 2 + t ** 3) + t ** 4 * n * (n - 1))
    assert sympy.cancel(as_rational(g) - target) == 0


def test_finite_series_is_poincare_polynomial():
    g = growth_series(parse_diagram(path_text(2)))
    assert g.is_polynomial() and g.numerator == (1, 2, 2, 1)


def test_single_vertex():
    assert growth_series(parse_diagram("v 1")).numerator == (1, 1)


@pytest.mark.parametrize("text", [cycle_text(3), cycle_text(8), path_text(4, 4)])
def test_series_matches_ball(text):
    d = parse_diagram(text)
    assert series_coefficients(growth_series(d), 10) == ball_counts(d, 10)


def test_dominating_n3_matches_ball():
    d = dominating_diagram(3)
    assert series_coefficients(growth_series(d), 10) == ball_counts(d, 10)


def test_finite_coefficients_vanish_after_longest_element():
    d = parse_diagram(path_text(3))
    coeffs = series_coefficients(growth_series(d), 10)
    assert sum(coeffs) == 24 and coeffs[7:] == [0, 0, 0, 0]


def test_disjoint_union_is_product():
    a = parse_diagram(cycle_text(3))
    b = parse_diagram(path_text(2, 4))
    verts = a.vertices + tuple(f"b{v}" for v in b.vertices)
    edges = a.edges + tuple(Edge(f"b{e.u}", f"b{e.v}", e.m) for e in b.edges)
    union = Diagram(verts, edges)
    assert growth_series(union) == growth_series(a) * growth_series(b)


@st.composite
def small_diagrams(draw):
    n = draw(st.integers(1, 4))
    verts = [str(i) for i in range(1, n + 1)]
    edges = [Edge(u, v, m) for u, v in itertools.combinations(verts, 2)
             if (m := draw(st.sampled_from((2, 3, 4, 6)))) != 2]
    return Diagram(tuple(verts), tuple(edges))


@given(small_diagrams())
def test_series_normalisation_and_ball(d):
    g = growth_series(d)
    assert math.gcd(*g.numerator, *g.denominator) == 1 and g.denominator[-1] > 0
    assert sympy.gcd(g.num_poly, g.den_poly).degree() == 0
    coeffs = series_coefficients(g, 5)
    assert coeffs[0] == 1 and all(c >= 0 for c in coeffs)
    assert coeffs == ball_counts(d, 5)


# -- growth rate ---------------------------------------------------------------------------

def test_finite_rate_is_one():
    r = growth_rate(parse_diagram(path_text(3)))
    assert r.finite and r.omega_lo == r.omega_hi == 1 and r.rho_lo is None


def test_dominating_n3_root():
    r = growth_rate(dominating_diagram(3))
    assert Fraction(1, 2) < r.rho_lo <= r.rho_hi < Fraction(3, 5)
    assert r.rho_hi - r.rho_lo <= Fraction(1, 10 ** 9)
    roots = [complex(z) for z in sympy.Poly(t ** 4 - t ** 3 - t ** 2 - t + 1, t).nroots()]
    real = min(z.real for z in roots if abs(z.imag) < 1e-12 and z.real > 0)
    assert float(r.rho_lo) <= real + 1e-12 and real - 1e-12 <= float(r.rho_hi)


def test_bisect_root_width():
    lo, hi = bisect_root([-2, 0, 1], Fraction(1), Fraction(2))
    assert lo <= Fraction(math.isqrt(2 * 10 ** 20), 10 ** 10) <= hi + Fraction(1, 10 ** 9)
    assert hi - lo <= Fraction(1, 10 ** 9)


@pytest.mark.parametrize("small, big", [
    (cycle_text(4), cycle_text(4, 4)),
    (path_text(3, 4), cycle_text(3, 4)),
    (cycle_text(5), "\n".join(["v 1", "v 2", "v 3", "v 4", "v 5"] +
                              [f"e {a} {b} m=3" for a, b in itertools.combinations(range(1, 6), 2)])),
])
def test_domination_monotone(small, big):
    a, b = parse_diagram(small), parse_diagram(big)
    assert dominates(a, b)
    ra, rb = growth_rate(a), growth_rate(b)
    assert ra.omega_lo <= rb.omega_hi


def test_dominates_rejects_larger_labels():
    assert not dominates(parse_diagram(cycle_text(4, 4)), parse_diagram(cycle_text(4)))


# -- lattice criterion ---------------------------------------------------------------------

def test_lattice_dominating_n3():
    rep = lattice_check(dominating_diagram(3), 3)
    assert rep.series_converges_at_1_over_q and rep.paper_bound_satisfied
    low = lattice_check(dominating_diagram(3), 2)
    assert not low.paper_bound_satisfied and low.series_converges_at_1_over_q
    assert low.omega.omega_hi < 2


def test_lattice_finite_always_converges():
    assert lattice_check(parse_diagram(path_text(3)), 2).series_converges_at_1_over_q


def test_lattice_divergence_detected():
    rep = lattice_check(dominating_diagram(6), 2)
    assert not rep.series_converges_at_1_over_q
    assert rep.omega.omega_lo > 2


@pytest.mark.parametrize("n", range(3, 9))
def test_lattice_bound_for_q_equal_n(n):
    rep = lattice_check(dominating_diagram(n), n)
    assert rep.series_converges_at_1_over_q and rep.paper_bound_satisfied
    assert rep.omega.omega_hi <= n


def test_p_m():
    assert [int(c) for c in p_m(3).all_coeffs()] == [1, 1, 1, 1]
