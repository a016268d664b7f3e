"""Growth series of Coxeter systems via Steinberg's alternating sum.

For the set F of spherical subsets J of the generators,

    1 / p(1/t) = sum_{J in F} (-1)^|J| / p_J(t),

and since each p_J is palindromic of degree N_J, 1/p_J(1/t) = t^N_J / p_J(t).
Clearing denominators with L = lcm(p_J) gives

    p(t) = L / sum_J (-1)^|J| t^N_J L / p_J.

Polynomials live in ZZ[t] (sympy); the smallest positive pole is isolated
exactly and then narrowed by bisection over ``fractions.Fraction``.
"""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import sympy

from .diagram import Diagram, coxeter_components

t = sympy.Symbol("t")
ROOT_WIDTH = Fraction(1, 10 ** 9)


def p_m(m: int) -> sympy.Poly:
    """1 + t + ... + t^m."""
    return sympy.Poly([1] * (m + 1), t, domain=sympy.ZZ)


@lru_cache(maxsize=None)
def _poincare_from_exponents(exps: tuple[int, ...]) -> sympy.Poly:
    out = sympy.Poly(1, t, domain=sympy.ZZ)
    for m in exps:
        out = out * p_m(m)
    return out


def poincare_polynomial(d: Diagram, subset: Iterable[str] | None = None) -> sympy.Poly:
    """Poincare polynomial of a finite parabolic subgroup: prod p_{m_i}(t)."""
    comps = coxeter_components(d, subset)
    if comps is None:
        raise ValueError("subset has infinite type")
    return _poincare_from_exponents(tuple(sorted(m for _, ex in comps for m in ex)))


@dataclass(frozen=True)
class GrowthSeries:
    """Normalised rational function numerator/denominator (coefficients low -> high)."""
    numerator: tuple[int, ...]
    denominator: tuple[int, ...]

    @classmethod
    def from_polys(cls, num: sympy.Poly, den: sympy.Poly) -> "GrowthSeries":
        g = sympy.gcd(num, den)
        num = sympy.Poly(sympy.quo(num, g), t, domain=sympy.ZZ)
        den = sympy.Poly(sympy.quo(den, g), t, domain=sympy.ZZ)
        content = reduce(sympy.igcd, [int(c) for c in num.all_coeffs() + den.all_coeffs()])
        if den.LC() < 0:
            content = -content
        num = num.quo_ground(content)
        den = den.quo_ground(content)
        lo = lambda p: tuple(int(c) for c in reversed(p.all_coeffs()))
        out = cls(lo(num), lo(den))
        if out.denominator[0] == 0:
            raise ValueError("denominator vanishes at 0")
        return out

    @property
    def num_poly(self) -> sympy.Poly:
        return sympy.Poly(list(reversed(self.numerator)), t, domain=sympy.ZZ)

    @property
    def den_poly(self) -> sympy.Poly:
        return sympy.Poly(list(reversed(self.denominator)), t, domain=sympy.ZZ)

    def __mul__(self, other: "GrowthSeries") -> "GrowthSeries":
        return GrowthSeries.from_polys(self.num_poly * other.num_poly,
                                       self.den_poly * other.den_poly)

    def is_polynomial(self) -> bool:
        return len(self.denominator) == 1

    def __str__(self):
        return f"{list(self.numerator)} / {list(self.denominator)}"


def _iter_large_spherical(d: Diagram):
    """Spherical subsets of size >= 3, with their component data.

    Subsets of spherical sets are spherical, so sets are grown one
    higher-indexed vertex at a time and abandoned as soon as they fail.
    """
    n = d.rank
    if len(d.edges) == n * (n - 1) // 2:
        return  # every triple spans a triangle
    verts = d.vertices

    def extend(members: list[int]):
        for c in range(members[-1] + 1, n):
            new = members + [c]
            sub = [verts[k] for k in new]
            comps = coxeter_components(d, sub)
            if comps is None:
                continue
            if len(new) >= 3:
                yield tuple(sub), comps
            yield from extend(new)

    for a in range(n):
        yield from extend([a])


def _iter_spherical(d: Diagram):
    yield (), []
    for v in d.vertices:
        yield (v,), [("A1", [1])]
    for u, v in itertools.combinations(d.vertices, 2):
        comps = coxeter_components(d, (u, v))
        if comps is not None:
            yield (u, v), comps
    yield from _iter_large_spherical(d)


def spherical_subsets(d: Diagram) -> list[tuple[str, ...]]:
    """All vertex subsets generating a finite parabolic subgroup (including ())."""
    return [s for s, _ in _iter_spherical(d)]


def _signature_counts(d: Diagram) -> Counter:
    """Counter over (size, sorted exponents) for spherical subsets.

    Singletons and pairs are counted from the label statistics directly, which
    keeps very large rank-2-heavy diagrams cheap.
    """
    n = d.rank
    counts = Counter()
    counts[(0, ())] += 1
    if n:
        counts[(1, (1,))] += n
    by_label = Counter(e.m for e in d.edges)
    non_edges = n * (n - 1) // 2 - len(d.edges)
    if non_edges:
        counts[(2, (1, 1))] += non_edges
    for m, c in by_label.items():
        counts[(2, tuple(sorted((1, m - 1))))] += c
    for sub, comps in _iter_large_spherical(d):
        counts[(len(sub), tuple(sorted(x for _, ex in comps for x in ex)))] += 1
    return counts


def growth_series(d: Diagram) -> GrowthSeries:
    """Exact growth series p_(W,S)(t) of the Coxeter system of ``d``."""
    counts = _signature_counts(d)
    polys = {sig: _poincare_from_exponents(sig[1]) for sig in counts}
    L = reduce(sympy.lcm, polys.values(), sympy.Poly(1, t, domain=sympy.ZZ))
    L = sympy.Poly(L, t, domain=sympy.ZZ)
    total = sympy.Poly(0, t, domain=sympy.ZZ)
    for sig, c in counts.items():
        size, exps = sig
        sign = -1 if size % 2 else 1
        term = sympy.Poly(sympy.quo(L, polys[sig]), t, domain=sympy.ZZ)
        total += term.mul_ground(sign * c) * sympy.Poly(t ** sum(exps), t, domain=sympy.ZZ)
    return GrowthSeries.from_polys(L, total)


def series_coefficients(g: GrowthSeries, L: int) -> list[int]:
    """Taylor coefficients a_0..a_L via the linear recurrence of the denominator."""
    num, den = g.numerator, g.denominator
    d0 = den[0]
    out = []
    for k in range(L + 1):
        acc = num[k] if k < len(num) else 0
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        a, r = divmod(acc, d0)
        if r:
            raise ArithmeticError("series coefficients are not integral")
        out.append(a)
    return out


# -- roots ------------------------------------------------------------------------

def _eval(coeffs_low: Sequence[int], x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs_low):
        acc = acc * x + c
    return acc


def bisect_root(coeffs_low: Sequence[int], lo: Fraction, hi: Fraction,
                width: Fraction = ROOT_WIDTH) -> tuple[Fraction, Fraction]:
    """Shrink a sign-change interval of a polynomial to the given width."""
    flo, fhi = _eval(coeffs_low, lo), _eval(coeffs_low, hi)
    if flo == 0:
        return lo, lo
    if fhi == 0:
        return hi, hi
    if (flo > 0) == (fhi > 0):
        raise ValueError("no sign change on the interval")
    while hi - lo > width:
        mid = (lo + hi) / 2
        fm = _eval(coeffs_low, mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


@dataclass(frozen=True)
class GrowthRate:
    """Certified enclosures: rho in [rho_lo, rho_hi], omega in [omega_lo, omega_hi].

    For finite groups ``rho`` is infinite (endpoints None) and omega is 1.
    """
    rho_lo: Fraction | None
    rho_hi: Fraction | None
    omega_lo: Fraction
    omega_hi: Fraction
    finite: bool


def smallest_positive_root(den: Sequence[int], width: Fraction = ROOT_WIDTH):
    """Certified interval around the least positive real root, or None.

    sympy isolates the real roots of each irreducible factor with rational
    endpoints; the winning interval is then bisected on that factor, which
    is square-free and so changes sign across the root.
    """
    poly = sympy.Poly(list(reversed(den)), t, domain=sympy.ZZ)
    if poly.degree() <= 0:
        return None
    best = None
    for factor, _ in poly.factor_list()[1]:
        fac = [int(c) for c in reversed(factor.all_coeffs())]
        for (lo, hi), _ in factor.intervals():
            lo, hi = Fraction(int(lo.p), int(lo.q)), Fraction(int(hi.p), int(hi.q))
            if hi <= 0 or (lo == hi and lo <= 0):
                continue
            if lo < 0:
                lo = Fraction(0)  # the root is positive and den(0) != 0
            cand = (lo, hi) if lo == hi else bisect_root(fac, lo, hi, width)
            if best is None or cand[0] < best[0]:
                best = cand
    return best


def growth_rate(d: Diagram, series: GrowthSeries | None = None) -> GrowthRate:
    g = series or growth_series(d)
    iv = smallest_positive_root(g.denominator)
    if iv is None:
        return GrowthRate(None, None, Fraction(1), Fraction(1), True)
    lo, hi = iv
    return GrowthRate(lo, hi, 1 / hi, 1 / lo, False)


@dataclass(frozen=True)
class LatticeReport:
    series_converges_at_1_over_q: bool
    omega: GrowthRate
    paper_bound_satisfied: bool
    dominated: bool
    three_spherical: bool


def lattice_check(d: Diagram, q: int) -> LatticeReport:
    """Does sum_w q^-l(w) converge, and does the sufficient bound q >= |S| apply?

    Convergence is decided exactly: the series converges at 1/q iff the
    denominator has no root in (0, 1/q] (a pole exactly at 1/q diverges).
    """
    if q < 2:
        raise ValueError("q must be >= 2")
    g = growth_series(d)
    rate = growth_rate(d, g)
    if rate.finite:
        converges = True
    else:
        converges = g.den_poly.count_roots(0, sympy.Rational(1, q)) == 0
    dominated = all(e.m <= 4 for e in d.edges)
    three = is_three_spherical(d)
    return LatticeReport(converges, rate, dominated and q >= d.rank, dominated, three)


def is_three_spherical(d: Diagram) -> bool:
    """Every rank-3 subset is spherical.

    Only connected triples can fail: triangles always do, and a path u-v-w
    is spherical exactly for the label pairs (3,3), (3,4), (4,3). Complete
    graphs are dispatched without enumerating triples.
    """
    n = d.rank
    if n >= 3 and len(d.edges) == n * (n - 1) // 2:
        return False
    for v in d.vertices:
        nb = d.neighbors(v)
        for a, b in itertools.combinations(nb, 2):
            if d.edge(a, b) is not None:
                return False
            if (d.label(v, a), d.label(v, b)) not in ((3, 3), (3, 4), (4, 3)):
                return False
    return True


def dominates(small: Diagram, big: Diagram, mapping=None) -> bool:
    """True if m_rs <= m'_{phi(r) phi(s)} under an injective vertex map phi."""
    if mapping is None:
        if len(small.vertices) > len(big.vertices):
            return False
        mapping = dict(zip(small.vertices, big.vertices))
    if len(set(mapping.values())) != len(mapping):
        return False
    return all(small.label(r, s) <= big.label(mapping[r], mapping[s])
               for r, s in itertools.combinations(small.vertices, 2))


def dominating_diagram(n: int) -> Diagram:
    """Complete graph on n vertices with every edge labelled 4."""
    from .diagram import Edge
    verts = tuple(str(i) for i in range(1, n + 1))
    edges = tuple(Edge(a, b, 4, "C2") for a, b in itertools.combinations(verts, 2))
    return Diagram(verts, edges, name=f"dominating-n{n}")


def dominating_closed_form(n: int) -> GrowthSeries:
    """2 p1 p3 / (2 (1 - (n-1) t) p3 + t^4 n (n-1)) as a normalised series."""
    p1, p3 = p_m(1), p_m(3)
    num = p1 * p3 * 2
    den = sympy.Poly(2 * (1 - (n - 1) * t), t, domain=sympy.ZZ) * p3 \
        + sympy.Poly(t ** 4 * n * (n - 1), t, domain=sympy.ZZ)
    return GrowthSeries.from_polys(num, den)
