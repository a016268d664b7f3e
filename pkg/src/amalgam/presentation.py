"""Finite presentations of standard pairs and of universal completions.

Words are tuples of nonzero integers (``k`` is generator ``k-1``, ``-k`` its
inverse). Curtis-Tits vertex generators are named ``x<v>p<a>`` and
``x<v>m<a>`` for the root elements x_v^+(a), x_v^-(a), where ``a`` is the
integer code of a nonzero field element. Phan vertex generators are
``x<v>u<k>`` for the k-th element of SU_2(q) (in the oracle's order).

Strategies
----------
``table``
    Semantics come from the concrete matrix group of the grouporacle. For a
    single edge group the presentation is the full multiplication table. For
    amalgams each edge contributes a presentation on its vertex generators,
    extracted from Cayley-graph relators of the matrix group and certified by
    coset enumeration (the presented group maps onto the matrix group and has
    the same order, hence is isomorphic).
``steinberg``
    Root-group generators x_alpha(a) for every root of the rank-2 system, with
    additivity, commutator, Weyl conjugation and torus relators. All structure
    constants are read off the matrices, so no sign convention is assumed.
    Curtis-Tits only.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from . import grouporacle as go
from .classify import CT, PHAN, AmalgamDescriptor, CoefficientElement, normalize_flavor
from .diagram import vertex_key
from .todd_coxeter import EnumerationOverflow, todd_coxeter

TABLE_ORDER_CAP = 10 ** 4

Word = tuple


class PresentationError(ValueError):
    pass


# -- words -----------------------------------------------------------------------

def inverse_word(w: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(w))


def free_reduce(w: Iterable[int]) -> Word:
    out: list[int] = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def cyclic_reduce(w: Sequence[int]) -> Word:
    w = free_reduce(w)
    while len(w) > 1 and w[0] == -w[-1]:
        w = w[1:-1]
    return w


def canonical_relator(w: Sequence[int]) -> Word:
    """Least rotation of the relator or its inverse (after cyclic reduction)."""
    w = cyclic_reduce(w)
    if not w:
        return w
    best = None
    for cand in (w, inverse_word(w)):
        for k in range(len(cand)):
            r = cand[k:] + cand[:k]
            key = tuple((abs(x), x < 0) for x in r)
            if best is None or key < best[0]:
                best = (key, r)
    return best[1]


def power(w: Sequence[int], k: int) -> Word:
    if k < 0:
        return tuple(inverse_word(w)) * (-k)
    return tuple(w) * k


def _ident(v: str) -> str:
    """Vertex id as a fragment of a GAP-safe identifier."""
    return re.sub(r"[^A-Za-z0-9]", "_", v)


def vertex_symbol(v: str, sign: str, a: int) -> str:
    return f"x{_ident(v)}{'p' if sign == '+' else 'm'}{a}"


def phan_symbol(v: str, k: int) -> str:
    return f"x{_ident(v)}u{k}"


@dataclass(frozen=True)
class Presentation:
    """Generators, relators and bookkeeping for the symbolic alphabet.

    ``vertex_symbols`` maps ``(vertex, sign, a)`` (CT, sign in ``"+-"``) or
    ``(vertex, "u", k)`` (Phan) to a generator index.
    """
    generators: tuple[str, ...]
    relators: tuple[Word, ...]
    metadata: Mapping[str, object] = field(default_factory=dict)
    vertex_symbols: Mapping[tuple, int] = field(default_factory=dict)

    def __post_init__(self):
        if len(set(self.generators)) != len(self.generators):
            raise PresentationError("duplicate generator names")
        n = len(self.generators)
        for r in self.relators:
            if not r:
                raise PresentationError("empty relator")
            if any(x == 0 or abs(x) > n for x in r):
                raise PresentationError(f"relator {r} uses an undeclared generator")

    @property
    def index(self) -> dict[str, int]:
        return {g: k for k, g in enumerate(self.generators)}

    def word_text(self, w: Sequence[int]) -> str:
        return "*".join(f"{self.generators[abs(x) - 1]}^{1 if x > 0 else -1}" for x in w)

    def parse_word(self, text: str) -> Word:
        return parse_word(self, text)

    @property
    def q(self) -> int | None:
        return self.metadata.get("q")

    @property
    def vertices(self) -> list[str]:
        return sorted({k[0] for k in self.vertex_symbols}, key=vertex_key)


# -- group-theoretic helpers ----------------------------------------------------------

def cayley_relators(F: go.Field, gens: Sequence, cap: int = go.GROUP_CAP) -> tuple[int, list[Word]]:
    """All Cayley-graph relators w_g s w_{gs}^-1 (canonical, sorted, deduplicated)."""
    order, words = go.schreier_words(F, gens, cap)
    rels = set()
    for g in order:
        wg = tuple(k + 1 for k in words[g])
        for k, s in enumerate(gens):
            h = go.mat_mul(F, g, s)
            wh = tuple(x + 1 for x in words[h])
            r = canonical_relator(wg + (k + 1,) + inverse_word(wh))
            if r:
                rels.add(r)
    return len(order), sorted(rels, key=lambda r: (len(r), [(abs(x), x < 0) for x in r]))


def _order_ok(names, rels, order, cap) -> bool:
    try:
        t = todd_coxeter(names, rels, (), max_cosets=cap)
    except EnumerationOverflow:
        return False
    return t.index == order


def certified_relators(F: go.Field, gens: Sequence, names: Sequence[str],
                       prune: bool | None = None) -> list[Word]:
    """A short relator list presenting <gens>, certified by enumeration.

    Cayley relators are added in tiers of increasing length until coset
    enumeration returns the group order. A backward pass then drops relators
    whose removal keeps the order (only for small groups unless forced).
    """
    order, rels = cayley_relators(F, gens)
    cap = 4 * order + 1000
    lengths = sorted({len(r) for r in rels})
    chosen = None
    for L in lengths:
        sub = [r for r in rels if len(r) <= L]
        if _order_ok(names, sub, order, cap if L < lengths[-1] else 50 * order):
            chosen = sub
            break
    if chosen is None:  # the full Cayley set always presents the group
        raise PresentationError("Cayley relators failed to certify the group order")
    if prune is None:
        prune = order <= 200
    if prune:
        k = len(chosen) - 1
        while k >= 0:
            trial = chosen[:k] + chosen[k + 1:]
            if len(chosen[k]) > 2 and _order_ok(names, trial, order, cap):
                chosen = trial
            k -= 1
    return chosen


# -- rank-2 templates ---------------------------------------------------------------
# A template presents one standard pair on "standard symbols":
#   ("v", slot, sign, a)  vertex root element (CT) / ("v", slot, "u", k) (Phan)
#   ("aux", root, a)      non-simple root element (steinberg only)

@dataclass(frozen=True)
class PairTemplate:
    """Relators on standard symbols; ``order`` is that of the group they generate
    (for Phan A2 at q=2 the two SU2(2) blocks generate a subgroup of index 4)."""
    pair_type: str
    q: int
    flavor: str
    strategy: str
    symbols: tuple
    relators: tuple[Word, ...]
    order: int


def _slots(pair_type: str) -> int:
    return 1 if pair_type == "A1" else 2


def _vertex_symbol_list(pair_type: str, q: int, flavor: str):
    """Standard vertex symbols and their matrices in the pair realization."""
    sp = go.standard_pair_realization(pair_type, q, flavor)
    F = go.GF(sp.field_order)
    syms, mats = [], []
    for slot in range(_slots(pair_type)):
        if flavor == CT:
            for sign in "+-":
                for a in F.units:
                    syms.append(("v", slot, sign, a))
                    mats.append(sp.vertex_gens[slot][sign][a])
        else:
            ident = go.identity(go.mat_dim(sp.vertex_elements[slot][0]))
            for k, m in enumerate(sp.vertex_elements[slot]):
                if m != ident:
                    syms.append(("v", slot, "u", k))
                    mats.append(m)
    return sp, F, syms, mats


def _template_names(syms) -> list[str]:
    return [f"t{k}" for k in range(1, len(syms) + 1)]


@lru_cache(maxsize=None)
def table_template(pair_type: str, q: int, flavor: str = CT) -> PairTemplate:
    """Certified presentation of the pair on its vertex generators."""
    flavor = normalize_flavor(flavor)
    sp, F, syms, mats = _vertex_symbol_list(pair_type, q, flavor)
    order = len(go.generate_group(F, mats))
    rels = certified_relators(F, mats, _template_names(syms))
    return PairTemplate(pair_type, q, flavor, "table", tuple(syms), tuple(rels), order)


def _root_word(index: Mapping, root, a: int) -> Word:
    return (index[(root, a)],)


@lru_cache(maxsize=None)
def steinberg_template(pair_type: str, q: int) -> PairTemplate:
    """Steinberg-type presentation with matrix-matched structure constants."""
    if pair_type == "B2":
        pair_type = "C2"
    F = go.GF(q)
    roots = go.roots_of(pair_type)
    simple = {}
    for slot in range(_slots(pair_type)):
        for sign in (1, -1):
            r = [0] * len(roots[0])
            r[slot] = sign
            simple[tuple(r)] = (slot, "+" if sign > 0 else "-")
    syms, index, mat = [], {}, {}
    for root in roots:
        for a in F.units:
            if root in simple:
                slot, sign = simple[root]
                syms.append(("v", slot, sign, a))
            else:
                syms.append(("aux", root, a))
            index[(root, a)] = len(syms)
            mat[(root, a)] = go.root_element(F, pair_type, root, a)
    mul = lambda x, y: go.mat_mul(F, x, y)
    inv = lambda x: go.mat_inv(F, x)
    n = go.mat_dim(next(iter(mat.values())))
    I = go.identity(n)

    def word_matrix(w):
        out = I
        for x in w:
            key = keys[abs(x) - 1]
            m = mat[key]
            out = mul(out, m if x > 0 else inv(m))
        return out

    keys = [None] * len(syms)
    for k, v in index.items():
        keys[v - 1] = k

    def x(root, a):
        return () if a == 0 else _root_word(index, root, a)

    def match_root_word(target):
        """A word x_gamma(c) (or empty) equal to ``target``; None if none."""
        if target == I:
            return ()
        for root in roots:
            for c in F.units:
                if mat[(root, c)] == target:
                    return x(root, c)
        return None

    rels = []
    # additivity
    for root in roots:
        for a in F.units:
            for b in F.units:
                rels.append(x(root, a) + x(root, b) + inverse_word(x(root, F.add(a, b))))
    # commutators [x_a(s), x_b(t)] = prod x_{ia+jb}(c_ij)
    for al, be in product(roots, roots):
        if al == be or all(u == -v for u, v in zip(al, be)):
            continue
        span = []
        for i in range(1, 4):
            for j in range(1, 4):
                g = tuple(i * u + j * v for u, v in zip(al, be))
                if g in roots:
                    span.append(g)
        span.sort(key=lambda g: sum(abs(c) for c in g))
        for a in F.units:
            for b in F.units:
                comm = mul(mul(mat[(al, a)], mat[(be, b)]),
                           mul(inv(mat[(al, a)]), inv(mat[(be, b)])))
                found = None
                for coeffs in product(F.elements, repeat=len(span)):
                    w = ()
                    for g, c in zip(span, coeffs):
                        w += x(g, c)
                    if word_matrix(w) == comm:
                        found = w
                        break
                if found is None:
                    raise PresentationError(f"no commutator match for {al},{be}")
                lhs = x(al, a) + x(be, b) + inverse_word(x(al, a)) + inverse_word(x(be, b))
                rels.append(lhs + inverse_word(found))
    # Weyl conjugation and torus relations for each simple root
    for root in simple:
        if any(c < 0 for c in root):
            continue
        neg = tuple(-c for c in root)
        wt = {t: x(root, t) + x(neg, F.neg(F.inv(t))) + x(root, t) for t in F.units}
        for t in F.units:
            wm = word_matrix(wt[t])
            for be in roots:
                for a in F.units:
                    target = mul(mul(wm, mat[(be, a)]), inv(wm))
                    rhs = match_root_word(target)
                    if rhs is None:
                        raise PresentationError("Weyl conjugate is not a root element")
                    rels.append(wt[t] + x(be, a) + inverse_word(wt[t]) + inverse_word(rhs))
        h = {t: wt[t] + inverse_word(wt[1]) for t in F.units}
        for t in F.units:
            for u in F.units:
                rels.append(h[t] + h[u] + inverse_word(h[F.mul(t, u)]))
    seen, out = set(), []
    for r in rels:
        c = canonical_relator(r)
        if c and c not in seen:
            seen.add(c)
            out.append(c)
    out.sort(key=lambda r: (len(r), [(abs(v), v < 0) for v in r]))
    sp = go.standard_pair_realization(pair_type, q, CT)
    return PairTemplate(pair_type, q, CT, "steinberg", tuple(syms), tuple(out), len(sp.group))


def pair_template(pair_type: str, q: int, flavor: str, strategy: str) -> PairTemplate:
    flavor = normalize_flavor(flavor)
    if pair_type == "B2":
        pair_type = "C2"
    if strategy == "table":
        return table_template(pair_type, q, flavor)
    if strategy == "steinberg":
        if flavor != CT:
            raise PresentationError("steinberg strategy is available for Curtis-Tits only")
        return steinberg_template(pair_type, q)
    raise PresentationError(f"unknown strategy {strategy!r}")


# -- edge group presentations ------------------------------------------------------

def _pair_type_name(pair_type: str) -> str:
    t = pair_type.replace("×", "x").replace(" ", "")
    return {"A1xA1": "A1xA1", "A2": "A2", "C2": "C2", "B2": "C2", "A1": "A1"}.get(t, t)


def edge_group_presentation(pair_type: str, q: int, strategy: str = "table",
                            flavor: str = CT, simplify: bool = False,
                            vertices: Sequence[str] = ("i", "j")) -> Presentation:
    """Presentation of a standard pair (or, for ``A1``, of a vertex group).

    ``table``: generators are all non-identity elements, relators the full
    multiplication table. Vertex root elements are named ``x<v>p<a>`` /
    ``x<v>m<a>`` (``x<v>u<k>`` for Phan), the rest ``g<k>`` by BFS position.
    ``simplify`` eliminates the ``g<k>`` generators by Tietze moves.
    ``steinberg``: root generators with matched structure constants.
    """
    flavor = normalize_flavor(flavor)
    pair_type = _pair_type_name(pair_type)
    if strategy == "steinberg":
        tpl = pair_template(pair_type, q, flavor, strategy)
        return _instantiate([(tpl, dict(zip(range(2), vertices)), {}, "")],
                            _vertex_list(vertices[:_slots(pair_type)], q, flavor),
                            {"pair_type": pair_type, "q": q, "flavor": flavor,
                             "strategy": strategy})
    if strategy != "table":
        raise PresentationError(f"unknown strategy {strategy!r}")
    sp, F, syms, mats = _vertex_symbol_list(pair_type, q, flavor)
    if len(sp.group) > TABLE_ORDER_CAP:
        raise PresentationError(f"group order {len(sp.group)} exceeds table cap "
                                f"{TABLE_ORDER_CAP}")
    order, words = go.schreier_words(F, mats)
    ident = order[0]
    elems = [g for g in order if g != ident]
    names = {}
    vsyms = {}
    for s, m in zip(syms, mats):
        v = vertices[s[1]]
        names[m] = vertex_symbol(v, s[2], s[3]) if flavor == CT else phan_symbol(v, s[3])
    gens, pos = [], {}
    for k, g in enumerate(elems, start=1):
        pos[g] = len(gens) + 1
        gens.append(names.get(g, f"g{k}"))
    for s, m in zip(syms, mats):
        key = (vertices[s[1]], s[2], s[3])
        vsyms[key] = pos[m] - 1
    rels = []
    for a in elems:
        for b in elems:
            c = go.mat_mul(F, a, b)
            r = (pos[a], pos[b]) + ((-pos[c],) if c != ident else ())
            rels.append(r)
    meta = {"pair_type": pair_type, "q": q, "flavor": flavor, "strategy": "table",
            "order": len(sp.group)}
    p = Presentation(tuple(gens), tuple(rels), meta, vsyms)
    if simplify:
        gen_mats = {pos[m] - 1: m for m in mats}
        keep = sorted(gen_mats)
        _, w2 = go.schreier_words(F, [gen_mats[k] for k in keep])
        subst = {}
        for g in elems:
            k = pos[g] - 1
            if k not in gen_mats:
                subst[k] = tuple(keep[i] + 1 for i in w2[g])
        p = eliminate_generators(p, subst)
    return p


def eliminate_generators(p: Presentation, subst: Mapping[int, Word]) -> Presentation:
    """Tietze elimination: replace generator ``k`` by the word ``subst[k]``.

    Each ``subst[k]`` must already equal generator ``k`` in the presented
    group and must avoid eliminated generators.
    """
    keep = [k for k in range(len(p.generators)) if k not in subst]
    renum = {k: i + 1 for i, k in enumerate(keep)}

    def rewrite(w):
        out = []
        for x in w:
            k = abs(x) - 1
            if k in subst:
                piece = tuple(renum[abs(y) - 1] * (1 if y > 0 else -1) for y in subst[k])
                out.extend(piece if x > 0 else inverse_word(piece))
            else:
                out.append(renum[k] * (1 if x > 0 else -1))
        return out

    seen, rels = set(), []
    for r in p.relators:
        c = canonical_relator(rewrite(r))
        if c and c not in seen:
            seen.add(c)
            rels.append(c)
    vs = {key: renum[k] - 1 for key, k in p.vertex_symbols.items() if k in renum}
    meta = dict(p.metadata, simplified=True)
    return Presentation(tuple(p.generators[k] for k in keep), tuple(rels), meta, vs)


# -- amalgams ----------------------------------------------------------------------

def _vertex_list(vertices: Sequence[str], q: int, flavor: str):
    """Generator names and keys for the vertex generators, in vertex order."""
    names, keys = [], []
    if flavor == CT:
        F = go.GF(q)
        for v in vertices:
            for sign in "+-":
                for a in F.units:
                    names.append(vertex_symbol(v, sign, a))
                    keys.append((v, sign, a))
    else:
        sp = go.standard_pair_realization("A1", q, PHAN)
        F = go.GF(q * q)
        ident = go.identity(2)
        for v in vertices:
            for k, m in enumerate(sp.vertex_elements[0]):
                if m != ident:
                    names.append(phan_symbol(v, k))
                    keys.append((v, "u", k))
    return names, keys


def _delta_inverse_symbol(key, x: CoefficientElement, q: int, flavor: str):
    """The vertex symbol delta^-1(y) for a standard vertex symbol y = key."""
    v, sign, a = key
    p, f = go.prime_power(q)
    if flavor == CT:
        F = go.GF(q)
        b = F.frobenius(a, (-x.frobenius_exponent) % f)
        if x.tau_bit:
            sign = "-" if sign == "+" else "+"
            b = F.neg(b)
        return (v, sign, b)
    sp = go.standard_pair_realization("A1", q, PHAN)
    Fsq = go.GF(q * q)
    elems = sp.vertex_elements[0]
    m = elems[a]
    k = (-x.frobenius_exponent) % (2 * f)
    img = tuple(Fsq.frobenius(c, k) for c in m)
    return (v, "u", elems.index(img))


def _instantiate(parts, vertex_list, meta) -> Presentation:
    """Glue pair templates: parts are (template, slot->vertex, twist, aux prefix)."""
    names, keys = vertex_list
    gens = list(names)
    index = {k: i + 1 for i, k in enumerate(keys)}
    vsyms = {k: i for i, k in enumerate(keys)}
    rels, seen = [], set()
    flavor, q = meta["flavor"], meta["q"]
    for tpl, slot_vertex, twist, prefix in parts:
        local = {}
        for s_idx, sym in enumerate(tpl.symbols, start=1):
            if sym[0] == "v":
                key = (slot_vertex[sym[1]], sym[2], sym[3])
                tw = twist.get(sym[1])
                if tw is not None:
                    key = _delta_inverse_symbol(key, tw, q, flavor)
                local[s_idx] = index[key]
            else:
                root, a = sym[1], sym[2]
                rname = "".join(str(abs(c)) for c in root)
                sign = "m" if any(c < 0 for c in root) else "p"
                name = f"z{prefix}r{rname}{sign}{a}"
                gens.append(name)
                local[s_idx] = len(gens)
        for r in tpl.relators:
            w = canonical_relator(tuple(local[abs(x)] * (1 if x > 0 else -1) for x in r))
            if w and w not in seen:
                seen.add(w)
                rels.append(w)
    return Presentation(tuple(gens), tuple(rels), dict(meta), vsyms)


def _edge_pair_type(m: int) -> str:
    try:
        return {2: "A1xA1", 3: "A2", 4: "C2"}[m]
    except KeyError:
        raise PresentationError(f"no standard pair for label m={m}") from None


def amalgam_presentation(a: AmalgamDescriptor, strategy: str = "table") -> Presentation:
    """Presentation of the universal completion of the amalgam ``a``.

    Every pair of vertices contributes its standard-pair relators (commuting
    SL2 x SL2 for non-adjacent pairs). On excess edge ``s`` the lesser
    endpoint's symbols are read through ``delta_s^-1``.
    """
    d = a.diagram
    flavor = a.flavor
    if any(e != 1 for e in d.degrees.values()):
        raise PresentationError("field degrees e > 1 are not supported")
    if strategy == "steinberg" and flavor != CT:
        raise PresentationError("steinberg strategy is available for Curtis-Tits only")
    verts = list(d.vertices)
    delta = a.delta_map()
    parts = []
    if len(verts) == 1:
        parts.append((pair_template("A1", a.q, flavor, strategy), {0: verts[0]}, {}, ""))
    for i, j in combinations(verts, 2):
        e = d.edge(i, j)
        m = d.label(i, j)
        ptype = _edge_pair_type(m)
        u, v = (e.u, e.v) if e is not None else (i, j)
        slot_vertex = {0: u, 1: v}
        twist = {}
        s = (i, j) if (i, j) in delta else ((j, i) if (j, i) in delta else None)
        if s is not None and delta[s] != CoefficientElement(0, 0):
            twist[0 if slot_vertex[0] == s[0] else 1] = delta[s]
        prefix = f"{_ident(u)}_{_ident(v)}"
        parts.append((pair_template(ptype, a.q, flavor, strategy), slot_vertex, twist, prefix))
    meta = {"flavor": flavor, "q": a.q, "strategy": strategy,
            "diagram": d.name, "r": a.r,
            "delta": ";".join(f"{i}-{j}:frob={x.frobenius_exponent},tau={x.tau_bit}"
                              for (i, j), x in zip(a.excess, a.delta))}
    return _instantiate(parts, _vertex_list(verts, a.q, flavor), meta)


# -- Weyl words, parsing and extra relators ------------------------------------------

def weyl_words(p: Presentation, a: int = 1) -> dict[str, Word]:
    """n_v(a) = x_v^+(a) x_v^-(-a^-1) x_v^+(a) for each vertex."""
    if p.metadata.get("flavor", CT) != CT:
        raise PresentationError("Weyl words need Curtis-Tits root generators")
    q = p.q
    if q is None:
        raise PresentationError("presentation carries no field size")
    F = go.GF(q)
    if a not in F.units:
        raise PresentationError(f"{a} is not a nonzero element of GF({q})")
    b = F.neg(F.inv(a))
    out = {}
    for v in p.vertices:
        try:
            xp = p.vertex_symbols[(v, "+", a)] + 1
            xm = p.vertex_symbols[(v, "-", b)] + 1
        except KeyError:
            raise PresentationError(f"missing root generators for vertex {v}") from None
        out[v] = (xp, xm, xp)
    return out


_TOKEN = re.compile(r"\s*(?:(\()|(\))|(\^\s*[-+]?\d+)|(\*)|([A-Za-z_][A-Za-z0-9_]*|1))")


def parse_word(p: Presentation, text: str) -> Word:
    """Parse ``name``, ``name^k``, ``( .. )^k`` products separated by ``*``/spaces.

    Extra atoms: ``n<v>`` is the Weyl word n_v(1); ``x<v>p`` / ``x<v>m``
    abbreviate ``x<v>p1`` / ``x<v>m1``; ``1`` is the identity.
    """
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PresentationError(f"cannot parse word at {text[pos:]!r}")
        pos = m.end()
        if m.group(1):
            toks.append(("(", None))
        elif m.group(2):
            toks.append((")", None))
        elif m.group(3):
            toks.append(("^", int(m.group(3)[1:].strip())))
        elif m.group(4):
            continue
        else:
            toks.append(("name", m.group(5)))
    idx = p.index
    weyl = None

    def atom(name):
        nonlocal weyl
        if name == "1":
            return ()
        if name in idx:
            return (idx[name] + 1,)
        mm = re.fullmatch(r"n(.+)", name)
        if mm:
            if weyl is None:
                weyl = {_ident(v): w for v, w in weyl_words(p).items()}
            if mm.group(1) in weyl:
                return weyl[mm.group(1)]
        mm = re.fullmatch(r"x(.+)([pm])", name)
        if mm and f"{name}1" in idx:
            return (idx[f"{name}1"] + 1,)
        raise PresentationError(f"unknown symbol {name!r}")

    k = 0

    def parse_seq(depth):
        nonlocal k
        out: list[int] = []
        while k < len(toks):
            kind, val = toks[k]
            if kind == ")":
                if depth == 0:
                    raise PresentationError("unbalanced ')'")
                k += 1
                return tuple(out)
            if kind == "(":
                k += 1
                piece = parse_seq(depth + 1)
            elif kind == "name":
                k += 1
                piece = atom(val)
            else:
                raise PresentationError("exponent without a base")
            while k < len(toks) and toks[k][0] == "^":
                piece = power(piece, toks[k][1])
                k += 1
            out.extend(piece)
        if depth:
            raise PresentationError("unbalanced '('")
        return tuple(out)

    return free_reduce(parse_seq(0))


def add_relators(p: Presentation, words: Iterable) -> Presentation:
    """Append relators (strings in the word grammar or letter tuples)."""
    extra = []
    for w in words:
        letters = parse_word(p, w) if isinstance(w, str) else free_reduce(w)
        if not letters:
            continue
        extra.append(tuple(letters))
    if not extra:
        return p
    meta = dict(p.metadata)
    meta["added_relators"] = meta.get("added_relators", 0) + len(extra)
    return replace(p, relators=p.relators + tuple(extra), metadata=meta)


def family_relator(k: int) -> str:
    """(n_1 n_2 ... n_{k-1} n_k n_{k-1}^-1 ... n_2^-1)^2 in the word grammar."""
    if k < 2:
        raise PresentationError("family relator needs k >= 2")
    fwd = [f"n{i}" for i in range(1, k + 1)]
    back = [f"n{i}^-1" for i in range(k - 1, 1, -1)]
    return "(" + "*".join(fwd + back) + ")^2"


# -- abelianization ---------------------------------------------------------------------

@dataclass(frozen=True)
class AbelianInvariants:
    factors: tuple[int, ...]

    @property
    def trivial(self) -> bool:
        return not self.factors

    def __str__(self):
        if not self.factors:
            return "trivial"
        return " x ".join("Z" if d == 0 else f"Z/{d}" for d in self.factors)


def _row_reduce(rows: list[list[int]], ncols: int) -> list[list[int]]:
    """Integer row echelon form (Euclidean row operations) without zero rows."""
    rows = [r[:] for r in rows if any(r)]
    out = []
    col = 0
    while rows and col < ncols:
        piv = [r for r in rows if r[col]]
        if not piv:
            col += 1
            continue
        rest = [r for r in rows if not r[col]]
        while len(piv) > 1:
            piv.sort(key=lambda r: abs(r[col]))
            base = piv[0]
            nxt = [base]
            for r in piv[1:]:
                f = r[col] // base[col]
                r2 = [x - f * y for x, y in zip(r, base)]
                (nxt if r2[col] else rest).append(r2)
            piv = nxt
        out.append(piv[0])
        rows = [r for r in rest if any(r)]
        col += 1
    return out


def abelianization(p: Presentation) -> AbelianInvariants:
    """Invariant factors of G/[G,G] from the exponent-sum matrix (0 = free Z)."""
    n = len(p.generators)
    if n == 0:
        return AbelianInvariants(())
    rows = []
    seen = set()
    for r in p.relators:
        row = [0] * n
        for x in r:
            row[abs(x) - 1] += 1 if x > 0 else -1
        t = tuple(row)
        if any(t) and t not in seen:
            seen.add(t)
            rows.append(row)
    red = _row_reduce(rows, n)
    if not red:
        return AbelianInvariants(tuple([0] * n))
    facs = [int(abs(d)) for d in invariant_factors(Matrix(red), domain=ZZ)]
    facs = [d for d in facs if d != 1 and d != 0]
    facs.sort()
    free = n - len(red)
    return AbelianInvariants(tuple(facs) + (0,) * free)


# -- export / import ------------------------------------------------------------------

def _meta_lines(p: Presentation) -> list[str]:
    return [f"# {k}: {p.metadata[k]}" for k in sorted(p.metadata) if p.metadata[k] != ""]


def export_neutral(p: Presentation) -> str:
    lines = _meta_lines(p)
    lines += [f"gen {g}" for g in p.generators]
    lines += [f"rel {p.word_text(r)}" for r in p.relators]
    return "\n".join(lines) + "\n"


def _gap_word(p: Presentation, w: Sequence[int]) -> str:
    parts = []
    k = 0
    while k < len(w):
        x = w[k]
        run = 1
        while k + run < len(w) and w[k + run] == x:
            run += 1
        e = run if x > 0 else -run
        name = p.generators[abs(x) - 1]
        parts.append(name if e == 1 else f"{name}^{e}")
        k += run
    return "*".join(parts)


def export_gap(p: Presentation) -> str:
    """GAP input: free group, generator bindings, relator list, quotient."""
    lines = _meta_lines(p)
    names = ", ".join(f'"{g}"' for g in p.generators)
    lines.append(f"F := FreeGroup({names});;")
    for k, g in enumerate(p.generators, start=1):
        lines.append(f"{g} := F.{k};;")
    if p.relators:
        lines.append("rels := [")
        body = [f"  {_gap_word(p, r)}" for r in p.relators]
        lines.append(",\n".join(body))
        lines.append("];;")
    else:
        lines.append("rels := [];;")
    lines.append("G := F/rels;;")
    return "\n".join(lines) + "\n"


def export(p: Presentation, fmt: str = "neutral") -> str:
    if fmt == "neutral":
        return export_neutral(p)
    if fmt == "gap":
        return export_gap(p)
    raise PresentationError(f"unknown export format {fmt!r}")


def _coerce(v: str):
    return int(v) if re.fullmatch(r"-?\d+", v) else v


def parse_neutral(text: str) -> Presentation:
    """Inverse of :func:`export_neutral` (metadata comments are restored)."""
    gens, rel_texts, meta = [], [], {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.match(r"#\s*([A-Za-z_]+):\s*(.*)$", line)
            if m:
                meta[m.group(1)] = _coerce(m.group(2))
            continue
        kw, _, rest = line.partition(" ")
        if kw == "gen":
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", rest.strip()):
                raise PresentationError(f"line {lineno}: bad generator name {rest!r}")
            gens.append(rest.strip())
        elif kw == "rel":
            rel_texts.append((lineno, rest.strip()))
        else:
            raise PresentationError(f"line {lineno}: unknown keyword {kw!r}")
    vsyms = {}
    for k, g in enumerate(gens):
        m = re.fullmatch(r"x(.+?)([pm])(\d+)", g)
        if m:
            vsyms[(m.group(1), "+" if m.group(2) == "p" else "-", int(m.group(3)))] = k
            continue
        m = re.fullmatch(r"x(.+?)u(\d+)", g)
        if m:
            vsyms[(m.group(1), "u", int(m.group(2)))] = k
    p = Presentation(tuple(gens), (), meta, vsyms)
    rels = []
    for lineno, t in rel_texts:
        try:
            w = parse_word(p, t)
        except PresentationError as exc:
            raise PresentationError(f"line {lineno}: {exc}") from None
        if not w:
            raise PresentationError(f"line {lineno}: empty relator")
        rels.append(w)
    return replace(p, relators=tuple(rels))
