"""Lie/Coxeter diagrams, finite-type recognition, spanning trees and double covers.

A diagram is a simple graph whose edges carry Coxeter labels. Non-adjacent
vertices implicitly have label 2. Vertices carry a field-degree ``e >= 1``.

The line-based file format::

    # comment
    v <id> [e=<int>]
    e <id> <id> m=<3|4|6> [type=A2|C2|G2]

For labels 4 and 6 the first listed endpoint is the short root.
"""
from __future__ import annotations

import itertools
import re
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

CRYSTALLOGRAPHIC_LABELS = (3, 4, 6)
_TAG_FOR_LABEL = {3: "A2", 4: "C2", 6: "G2"}
_LABEL_FOR_TAG = {"A2": 3, "C2": 4, "B2": 4, "G2": 6}


class DiagramError(ValueError):
    """Invalid diagram data (duplicate/self edge, bad label, bad topology)."""


class DiagramSyntaxError(DiagramError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@lru_cache(maxsize=1 << 16)
def vertex_key(v: str):
    """Natural sort key: ``"2" < "10"``, ``"3.0" < "3.1" < "10.0"``."""
    return tuple((0, int(c), "") if c.isdigit() else (1, 0, c)
                 for c in re.split(r"(\d+)", v) if c)


def edge_key(u: str, v: str):
    a, b = sorted((u, v), key=vertex_key)
    return (vertex_key(a), vertex_key(b))


@dataclass(frozen=True)
class Edge:
    u: str
    v: str
    m: int
    tag: str = ""

    @property
    def ends(self) -> frozenset:
        return frozenset((self.u, self.v))

    def sorted_ends(self) -> tuple[str, str]:
        return tuple(sorted((self.u, self.v), key=vertex_key))


@dataclass(frozen=True)
class Diagram:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    degrees: Mapping[str, int] = field(default_factory=dict)
    name: str = ""
    general_labels: bool = False

    def __post_init__(self):
        verts = tuple(sorted(self.vertices, key=vertex_key))
        if len(set(verts)) != len(verts):
            raise DiagramError("duplicate vertex identifier")
        vset = set(verts)
        seen = set()
        edges = []
        for e in self.edges:
            if e.u == e.v:
                raise DiagramError(f"self-edge at vertex {e.u}")
            if e.u not in vset or e.v not in vset:
                raise DiagramError(f"edge {e.u}-{e.v} uses an undeclared vertex")
            if (e.u, e.v) in seen:
                raise DiagramError(f"duplicate edge {e.u}-{e.v}")
            seen.add((e.u, e.v))
            seen.add((e.v, e.u))
            if self.general_labels:
                if not isinstance(e.m, int) or e.m < 3:
                    raise DiagramError(f"illegal label m={e.m} on {e.u}-{e.v}")
            elif e.m not in CRYSTALLOGRAPHIC_LABELS:
                raise DiagramError(f"illegal label m={e.m} on {e.u}-{e.v}")
            tag = e.tag or _TAG_FOR_LABEL.get(e.m, f"I2({e.m})")
            if tag in _LABEL_FOR_TAG and _LABEL_FOR_TAG[tag] != e.m:
                raise DiagramError(f"type tag {tag} inconsistent with m={e.m}")
            if tag == "B2":
                tag = "C2"
            edges.append(e if e.tag == tag else Edge(e.u, e.v, e.m, tag))
        pos = {v: k for k, v in enumerate(verts)}
        edges.sort(key=lambda e: (pos[e.u], pos[e.v]) if pos[e.u] < pos[e.v]
                   else (pos[e.v], pos[e.u]))
        degrees = {v: int(self.degrees.get(v, 1)) for v in verts}
        for v, e in degrees.items():
            if e < 1:
                raise DiagramError(f"field degree of {v} must be >= 1")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "degrees", degrees)
        lab = {}
        adj = {v: [] for v in verts}
        for e in edges:
            lab[e.u, e.v] = lab[e.v, e.u] = e
            adj[e.u].append(e.v)
            adj[e.v].append(e.u)
        for v in verts:
            adj[v].sort(key=pos.__getitem__)
        object.__setattr__(self, "_by_ends", lab)
        object.__setattr__(self, "_adj", adj)

    # -- queries -----------------------------------------------------------
    def edge(self, u: str, v: str) -> Edge | None:
        return self._by_ends.get((u, v))

    def label(self, u: str, v: str) -> int:
        """Coxeter label m(u, v); 1 on the diagonal, 2 for non-adjacent."""
        if u == v:
            return 1
        e = self.edge(u, v)
        return 2 if e is None else e.m

    def neighbors(self, v: str) -> list[str]:
        return list(self._adj[v])

    @property
    def rank(self) -> int:
        return len(self.vertices)

    def is_connected(self, subset: Iterable[str] | None = None) -> bool:
        verts = list(self.vertices if subset is None else subset)
        if not verts:
            return True
        vs = set(verts)
        seen = {verts[0]}
        todo = [verts[0]]
        while todo:
            x = todo.pop()
            for y in self.neighbors(x):
                if y in vs and y not in seen:
                    seen.add(y)
                    todo.append(y)
        return len(seen) == len(vs)

    def components(self, subset: Iterable[str] | None = None) -> list[list[str]]:
        verts = sorted(self.vertices if subset is None else subset, key=vertex_key)
        vs = set(verts)
        comps, seen = [], set()
        for v in verts:
            if v in seen:
                continue
            comp, todo = [], [v]
            seen.add(v)
            while todo:
                x = todo.pop()
                comp.append(x)
                for y in self.neighbors(x):
                    if y in vs and y not in seen:
                        seen.add(y)
                        todo.append(y)
            comps.append(sorted(comp, key=vertex_key))
        return comps

    def subdiagram(self, subset: Iterable[str]) -> "Diagram":
        vs = set(subset)
        return Diagram(tuple(vs), tuple(e for e in self.edges if e.ends <= vs),
                       {v: self.degrees[v] for v in vs}, self.name,
                       self.general_labels)

    def relabel(self, mapping: Mapping[str, str]) -> "Diagram":
        return Diagram(tuple(mapping[v] for v in self.vertices),
                       tuple(Edge(mapping[e.u], mapping[e.v], e.m, e.tag)
                             for e in self.edges),
                       {mapping[v]: k for v, k in self.degrees.items()},
                       self.name, self.general_labels)

    def is_automorphism(self, perm: Mapping[str, str]) -> bool:
        if sorted(perm) != sorted(self.vertices) or sorted(perm.values()) != sorted(self.vertices):
            return False
        return all(self.label(perm[u], perm[v]) == self.label(u, v)
                   for u, v in itertools.combinations(self.vertices, 2))


# -- file format --------------------------------------------------------------

def _parse_int(tok: str, prefix: str, lineno: int, col: int) -> int:
    if not tok.startswith(prefix):
        raise DiagramSyntaxError(f"expected '{prefix}<int>', got {tok!r}", lineno, col)
    try:
        return int(tok[len(prefix):])
    except ValueError:
        raise DiagramSyntaxError(f"bad integer in {tok!r}", lineno, col) from None


def _tokens(line: str):
    for m in re.finditer(r"\S+", line):
        yield m.group(), m.start() + 1


def parse_diagram(text: str, general_labels: bool = False, name: str = "",
                  extra=None) -> Diagram:
    """Parse diagram-file text into a validated :class:`Diagram`.

    ``extra`` is an optional callback ``extra(keyword, tokens, lineno)`` that
    claims lines with unknown keywords (used by the descriptor format); it
    returns True if it consumed the line.
    """
    vertices: dict[str, int] = {}
    edges: list[Edge] = []
    seen_edges: set[frozenset] = set()
    declared: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = list(_tokens(line))
        if not toks:
            continue
        kw, col = toks[0]
        if kw == "v":
            if len(toks) not in (2, 3):
                raise DiagramSyntaxError("expected 'v <id> [e=<int>]'", lineno, col)
            vid = toks[1][0]
            if vid in declared:
                raise DiagramSyntaxError(f"duplicate vertex {vid}", lineno, toks[1][1])
            deg = 1
            if len(toks) == 3:
                deg = _parse_int(toks[2][0], "e=", lineno, toks[2][1])
                if deg < 1:
                    raise DiagramSyntaxError("field degree must be >= 1", lineno, toks[2][1])
            vertices[vid] = deg
            declared.add(vid)
        elif kw == "e":
            if len(toks) not in (4, 5):
                raise DiagramSyntaxError("expected 'e <id> <id> m=<int> [type=..]'",
                                         lineno, col)
            u, v = toks[1][0], toks[2][0]
            if u == v:
                raise DiagramSyntaxError(f"self-edge at vertex {u}", lineno, toks[2][1])
            m = _parse_int(toks[3][0], "m=", lineno, toks[3][1])
            if not general_labels and m not in CRYSTALLOGRAPHIC_LABELS:
                raise DiagramSyntaxError(f"illegal label m={m}", lineno, toks[3][1])
            if general_labels and m < 3:
                raise DiagramSyntaxError(f"illegal label m={m}", lineno, toks[3][1])
            tag = ""
            if len(toks) == 5:
                t, tcol = toks[4]
                if not t.startswith("type="):
                    raise DiagramSyntaxError(f"expected 'type=..', got {t!r}", lineno, tcol)
                tag = t[5:]
                if tag not in _LABEL_FOR_TAG:
                    raise DiagramSyntaxError(f"unknown type tag {tag!r}", lineno, tcol)
                if _LABEL_FOR_TAG[tag] != m:
                    raise DiagramSyntaxError(f"type tag {tag} inconsistent with m={m}",
                                             lineno, tcol)
            if frozenset((u, v)) in seen_edges:
                raise DiagramSyntaxError(f"duplicate edge {u}-{v}", lineno, col)
            seen_edges.add(frozenset((u, v)))
            vertices.setdefault(u, 1)
            vertices.setdefault(v, 1)
            edges.append(Edge(u, v, m, tag))
        elif extra is not None and extra(kw, toks, lineno):
            continue
        else:
            raise DiagramSyntaxError(f"unknown keyword {kw!r}", lineno, col)
    return Diagram(tuple(vertices), tuple(edges), vertices, name, general_labels)


def format_diagram(d: Diagram) -> str:
    lines = []
    for v in d.vertices:
        e = d.degrees[v]
        lines.append(f"v {v}" + (f" e={e}" if e != 1 else ""))
    for e in d.edges:
        lines.append(f"e {e.u} {e.v} m={e.m}")
    return "\n".join(lines) + "\n"


# -- finite type recognition --------------------------------------------------

_E_EXPONENTS = {6: [1, 4, 5, 7, 8, 11], 7: [1, 5, 7, 9, 11, 13, 17],
                8: [1, 7, 11, 13, 17, 19, 23, 29]}


def _component_type(d: Diagram, comp: Sequence[str]):
    """Name and exponents of a connected Coxeter graph, or None if infinite."""
    n = len(comp)
    cs = set(comp)
    edges = [e for e in d.edges if e.ends <= cs]
    if n == 1:
        return "A1", [1]
    if n == 2:
        m = edges[0].m
        name = {3: "A2", 4: "B2", 6: "G2"}.get(m, f"I2({m})")
        return name, [1, m - 1]
    if len(edges) != n - 1:
        return None
    deg = {v: 0 for v in comp}
    for e in edges:
        deg[e.u] += 1
        deg[e.v] += 1
    if max(deg.values()) > 3:
        return None
    heavy = [e for e in edges if e.m > 3]
    branch = [v for v in comp if deg[v] == 3]
    if len(branch) > 1:
        return None
    if branch:
        if heavy:
            return None
        c = branch[0]
        arms = []
        for start in d.neighbors(c):
            length, prev, cur = 1, c, start
            while True:
                nxt = [w for w in d.neighbors(cur) if w in cs and w != prev]
                if not nxt:
                    break
                prev, cur = cur, nxt[0]
                length += 1
            arms.append(length)
        a, b, cc = sorted(arms)
        if a == 1 and b == 1:
            return f"D{n}", list(range(1, 2 * n - 2, 2)) + [n - 1]
        if (a, b) == (1, 2) and cc in (2, 3, 4):
            return f"E{n}", list(_E_EXPONENTS[n])
        return None
    if not heavy:
        return f"A{n}", list(range(1, n + 1))
    if len(heavy) > 1:
        return None
    # order the path to locate the heavy edge
    end = next(v for v in comp if deg[v] == 1)
    path, prev = [end], None
    while len(path) < n:
        nxt = [w for w in d.neighbors(path[-1]) if w in cs and w != prev]
        prev = path[-1]
        path.append(nxt[0])
    h = heavy[0]
    idx = next(i for i in range(n - 1) if frozenset(path[i:i + 2]) == h.ends)
    at_end = idx in (0, n - 2)
    if h.m == 4:
        if at_end:
            return f"B{n}", list(range(1, 2 * n, 2))
        if n == 4:
            return "F4", [1, 5, 7, 11]
        return None
    if h.m == 5 and at_end and n == 3:
        return "H3", [1, 5, 9]
    if h.m == 5 and at_end and n == 4:
        return "H4", [1, 11, 19, 29]
    return None


def coxeter_components(d: Diagram, subset: Iterable[str] | None = None):
    """Decompose ``subset`` into irreducible finite types.

    Returns a list of ``(name, exponents)`` pairs, one per connected component,
    or None when some component has infinite Coxeter group. The empty subset
    gives ``[]``.
    """
    out = []
    for comp in d.components(subset):
        t = _component_type(d, comp)
        if t is None:
            return None
        out.append(t)
    return out


def finite_type_name(d: Diagram, subset: Iterable[str]) -> str:
    comps = coxeter_components(d, subset)
    if comps is None:
        return "infinite"
    if not comps:
        return "empty"
    return "x".join(sorted((name for name, _ in comps), key=_type_sort_key))


def _type_sort_key(name: str):
    m = re.match(r"([A-Z]+)(\d*)", name)
    return (m.group(1), int(m.group(2) or 0), name)


@dataclass(frozen=True)
class SubdiagramReport:
    three_spherical: bool
    offending_triples: tuple[tuple[str, ...], ...]
    finite_type_of: Mapping[tuple[str, ...], str]
    has_C2_2: bool


def classify_subdiagrams(d: Diagram, q: int) -> SubdiagramReport:
    """Classify every vertex subset of size <= 3 against the finite types."""
    types = {}
    offending = []
    for k in (1, 2, 3):
        for sub in itertools.combinations(d.vertices, k):
            name = finite_type_name(d, sub)
            types[sub] = name
            if k == 3 and name == "infinite":
                offending.append(sub)
    has_c22 = q == 2 and any(e.m == 4 for e in d.edges)
    return SubdiagramReport(not offending, tuple(offending), types, has_c22)


def girth(d: Diagram) -> float:
    """Length of a shortest cycle (inf for forests)."""
    best = float("inf")
    for root in d.vertices:
        dist = {root: 0}
        parent = {root: None}
        todo = deque([root])
        while todo:
            x = todo.popleft()
            for y in d.neighbors(x):
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    todo.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


# -- spanning tree and fundamental loops ------------------------------------

def canonical_cycle(cycle: Sequence[str]) -> tuple[str, ...]:
    """Rotate/reflect a cycle to start at its least vertex, smaller neighbour next."""
    cyc = list(cycle)
    i = min(range(len(cyc)), key=lambda k: vertex_key(cyc[k]))
    cyc = cyc[i:] + cyc[:i]
    if len(cyc) > 2 and vertex_key(cyc[-1]) < vertex_key(cyc[1]):
        cyc = [cyc[0]] + cyc[1:][::-1]
    return tuple(cyc)


@dataclass(frozen=True)
class TreeData:
    tree: tuple[tuple[str, str], ...]
    excess: tuple[tuple[str, str], ...]
    loops: tuple[tuple[str, ...], ...]
    r: int


def _tree_path(parent: Mapping[str, str | None], a: str, b: str) -> list[str]:
    anc_a = [a]
    while parent[anc_a[-1]] is not None:
        anc_a.append(parent[anc_a[-1]])
    pos = {v: i for i, v in enumerate(anc_a)}
    up_b = [b]
    while up_b[-1] not in pos:
        up_b.append(parent[up_b[-1]])
    meet = up_b[-1]
    return anc_a[:pos[meet] + 1] + up_b[:-1][::-1]


def spanning_tree_and_loops(d: Diagram) -> TreeData:
    """BFS spanning tree from the least vertex plus the fundamental loops.

    Excess edges are oriented ``(i_s, j_s)`` with ``i_s`` the lesser endpoint
    and sorted lexicographically. ``loops[s]`` is the cycle closed by
    ``excess[s]``, in canonical rotation.
    """
    if not d.vertices:
        raise DiagramError("empty diagram")
    if not d.is_connected():
        raise DiagramError("diagram is disconnected")
    root = d.vertices[0]
    parent: dict[str, str | None] = {root: None}
    tree = []
    todo = deque([root])
    while todo:
        x = todo.popleft()
        for y in d.neighbors(x):
            if y not in parent:
                parent[y] = x
                tree.append(tuple(sorted((x, y), key=vertex_key)))
                todo.append(y)
    tree_set = {frozenset(t) for t in tree}
    excess = sorted((e.sorted_ends() for e in d.edges if e.ends not in tree_set),
                    key=lambda p: edge_key(*p))
    loops = tuple(canonical_cycle(_tree_path(parent, i, j)) for i, j in excess)
    tree.sort(key=lambda p: edge_key(*p))
    return TreeData(tuple(tree), tuple(excess), loops,
                    len(d.edges) - len(d.vertices) + 1)


def tree_condition_violations(d: Diagram, td: TreeData | None = None) -> list[str]:
    """Check the Curtis-Tits spanning-tree conditions against the e-assignment.

    Each excess edge must be an A2 edge whose endpoints share a degree ``e_s``
    that is a power of 2, and every vertex on its loop must have degree
    ``e_s * 2**l`` for some ``l >= 0``. Returns human-readable violations.
    """
    td = td or spanning_tree_and_loops(d)
    bad = []
    for (i, j), loop in zip(td.excess, td.loops):
        e = d.edge(i, j)
        es = d.degrees[i]
        if e.m != 3:
            bad.append(f"excess edge {i}-{j} is not of type A2")
        if d.degrees[j] != es:
            bad.append(f"excess edge {i}-{j} joins degrees {es} and {d.degrees[j]}")
        if es & (es - 1):
            bad.append(f"excess edge {i}-{j} has degree {es}, not a power of 2")
        for v in loop:
            ratio, rem = divmod(d.degrees[v], es)
            if rem or ratio & (ratio - 1):
                bad.append(f"vertex {v} on loop of {i}-{j} has degree {d.degrees[v]}")
    return bad


# -- double covers -------------------------------------------------------------

def cover_name(v: str, sheet: int) -> str:
    return f"{v}.{sheet}"


@dataclass(frozen=True)
class CoverData:
    base: Diagram
    cover: Diagram
    projection: Mapping[str, str]
    deck: Mapping[str, str]
    omega_star: Mapping[tuple[str, str], int]

    def __post_init__(self):
        b, c, p, t = self.base, self.cover, self.projection, self.deck
        assert len(c.vertices) == 2 * len(b.vertices)
        assert len(c.edges) == 2 * len(b.edges)
        for v in c.vertices:
            assert t[t[v]] == v and t[v] != v
            assert p[t[v]] == p[v]
        for e in c.edges:
            assert frozenset((t[e.u], t[e.v])) != e.ends, "deck fixes an edge"
            assert c.edge(t[e.u], t[e.v]) is not None
        pre = {}
        for e in c.edges:
            pre.setdefault(frozenset((p[e.u], p[e.v])), []).append(e)
        assert all(len(pre.get(e.ends, ())) == 2 for e in b.edges)


def double_cover(d: Diagram, omega_star: Mapping[tuple[str, str], int],
                 allow_trivial: bool = False) -> CoverData:
    """Connected two-sheeted cover classified by the kernel of ``omega_star``.

    Tree edges lift within a sheet; excess edge ``s`` crosses sheets iff
    ``omega_star[s] == 1``. With ``allow_trivial`` an identically zero
    ``omega_star`` yields the disconnected cover (two copies of ``d``), in
    which every loop lifts to two disjoint loops.
    """
    td = spanning_tree_and_loops(d)
    omega = {}
    for s in td.excess:
        val = omega_star.get(s, omega_star.get(s[::-1]))
        if val not in (0, 1):
            raise DiagramError(f"omega_star undefined or not 0/1 on excess edge {s}")
        omega[s] = val
    if not any(omega.values()) and not allow_trivial:
        raise DiagramError("disconnected cover: omega_star is identically 0")
    if girth(d) <= 3:
        raise DiagramError("diagram has a circuit of length <= 3")
    tree_set = {frozenset(t) for t in td.tree}
    verts, edges, proj, deck, degrees = [], [], {}, {}, {}
    for v in d.vertices:
        for b in (0, 1):
            name = cover_name(v, b)
            verts.append(name)
            proj[name] = v
            deck[name] = cover_name(v, 1 - b)
            degrees[name] = d.degrees[v]
    for e in d.edges:
        cross = 0 if e.ends in tree_set else omega[e.sorted_ends()]
        for b in (0, 1):
            edges.append(Edge(cover_name(e.u, b), cover_name(e.v, b ^ cross), e.m, e.tag))
    cover = Diagram(tuple(verts), tuple(edges), degrees,
                    f"{d.name}~2" if d.name else "", d.general_labels)
    return CoverData(d, cover, proj, deck, omega)


@dataclass(frozen=True)
class LoopFiber:
    kind: str  # "two_disjoint_loops" or "single_double_loop"
    cycles: tuple[tuple[str, ...], ...]


def _lift_walk(c: CoverData, loop: Sequence[str], start: str) -> list[str]:
    walk = [start]
    seq = list(loop[1:]) + [loop[0]]
    for nxt in seq:
        cur = walk[-1]
        cands = [w for w in c.cover.neighbors(cur) if c.projection[w] == nxt]
        if len(cands) != 1:
            raise DiagramError("loop does not lift uniquely")
        walk.append(cands[0])
    return walk


def loop_fiber_type(c: CoverData, loop: Sequence[str],
                    omega_star_value: int | None = None) -> LoopFiber:
    """Materialise the preimage of a base cycle under the covering map."""
    loop = list(loop)
    n = len(loop)
    if n < 3 or len(set(loop)) != n:
        raise DiagramError("loop is not a simple cycle")
    for a, b in zip(loop, loop[1:] + loop[:1]):
        if c.base.edge(a, b) is None:
            raise DiagramError(f"loop uses non-edge {a}-{b}")
    start = cover_name(loop[0], 0)
    walk = _lift_walk(c, loop, start)
    if walk[-1] == start:
        kind = "two_disjoint_loops"
        other = _lift_walk(c, loop, cover_name(loop[0], 1))
        cycles = (tuple(walk[:-1]), tuple(other[:-1]))
    else:
        kind = "single_double_loop"
        second = _lift_walk(c, loop, walk[-1])
        assert second[-1] == start
        cycles = (tuple(walk[:-1] + second[:-1]),)
        assert len(cycles[0]) == 2 * n
    if omega_star_value is not None and (omega_star_value == 1) != (kind == "single_double_loop"):
        raise DiagramError("omega_star value disagrees with the cover's monodromy")
    return LoopFiber(kind, tuple(canonical_cycle(cy) for cy in cycles))
