"""Todd-Coxeter coset enumeration (HLT with lookahead, and Felsch).

Words are tuples of nonzero integers: ``k`` is generator ``k-1`` and ``-k``
its inverse. Internally every letter maps to a table column; a generator with
a relator ``g^2`` shares one column with its inverse, which removes that
relator and halves its columns.

Cosets are numbered from 1; entry 0 means undefined. Coincidences are
resolved with union-find (path compression), merging the larger number into
the smaller and draining the queue completely before any new definition.
"""
from __future__ import annotations

import csv
import io
import os
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

DEFAULT_MAX_COSETS = 5 * 10 ** 6
ID_LIMIT = 2 ** 31 - 1


class EnumerationOverflow(RuntimeError):
    """The coset table reached ``max_cosets`` before closing."""

    def __init__(self, max_cosets: int, log: "RunLog"):
        super().__init__(f"coset enumeration exceeded max_cosets={max_cosets}")
        self.max_cosets = max_cosets
        self.log = log


def default_max_cosets() -> int:
    env = os.environ.get("AMALGAM_MAX_COSETS")
    return int(env) if env else DEFAULT_MAX_COSETS


@dataclass
class RunLog:
    strategy: str = ""
    definitions: int = 0
    coincidences: int = 0
    deductions: int = 0
    lookaheads: int = 0
    max_live: int = 0
    total_defined: int = 0
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class CosetTable:
    """A completed, standardised coset table.

    ``table[c][col]`` for ``c`` in ``1..index``; row 0 is a dummy. ``columns``
    maps each generator index to its ``(forward, inverse)`` column pair.
    """
    generators: tuple[str, ...]
    columns: tuple[tuple[int, int], ...]
    table: list[list[int]]
    index: int
    status: str = "complete"
    log: RunLog = field(default_factory=RunLog)

    def image(self, c: int, letter: int) -> int:
        g = abs(letter) - 1
        col = self.columns[g][0 if letter > 0 else 1]
        return self.table[c][col]

    def trace(self, c: int, word: Sequence[int]) -> int:
        for x in word:
            c = self.image(c, x)
            if c == 0:
                return 0
        return c

    def to_csv(self) -> str:
        """Rows ``coset,generator,image`` in coset then generator order."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["coset", "generator", "image"])
        for c in range(1, self.index + 1):
            for g, name in enumerate(self.generators):
                w.writerow([c, name, self.table[c][self.columns[g][0]]])
        return buf.getvalue()


def _column_layout(ngens: int, relators: Sequence[Sequence[int]]):
    involutory = set()
    for r in relators:
        if len(r) == 2 and r[0] == r[1]:
            involutory.add(abs(r[0]) - 1)
    cols = []
    n = 0
    for g in range(ngens):
        if g in involutory:
            cols.append((n, n))
            n += 1
        else:
            cols.append((n, n + 1))
            n += 2
    inv = [0] * n
    for a, b in cols:
        inv[a] = b
        inv[b] = a
    return tuple(cols), inv, n, involutory


def _to_cols(word: Sequence[int], cols) -> list[int]:
    out = []
    for x in word:
        if x == 0 or abs(x) > len(cols):
            raise ValueError(f"letter {x} out of range")
        out.append(cols[abs(x) - 1][0 if x > 0 else 1])
    return out


def free_reduce_cols(w: list[int], inv: list[int]) -> list[int]:
    out: list[int] = []
    for c in w:
        if out and out[-1] == inv[c]:
            out.pop()
        else:
            out.append(c)
    # cyclic reduction
    while len(out) > 1 and out[0] == inv[out[-1]]:
        out = out[1:-1]
    return out


class _Enumerator:
    def __init__(self, ngens, relators, subgroup, max_cosets, lookahead=True):
        if max_cosets < 1:
            raise ValueError("max_cosets must be >= 1")
        if max_cosets >= ID_LIMIT:
            raise ValueError("max_cosets does not fit 32-bit coset ids")
        self.cols, self.inv, self.ncols, self.involutory = _column_layout(ngens, relators)
        rels = []
        seen = set()
        for r in relators:
            if len(r) == 2 and r[0] == r[1] and abs(r[0]) - 1 in self.involutory:
                continue
            w = free_reduce_cols(_to_cols(r, self.cols), self.inv)
            if w and tuple(w) not in seen:
                seen.add(tuple(w))
                rels.append(w)
        self.rels = rels
        self.subgroup = [free_reduce_cols(_to_cols(h, self.cols), self.inv) for h in subgroup]
        self.max = max_cosets
        self.use_lookahead = lookahead
        n = self.ncols
        self.table = [[0] * n, [0] * n]
        self.p = [0, 1]           # union-find parent; p[c] == c iff live
        self.nxt = [0, 0]         # live list, coset 1 first
        self.prv = [0, 0]
        self.last = 1
        self.nlive = 1
        self.queue: list[int] = []
        self.deductions: list[tuple[int, int]] = []
        self.track_deductions = False
        self.log = RunLog()
        self.log.total_defined = 1
        self.log.max_live = 1

    # -- union-find --------------------------------------------------------
    def rep(self, c: int) -> int:
        p = self.p
        r = c
        while p[r] != r:
            r = p[r]
        while p[c] != r:
            p[c], c = r, p[c]
        return r

    def merge(self, a: int, b: int):
        a, b = self.rep(a), self.rep(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        self.p[b] = a
        self.queue.append(b)
        self.log.coincidences += 1
        # unlink b from the live list
        pv, nx = self.prv[b], self.nxt[b]
        self.nxt[pv] = nx
        if nx:
            self.prv[nx] = pv
        else:
            self.last = pv
        self.nlive -= 1

    def coincidence(self, a: int, b: int):
        self.merge(a, b)
        T, inv, ncols = self.table, self.inv, self.ncols
        i = 0
        q = self.queue
        while i < len(q):
            e = q[i]
            i += 1
            row = T[e]
            for x in range(ncols):
                f = row[x]
                if not f:
                    continue
                ix = inv[x]
                if T[f][ix] == e:
                    T[f][ix] = 0
                e1, f1 = self.rep(e), self.rep(f)
                t = T[e1][x]
                if t:
                    self.merge(f1, t)
                    continue
                t = T[f1][ix]
                if t:
                    self.merge(e1, t)
                    continue
                T[e1][x] = f1
                T[f1][ix] = e1
                if self.track_deductions:
                    self.deductions.append((e1, x))
        self.queue = []

    # -- definitions -------------------------------------------------------
    def new_coset(self) -> int:
        if self.nlive >= self.max:
            raise EnumerationOverflow(self.max, self.log)
        c = len(self.table)
        self.table.append([0] * self.ncols)
        self.p.append(c)
        self.nxt.append(0)
        self.prv.append(self.last)
        self.nxt[self.last] = c
        self.last = c
        self.nlive += 1
        self.log.definitions += 1
        self.log.total_defined += 1
        if self.nlive > self.log.max_live:
            self.log.max_live = self.nlive
        return c

    def define(self, c: int, x: int) -> int:
        d = self.new_coset()
        self.table[c][x] = d
        self.table[d][self.inv[x]] = c
        if self.track_deductions:
            self.deductions.append((c, x))
        return d

    # -- scanning ----------------------------------------------------------
    def scan(self, c: int, w: list[int], fill: bool) -> bool:
        """Scan ``w`` at coset ``c``; fill gaps with new cosets if ``fill``.

        Returns False only when a coincidence occurred.
        """
        T, inv = self.table, self.inv
        f, b = c, c
        i, j = 0, len(w) - 1
        while True:
            while i <= j:
                nx = T[f][w[i]]
                if not nx:
                    break
                f = nx
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                    return False
                return True
            while j >= i:
                nx = T[b][inv[w[j]]]
                if not nx:
                    break
                b = nx
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return False
            if i == j:
                T[f][w[i]] = b
                T[b][inv[w[i]]] = f
                self.log.deductions += 1
                if self.track_deductions:
                    self.deductions.append((f, w[i]))
                return True
            if not fill:
                return True
            self.define(f, w[i])

    def lookahead(self):
        self.log.lookaheads += 1
        c = 1
        while c:
            for w in self.rels:
                if self.p[c] != c:
                    break
                self.scan(c, w, False)
            c = self.nxt[c] if self.p[c] == c else self._next_live_after(c)

    def _next_live_after(self, c: int) -> int:
        for d in range(c + 1, len(self.table)):
            if self.p[d] == d:
                return d
        return 0

    # -- strategies ----------------------------------------------------------
    def hlt(self):
        self.log.strategy = "hlt"
        for h in self.subgroup:
            self.scan(1, h, True)
        c = 1
        while c:
            if self.p[c] == c:
                for w in self.rels:
                    self._scan_fill_guarded(c, w)
                    if self.p[c] != c:
                        break
                if self.p[c] == c:
                    row = self.table[c]
                    for x in range(self.ncols):
                        if not row[x]:
                            self._define_guarded(c, x)
                            row = self.table[c]
                    if self.p[c] != c:
                        c = self._next_live_after(c)
                        continue
                    c = self.nxt[c]
                    continue
            c = self._next_live_after(c)

    def _scan_fill_guarded(self, c, w):
        while True:
            try:
                return self.scan(c, w, True)
            except EnumerationOverflow:
                if not self.use_lookahead:
                    raise
                before = self.nlive
                self.lookahead()
                if self.nlive >= before:
                    raise
                if self.p[c] != c:
                    return False

    def _define_guarded(self, c, x):
        try:
            self.define(c, x)
        except EnumerationOverflow:
            if not self.use_lookahead:
                raise
            before = self.nlive
            self.lookahead()
            if self.nlive >= before:
                raise
            if self.p[c] == c and not self.table[c][x]:
                self.define(c, x)

    def felsch(self):
        self.log.strategy = "felsch"
        self.track_deductions = True
        conj: list[list[list[int]]] = [[] for _ in range(self.ncols)]
        seen = set()
        for w in self.rels:
            for word in (w, [self.inv[x] for x in reversed(w)]):
                for k in range(len(word)):
                    r = word[k:] + word[:k]
                    if tuple(r) not in seen:
                        seen.add(tuple(r))
                        conj[r[0]].append(r)
        self.conj = conj
        for h in self.subgroup:
            self.scan(1, h, True)
            self.process_deductions()
        for w in self.rels:
            self.scan(1, w, False)
        self.process_deductions()
        c = 1
        while True:
            # first undefined entry in live order
            while c and (self.p[c] != c or all(self.table[c])):
                c = self.nxt[c] if self.p[c] == c else self._next_live_after(c)
            if not c:
                # closed: confirm relators everywhere (coincidence-safe)
                if self._full_check():
                    return
                c = 1
                continue
            x = self.table[c].index(0)
            self.define(c, x)
            self.process_deductions()

    def process_deductions(self):
        ded = self.deductions
        conj, p = self.conj, self.p
        while ded:
            c, x = ded.pop()
            if p[c] != c:
                continue
            for r in conj[x]:
                if p[c] != c:
                    break
                self.scan(c, r, False)
            y = self.table[c][x]
            if y and p[y] == y:
                ix = self.inv[x]
                for r in conj[ix]:
                    if p[y] != y:
                        break
                    self.scan(y, r, False)

    def _full_check(self) -> bool:
        clean = True
        c = 1
        while c:
            if self.p[c] == c:
                for w in self.rels:
                    if not self.scan(c, w, False):
                        clean = False
                        break
                    if self.p[c] != c:
                        break
                self.process_deductions()
            c = self.nxt[c] if self.p[c] == c else self._next_live_after(c)
        if not clean:
            return False
        return all(all(self.table[c]) for c in self._live())

    def _live(self):
        c = 1
        while c:
            yield c
            c = self.nxt[c]

    # -- output --------------------------------------------------------------
    def standardized(self) -> list[list[int]]:
        """Renumber live cosets in first-encounter (row, column) order."""
        new = {1: 1}
        order = [1]
        T, rep = self.table, self.rep
        k = 0
        while k < len(order):
            c = order[k]
            k += 1
            for x in range(self.ncols):
                d = rep(T[c][x])
                if d not in new:
                    new[d] = len(order) + 1
                    order.append(d)
        out = [[0] * self.ncols]
        for c in order:
            out.append([new[rep(d)] for d in T[c]])
        return out


def todd_coxeter(generators: Sequence[str], relators: Sequence[Sequence[int]],
                 subgroup: Iterable[Sequence[int]] = (), max_cosets: int | None = None,
                 strategy: str = "hlt", lookahead: bool = True) -> CosetTable:
    """Enumerate the cosets of ``<subgroup>`` in ``<generators | relators>``.

    Raises :class:`EnumerationOverflow` if more than ``max_cosets`` live cosets
    would be needed (default 5e6, overridable through ``AMALGAM_MAX_COSETS``).
    """
    if max_cosets is None:
        max_cosets = default_max_cosets()
    t0 = time.perf_counter()
    en = _Enumerator(len(generators), relators, list(subgroup), max_cosets, lookahead)
    if strategy == "hlt":
        en.hlt()
    elif strategy == "felsch":
        en.felsch()
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    table = en.standardized()
    en.log.seconds = time.perf_counter() - t0
    return CosetTable(tuple(generators), en.cols, table, len(table) - 1, "complete", en.log)


def enumerate_presentation(p, subgroup: Iterable = (), max_cosets: int | None = None,
                           strategy: str = "hlt") -> CosetTable:
    """Run :func:`todd_coxeter` on an object with ``generators``/``relators``.

    String subgroup words are parsed with ``p.parse_word``.
    """
    words = [p.parse_word(h) if isinstance(h, str) else tuple(h) for h in subgroup]
    return todd_coxeter(p.generators, p.relators, words, max_cosets, strategy)


def verify_table(t: CosetTable, relators: Sequence[Sequence[int]],
                 subgroup: Iterable[Sequence[int]] = ()) -> bool:
    """Independent replay: closure, inverse consistency, relators, subgroup."""
    if t.status != "complete":
        raise ValueError("table is not complete")
    n = t.index
    for c in range(1, n + 1):
        row = t.table[c]
        for a, b in t.columns:
            fa, fb = row[a], row[b]
            if not (1 <= fa <= n and 1 <= fb <= n):
                return False
            if t.table[fa][b] != c or t.table[fb][a] != c:
                return False
    for r in relators:
        for c in range(1, n + 1):
            if t.trace(c, r) != c:
                return False
    return all(t.trace(1, h) == 1 for h in subgroup)


def permutation_action(t: CosetTable) -> dict[str, tuple[int, ...]]:
    """Each generator as a permutation of ``0..index-1`` (coset c -> c-1)."""
    if t.status != "complete":
        raise ValueError("table is not complete")
    out = {}
    for g, name in enumerate(t.generators):
        col = t.columns[g][0]
        out[name] = tuple(t.table[c][col] - 1 for c in range(1, t.index + 1))
    return out


def perm_mul(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    """Apply ``a`` then ``b``."""
    return tuple(b[x] for x in a)


def perm_order(a: Sequence[int]) -> int:
    from math import lcm
    seen = [False] * len(a)
    out = 1
    for s in range(len(a)):
        if seen[s]:
            continue
        k, x = 0, s
        while not seen[x]:
            seen[x] = True
            x = a[x]
            k += 1
        out = lcm(out, k)
    return out


def word_permutation(perms: Sequence[Sequence[int]], word: Sequence[int]) -> tuple[int, ...]:
    n = len(perms[0]) if perms else 0
    cur = tuple(range(n))
    for x in word:
        p = perms[abs(x) - 1]
        if x < 0:
            inv = [0] * n
            for i, y in enumerate(p):
                inv[y] = i
            p = inv
        cur = perm_mul(cur, p)
    return cur
