"""Coxeter groups of crystallographic diagrams, computed exactly.

An element is stored as the integer matrix of its action on the root lattice
(column ``j`` is ``w(alpha_j)`` in simple-root coordinates). The action is
faithful because every ``w != 1`` sends some simple root to a negative root.
Lengths come from the descent criterion ``l(w s_i) < l(w) iff w(alpha_i) < 0``.

Words are tuples of generator indices ``0..n-1``; they serialise as
dot-separated 1-based indices (``"1.2.1"``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .diagram import Diagram, DiagramError

BALL_CAP = 10 ** 6

# (a_ij, a_ji) for each crystallographic label; the first endpoint is short.
_CARTAN_ENTRIES = {2: (0, 0), 3: (-1, -1), 4: (-1, -2), 6: (-1, -3)}


class BallCapExceeded(RuntimeError):
    pass


Word = tuple


def format_word(w: Sequence[int]) -> str:
    return ".".join(str(i + 1) for i in w) if w else "e"


def parse_word(text: str) -> Word:
    text = text.strip()
    if text in ("", "e"):
        return ()
    return tuple(int(t) - 1 for t in text.split("."))


@dataclass(frozen=True)
class CoxeterSystem:
    """Coxeter system with its generalised Cartan matrix.

    ``labels`` names the generators (diagram vertices, in diagram order).
    """
    labels: tuple[str, ...]
    cartan: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        A = self.cartan
        for i in range(n):
            if A[i][i] != 2:
                raise ValueError("Cartan diagonal must be 2")
            for j in range(n):
                if i != j:
                    if A[i][j] > 0:
                        raise ValueError("off-diagonal Cartan entries must be <= 0")
                    if A[i][j] * A[j][i] not in (0, 1, 2, 3):
                        raise ValueError("non-crystallographic Cartan pair")
                    if (A[i][j] == 0) != (A[j][i] == 0):
                        raise ValueError("Cartan zero pattern not symmetric")

    @classmethod
    def from_diagram(cls, d: Diagram) -> "CoxeterSystem":
        n = d.rank
        idx = {v: k for k, v in enumerate(d.vertices)}
        A = [[2 if i == j else 0 for j in range(n)] for i in range(n)]
        for e in d.edges:
            if e.m not in _CARTAN_ENTRIES:
                raise DiagramError(f"label m={e.m} is not crystallographic")
            i, j = idx[e.u], idx[e.v]
            A[i][j], A[j][i] = _CARTAN_ENTRIES[e.m]
        return cls(d.vertices, tuple(tuple(r) for r in A))

    @property
    def rank(self) -> int:
        return len(self.labels)

    def coxeter_label(self, i: int, j: int) -> int:
        if i == j:
            return 1
        return {0: 2, 1: 3, 2: 4, 3: 6}[self.cartan[i][j] * self.cartan[j][i]]

    # -- matrices ---------------------------------------------------------
    # A matrix is a tuple of columns; column j is w(alpha_j).
    def identity(self):
        n = self.rank
        return tuple(tuple(1 if r == c else 0 for r in range(n)) for c in range(n))

    def right_mul_gen(self, m, i: int):
        """Matrix of w s_i from that of w: column j becomes w(alpha_j) - a_ij w(alpha_i)."""
        ci = m[i]
        A = self.cartan[i]
        return tuple(tuple(x - A[j] * y for x, y in zip(col, ci)) if A[j] else col
                     for j, col in enumerate(m))

    def matrix(self, w: Sequence[int]):
        m = self.identity()
        for i in w:
            m = self.right_mul_gen(m, i)
        return m

    @staticmethod
    def is_negative(col) -> bool:
        return any(x < 0 for x in col)

    def column(self, m, i: int):
        return m[i]

    def right_descents(self, m) -> list[int]:
        return [i for i in range(self.rank) if self.is_negative(m[i])]

    # -- lengths and normal forms -----------------------------------------------
    def reduced_word_of_matrix(self, m) -> Word:
        """A reduced word for the element with matrix ``m`` (peeling right descents)."""
        out = []
        while True:
            ds = self.right_descents(m)
            if not ds:
                break
            i = ds[0]
            out.append(i)
            m = self.right_mul_gen(m, i)
        return tuple(reversed(out))

    def length(self, w: Sequence[int]) -> int:
        return len(self.reduced_word_of_matrix(self.matrix(w)))

    def is_reduced(self, w: Sequence[int]) -> bool:
        return self.length(w) == len(w)

    def normal_form(self, w: Sequence[int]) -> Word:
        """ShortLex-least reduced word: repeatedly strip the least left descent."""
        inv = self.matrix(tuple(reversed(w)))  # matrix of w^-1
        out = []
        while True:
            ds = self.right_descents(inv)  # right descents of w^-1 = left descents of w
            if not ds:
                break
            i = ds[0]
            out.append(i)
            inv = self.right_mul_gen(inv, i)
        return tuple(out)

    def multiply(self, u: Sequence[int], v: Sequence[int]) -> Word:
        return self.normal_form(tuple(u) + tuple(v))

    def inverse(self, w: Sequence[int]) -> Word:
        return self.normal_form(tuple(reversed(w)))

    def equal(self, u: Sequence[int], v: Sequence[int]) -> bool:
        return self.matrix(u) == self.matrix(v)

    # -- balls -----------------------------------------------------------------
    def enumerate_ball(self, radius: int, cap: int = BALL_CAP) -> dict[int, list[Word]]:
        """All elements of length <= radius, in ShortLex normal form.

        Level l+1 is generated from level l in ShortLex order by appending
        s_i on the right, so the first word reaching an element is its normal
        form.
        """
        if radius < 0:
            raise ValueError("radius must be >= 0")
        e = self.identity()
        seen = {e}
        levels = {0: [((), e)]}
        total = 1
        for l in range(radius):
            nxt = []
            for w, m in levels[l]:
                for i in range(self.rank):
                    if self.is_negative(self.column(m, i)):
                        continue
                    m2 = self.right_mul_gen(m, i)
                    if m2 in seen:
                        continue
                    seen.add(m2)
                    nxt.append((w + (i,), m2))
                    total += 1
                    if total > cap:
                        raise BallCapExceeded(f"ball exceeds cap {cap}")
            nxt.sort(key=lambda p: p[0])
            levels[l + 1] = nxt
            if not nxt:
                break
        return {l: [w for w, _ in lv] for l, lv in levels.items()}

    def ball_with_matrices(self, radius: int, cap: int = BALL_CAP):
        """Like :meth:`enumerate_ball` but keeps ``{matrix: word}``."""
        ball = self.enumerate_ball(radius, cap)
        return {self.matrix(w): w for lv in ball.values() for w in lv}

    def growth_counts(self, radius: int, cap: int = BALL_CAP) -> list[int]:
        ball = self.enumerate_ball(radius, cap)
        return [len(ball.get(l, [])) for l in range(radius + 1)]

    # -- diagram automorphisms ----------------------------------------------------
    def permutation_of(self, theta: Mapping[str, str]) -> tuple[int, ...]:
        idx = {v: k for k, v in enumerate(self.labels)}
        return tuple(idx[theta[v]] for v in self.labels)

    def is_diagram_automorphism(self, perm: Sequence[int]) -> bool:
        n = self.rank
        if sorted(perm) != list(range(n)):
            return False
        return all(self.cartan[perm[i]][perm[j]] == self.cartan[i][j]
                   for i in range(n) for j in range(n))


def apply_perm(perm: Sequence[int], w: Sequence[int]) -> Word:
    return tuple(perm[i] for i in w)


@dataclass(frozen=True)
class TwistedReport:
    inv: frozenset
    delta_image: frozenset
    equal_up_to_R: bool
    radius: int


def _check_theta(sys: CoxeterSystem, perm: Sequence[int]):
    if not sys.is_diagram_automorphism(perm):
        raise ValueError("theta is not a diagram automorphism")
    n = sys.rank
    for i in range(n):
        if perm[perm[i]] != i:
            raise ValueError("theta is not an involution")
        if perm[i] == i:
            raise ValueError("theta fixes a vertex")
        if sys.cartan[i][perm[i]] != 0:
            raise ValueError("theta fixes an edge")


def _theta_arg(sys: CoxeterSystem, theta) -> tuple[int, ...]:
    if isinstance(theta, Mapping):
        return sys.permutation_of(theta)
    return tuple(theta)


def twisted_involutions(sys: CoxeterSystem, theta, radius: int,
                        cap: int = BALL_CAP) -> TwistedReport:
    """Compare twisted involutions with the set {w (w^-1)^theta} on a ball.

    Both sets are restricted to elements of length <= radius, given as
    ShortLex normal forms.
    """
    perm = _theta_arg(sys, theta)
    _check_theta(sys, perm)
    ball = sys.enumerate_ball(radius, cap)
    words = [w for lv in ball.values() for w in lv]
    inv = set()
    for u in words:
        if sys.matrix(apply_perm(perm, u)) == sys.matrix(tuple(reversed(u))):
            inv.add(u)
    delta = set()
    for w in words:
        u = tuple(w) + apply_perm(perm, tuple(reversed(w)))
        nf = sys.normal_form(u)
        if len(nf) <= radius:
            delta.add(nf)
    return TwistedReport(frozenset(inv), frozenset(delta), inv == delta, radius)


def twisted_decomposition(sys: CoxeterSystem, theta, u: Sequence[int],
                          cap: int = BALL_CAP) -> Word:
    """Find w with u = w (w^-1)^theta and l(u) = 2 l(w).

    Greedy descent: if s_i is a left descent of u then s_i u s_theta(i) is
    again a twisted involution; when it is shorter by two, s_i is the next
    letter of w. Falls back to exhaustive search over the ball of radius
    l(u)/2 if the greedy step stalls.
    """
    perm = _theta_arg(sys, theta)
    _check_theta(sys, perm)
    u = sys.normal_form(u)
    target = sys.matrix(u)
    if sys.matrix(apply_perm(perm, u)) != sys.matrix(tuple(reversed(u))):
        raise ValueError("u is not a twisted involution")
    lu = len(u)
    if lu % 2:
        raise ValueError(f"twisted involution of odd length {lu}")
    w = []
    cur = u
    while cur:
        inv = sys.matrix(tuple(reversed(cur)))
        step = None
        for i in sys.right_descents(inv):
            nxt = sys.normal_form((i,) + cur + (perm[i],))
            if len(nxt) == len(cur) - 2:
                step = (i, nxt)
                break
        if step is None:
            break
        w.append(step[0])
        cur = step[1]
    if not cur:
        cand = tuple(w)
        if sys.matrix(cand + apply_perm(perm, tuple(reversed(cand)))) == target:
            return sys.normal_form(cand)
    ball = sys.enumerate_ball(lu // 2, cap)
    for wd in ball.get(lu // 2, []):
        if sys.matrix(wd + apply_perm(perm, tuple(reversed(wd)))) == target:
            return wd
    raise RuntimeError("no twisted decomposition found within the ball")
