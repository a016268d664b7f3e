"""Exact finite fields and small matrix groups.

This is the independent ground truth for the rest of the package: standard
pairs are realised as concrete matrix groups, the involutions tau
(transpose-inverse), sigma (entrywise x -> x**q) and theta = sigma o tau are
applied literally, and orders come from closure.

Field elements are ints ``0 <= x < q`` encoding the coefficient vector over
the prime field in base p (``x = sum c_i p**i``). Matrices are row-major
tuples of field elements.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import sympy

# Pinned defining polynomials, lowest degree coefficient first.
PINNED_POLYNOMIALS = {
    4: (1, 1, 1),        # x^2 + x + 1
    8: (1, 1, 0, 1),     # x^3 + x + 1
    9: (1, 0, 1),        # x^2 + 1
    16: (1, 1, 0, 0, 1),  # x^4 + x + 1
}

GROUP_CAP = 10 ** 5


class OracleError(ValueError):
    pass


class CapExceeded(OracleError):
    pass


def prime_power(q: int) -> tuple[int, int]:
    """Return ``(p, f)`` with ``q = p**f``; raise for non prime powers."""
    if q < 2:
        raise OracleError(f"{q} is not a prime power")
    fac = sympy.factorint(q)
    if len(fac) != 1:
        raise OracleError(f"{q} is not a prime power")
    (p, f), = fac.items()
    return int(p), int(f)


def _poly_irreducible(coeffs, p):
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed(coeffs)), x, modulus=p)
    return poly.is_irreducible


@lru_cache(maxsize=None)
def GF(q: int) -> "Field":
    return Field(q)


class Field:
    """The field with q elements, with dense addition/multiplication tables."""

    def __init__(self, q: int):
        p, f = prime_power(q)
        self.q, self.p, self.f = q, p, f
        if f == 1:
            self.modulus = (0, 1)
        elif q in PINNED_POLYNOMIALS:
            self.modulus = PINNED_POLYNOMIALS[q]
        else:
            # lexicographically least monic irreducible
            for tail in itertools.product(range(p), repeat=f):
                cand = tuple(tail) + (1,)
                if cand[0] and _poly_irreducible(cand, p):
                    self.modulus = cand
                    break
        self._build_tables()

    def coeffs(self, x: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.f):
            x, c = divmod(x, self.p)
            out.append(c)
        return tuple(out)

    def from_coeffs(self, cs) -> int:
        return sum(c * self.p ** i for i, c in enumerate(cs))

    def _build_tables(self):
        q, p, f = self.q, self.p, self.f
        vecs = [self.coeffs(x) for x in range(q)]
        self.add_t = [[self.from_coeffs([(a + b) % p for a, b in zip(vecs[x], vecs[y])])
                       for y in range(q)] for x in range(q)]
        self.neg_t = [self.from_coeffs([(-a) % p for a in vecs[x]]) for x in range(q)]
        mod = self.modulus

        def polymul(a, b):
            prod = [0] * (2 * f - 1)
            for i, ai in enumerate(a):
                if ai:
                    for j, bj in enumerate(b):
                        prod[i + j] = (prod[i + j] + ai * bj) % p
            for k in range(len(prod) - 1, f - 1, -1):
                c = prod[k]
                if c:
                    for i in range(f + 1):
                        prod[k - f + i] = (prod[k - f + i] - c * mod[i]) % p
            return prod[:f]

        if f == 1:
            self.mul_t = [[(x * y) % p for y in range(q)] for x in range(q)]
        else:
            self.mul_t = [[self.from_coeffs(polymul(vecs[x], vecs[y])) for y in range(q)]
                          for x in range(q)]
        self.inv_t = [0] * q
        for x in range(1, q):
            for y in range(1, q):
                if self.mul_t[x][y] == 1:
                    self.inv_t[x] = y
                    break
        self.frob_t = [self.power(x, p) for x in range(q)]

    def add(self, x, y):
        return self.add_t[x][y]

    def sub(self, x, y):
        return self.add_t[x][self.neg_t[y]]

    def mul(self, x, y):
        return self.mul_t[x][y]

    def neg(self, x):
        return self.neg_t[x]

    def inv(self, x):
        if x == 0:
            raise ZeroDivisionError("inverse of 0")
        return self.inv_t[x]

    def power(self, x, k):
        r = 1
        for _ in range(k):
            r = self.mul_t[r][x]
        return r

    def frobenius(self, x, k=1):
        """Apply ``x -> x**p`` k times (k taken mod f)."""
        for _ in range(k % self.f):
            x = self.frob_t[x]
        return x

    @property
    def elements(self):
        return range(self.q)

    @property
    def units(self):
        return range(1, self.q)

    def __repr__(self):
        return f"GF({self.q})"


# -- matrices -------------------------------------------------------------------

def identity(n: int) -> tuple:
    return tuple(1 if i == j else 0 for i in range(n) for j in range(n))


def mat_dim(m) -> int:
    return int(round(len(m) ** 0.5))


def mat_mul(F: Field, a, b):
    n = mat_dim(a)
    mul, add = F.mul_t, F.add_t
    out = []
    for i in range(n):
        row = a[i * n:(i + 1) * n]
        for j in range(n):
            s = 0
            for k in range(n):
                x = row[k]
                if x:
                    y = b[k * n + j]
                    if y:
                        s = add[s][mul[x][y]]
            out.append(s)
    return tuple(out)


def transpose(m):
    n = mat_dim(m)
    return tuple(m[j * n + i] for i in range(n) for j in range(n))


def det(F: Field, m):
    n = mat_dim(m)
    if n == 1:
        return m[0]
    total = 0
    for j in range(n):
        a = m[j]
        if not a:
            continue
        minor = tuple(m[r * n + c] for r in range(1, n) for c in range(n) if c != j)
        term = F.mul(a, det(F, minor))
        total = F.add(total, term if j % 2 == 0 else F.neg(term))
    return total


def mat_inv(F: Field, m):
    """Gauss-Jordan inverse."""
    n = mat_dim(m)
    rows = [list(m[i * n:(i + 1) * n]) + [1 if i == j else 0 for j in range(n)]
            for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col]), None)
        if piv is None:
            raise OracleError("singular matrix")
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = F.inv(rows[col][col])
        rows[col] = [F.mul(inv, x) for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                c = rows[r][col]
                rows[r] = [F.sub(x, F.mul(c, y)) for x, y in zip(rows[r], rows[col])]
    return tuple(x for r in rows for x in r[n:])


def elementary(F: Field, n: int, entries) -> tuple:
    """Identity plus the given ``{(i, j): value}`` entries."""
    m = list(identity(n))
    for (i, j), a in entries.items():
        m[i * n + j] = F.add(m[i * n + j], a)
    return tuple(m)


def block_diag(*blocks):
    dims = [mat_dim(b) for b in blocks]
    n = sum(dims)
    m = [0] * (n * n)
    off = 0
    for b, d in zip(blocks, dims):
        for i in range(d):
            for j in range(d):
                m[(off + i) * n + off + j] = b[i * d + j]
        off += d
    return tuple(m)


def embed(m, n: int, positions) -> tuple:
    """Place a small matrix at the given row/column indices of I_n."""
    d = mat_dim(m)
    out = list(identity(n))
    for a, i in enumerate(positions):
        for b, j in enumerate(positions):
            out[i * n + j] = m[a * d + b]
    return tuple(out)


@dataclass(frozen=True)
class MatrixGroupElement:
    """A matrix with its field, for callers that want a typed handle."""
    field_order: int
    entries: tuple

    @property
    def field(self) -> Field:
        return GF(self.field_order)

    @property
    def n(self) -> int:
        return mat_dim(self.entries)

    @property
    def det(self) -> int:
        return det(self.field, self.entries)

    def __mul__(self, other):
        return MatrixGroupElement(self.field_order,
                                  mat_mul(self.field, self.entries, other.entries))

    def serialize(self) -> str:
        F = self.field
        rows = []
        n = self.n
        for i in range(n):
            rows.append(" ".join(",".join(map(str, F.coeffs(x)))
                                 for x in self.entries[i * n:(i + 1) * n]))
        return f"GF({F.q}) poly={','.join(map(str, F.modulus))}\n" + "\n".join(rows)


def generate_group(F: Field, generators, cap: int = GROUP_CAP) -> list:
    """BFS closure of the generators under right multiplication.

    Returns the elements in BFS order (identity first). Raises
    :class:`CapExceeded` if more than ``cap`` elements appear.
    """
    gens = list(generators)
    if not gens:
        raise OracleError("need at least one generator")
    e = identity(mat_dim(gens[0]))
    seen = {e}
    order = [e]
    todo = deque([e])
    while todo:
        x = todo.popleft()
        for g in gens:
            y = mat_mul(F, x, g)
            if y not in seen:
                seen.add(y)
                order.append(y)
                if len(order) > cap:
                    raise CapExceeded(f"group exceeds cap {cap}")
                todo.append(y)
    return order


def schreier_words(F: Field, generators, cap: int = GROUP_CAP):
    """Closure with a BFS word (list of generator indices) for every element."""
    gens = list(generators)
    e = identity(mat_dim(gens[0]))
    words = {e: ()}
    order = [e]
    todo = deque([e])
    while todo:
        x = todo.popleft()
        for k, g in enumerate(gens):
            y = mat_mul(F, x, g)
            if y not in words:
                words[y] = words[x] + (k,)
                order.append(y)
                if len(order) > cap:
                    raise CapExceeded(f"group exceeds cap {cap}")
                todo.append(y)
    return order, words


# -- involutions ---------------------------------------------------------------

def _square_root_order(q: int) -> int:
    p, f = prime_power(q)
    if f % 2:
        raise OracleError(f"GF({q}) is not a square field")
    return p ** (f // 2)


def tau(F: Field, m):
    """Transpose-inverse."""
    return mat_inv(F, transpose(m))


def sigma(F: Field, m):
    """Entrywise x -> x**r where F = GF(r**2)."""
    r = _square_root_order(F.q)
    k = prime_power(r)[1]
    return tuple(F.frobenius(x, k) for x in m)


def theta(F: Field, m):
    return sigma(F, tau(F, m))


def involution(kind: str, F: Field, m):
    if kind == "tau":
        return tau(F, m)
    if kind == "sigma":
        return sigma(F, m)
    if kind == "theta":
        return theta(F, m)
    if kind == "identity":
        return m
    raise OracleError(f"unknown involution {kind!r}")


def fixed_subgroup(F: Field, elements, kind: str) -> list:
    """Elements fixed by the involution; checked to be a subgroup."""
    elems = list(elements)
    eset = set(elems)
    fixed = [x for x in elems if involution(kind, F, x) == x]
    fset = set(fixed)
    # closure check on the input, then on the fixed set
    sample = elems[: min(len(elems), 64)]
    for a in sample:
        for b in sample:
            if mat_mul(F, a, b) not in eset:
                raise OracleError("input is not closed under multiplication")
    for a in fixed:
        for b in fixed[: min(len(fixed), 64)]:
            if mat_mul(F, a, b) not in fset:
                raise OracleError("fixed points do not form a subgroup")
    return fixed


# -- unitary groups built from orthonormal frames -------------------------------

def _conj_table(F: Field) -> list:
    r = _square_root_order(F.q)
    k = prime_power(r)[1]
    return [F.frobenius(x, k) for x in F.elements]


def hermitian(F: Field, u, v, conj=None) -> int:
    """Standard hermitian form sum u_k * v_k**r on GF(r**2)^n."""
    conj = conj or _conj_table(F)
    add, mul = F.add_t, F.mul_t
    s = 0
    for a, b in zip(u, v):
        s = add[s][mul[a][conj[b]]]
    return s


def special_unitary(Fsq: Field, n: int, extra=None) -> list:
    """SU_n(r) over GF(r**2) by enumerating orthonormal frames.

    ``extra`` is an optional predicate on the matrix (e.g. symplectic).
    Independent of any closure computation.
    """
    conj = _conj_table(Fsq)
    vecs = list(itertools.product(range(Fsq.q), repeat=n))
    unit = [v for v in vecs if hermitian(Fsq, v, v, conj) == 1]
    out = []

    def extend(rows, cands):
        if len(rows) == n:
            m = tuple(x for r in rows for x in r)
            if det(Fsq, m) == 1 and (extra is None or extra(m)):
                out.append(m)
            return
        for v in cands:
            rest = [w for w in cands if hermitian(Fsq, w, v, conj) == 0]
            extend(rows + [v], rest)

    extend([], unit)
    return sorted(out)


def su2_by_norm(Fsq: Field) -> list:
    """SU_2(r) as ``[[a, b], [-b^r, a^r]]`` with ``a^(r+1) + b^(r+1) = 1``."""
    r = _square_root_order(Fsq.q)
    k = prime_power(r)[1]
    out = []
    for a in Fsq.elements:
        for b in Fsq.elements:
            na = Fsq.mul(a, Fsq.frobenius(a, k))
            nb = Fsq.mul(b, Fsq.frobenius(b, k))
            if Fsq.add(na, nb) == 1:
                out.append((a, b, Fsq.neg(Fsq.frobenius(b, k)), Fsq.frobenius(a, k)))
    return sorted(out)


# -- order formulas (independent oracle) ----------------------------------------

def order_formula(kind: str, n: int, q: int) -> int:
    """Closed-form orders: SL_n, Sp_2m (n = 2m), SU_n over q."""
    if kind == "SL":
        out = q ** (n * (n - 1) // 2)
        for i in range(2, n + 1):
            out *= q ** i - 1
        return out
    if kind == "Sp":
        m = n // 2
        out = q ** (m * m)
        for i in range(1, m + 1):
            out *= q ** (2 * i) - 1
        return out
    if kind == "SU":
        out = q ** (n * (n - 1) // 2)
        for i in range(2, n + 1):
            out *= q ** i - (-1) ** i
        return out
    raise OracleError(f"unknown group family {kind!r}")


# -- standard pairs ---------------------------------------------------------------

# Symplectic form for Sp4 (antidiagonal), and the root elements of C2.
# Short simple root on vertex i, long simple root on vertex j.
SP4_FORM = (0, 0, 0, 1,
            0, 0, 1, 0,
            0, -1, 0, 0,
            -1, 0, 0, 0)


def _sp4_form(F: Field):
    return tuple(F.neg(1) if x == -1 else x for x in SP4_FORM)


def is_symplectic(F: Field, m) -> bool:
    J = _sp4_form(F)
    return mat_mul(F, mat_mul(F, transpose(m), J), m) == J


# Root data for the rank-2 types: positive roots as coefficient pairs over the
# simple roots (a_i, a_j), each with a matrix entry pattern {(row, col): sign}.
# x_root(t) = I + t * pattern; negative roots use the transposed pattern.
ROOT_PATTERNS = {
    "A2": {(1, 0): {(0, 1): 1}, (0, 1): {(1, 2): 1}, (1, 1): {(0, 2): 1}},
    "C2": {(1, 0): {(0, 1): 1, (2, 3): -1},
           (0, 1): {(1, 2): 1},
           (1, 1): {(0, 2): 1, (1, 3): 1},
           (2, 1): {(0, 3): 1}},
}
RANK2_DIM = {"A2": 3, "C2": 4, "A1xA1": 4}


def root_element(F: Field, pair_type: str, root, t: int):
    """Matrix of the root element x_root(t) in the rank-2 realisation.

    ``root`` is a signed coefficient pair, e.g. ``(1, 0)`` or ``(-1, -1)``.
    """
    if pair_type == "A1":
        return elementary(F, 2, {(0, 1) if root[0] > 0 else (1, 0): t})
    if pair_type == "A1xA1":
        a, b = root
        blk = (0, 1) if a else (2, 3)
        sgn = a or b
        pos = (blk[0], blk[1]) if sgn > 0 else (blk[1], blk[0])
        return elementary(F, 4, {pos: t})
    n = RANK2_DIM[pair_type]
    pos_root = tuple(abs(c) for c in root)
    pat = ROOT_PATTERNS[pair_type][pos_root]
    neg = root[0] < 0 or root[1] < 0
    entries = {}
    for (i, j), s in pat.items():
        key = (j, i) if neg else (i, j)
        entries[key] = t if s == 1 else F.neg(t)
    return elementary(F, n, entries)


def roots_of(pair_type: str):
    """All roots of a rank <= 2 type as signed coefficient pairs."""
    if pair_type == "A1":
        return [(1,), (-1,)]
    if pair_type == "A1xA1":
        pos = [(1, 0), (0, 1)]
    else:
        pos = list(ROOT_PATTERNS[pair_type])
    return pos + [tuple(-c for c in r) for r in pos]


@dataclass(frozen=True)
class StandardPair:
    """Concrete realisation of a standard pair.

    ``vertex_gens[v][eps]`` maps a field element a (nonzero) to the matrix of
    the root element x_v^eps(a) in the edge group (CT flavour). For the Phan
    flavour ``vertex_elements[v]`` lists the embedded SU_2 elements in the order
    of :func:`su2_by_norm`.
    """
    pair_type: str
    flavor: str
    q: int
    field_order: int
    group: tuple
    vertex_groups: tuple
    vertex_gens: tuple = ()
    vertex_elements: tuple = ()


def _sl2_root_gens(F: Field, pair_type: str, slot: int):
    out = {}
    for eps in (1, -1):
        root = [0, 0]
        root[slot] = eps
        if pair_type == "A1":
            root = [eps]
        out["+" if eps > 0 else "-"] = {a: root_element(F, pair_type, tuple(root), a)
                                        for a in F.units}
    return out


def _block_positions(pair_type: str, slot: int):
    if pair_type == "A1":
        return (0, 1)
    if pair_type == "A2":
        return (0, 1) if slot == 0 else (1, 2)
    if pair_type == "A1xA1":
        return (0, 1) if slot == 0 else (2, 3)
    raise OracleError(f"no block positions for {pair_type}")


def _ct_vertex_groups(pair_type: str, q: int, cap: int):
    F = GF(q)
    slots = 1 if pair_type == "A1" else 2
    gens = [_sl2_root_gens(F, pair_type, s) for s in range(slots)]
    vgroups = tuple(tuple(generate_group(F, [g[e][a] for e in "+-" for a in F.units], cap))
                    for g in gens)
    return gens, vgroups


def _transport_su2(Fsq: Field, su2, pair_type: str, slot: int) -> tuple:
    """Images of SU2 elements under the root-group embedding of vertex ``slot``.

    Each 2x2 matrix is written as a word in the SL2 root elements x(a), y(a);
    the word is then evaluated on the corresponding rank-2 root elements.
    """
    sl2 = [elementary(Fsq, 2, {pos: a}) for pos in ((0, 1), (1, 0)) for a in Fsq.units]
    root = [0, 0]
    big = []
    for sign in (1, -1):
        root = [0, 0]
        root[slot] = sign
        big.extend(root_element(Fsq, pair_type, tuple(root), a) for a in Fsq.units)
    _, words = schreier_words(Fsq, sl2)
    n = mat_dim(big[0])
    out = []
    for m in su2:
        x = identity(n)
        for k in words[m]:
            x = mat_mul(Fsq, x, big[k])
        out.append(x)
    return tuple(out)


@lru_cache(maxsize=None)
def standard_pair_realization(pair_type: str, q: int, flavor: str = "CT",
                              cap: int = GROUP_CAP) -> StandardPair:
    """Concrete matrix realisation of a standard pair (or a vertex group).

    CT: A1 -> SL2(q), A2 -> SL3(q), C2 -> Sp4(q), A1xA1 -> SL2(q) x SL2(q).
    Phan: unitary analogues over GF(q**2) with orthonormal standard basis.
    """
    if pair_type == "B2":
        pair_type = "C2"
    if pair_type not in ("A1", "A2", "C2", "A1xA1"):
        raise OracleError(f"unsupported pair type {pair_type}")
    slots = 1 if pair_type == "A1" else 2
    if flavor == "CT":
        F = GF(q)
        gens, vgroups = _ct_vertex_groups(pair_type, q, cap)
        allgens = [g[e][a] for g in gens for e in "+-" for a in F.units]
        group = tuple(generate_group(F, allgens, cap))
        return StandardPair(pair_type, "CT", q, q, group, vgroups, tuple(gens))
    if flavor != "Phan":
        raise OracleError(f"unknown flavor {flavor!r}")
    Fsq = GF(q * q)
    n = 2 if pair_type == "A1" else RANK2_DIM[pair_type]
    su2 = su2_by_norm(Fsq)
    if pair_type == "C2":
        # unitary analogue of Sp4: Sp4(q^2) intersected with U4(q)
        group = special_unitary(Fsq, 4, extra=lambda m: is_symplectic(Fsq, m))
        _, ct_vgroups = _ct_vertex_groups("C2", q * q, cap)
        vgroups = tuple(tuple(x for x in vg if theta(Fsq, x) == x) for vg in ct_vgroups)
        if len(group) > cap:
            raise CapExceeded(f"group exceeds cap {cap}")
        vel = tuple(_transport_su2(Fsq, su2, "C2", s) for s in range(2))
        for v, vg in zip(vel, vgroups):
            if sorted(v) != sorted(vg):
                raise OracleError("SU2 embedding disagrees with the theta-fixed vertex group")
        return StandardPair(pair_type, "Phan", q, q * q, tuple(group), vgroups,
                            vertex_elements=vel)
    if len(su2) ** slots > cap:
        raise CapExceeded(f"group exceeds cap {cap}")
    if pair_type == "A1xA1":
        vel = tuple(tuple(embed(m, 4, _block_positions(pair_type, s)) for m in su2)
                    for s in range(2))
        group = sorted(mat_mul(Fsq, a, b) for a in vel[0] for b in vel[1])
    elif pair_type == "A1":
        vel = (tuple(su2),)
        group = sorted(su2)
    else:
        vel = tuple(tuple(embed(m, 3, _block_positions(pair_type, s)) for m in su2)
                    for s in range(2))
        group = special_unitary(Fsq, 3)
    if len(group) > cap:
        raise CapExceeded(f"group exceeds cap {cap}")
    vgroups = tuple(tuple(sorted(v)) for v in vel)
    return StandardPair(pair_type, "Phan", q, q * q, tuple(group), vgroups,
                        vertex_elements=vel)
