"""Classification of Curtis-Tits and Phan amalgams by delta-vectors.

Relative to a fixed spanning tree, an amalgam over a diagram with cycle rank
``r`` is determined by one coefficient ``delta_s`` per excess edge
``{i_s, j_s}``, taken from the coefficient group ``C_{i_s}`` of the lesser
endpoint.

* Curtis-Tits: ``C_i = Aut(F_{q^e}) x <tau>`` with ``tau`` transpose-inverse;
  for ``q = p^f`` this is ``Z/(f e) x Z/2``.
* Phan: ``C_i = Aut(F_{q^2})`` which is ``Z/(2f)``; ``tau`` acts as the
  Frobenius ``sigma: x -> x^q``, so no separate tau bit exists.

Both groups are abelian (entrywise Frobenius commutes with transpose-inverse),
so holonomies along closed walks are sums.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .diagram import (CoverData, Diagram, DiagramError, DiagramSyntaxError,
                      classify_subdiagrams, format_diagram,
                      loop_fiber_type, parse_diagram, spanning_tree_and_loops,
                      tree_condition_violations)
from .grouporacle import OracleError, prime_power

CT = "CT"
PHAN = "Phan"
_FLAVOR_ALIASES = {"ct": CT, "curtistits": CT, "curtis-tits": CT, "phan": PHAN}


class ClassifyError(ValueError):
    """Gate failure or inconsistent descriptor data."""


def normalize_flavor(flavor: str) -> str:
    try:
        return _FLAVOR_ALIASES[flavor.lower()]
    except KeyError:
        raise ClassifyError(f"unknown flavor {flavor!r}") from None


@dataclass(frozen=True)
class CoefficientElement:
    """``phi^frobenius_exponent`` (``phi: x -> x^p``) composed with ``tau^tau_bit``."""
    frobenius_exponent: int
    tau_bit: int = 0

    def __str__(self):
        parts = []
        if self.frobenius_exponent:
            parts.append(f"frob^{self.frobenius_exponent}")
        if self.tau_bit:
            parts.append("tau")
        return "*".join(parts) or "id"


def _field_exponent(q: int) -> tuple[int, int]:
    try:
        return prime_power(q)
    except OracleError:
        raise ClassifyError(f"q={q} is not a prime power") from None


def coefficient_modulus(flavor: str, q: int, e: int = 1) -> int:
    """Order of the Frobenius part of the coefficient group."""
    _, f = _field_exponent(q)
    return f * e if normalize_flavor(flavor) == CT else 2 * f


@dataclass(frozen=True)
class CoefficientGroup:
    flavor: str
    q: int
    e: int
    modulus: int
    elements: tuple[CoefficientElement, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def reduce(self, x: CoefficientElement) -> CoefficientElement:
        return CoefficientElement(x.frobenius_exponent % self.modulus, x.tau_bit % 2)

    def mul(self, x: CoefficientElement, y: CoefficientElement) -> CoefficientElement:
        return self.reduce(CoefficientElement(x.frobenius_exponent + y.frobenius_exponent,
                                              x.tau_bit + y.tau_bit))

    def inv(self, x: CoefficientElement) -> CoefficientElement:
        return self.reduce(CoefficientElement(-x.frobenius_exponent, x.tau_bit))

    def power(self, x: CoefficientElement, k: int) -> CoefficientElement:
        return self.reduce(CoefficientElement(x.frobenius_exponent * k, x.tau_bit * k))


IDENTITY = CoefficientElement(0, 0)


def coefficient_group(flavor: str, q: int, e: int = 1) -> CoefficientGroup:
    """The coefficient group ``C_i`` for a vertex of field degree ``e``.

    Examples
    --------
    >>> coefficient_group("CT", 4).order
    4
    >>> coefficient_group("Phan", 2).order
    2
    """
    flavor = normalize_flavor(flavor)
    if e < 1:
        raise ClassifyError("field degree must be >= 1")
    mod = coefficient_modulus(flavor, q, e)
    taus = (0, 1) if flavor == CT else (0,)
    elems = tuple(CoefficientElement(k, t) for t in taus for k in range(mod))
    return CoefficientGroup(flavor, q, e, mod, elems)


@dataclass(frozen=True)
class AmalgamDescriptor:
    """A representative amalgam: diagram, tree data and the delta-vector."""
    flavor: str
    q: int
    diagram: Diagram
    tree: tuple[tuple[str, str], ...]
    excess: tuple[tuple[str, str], ...]
    delta: tuple[CoefficientElement, ...]
    check_gates: bool = field(default=True, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "flavor", normalize_flavor(self.flavor))
        if len(self.delta) != len(self.excess):
            raise ClassifyError(f"delta has {len(self.delta)} entries, "
                                f"cycle rank is {len(self.excess)}")
        for s, x in zip(self.excess, self.delta):
            grp = self.group_at(s)
            if x != grp.reduce(x) or (self.flavor == PHAN and x.tau_bit):
                raise ClassifyError(f"delta entry {x} on {s} outside {self.flavor} "
                                    f"coefficient group of order {grp.order}")
        if self.check_gates:
            gate_failures(self.diagram, self.flavor, self.q, raise_error=True)

    def group_at(self, s: tuple[str, str]) -> CoefficientGroup:
        return coefficient_group(self.flavor, self.q, self.diagram.degrees[s[0]])

    @property
    def r(self) -> int:
        return len(self.excess)

    def delta_map(self) -> dict[tuple[str, str], CoefficientElement]:
        return dict(zip(self.excess, self.delta))

    def with_delta(self, delta: Sequence[CoefficientElement]) -> "AmalgamDescriptor":
        return AmalgamDescriptor(self.flavor, self.q, self.diagram, self.tree,
                                 self.excess, tuple(delta), check_gates=False)


def gate_failures(d: Diagram, flavor: str, q: int, raise_error: bool = False) -> list[str]:
    """Reasons why ``d`` cannot carry an amalgam of this flavor (empty if fine)."""
    flavor = normalize_flavor(flavor)
    _field_exponent(q)
    bad = []
    rep = classify_subdiagrams(d, q)
    if not rep.three_spherical:
        bad.append("diagram is not 3-spherical: "
                   + ", ".join("-".join(t) for t in rep.offending_triples))
    if flavor == CT and rep.has_C2_2:
        bad.append("diagram has a C2(2) subdiagram")
    if not d.is_connected():
        bad.append("diagram is disconnected")
    elif flavor == CT and not bad:
        bad.extend(tree_condition_violations(d))
    if bad and raise_error:
        raise ClassifyError("; ".join(bad))
    return bad


def enumerate_delta_classes(d: Diagram, flavor: str, q: int) -> list[AmalgamDescriptor]:
    """One descriptor per element of the product of ``C_{i_s}`` over excess edges."""
    flavor = normalize_flavor(flavor)
    gate_failures(d, flavor, q, raise_error=True)
    td = spanning_tree_and_loops(d)
    groups = [coefficient_group(flavor, q, d.degrees[i]) for i, _ in td.excess]
    return [AmalgamDescriptor(flavor, q, d, td.tree, td.excess, combo, check_gates=False)
            for combo in itertools.product(*(g.elements for g in groups))]


def descriptor_for(d: Diagram, flavor: str, q: int,
                   delta: Mapping[tuple[str, str], CoefficientElement] | None = None
                   ) -> AmalgamDescriptor:
    """Descriptor on the canonical tree; unspecified excess edges get the identity."""
    td = spanning_tree_and_loops(d)
    delta = dict(delta or {})
    vec = []
    for s in td.excess:
        vec.append(delta.pop(s, delta.pop(s[::-1], IDENTITY)))
    if delta:
        raise ClassifyError(f"delta given on non-excess edges {sorted(delta)}")
    return AmalgamDescriptor(flavor, q, d, td.tree, td.excess, tuple(vec))


@dataclass(frozen=True)
class Orientability:
    orientable: bool
    omega_star: Mapping[tuple[str, str], int]


def orientability(a: AmalgamDescriptor) -> Orientability:
    """omega* sends each fundamental loop to the tau bit of its delta."""
    if a.flavor != CT:
        raise ClassifyError("orientability is defined for Curtis-Tits descriptors")
    omega = {s: x.tau_bit for s, x in zip(a.excess, a.delta)}
    return Orientability(not any(omega.values()), omega)


# -- Phan restriction ------------------------------------------------------------

def _square_root_field(q: int) -> tuple[int, int]:
    p, f = _field_exponent(q)
    if f % 2:
        raise ClassifyError(f"F_{q} is not a square field")
    return p ** (f // 2), f // 2


def phan_restriction(a: AmalgamDescriptor) -> AmalgamDescriptor:
    """Map a CT descriptor over F_{q^2} to its Phan image over F_q.

    Componentwise quotient by theta = sigma o tau: tau is identified with
    sigma = phi^f, so (k, t) maps to k + f t modulo 2f.
    """
    if a.flavor != CT:
        raise ClassifyError("phan_restriction needs a Curtis-Tits descriptor")
    q0, f0 = _square_root_field(a.q)
    for i, _ in a.excess:
        if a.diagram.degrees[i] != 1:
            raise ClassifyError("phan_restriction supports field degree 1 on loops only")
    mod = 2 * f0
    delta = tuple(CoefficientElement((x.frobenius_exponent + f0 * x.tau_bit) % mod)
                  for x in a.delta)
    return AmalgamDescriptor(PHAN, q0, a.diagram, a.tree, a.excess, delta,
                             check_gates=False)


def phan_fiber(p: AmalgamDescriptor) -> list[AmalgamDescriptor]:
    """All 2^r CT descriptors over F_{q^2} restricting to ``p``."""
    if p.flavor != PHAN:
        raise ClassifyError("phan_fiber needs a Phan descriptor")
    _, f0 = _field_exponent(p.q)
    mod = 2 * f0
    options = [(CoefficientElement(x.frobenius_exponent, 0),
                CoefficientElement((x.frobenius_exponent - f0) % mod, 1)) for x in p.delta]
    return [AmalgamDescriptor(CT, p.q ** 2, p.diagram, p.tree, p.excess, combo,
                              check_gates=False)
            for combo in itertools.product(*options)]


# -- lifting to the double cover ------------------------------------------------

def walk_holonomy(a: AmalgamDescriptor, walk: Sequence[str],
                  projection: Mapping[str, str] | None = None) -> CoefficientElement:
    """Sum of +-delta_s over traversals of excess edges along a closed walk.

    ``walk`` lists vertices cyclically (the last step returns to the start).
    Crossing ``{i_s, j_s}`` from ``i_s`` adds ``delta_s``; the reverse
    direction subtracts it. The result is reduced in the group of the walk's
    first excess edge (or the identity if none is crossed).
    """
    proj = projection or {}
    dm = a.delta_map()
    k = tau = 0
    grp = None
    for x, y in zip(walk, list(walk[1:]) + [walk[0]]):
        bx, by = proj.get(x, x), proj.get(y, y)
        if (bx, by) in dm:
            s, sign = (bx, by), 1
        elif (by, bx) in dm:
            s, sign = (by, bx), -1
        else:
            continue
        grp = grp or a.group_at(s)
        k += sign * dm[s].frobenius_exponent
        tau += dm[s].tau_bit
    if grp is None:
        return IDENTITY
    return grp.reduce(CoefficientElement(k, tau))


@dataclass(frozen=True)
class FiberHolonomy:
    base_edge: tuple[str, str]
    kind: str
    cycles: tuple[tuple[str, ...], ...]
    holonomy: tuple[CoefficientElement, ...]


@dataclass(frozen=True)
class LiftResult:
    descriptor: AmalgamDescriptor
    fibers: tuple[FiberHolonomy, ...]


def _oriented(cycle: Sequence[str], s: tuple[str, str],
              projection: Mapping[str, str] | None = None) -> list[str]:
    """Rotate/reflect a cycle so it starts by traversing ``s[0] -> s[1]``.

    With ``projection`` the match is made on projected vertex names.
    """
    proj = projection or {}
    cyc = list(cycle)
    n = len(cyc)
    for seq in (cyc, cyc[::-1]):
        for r in range(n):
            a, b = seq[r], seq[(r + 1) % n]
            if (proj.get(a, a), proj.get(b, b)) == s:
                return seq[r:] + seq[:r]
    raise DiagramError(f"cycle does not traverse {s}")


def lift_to_cover(a: AmalgamDescriptor, c: CoverData) -> LiftResult:
    """Pull a non-orientable CT descriptor back to the double cover.

    Each cover excess edge gets the holonomy of the base amalgam along the
    projection of its fundamental cycle. Closed walks in the cover cross the
    sheets an even number of times, so every tau bit cancels and the result is
    orientable. Per base loop, the fiber holonomies are delta_s on each of two
    lifted loops or delta_s^2 on the single doubled loop.
    """
    if a.flavor != CT:
        raise ClassifyError("lift_to_cover needs a Curtis-Tits descriptor")
    ori = orientability(a)
    if ori.orientable:
        raise ClassifyError("descriptor is orientable; its cover is disconnected")
    if c.base != a.diagram or dict(c.omega_star) != dict(ori.omega_star):
        raise ClassifyError("cover does not match the descriptor's omega*")
    td = spanning_tree_and_loops(c.cover)
    delta = []
    for s, loop in zip(td.excess, td.loops):
        walk = _oriented(loop, s)
        delta.append(walk_holonomy(a, walk, c.projection))
    lifted = AmalgamDescriptor(CT, a.q, c.cover, td.tree, td.excess, tuple(delta),
                               check_gates=False)
    fibers = []
    base_td = spanning_tree_and_loops(a.diagram)
    for s, loop, x in zip(a.excess, base_td.loops, a.delta):
        fib = loop_fiber_type(c, _oriented(loop, s), x.tau_bit)
        hol = [walk_holonomy(a, _oriented(cyc, s, c.projection), c.projection)
               for cyc in fib.cycles]
        fibers.append(FiberHolonomy(s, fib.kind, fib.cycles, tuple(hol)))
    return LiftResult(lifted, tuple(fibers))


# -- descriptor files -------------------------------------------------------------

def parse_descriptor(text: str, name: str = "") -> AmalgamDescriptor:
    """Diagram file plus ``flavor``, ``q`` and ``delta <i> <j> frob=<k> tau=<b>`` lines."""
    meta: dict = {"delta": {}}

    def extra(kw, toks, lineno):
        if kw == "flavor":
            if len(toks) != 2:
                raise DiagramSyntaxError("expected 'flavor CT|Phan'", lineno, toks[0][1])
            try:
                meta["flavor"] = normalize_flavor(toks[1][0])
            except ClassifyError as exc:
                raise DiagramSyntaxError(str(exc), lineno, toks[1][1]) from None
            return True
        if kw == "q":
            if len(toks) != 2 or not toks[1][0].isdigit():
                raise DiagramSyntaxError("expected 'q <int>'", lineno, toks[0][1])
            meta["q"] = int(toks[1][0])
            return True
        if kw == "delta":
            if len(toks) != 5:
                raise DiagramSyntaxError("expected 'delta <i> <j> frob=<k> tau=<0|1>'",
                                         lineno, toks[0][1])
            vals = {}
            for key, (tok, col) in zip(("frob=", "tau="), toks[3:]):
                if not tok.startswith(key) or not tok[len(key):].lstrip("-").isdigit():
                    raise DiagramSyntaxError(f"expected {key}<int>, got {tok!r}", lineno, col)
                vals[key] = int(tok[len(key):])
            if vals["tau="] not in (0, 1):
                raise DiagramSyntaxError("tau must be 0 or 1", lineno, toks[4][1])
            meta["delta"][(toks[1][0], toks[2][0])] = CoefficientElement(
                vals["frob="], vals["tau="])
            return True
        return False

    d = parse_diagram(text, name=name, extra=extra)
    if "flavor" not in meta or "q" not in meta:
        raise ClassifyError("descriptor needs 'flavor' and 'q' lines")
    flavor, q = meta["flavor"], meta["q"]
    delta = {}
    for s, x in meta["delta"].items():
        grp = coefficient_group(flavor, q, d.degrees.get(s[0], 1))
        delta[s] = grp.reduce(x)
    return descriptor_for(d, flavor, q, delta)


def format_descriptor(a: AmalgamDescriptor) -> str:
    lines = [format_diagram(a.diagram).rstrip("\n"), f"flavor {a.flavor}", f"q {a.q}"]
    for (i, j), x in zip(a.excess, a.delta):
        lines.append(f"delta {i} {j} frob={x.frobenius_exponent} tau={x.tau_bit}")
    return "\n".join(lines) + "\n"


def descriptor_report(a: AmalgamDescriptor) -> dict:
    """Deterministic summary; key order: flavor, q, r, excess, delta, orientable."""
    out = {"flavor": a.flavor, "q": a.q, "r": a.r,
           "excess": [list(s) for s in a.excess],
           "delta": [{"frob": x.frobenius_exponent, "tau": x.tau_bit} for x in a.delta]}
    if a.flavor == CT:
        out["orientable"] = orientability(a).orientable
    return out


def descriptor_json(a: AmalgamDescriptor) -> str:
    return json.dumps(descriptor_report(a), indent=2)
