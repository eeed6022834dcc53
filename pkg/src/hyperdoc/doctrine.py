"""Doctrines over finite categories and exhaustive law checkers.

A doctrine assigns a finite poset (fiber) to every object and a monotone
reindexing table to every morphism, contravariantly: ``reind[f]`` maps
``fiber(cod f)`` to ``fiber(dom f)``.  Structure witnesses (top, meets,
bottom, joins, implication, fibered equality, quantifiers) are explicit
tables; the checkers only ever test the tables they are given.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .fincat import FinCategory, ProductError, StructuralError
from .order import FinPoset, LatticeOps, lattice_law_violations

LAYERS = ("functorial", "primary", "bounded", "implicational", "joins", "heyting",
          "boolean", "elementary", "existential", "universal")

DEPS = {
    "functorial": (),
    "primary": ("functorial",),
    "bounded": ("primary",),
    "implicational": ("primary",),
    "joins": ("primary",),
    "heyting": ("bounded", "implicational", "joins"),
    "boolean": ("heyting",),
    "elementary": ("primary",),
    "existential": ("primary",),
    "universal": ("primary",),
}


class MissingWitness(StructuralError):
    """A declared layer lacks its witness tables."""


def closure(layers: Iterable[str]) -> list:
    """Layers plus their prerequisites, in canonical order."""
    want = set()
    stack = list(layers)
    while stack:
        l = stack.pop()
        if l not in DEPS:
            raise ValueError(f"unknown layer {l!r}")
        if l not in want:
            want.add(l)
            stack.extend(DEPS[l])
    return [l for l in LAYERS if l in want]


@dataclass(frozen=True, eq=False)
class Doctrine:
    base: FinCategory
    fibers: tuple
    reind: tuple
    ops: tuple
    delta: Mapping = field(default_factory=dict)
    exists_: Mapping = field(default_factory=dict)
    forall_: Mapping = field(default_factory=dict)
    layers: frozenset = frozenset()
    name: str = ""
    meta: Mapping = field(default_factory=dict)

    def __post_init__(self):
        cat = self.base
        n, M = len(cat.objects), len(cat.morphisms)
        if len(self.fibers) != n or len(self.ops) != n:
            raise StructuralError("need one fiber and one ops record per object")
        if len(self.reind) != M:
            raise StructuralError("need one reindexing table per morphism")
        reind = tuple(np.asarray(r, dtype=np.int64) for r in self.reind)
        object.__setattr__(self, "reind", reind)
        for f, r in enumerate(reind):
            src, dst = self.fibers[int(cat.cod[f])], self.fibers[int(cat.dom[f])]
            if r.shape != (len(src),) or (len(r) and (r.min() < 0 or r.max() >= len(dst))):
                raise StructuralError(f"reindexing table of {cat.morphisms[f]} has the wrong shape or range")
        for a, o in enumerate(self.ops):
            if o.over is not self.fibers[a] and o.over.elements != self.fibers[a].elements:
                raise StructuralError(f"ops of {cat.objects[a]} are over a different poset")
        for a, d in self.delta.items():
            if (a, a) not in cat.products:
                raise StructuralError(f"delta given for {cat.objects[a]} but {cat.objects[a]}^2 is not chosen")
            p = cat.products[(a, a)][0]
            if not 0 <= d < len(self.fibers[p]):
                raise StructuralError(f"delta of {cat.objects[a]} is out of range")
        for tab, what in ((self.exists_, "exists"), (self.forall_, "forall")):
            for (c, b), q in tab.items():
                if (c, b) not in cat.products:
                    raise StructuralError(f"{what} table for a pair without chosen product")
                p = cat.products[(c, b)][0]
                q = np.asarray(q)
                if q.shape != (len(self.fibers[p]),) or (len(q) and (q.min() < 0 or q.max() >= len(self.fibers[c]))):
                    raise StructuralError(f"{what} table for ({cat.objects[c]},{cat.objects[b]}) is malformed")
        object.__setattr__(self, "exists_", {k: np.asarray(v, dtype=np.int64) for k, v in self.exists_.items()})
        object.__setattr__(self, "forall_", {k: np.asarray(v, dtype=np.int64) for k, v in self.forall_.items()})
        object.__setattr__(self, "layers", frozenset(self.layers))

    # -- convenience ------------------------------------------------------------
    def replace(self, **kw) -> "Doctrine":
        return dataclasses.replace(self, **kw)

    def fiber(self, a) -> FinPoset:
        return self.fibers[self.base.obj(a)]

    def R(self, f: int) -> np.ndarray:
        return self.reind[f]

    @cached_property
    def Rpad(self) -> np.ndarray:
        w = max((len(r) for r in self.reind), default=0)
        out = np.full((len(self.reind), max(w, 1)), -1, dtype=np.int64)
        for i, r in enumerate(self.reind):
            out[i, :len(r)] = r
        return out

    def size(self) -> int:
        return sum(len(f) for f in self.fibers)

    def element(self, a, name) -> int:
        return self.fiber(a).el(name)

    def top(self, a: int) -> int:
        return self.ops[a].top

    def bottom(self, a: int) -> int:
        return self.ops[a].bottom

    def meet(self, a: int, x: int, y: int) -> int:
        return int(self.ops[a].meet[x, y])

    def imp(self, a: int, x: int, y: int) -> int:
        return int(self.ops[a].imp[x, y])

    def le(self, a: int, x: int, y: int) -> bool:
        return bool(self.fibers[a].leq[x, y])

    def exists(self, c: int, b: int) -> np.ndarray:
        try:
            return self.exists_[(c, b)]
        except KeyError:
            raise MissingWitness(
                f"no exists table for ({self.base.objects[c]},{self.base.objects[b]})") from None

    def forall(self, c: int, b: int) -> np.ndarray:
        try:
            return self.forall_[(c, b)]
        except KeyError:
            raise MissingWitness(
                f"no forall table for ({self.base.objects[c]},{self.base.objects[b]})") from None

    def __repr__(self):
        sizes = ",".join(str(len(f)) for f in self.fibers)
        return f"Doctrine({self.name or '?'}; fibers {sizes}; layers {sorted(self.layers)})"


# -- reports ---------------------------------------------------------------------

class Counterexample(NamedTuple):
    layer: str
    law: str
    args: tuple


@dataclass
class StructureReport:
    layers: dict = field(default_factory=dict)     # layer -> list[Counterexample]

    @property
    def ok(self) -> bool:
        return all(not v for v in self.layers.values())

    def __bool__(self):
        return self.ok

    def counterexamples(self) -> list:
        return [c for v in self.layers.values() for c in v]

    def failed_layers(self) -> list:
        return [k for k, v in self.layers.items() if v]

    def summary(self) -> dict:
        return {k: len(v) for k, v in self.layers.items()}


class _Collector:
    def __init__(self, layer, limit):
        self.layer, self.limit, self.items = layer, limit, []

    @property
    def full(self):
        return self.limit is not None and len(self.items) >= self.limit

    def add(self, law, *args):
        if not self.full:
            self.items.append(Counterexample(self.layer, law, tuple(int(a) for a in args)))

    def add_many(self, law, rows, prefix=()):
        for r in rows:
            if self.full:
                return
            self.add(law, *prefix, *r)


# -- scalar law replays ---------------------------------------------------------
# each returns True when the law instance holds

def _tuple(cat, f, g):
    return cat.tuple(f, g)


def _box(P: Doctrine, a: int, b: int):
    """``delta_A [x] delta_B`` in fiber((AxB)x(AxB)) and the product object."""
    cat = P.base
    q, q1, q2 = cat.product(a, b)
    qq, r1, r2 = cat.product(q, q)
    aa = cat.product(a, a)
    bb = cat.product(b, b)
    p1 = cat.compose(q1, r1)
    p2 = cat.compose(q2, r1)
    p3 = cat.compose(q1, r2)
    p4 = cat.compose(q2, r2)
    u13 = cat.tuple(p1, p3)
    u24 = cat.tuple(p2, p4)
    assert cat.cod[u13] == aa[0] and cat.cod[u24] == bb[0]
    x = int(P.R(u13)[P.delta[a]])
    y = int(P.R(u24)[P.delta[b]])
    return P.meet(qq, x, y), q, qq


LAWS = {}


def law(name):
    def deco(fn):
        LAWS[name] = fn
        return fn
    return deco


@law("reind_monotone")
def _l(P, f, x, y):
    R, src, dst = P.R(f), P.fibers[P.base.cod[f]], P.fibers[P.base.dom[f]]
    return not src.leq[x, y] or bool(dst.leq[R[x], R[y]])


@law("reind_identity")
def _l(P, a, x):
    return int(P.R(int(P.base.ident[a]))[x]) == x


@law("reind_compose")
def _l(P, g, f, x):
    return int(P.R(P.base.compose(g, f))[x]) == int(P.R(f)[P.R(g)[x]])


@law("top")
def _l(P, a, x):
    return P.le(a, x, P.top(a))


@law("meet")
def _l(P, a, x, y):
    m, L = P.meet(a, x, y), P.fibers[a].leq
    return bool(L[m, x] and L[m, y] and (~(L[:, x] & L[:, y]) | L[:, m]).all())


@law("top_natural")
def _l(P, f):
    return int(P.R(f)[P.top(P.base.cod[f])]) == P.top(P.base.dom[f])


@law("meet_natural")
def _l(P, f, x, y):
    R, a, b = P.R(f), P.base.dom[f], P.base.cod[f]
    return int(R[P.meet(b, x, y)]) == P.meet(a, int(R[x]), int(R[y]))


@law("bottom")
def _l(P, a, x):
    return P.le(a, P.bottom(a), x)


@law("bottom_natural")
def _l(P, f):
    return int(P.R(f)[P.bottom(P.base.cod[f])]) == P.bottom(P.base.dom[f])


@law("imp")
def _l(P, a, x, y, z):
    return P.le(a, z, P.imp(a, x, y)) == P.le(a, P.meet(a, z, x), y)


@law("imp_natural")
def _l(P, f, x, y):
    R, a, b = P.R(f), P.base.dom[f], P.base.cod[f]
    return int(R[P.imp(b, x, y)]) == P.imp(a, int(R[x]), int(R[y]))


@law("join")
def _l(P, a, x, y):
    j, L = int(P.ops[a].join[x, y]), P.fibers[a].leq
    return bool(L[x, j] and L[y, j] and (~(L[x] & L[y]) | L[j]).all())


@law("join_natural")
def _l(P, f, x, y):
    R, a, b = P.R(f), P.base.dom[f], P.base.cod[f]
    J = P.ops
    return int(R[J[b].join[x, y]]) == int(J[a].join[R[x], R[y]])


@law("double_negation")
def _l(P, a, x):
    o = P.ops[a]
    return o.neg(o.neg(x)) == x


@law("delta_reflexive")
def _l(P, a):
    d = P.base.diagonal(a)
    return P.le(a, P.top(a), int(P.R(d)[P.delta[a]]))


@law("delta_substitution")
def _l(P, a, x):
    aa, p1, p2 = P.base.product(a, a)
    lhs = P.meet(aa, int(P.R(p1)[x]), P.delta[a])
    return P.le(aa, lhs, int(P.R(p2)[x]))


@law("delta_product")
def _l(P, a, b):
    box, q, qq = _box(P, a, b)
    return P.le(qq, box, P.delta[q])


@law("delta_lemma")
def _l(P, c, g):
    cat = P.base
    cc, p1, _ = cat.product(c, c)
    u = cat.tuple(p1, p1)
    return P.le(cc, P.meet(cc, int(P.R(u)[g]), P.delta[c]), g)


@law("delta_product_converse")
def _l(P, a, b):
    box, q, qq = _box(P, a, b)
    return P.le(qq, P.delta[q], box)


def _ex_parts(P, c, b):
    p, p1, _ = P.base.product(c, b)
    return p, P.R(p1)


@law("exists_unit")
def _l(P, c, b, x):
    p, R1 = _ex_parts(P, c, b)
    return P.le(p, x, int(R1[P.exists(c, b)[x]]))


@law("exists_counit")
def _l(P, c, b, y):
    p, R1 = _ex_parts(P, c, b)
    return P.le(c, int(P.exists(c, b)[R1[y]]), y)


@law("exists_monotone")
def _l(P, c, b, x, y):
    p, _ = _ex_parts(P, c, b)
    E = P.exists(c, b)
    return not P.le(p, x, y) or P.le(c, int(E[x]), int(E[y]))


@law("exists_adjunction")
def _l(P, c, b, x, y):
    p, R1 = _ex_parts(P, c, b)
    return P.le(c, int(P.exists(c, b)[x]), y) == P.le(p, x, int(R1[y]))


def _fxid(P, f, b):
    cat = P.base
    return cat.cross(f, int(cat.ident[b]))


@law("exists_beck_chevalley")
def _l(P, c, b, f, x):
    c2 = int(P.base.dom[f])
    lhs = int(P.exists(c2, b)[P.R(_fxid(P, f, b))[x]])
    rhs = int(P.R(f)[P.exists(c, b)[x]])
    return lhs == rhs


@law("exists_frobenius")
def _l(P, c, b, x, y):
    p, R1 = _ex_parts(P, c, b)
    E = P.exists(c, b)
    return int(E[P.meet(p, x, int(R1[y]))]) == P.meet(c, int(E[x]), y)


@law("forall_unit")
def _l(P, c, b, y):
    p, R1 = _ex_parts(P, c, b)
    return P.le(c, y, int(P.forall(c, b)[R1[y]]))


@law("forall_counit")
def _l(P, c, b, x):
    p, R1 = _ex_parts(P, c, b)
    return P.le(p, int(R1[P.forall(c, b)[x]]), x)


@law("forall_monotone")
def _l(P, c, b, x, y):
    p, _ = _ex_parts(P, c, b)
    A = P.forall(c, b)
    return not P.le(p, x, y) or P.le(c, int(A[x]), int(A[y]))


@law("forall_adjunction")
def _l(P, c, b, y, x):
    p, R1 = _ex_parts(P, c, b)
    return P.le(p, int(R1[y]), x) == P.le(c, y, int(P.forall(c, b)[x]))


@law("forall_beck_chevalley")
def _l(P, c, b, f, x):
    c2 = int(P.base.dom[f])
    lhs = int(P.forall(c2, b)[P.R(_fxid(P, f, b))[x]])
    rhs = int(P.R(f)[P.forall(c, b)[x]])
    return lhs == rhs


def replay(P: Doctrine, cx: Counterexample) -> bool:
    """True when the recorded law instance still fails on ``P``."""
    return not LAWS[cx.law](P, *cx.args)


# -- vectorized screens ------------------------------------------------------------

def _need_ops(P, layer, fields):
    for a, o in enumerate(P.ops):
        miss = [f for f in fields if getattr(o, f) is None]
        if miss:
            raise MissingWitness(
                f"layer {layer}: fiber {P.base.objects[a]} lacks {', '.join(miss)}")


def _check_functorial(P, col):
    cat = P.base
    for f in range(len(cat.morphisms)):
        R = P.R(f)
        src, dst = P.fibers[cat.cod[f]], P.fibers[cat.dom[f]]
        bad = np.argwhere(src.leq & ~dst.leq[np.ix_(R, R)])
        col.add_many("reind_monotone", bad.tolist(), (f,))
    for a in range(len(cat.objects)):
        R = P.R(int(cat.ident[a]))
        bad = np.flatnonzero(R != np.arange(len(R)))
        col.add_many("reind_identity", [[x] for x in bad.tolist()], (a,))
    n = len(cat.objects)
    Rp = P.Rpad
    for a in range(n):
        for b in range(n):
            F = cat.hom(a, b)
            if not len(F):
                continue
            nb = len(P.fibers[b])
            Rf = Rp[F][:, :nb]
            for c in range(n):
                G = cat.hom(b, c)
                if not len(G):
                    continue
                nc = len(P.fibers[c])
                Rg = Rp[G][:, :nc]
                H = cat.comp[np.ix_(G, F)]
                want = Rp[H][:, :, :nc]
                if nb:
                    got = Rf[np.arange(len(F))[None, :, None], Rg[:, None, :]]
                else:
                    got = np.zeros_like(want)
                bad = np.argwhere(want != got)
                for gi, fi, x in bad.tolist():
                    col.add("reind_compose", G[gi], F[fi], x)
                    if col.full:
                        return


def _check_naturality(P, col, law, table_of, arity):
    """``R_f`` commutes with a fiberwise operation of the given arity."""
    cat = P.base
    for f in range(len(cat.morphisms)):
        a, b = int(cat.dom[f]), int(cat.cod[f])
        R = P.R(f)
        ta, tb = table_of(a), table_of(b)
        if arity == 0:
            if int(R[tb]) != int(ta):
                col.add(law, f)
        else:
            bad = np.argwhere(R[tb] != ta[np.ix_(R, R)])
            col.add_many(law, bad.tolist(), (f,))
        if col.full:
            return


def _check_primary(P, col):
    _need_ops(P, "primary", ("top", "meet"))
    for a, o in enumerate(P.ops):
        v = lattice_law_violations(LatticeOps(o.over, top=o.top, meet=o.meet))
        col.add_many("top", v.get("top", []), (a,))
        col.add_many("meet", v.get("meet", []), (a,))
    _check_naturality(P, col, "top_natural", lambda a: P.ops[a].top, 0)
    _check_naturality(P, col, "meet_natural", lambda a: P.ops[a].meet, 2)


def _check_bounded(P, col):
    _need_ops(P, "bounded", ("bottom",))
    for a, o in enumerate(P.ops):
        v = lattice_law_violations(LatticeOps(o.over, bottom=o.bottom))
        col.add_many("bottom", v.get("bottom", []), (a,))
    _check_naturality(P, col, "bottom_natural", lambda a: P.ops[a].bottom, 0)


def _check_implicational(P, col):
    _need_ops(P, "implicational", ("meet", "imp"))
    for a, o in enumerate(P.ops):
        v = lattice_law_violations(LatticeOps(o.over, meet=o.meet, imp=o.imp))
        col.add_many("imp", v.get("imp", []), (a,))
    _check_naturality(P, col, "imp_natural", lambda a: P.ops[a].imp, 2)


def _check_joins(P, col):
    _need_ops(P, "joins", ("join",))
    for a, o in enumerate(P.ops):
        v = lattice_law_violations(LatticeOps(o.over, join=o.join))
        col.add_many("join", v.get("join", []), (a,))
    _check_naturality(P, col, "join_natural", lambda a: P.ops[a].join, 2)


def _check_heyting(P, col):
    _need_ops(P, "heyting", ("top", "meet", "bottom", "join", "imp"))


def _check_boolean(P, col):
    _need_ops(P, "boolean", ("imp", "bottom"))
    for a, o in enumerate(P.ops):
        neg = o.neg_table
        bad = np.flatnonzero(neg[neg] != np.arange(len(neg)))
        col.add_many("double_negation", [[x] for x in bad.tolist()], (a,))


def squares(cat: FinCategory) -> list:
    """Objects ``A`` whose square ``A x A`` is chosen."""
    return [a for a in range(len(cat.objects)) if (a, a) in cat.products]


def box_pairs(P: Doctrine) -> list:
    """Pairs ``(A, B)`` where condition (3) can be stated."""
    cat = P.base
    out = []
    for (a, b), (q, _, _) in sorted(cat.products.items()):
        if a in P.delta and b in P.delta and q in P.delta:
            out.append((a, b))
    return out


def _check_elementary(P, col, derived=True):
    cat = P.base
    for a in squares(cat):
        if a not in P.delta:
            raise MissingWitness(f"layer elementary: no delta for {cat.objects[a]}")
    for a in sorted(P.delta):
        if not LAWS["delta_reflexive"](P, a):
            col.add("delta_reflexive", a)
        aa, p1, p2 = cat.product(a, a)
        lhs = P.ops[aa].meet[P.R(p1), P.delta[a]]
        bad = np.flatnonzero(~P.fibers[aa].leq[lhs, P.R(p2)])
        col.add_many("delta_substitution", [[x] for x in bad.tolist()], (a,))
    for a, b in box_pairs(P):
        if not LAWS["delta_product"](P, a, b):
            col.add("delta_product", a, b)
    if derived:
        _check_elementary_derived(P, col)


def _check_elementary_derived(P, col):
    cat = P.base
    for c in sorted(P.delta):
        cc, p1, _ = cat.product(c, c)
        u = cat.tuple(p1, p1)
        g = np.arange(len(P.fibers[cc]))
        lhs = P.ops[cc].meet[P.R(u)[g], P.delta[c]]
        bad = np.flatnonzero(~P.fibers[cc].leq[lhs, g])
        col.add_many("delta_lemma", [[x] for x in bad.tolist()], (c,))
    for a, b in box_pairs(P):
        if not LAWS["delta_product_converse"](P, a, b):
            col.add("delta_product_converse", a, b)


def _quantifier_pairs(P):
    return sorted(P.base.products)


def _check_quantifier(P, col, kind):
    cat = P.base
    tables = P.exists_ if kind == "exists" else P.forall_
    for (c, b) in _quantifier_pairs(P):
        if (c, b) not in tables:
            raise MissingWitness(
                f"layer {'existential' if kind == 'exists' else 'universal'}: no {kind} table for "
                f"({cat.objects[c]},{cat.objects[b]})")
    for (c, b) in _quantifier_pairs(P):
        Q = tables[(c, b)]
        p, p1, _ = cat.product(c, b)
        R1 = P.R(p1)
        Lp, Lc = P.fibers[p].leq, P.fibers[c].leq
        xs = np.arange(len(Q))
        ys = np.arange(len(R1))
        if kind == "exists":
            col.add_many("exists_unit", [[x] for x in np.flatnonzero(~Lp[xs, R1[Q]])], (c, b))
            col.add_many("exists_counit", [[y] for y in np.flatnonzero(~Lc[Q[R1], ys])], (c, b))
            bad = np.argwhere(Lp & ~Lc[np.ix_(Q, Q)])
            col.add_many("exists_monotone", bad.tolist(), (c, b))
            adj = Lc[Q[:, None], ys[None, :]] != Lp[xs[:, None], R1[None, :]]
            col.add_many("exists_adjunction", np.argwhere(adj).tolist(), (c, b))
            fr_l = Q[P.ops[p].meet[xs[:, None], R1[None, :]]]
            fr_r = P.ops[c].meet[Q[:, None], ys[None, :]]
            col.add_many("exists_frobenius", np.argwhere(fr_l != fr_r).tolist(), (c, b))
        else:
            col.add_many("forall_unit", [[y] for y in np.flatnonzero(~Lc[ys, Q[R1]])], (c, b))
            col.add_many("forall_counit", [[x] for x in np.flatnonzero(~Lp[R1[Q], xs])], (c, b))
            bad = np.argwhere(Lp & ~Lc[np.ix_(Q, Q)])
            col.add_many("forall_monotone", bad.tolist(), (c, b))
            adj = Lp[R1[:, None], xs[None, :]] != Lc[ys[:, None], Q[None, :]]
            col.add_many("forall_adjunction", np.argwhere(adj).tolist(), (c, b))
        law = f"{kind}_beck_chevalley"
        for c2 in range(len(cat.objects)):
            if (c2, b) not in cat.products:
                continue
            Q2 = tables.get((c2, b))
            if Q2 is None:
                continue
            for f in cat.hom(c2, c).tolist():
                try:
                    fx = _fxid(P, f, b)
                except ProductError:
                    continue
                lhs = Q2[P.R(fx)]
                rhs = P.R(f)[Q]
                col.add_many(law, [[x] for x in np.flatnonzero(lhs != rhs)], (c, b, f))
                if col.full:
                    return


_CHECKERS = {
    "functorial": _check_functorial,
    "primary": _check_primary,
    "bounded": _check_bounded,
    "implicational": _check_implicational,
    "joins": _check_joins,
    "heyting": _check_heyting,
    "boolean": _check_boolean,
    "elementary": _check_elementary,
    "existential": lambda P, col: _check_quantifier(P, col, "exists"),
    "universal": lambda P, col: _check_quantifier(P, col, "forall"),
}


def check_structure(P: Doctrine, layers=None, limit: int | None = None) -> StructureReport:
    """Exhaustively verify ``layers`` (default: the declared ones) and prerequisites.

    Missing witness tables raise :class:`MissingWitness`.
    """
    if layers is None:
        layers = P.layers or ("functorial",)
    elif isinstance(layers, str):
        layers = (layers,)
    rep = StructureReport()
    for layer in closure(layers):
        col = _Collector(layer, limit)
        _CHECKERS[layer](P, col)
        rep.layers[layer] = col.items
    return rep


def check_elementary_derived(P: Doctrine) -> StructureReport:
    """The derived equality facts, run on their own."""
    col = _Collector("elementary", None)
    _check_elementary_derived(P, col)
    return StructureReport({"elementary": col.items})


def describe(P: Doctrine, cx: Counterexample) -> dict:
    """Counterexample with readable names, for reports."""
    return {"layer": cx.layer, "law": cx.law, "args": [int(a) for a in cx.args]}


# -- morphisms -----------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DoctrineMorphism:
    src: Doctrine
    dst: Doctrine
    F_obj: np.ndarray
    F_mor: np.ndarray
    comp: tuple
    preserved_layers: frozenset = frozenset()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "F_obj", np.asarray(self.F_obj, dtype=np.int64))
        object.__setattr__(self, "F_mor", np.asarray(self.F_mor, dtype=np.int64))
        object.__setattr__(self, "comp", tuple(np.asarray(c, dtype=np.int64) for c in self.comp))
        object.__setattr__(self, "preserved_layers", frozenset(self.preserved_layers))
        s, d = self.src, self.dst
        if len(self.F_obj) != len(s.base.objects) or len(self.F_mor) != len(s.base.morphisms):
            raise StructuralError("functor tables have the wrong length")
        if len(self.comp) != len(s.base.objects):
            raise StructuralError("need one fiber component per source object")
        for a, c in enumerate(self.comp):
            fa = int(self.F_obj[a])
            if c.shape != (len(s.fibers[a]),) or (len(c) and (c.min() < 0 or c.max() >= len(d.fibers[fa]))):
                raise StructuralError(f"component at {s.base.objects[a]} has the wrong shape or range")

    def __call__(self, a: int, x: int) -> int:
        return int(self.comp[a][x])


def identity_morphism(P: Doctrine) -> DoctrineMorphism:
    return DoctrineMorphism(P, P, np.arange(len(P.base.objects)), np.arange(len(P.base.morphisms)),
                            tuple(np.arange(len(f)) for f in P.fibers), P.layers, "id")


def compose_morphisms(n: DoctrineMorphism, m: DoctrineMorphism) -> DoctrineMorphism:
    """``n o m`` (first ``m``)."""
    if m.dst is not n.src:
        raise StructuralError("morphisms do not compose")
    F_obj = n.F_obj[m.F_obj]
    F_mor = n.F_mor[m.F_mor]
    comp = tuple(n.comp[int(m.F_obj[a])][m.comp[a]] for a in range(len(m.comp)))
    return DoctrineMorphism(m.src, n.dst, F_obj, F_mor, comp,
                            m.preserved_layers & n.preserved_layers, f"{n.name}.{m.name}")


def comparison(m: DoctrineMorphism, a: int, b: int):
    """``<F pr1, F pr2> : F(AxB) -> FA x FB`` and its inverse (or None)."""
    s, d = m.src.base, m.dst.base
    p, p1, p2 = s.product(a, b)
    fa, fb = int(m.F_obj[a]), int(m.F_obj[b])
    if not d.has_product(fa, fb):
        return None, None
    phi = d.tuple(int(m.F_mor[p1]), int(m.F_mor[p2]))
    return phi, d.is_iso(phi)


_MORPHISM_LAYER_FIELDS = {
    "primary": ("top", "meet"),
    "bounded": ("bottom",),
    "implicational": ("imp",),
    "joins": ("join",),
}


def check_morphism(m: DoctrineMorphism, layers=None, strict: bool = False,
                   limit: int | None = None) -> StructureReport:
    """Functor laws, product preservation, naturality and per-layer preservation."""
    if layers is None:
        layers = m.preserved_layers or ("functorial",)
    elif isinstance(layers, str):
        layers = (layers,)
    layers = closure(layers)
    S, D = m.src, m.dst
    sc, dc = S.base, D.base
    rep = StructureReport()

    col = _Collector("functorial", limit)
    F, Fm = m.F_obj, m.F_mor
    for f in range(len(sc.morphisms)):
        g = int(Fm[f])
        if dc.dom[g] != F[sc.dom[f]] or dc.cod[g] != F[sc.cod[f]]:
            col.add("functor_endpoints", f)
    for a in range(len(sc.objects)):
        if Fm[sc.ident[a]] != dc.ident[F[a]]:
            col.add("functor_identity", a)
    gf = np.argwhere(sc.comp >= 0)
    if len(gf):
        lhs = Fm[sc.comp[gf[:, 0], gf[:, 1]]]
        rhs = dc.comp[Fm[gf[:, 0]], Fm[gf[:, 1]]]
        col.add_many("functor_compose", gf[lhs != rhs].tolist())
    t = int(F[sc.terminal])
    if dc.is_iso(int(dc.bang[t])) is None:
        col.add("terminal_preserved")
    for (a, b), (p, p1, p2) in sorted(sc.products.items()):
        phi, inv = comparison(m, a, b)
        if phi is None or inv is None:
            col.add("product_preserved", a, b)
        elif strict:
            fa, fb = int(F[a]), int(F[b])
            if dc.product(fa, fb) != (int(F[p]), int(Fm[p1]), int(Fm[p2])):
                col.add("product_strict", a, b)
    for a in range(len(sc.objects)):
        bad = np.argwhere(S.fibers[a].leq & ~D.fibers[int(F[a])].leq[np.ix_(m.comp[a], m.comp[a])])
        col.add_many("component_monotone", bad.tolist(), (a,))
    for f in range(len(sc.morphisms)):
        a, b = int(sc.dom[f]), int(sc.cod[f])
        lhs = m.comp[a][S.R(f)]
        rhs = D.R(int(Fm[f]))[m.comp[b]]
        col.add_many("component_natural", [[x] for x in np.flatnonzero(lhs != rhs)], (f,))
        if col.full:
            break
    rep.layers["functorial"] = col.items

    for layer in layers:
        if layer == "functorial":
            continue
        col = _Collector(layer, limit)
        if layer in _MORPHISM_LAYER_FIELDS:
            for fld in _MORPHISM_LAYER_FIELDS[layer]:
                for a in range(len(sc.objects)):
                    so, do = S.ops[a], D.ops[int(F[a])]
                    if getattr(so, fld) is None or getattr(do, fld) is None:
                        raise MissingWitness(f"layer {layer}: {fld} missing at {sc.objects[a]}")
                    c = m.comp[a]
                    if fld in ("top", "bottom"):
                        if int(c[getattr(so, fld)]) != int(getattr(do, fld)):
                            col.add(f"preserves_{fld}", a)
                    else:
                        lhs = c[getattr(so, fld)]
                        rhs = getattr(do, fld)[np.ix_(c, c)]
                        col.add_many(f"preserves_{fld}", np.argwhere(lhs != rhs).tolist(), (a,))
        elif layer == "boolean" or layer == "heyting":
            pass   # fiberwise operations are already covered by the prerequisites
        elif layer == "elementary":
            for a in sorted(S.delta):
                phi, _ = comparison(m, a, a)
                fa = int(F[a])
                if phi is None or fa not in D.delta:
                    col.add("preserves_delta", a)
                    continue
                aa = sc.product(a, a)[0]
                if int(m.comp[aa][S.delta[a]]) != int(D.R(phi)[D.delta[fa]]):
                    col.add("preserves_delta", a)
        elif layer in ("existential", "universal"):
            kind = "exists" if layer == "existential" else "forall"
            stab = S.exists_ if kind == "exists" else S.forall_
            dtab = D.exists_ if kind == "exists" else D.forall_
            for (c, b), Q in sorted(stab.items()):
                phi, inv = comparison(m, c, b)
                fc, fb = int(F[c]), int(F[b])
                if inv is None or (fc, fb) not in dtab:
                    col.add(f"preserves_{kind}", c, b, -1)
                    continue
                p = sc.product(c, b)[0]
                xs = np.arange(len(Q))
                lhs = m.comp[c][Q[xs]]
                rhs = dtab[(fc, fb)][D.R(inv)[m.comp[p][xs]]]
                col.add_many(f"preserves_{kind}", [[x] for x in np.flatnonzero(lhs != rhs)], (c, b))
        rep.layers[layer] = col.items
    return rep


def is_isomorphism(m: DoctrineMorphism) -> bool:
    """Bijective on objects and morphisms and an order-isomorphism on every fiber."""
    S, D = m.src, m.dst
    if sorted(m.F_obj.tolist()) != list(range(len(D.base.objects))):
        return False
    if sorted(m.F_mor.tolist()) != list(range(len(D.base.morphisms))):
        return False
    for a, c in enumerate(m.comp):
        Dp = D.fibers[int(m.F_obj[a])]
        if sorted(c.tolist()) != list(range(len(Dp))):
            return False
        if not (S.fibers[a].leq == Dp.leq[np.ix_(c, c)]).all():
            return False
    return True


def is_fiber_iso(m: DoctrineMorphism) -> bool:
    """Every component is an order-isomorphism (the base functor may be an equivalence)."""
    S, D = m.src, m.dst
    for a, c in enumerate(m.comp):
        Dp = D.fibers[int(m.F_obj[a])]
        if sorted(c.tolist()) != list(range(len(Dp))):
            return False
        if not (S.fibers[a].leq == Dp.leq[np.ix_(c, c)]).all():
            return False
    return True


# -- 2-cells -------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TwoCell:
    source: DoctrineMorphism
    target: DoctrineMorphism
    theta: np.ndarray      # per source object: morphism F A -> G A in the target base


def check_2cell(t: TwoCell) -> StructureReport:
    F, G = t.source, t.target
    if F.src is not G.src or F.dst is not G.dst:
        raise StructuralError("2-cell endpoints differ")
    S, D = F.src, F.dst
    sc, dc = S.base, D.base
    th = np.asarray(t.theta, dtype=np.int64)
    col = _Collector("2cell", None)
    for a in range(len(sc.objects)):
        h = int(th[a])
        if dc.dom[h] != F.F_obj[a] or dc.cod[h] != G.F_obj[a]:
            col.add("theta_endpoints", a)
    if col.items:
        return StructureReport({"2cell": col.items})
    for f in range(len(sc.morphisms)):
        a, b = int(sc.dom[f]), int(sc.cod[f])
        if dc.comp[G.F_mor[f], th[a]] != dc.comp[th[b], F.F_mor[f]]:
            col.add("theta_natural", f)
    for a in range(len(sc.objects)):
        lhs = F.comp[a]
        rhs = D.R(int(th[a]))[G.comp[a]]
        bad = np.flatnonzero(~D.fibers[int(F.F_obj[a])].leq[lhs, rhs])
        col.add_many("theta_inequality", [[x] for x in bad.tolist()], (a,))
    return StructureReport({"2cell": col.items})


def identity_2cell(m: DoctrineMorphism) -> TwoCell:
    dc = m.dst.base
    return TwoCell(m, m, np.array([int(dc.ident[int(m.F_obj[a])]) for a in range(len(m.src.base.objects))]))


# -- semantic predicates ---------------------------------------------------------------

def _terminal_view(P: Doctrine, a: int):
    """``(p, R(pr2))`` for ``t x A``: moves ``fiber(A)`` to ``fiber(t x A)``."""
    cat = P.base
    p, _, p2 = cat.product(cat.terminal, a)
    return p, P.R(p2)


@dataclass
class RichReport:
    witnesses: dict = field(default_factory=dict)   # (A, sigma) -> constant or None
    equality: dict = field(default_factory=dict)    # (A, sigma) -> bool (inequality was an equality)

    @property
    def rich(self) -> bool:
        return all(w is not None for w in self.witnesses.values())

    @property
    def failures(self) -> list:
        return [k for k, w in self.witnesses.items() if w is None]

    @property
    def ok(self) -> bool:
        return self.rich

    def coverage(self) -> float:
        if not self.witnesses:
            return 1.0
        return sum(w is not None for w in self.witnesses.values()) / len(self.witnesses)


def rich_witness(P: Doctrine, a: int, s: int):
    """First ``d : t -> A`` (index order) with ``E s <= P(d) s``, plus the equality flag."""
    cat = P.base
    t = cat.terminal
    p, R2 = _terminal_view(P, a)
    e = int(P.exists(t, a)[R2[s]])
    Lt = P.fibers[t].leq
    for d in cat.hom(t, a).tolist():
        r = int(P.R(d)[s])
        if Lt[e, r]:
            return d, r == e
    return None, None


def check_rich(P: Doctrine, objects=None, elements=None) -> RichReport:
    """Search a witnessing constant for every ``(A, sigma)``.

    ``elements`` optionally restricts to a mapping ``A -> iterable of sigma``.
    """
    rep = RichReport()
    objs = range(len(P.base.objects)) if objects is None else objects
    for a in objs:
        sig = range(len(P.fibers[a])) if elements is None else elements.get(a, ())
        for s in sig:
            d, eq = rich_witness(P, a, int(s))
            rep.witnesses[(a, int(s))] = d
            if d is not None:
                rep.equality[(a, int(s))] = eq
    return rep


def consistency_predicates(P: Doctrine) -> dict:
    t = P.base.terminal
    L = P.fibers[t].leq
    n = len(L)
    nle = ~L
    consistent = bool(nle.any())
    two = False
    for a, b in np.argwhere(nle).tolist():
        if (L[a] | L[b]).all():
            two = True
            break
    out = {"consistent": consistent, "two_valued": two, "nontrivial": n > 1}
    o = P.ops[t]
    if o.top is not None and o.bottom is not None:
        out["top_not_le_bottom"] = not bool(L[o.top, o.bottom])
    return out


def consistency_status(P: Doctrine, cross_check: bool = True) -> str:
    """``inconsistent`` / ``consistent`` / ``two_valued`` from the fiber over ``t``.

    For bounded fibers the four equivalent predicates are compared and a
    disagreement raises ``AssertionError``.
    """
    pr = consistency_predicates(P)
    if cross_check and "top_not_le_bottom" in pr:
        vals = {pr["consistent"], pr["two_valued"], pr["nontrivial"], pr["top_not_le_bottom"]}
        if len(vals) != 1:
            raise AssertionError(f"bounded consistency predicates disagree: {pr}")
    if not pr["consistent"]:
        return "inconsistent"
    return "two_valued" if pr["two_valued"] else "consistent"


def check_epsilon_operator(P: Doctrine, pairs=None) -> dict:
    """For every ``B, A`` and ``alpha in P(B x A)`` search ``eps : B -> A`` with
    ``E^A_B alpha = P(<id_B, eps>) alpha``.

    Returns ``{"witnesses": {(B, A, alpha): eps or None}, "ok": bool,
    "rich_agrees": bool}``; the last compares the ``B = t`` slice with
    :func:`check_rich`.
    """
    cat = P.base
    wit = {}
    if pairs is None:
        pairs = sorted(k for k in cat.products if k in P.exists_)
    for (b, a) in pairs:
        p = cat.product(b, a)[0]
        E = P.exists(b, a)
        idb = int(cat.ident[b])
        cands = [(e, cat.tuple(idb, e)) for e in cat.hom(b, a).tolist()]
        for x in range(len(P.fibers[p])):
            hit = None
            for e, u in cands:
                if int(P.R(u)[x]) == int(E[x]):
                    hit = e
                    break
            wit[(b, a, x)] = hit
    t = cat.terminal
    eps_t = all(w is not None for (b, a, x), w in wit.items() if b == t)
    objs = sorted({a for (b, a) in pairs if b == t})
    rich = check_rich(P, objects=objs).rich if objs else True
    return {"witnesses": wit, "ok": all(w is not None for w in wit.values()),
            "rich_agrees": eps_t == rich}
