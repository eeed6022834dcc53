"""Finite posets, lattice witnesses, poset reflection and filters."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class OrderError(ValueError):
    pass


class FilterError(OrderError):
    pass


@dataclass(frozen=True, eq=False)
class FinPoset:
    elements: tuple
    leq: np.ndarray

    def __post_init__(self):
        n = len(self.elements)
        L = np.asarray(self.leq, dtype=bool)
        object.__setattr__(self, "leq", L)
        if L.shape != (n, n):
            raise OrderError(f"order table has shape {L.shape}, expected {(n, n)}")
        if len(set(self.elements)) != n:
            raise OrderError("duplicate element id")
        if not L.diagonal().all():
            raise OrderError("order is not reflexive")
        if (L & L.T & ~np.eye(n, dtype=bool)).any():
            raise OrderError("order is not antisymmetric")
        if n and ((L.astype(np.int32) @ L.astype(np.int32) > 0) & ~L).any():
            raise OrderError("order is not transitive")

    def __len__(self):
        return len(self.elements)

    @cached_property
    def index(self) -> dict:
        return {e: i for i, e in enumerate(self.elements)}

    def el(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self.index[name]
        except KeyError:
            raise OrderError(f"unknown element {name!r}") from None

    def le(self, a: int, b: int) -> bool:
        return bool(self.leq[a, b])

    def up(self, a: int) -> np.ndarray:
        return np.flatnonzero(self.leq[a])

    def down(self, a: int) -> np.ndarray:
        return np.flatnonzero(self.leq[:, a])

    @classmethod
    def chain(cls, names: Sequence) -> "FinPoset":
        n = len(names)
        return cls(tuple(names), np.triu(np.ones((n, n), dtype=bool)))

    @classmethod
    def from_pairs(cls, elements: Sequence, pairs: Iterable) -> "FinPoset":
        """Reflexive-transitive closure of ``pairs`` (names)."""
        elements = tuple(elements)
        ix = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        L = np.eye(n, dtype=bool)
        for a, b in pairs:
            try:
                L[ix[a], ix[b]] = True
            except KeyError as exc:
                raise OrderError(f"order pair mentions undeclared element {exc.args[0]!r}") from None
        return cls(elements, transitive_closure(L))


def transitive_closure(L: np.ndarray) -> np.ndarray:
    L = np.asarray(L, dtype=bool).copy()
    for k in range(len(L)):
        L |= L[:, k:k + 1] & L[k:k + 1, :]
    return L


@dataclass(frozen=True, eq=False)
class MonotoneMap:
    source: FinPoset
    target: FinPoset
    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.int64)
        object.__setattr__(self, "table", t)
        if t.shape != (len(self.source),):
            raise OrderError("map table must have one entry per source element")
        if len(t) and (t.min() < 0 or t.max() >= len(self.target)):
            raise OrderError("map table leaves the target")

    def is_monotone(self) -> bool:
        return monotone_violations(self.source, self.target, self.table) == []

    def __call__(self, a: int) -> int:
        return int(self.table[a])


def monotone_violations(src: FinPoset, dst: FinPoset, table) -> list:
    t = np.asarray(table)
    img = dst.leq[np.ix_(t, t)]
    return [tuple(x) for x in np.argwhere(src.leq & ~img).tolist()]


# -- lattice witnesses --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LatticeOps:
    over: FinPoset
    top: int | None = None
    meet: np.ndarray | None = None
    bottom: int | None = None
    join: np.ndarray | None = None
    imp: np.ndarray | None = None

    def neg(self, a: int) -> int:
        if self.imp is None or self.bottom is None:
            raise OrderError("negation needs implication and bottom")
        return int(self.imp[a, self.bottom])

    @property
    def neg_table(self) -> np.ndarray:
        return self.imp[:, self.bottom]

    def fields(self) -> set:
        return {k for k in ("top", "meet", "bottom", "join", "imp") if getattr(self, k) is not None}

    def has(self, *names) -> bool:
        return all(getattr(self, k) is not None for k in names)


def _extremum(mask_rows: np.ndarray, leq: np.ndarray, greatest: bool) -> np.ndarray:
    """For each boolean row (a set S), the greatest (least) element of S or -1."""
    out = np.full(mask_rows.shape[0], -1, dtype=np.int64)
    for r, S in enumerate(mask_rows):
        cand = np.flatnonzero(S)
        if not len(cand):
            continue
        if greatest:
            ok = leq[np.ix_(cand, cand)].all(axis=0)   # every s <= c
        else:
            ok = leq[np.ix_(cand, cand)].all(axis=1)
        w = cand[ok]
        if len(w):
            out[r] = w[0]
    return out


def derive_lattice_ops(p: FinPoset) -> LatticeOps:
    """Populate each witness that exists for all arguments."""
    n = len(p)
    L = p.leq
    if n == 0:
        return LatticeOps(p)
    tops = np.flatnonzero(L.all(axis=0))
    bots = np.flatnonzero(L.all(axis=1))
    top = int(tops[0]) if len(tops) else None
    bottom = int(bots[0]) if len(bots) else None
    lower = (L.T[:, None, :] & L.T[None, :, :]).reshape(n * n, n)   # c <= a and c <= b
    meet = _extremum(lower, L, greatest=True).reshape(n, n)
    meet = None if (meet < 0).any() else meet
    upper = (L[:, None, :] & L[None, :, :]).reshape(n * n, n)
    join = _extremum(upper, L, greatest=False).reshape(n, n)
    join = None if (join < 0).any() else join
    imp = None
    if meet is not None:
        # imp(a, b) = max { c | c ^ a <= b }
        cand = np.empty((n, n, n), dtype=bool)
        for a in range(n):
            cand[a] = L[meet[:, a]].T                    # [b, c]: meet(c, a) <= b
        imp = _extremum(cand.reshape(n * n, n), L, greatest=True).reshape(n, n)
        imp = None if (imp < 0).any() else imp
    return LatticeOps(p, top, meet, bottom, join, imp)


def lattice_law_violations(ops: LatticeOps) -> dict:
    """Brute-force check of every present witness; returns law -> failing args."""
    L, n = ops.over.leq, len(ops.over)
    out = {}
    idx = np.arange(n)
    if ops.top is not None:
        bad = np.flatnonzero(~L[:, ops.top])
        if len(bad):
            out["top"] = [(int(a),) for a in bad]
    if ops.bottom is not None:
        bad = np.flatnonzero(~L[ops.bottom, :])
        if len(bad):
            out["bottom"] = [(int(a),) for a in bad]
    if ops.meet is not None:
        m = ops.meet
        lb = L[m, idx[:, None]] & L[m, idx[None, :]]
        glb = ((L.T[:, None, :] & L.T[None, :, :]) <= L[:, m].transpose(1, 2, 0)).all(axis=2)
        bad = np.argwhere(~(lb & glb))
        if len(bad):
            out["meet"] = [tuple(map(int, x)) for x in bad]
    if ops.join is not None:
        j = ops.join
        ub = L[idx[:, None], j] & L[idx[None, :], j]
        lub = ((L[:, None, :] & L[None, :, :]) <= L[j, :]).all(axis=2)
        bad = np.argwhere(~(ub & lub))
        if len(bad):
            out["join"] = [tuple(map(int, x)) for x in bad]
    if ops.imp is not None and ops.meet is not None:
        m, im = ops.meet, ops.imp
        # c <= imp(a,b)  <=>  meet(c,a) <= b, indexed [a, b, c]
        lhs = L[idx[None, None, :], im[:, :, None]]
        rhs = L[m.T[:, None, :], idx[None, :, None]]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            out["imp"] = [tuple(map(int, x)) for x in bad]
    return out


# -- poset reflection ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Reflection:
    poset: FinPoset
    quotient: np.ndarray        # source element -> class
    classes: tuple              # class -> tuple of source elements
    representatives: np.ndarray  # class -> least source element


def poset_reflection(elements: Sequence, rel: np.ndarray) -> Reflection:
    """Collapse a preorder ``rel`` to its poset reflection.

    Classes are named after their least-index member.
    """
    R = np.asarray(rel, dtype=bool)
    n = len(elements)
    if R.shape != (n, n):
        raise OrderError("relation has the wrong shape")
    if not R.diagonal().all():
        raise OrderError("relation is not reflexive")
    if n and ((R.astype(np.int32) @ R.astype(np.int32) > 0) & ~R).any():
        raise OrderError("relation is not transitive")
    eq = R & R.T
    q = np.full(n, -1, dtype=np.int64)
    reps = []
    for a in range(n):
        if q[a] < 0:
            q[eq[a]] = len(reps)
            reps.append(a)
    reps = np.asarray(reps, dtype=np.int64)
    leq = R[np.ix_(reps, reps)]
    classes = tuple(tuple(np.flatnonzero(q == c).tolist()) for c in range(len(reps)))
    poset = FinPoset(tuple(elements[r] for r in reps), leq)
    return Reflection(poset, q, classes, reps)


# -- filters --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Filter:
    lattice: LatticeOps
    members: frozenset

    @property
    def proper(self) -> bool:
        return classify_filter(self.lattice, self)["proper"]

    @property
    def ultra(self) -> bool:
        return classify_filter(self.lattice, self)["ultra"]

    @property
    def maximal(self) -> bool:
        return classify_filter(self.lattice, self)["maximal"]

    def names(self) -> list:
        el = self.lattice.over.elements
        return [el[i] for i in sorted(self.members)]

    def __contains__(self, a) -> bool:
        return a in self.members

    def __eq__(self, other):
        return isinstance(other, Filter) and self.members == other.members

    def __hash__(self):
        return hash(self.members)


def _need(L: LatticeOps, *fields):
    missing = [f for f in fields if getattr(L, f) is None]
    if missing:
        raise OrderError(f"lattice is missing {', '.join(missing)}")


def is_filter(L: LatticeOps, members: Iterable) -> bool:
    _need(L, "top", "meet")
    S = set(int(m) for m in members)
    if L.top not in S:
        return False
    leq = L.over.leq
    for a in S:
        if not set(np.flatnonzero(leq[a]).tolist()) <= S:
            return False
        for b in S:
            if int(L.meet[a, b]) not in S:
                return False
    return True


def generated_filter(L: LatticeOps, E: Iterable) -> Filter:
    """Least filter containing ``E``: upward closure of finite meets, plus top."""
    _need(L, "top", "meet")
    closed = {L.top} | {int(e) for e in E}
    frontier = list(closed)
    while frontier:
        nxt = []
        for a in frontier:
            for b in list(closed):
                m = int(L.meet[a, b])
                if m not in closed:
                    closed.add(m)
                    nxt.append(m)
        frontier = nxt
    up = np.zeros(len(L.over), dtype=bool)
    for a in closed:
        up |= L.over.leq[a]
    return Filter(L, frozenset(np.flatnonzero(up).tolist()))


def as_filter(L: LatticeOps, members: Iterable) -> Filter:
    m = frozenset(int(x) for x in members)
    if not is_filter(L, m):
        raise FilterError("not a filter")
    return Filter(L, m)


def classify_filter(L: LatticeOps, F) -> dict:
    """Properness, ultra and maximality; maximality by direct search."""
    members = F.members if isinstance(F, Filter) else frozenset(int(x) for x in F)
    if not is_filter(L, members):
        raise FilterError("not a filter")
    n = len(L.over)
    proper = len(members) < n
    if L.bottom is not None:
        proper_b = L.bottom not in members
        if proper_b != proper:
            raise FilterError("bottom test and size test disagree")
    ultra = None
    if L.imp is not None and L.bottom is not None:
        neg = L.neg_table
        # "either a or not-a": exclusive, so the improper filter is not ultra
        ultra = all((a in members) != (int(neg[a]) in members) for a in range(n))
    maximal = False
    if proper:
        maximal = True
        for a in range(n):
            if a in members:
                continue
            if len(generated_filter(L, members | {a}).members) < n:
                maximal = False   # a strictly larger proper filter exists
                break
    return {"proper": proper, "ultra": ultra, "maximal": maximal,
            "ultra_iff_maximal": None if ultra is None else ultra == maximal}


def extend_to_ultrafilter(L: LatticeOps, F) -> Filter:
    """Greedy scan in element order: add ``a`` if that stays proper, else add its negation."""
    _need(L, "top", "meet", "bottom", "imp")
    members = F.members if isinstance(F, Filter) else frozenset(int(x) for x in F)
    if not is_filter(L, members):
        raise FilterError("not a filter")
    if L.bottom in members:
        raise FilterError("cannot extend an improper filter")
    n = len(L.over)
    cur = members
    changed = True
    while changed:
        changed = False
        for a in range(n):
            if a in cur:
                continue
            g = generated_filter(L, cur | {a})
            if L.bottom not in g.members:
                cur, changed = g.members, True
                continue
            na = L.neg(a)
            if na not in cur:
                cur, changed = generated_filter(L, cur | {na}).members, True
    return Filter(L, cur)


MAX_ENUMERATE = 16


def enumerate_filters(L: LatticeOps) -> list:
    """Every filter, by scanning all subsets as bitmasks."""
    _need(L, "top", "meet")
    n = len(L.over)
    if n > MAX_ENUMERATE:
        raise OrderError(f"refusing to enumerate subsets of a {n}-element fiber (limit {MAX_ENUMERATE})")
    masks = np.arange(1 << n, dtype=np.int64)
    bit = [(masks >> a) & 1 for a in range(n)]
    ok = bit[L.top].astype(bool)
    leq = L.over.leq
    for a in range(n):
        for b in range(n):
            if leq[a, b] and a != b:
                ok &= ~(bit[a].astype(bool)) | bit[b].astype(bool)
            m = int(L.meet[a, b])
            ok &= ~(bit[a].astype(bool) & bit[b].astype(bool)) | bit[m].astype(bool)
    out = []
    for m in masks[ok].tolist():
        out.append(Filter(L, frozenset(a for a in range(n) if m >> a & 1)))
    return out
