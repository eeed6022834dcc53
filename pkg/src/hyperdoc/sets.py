"""Concrete finite sets and all functions between them, as a FinCategory."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .fincat import FinCategory, StructuralError

MAX_CARRIER = 5     # keeps powerset fibers at <= 32 elements


@dataclass(frozen=True, eq=False)
class SetCategory:
    cat: FinCategory
    elements: tuple          # per object: tuple of element labels
    fn: tuple                # per morphism: int array, dom element -> cod element

    def size(self, a: int) -> int:
        return len(self.elements[a])


def _label(x) -> str:
    return x if isinstance(x, str) else str(x)


def _auto_names(carriers: Sequence) -> list:
    names, seen = [], {}
    for c in carriers:
        base = str(len(c))
        k = seen.get(base, 0)
        seen[base] = k + 1
        names.append(base if k == 0 else f"{base}{chr(ord('a') + k)}")
    return names


def finset_category(carriers, cap: int = MAX_CARRIER, allow_empty: bool = False,
                    name: str = "Set") -> SetCategory:
    """Full subcategory of finite sets on ``carriers`` closed under products up to ``cap``.

    ``t x A`` and ``A x t`` are chosen as ``A`` itself (for any singleton
    ``t``), as are products with the empty set when it is allowed.  Other products become new objects
    named ``AxB`` while their size stays within ``cap``.
    """
    if isinstance(carriers, Mapping):
        names = [str(k) for k in carriers]
        sets = [tuple(_label(x) for x in v) for v in carriers.values()]
    else:
        sets = [tuple(_label(x) for x in c) for c in carriers]
        names = _auto_names(sets)
    for nm, s in zip(names, sets):
        if not s and not allow_empty:
            raise StructuralError(
                f"carrier {nm} is empty; the subsets doctrine here works over nonempty sets "
                "(pass allow_empty=True to include it for debugging)")
        if len(set(s)) != len(s):
            raise StructuralError(f"carrier {nm} repeats an element")
        if len(s) > cap:
            raise StructuralError(f"carrier {nm} has {len(s)} elements, cap is {cap}")
    if not any(len(s) == 1 for s in sets):
        names.insert(0, "1")
        sets.insert(0, ("*",))
    t = next(i for i, s in enumerate(sets) if len(s) == 1)

    objs = list(zip(names, sets))
    # projections as element tables: prod[(a, b)] = (p, pr1 table, pr2 table)
    prod = {}
    done = set()
    while True:
        pending = [(a, b) for a in range(len(objs)) for b in range(len(objs)) if (a, b) not in done]
        if not pending:
            break
        for a, b in pending:
            done.add((a, b))
            A, B = objs[a][1], objs[b][1]
            if b == t or len(B) == 1:
                prod[(a, b)] = (a, np.arange(len(A)), np.zeros(len(A), dtype=np.int64))
            elif a == t or len(A) == 1:
                prod[(a, b)] = (b, np.zeros(len(B), dtype=np.int64), np.arange(len(B)))
            elif not A:
                prod[(a, b)] = (a, np.arange(0), np.arange(0))
            elif not B:
                prod[(a, b)] = (b, np.arange(0), np.arange(0))
            elif len(A) * len(B) <= cap:
                els = tuple(f"({x},{y})" for x in A for y in B)
                objs.append((f"{objs[a][0]}x{objs[b][0]}", els))
                p = len(objs) - 1
                prod[(a, b)] = (p, np.repeat(np.arange(len(A)), len(B)), np.tile(np.arange(len(B)), len(A)))
    names = [o[0] for o in objs]
    if len(set(names)) != len(names):
        raise StructuralError("object names collide after product closure")
    return _all_functions(names, [o[1] for o in objs], t, prod, name)


def function_category(carriers: Mapping, terminal, products: Mapping, name: str = "Set") -> SetCategory:
    """All functions between the given carriers, with the given chosen products.

    ``products`` maps ``(A, B)`` names to ``(P, pr1 table, pr2 table)``; the
    tables must make ``P`` a product of ``A`` and ``B``.
    """
    names = [str(k) for k in carriers]
    ix = {n: i for i, n in enumerate(names)}
    sets = [tuple(_label(x) for x in v) for v in carriers.values()]
    prod = {}
    for (a, b), (p, t1, t2) in products.items():
        t1, t2 = np.asarray(t1, dtype=np.int64), np.asarray(t2, dtype=np.int64)
        pairs = set(zip(t1.tolist(), t2.tolist()))
        if len(pairs) != len(t1) or len(pairs) != len(sets[ix[a]]) * len(sets[ix[b]]):
            raise StructuralError(f"{p} with the given projections is not a product of {a} and {b}")
        prod[(ix[a], ix[b])] = (ix[p], t1, t2)
    t = ix[terminal]
    if len(sets[t]) != 1:
        raise StructuralError("terminal carrier must be a singleton")
    return _all_functions(names, sets, t, prod, name)


def _all_functions(names, sets, t, prod, name) -> SetCategory:
    objs = list(zip(names, sets))
    sizes = [len(o[1]) for o in objs]
    n = len(objs)

    # enumerate all functions, block by block
    offset = {}
    mnames, dom, cod, tables = [], [], [], []
    for a in range(n):
        for b in range(n):
            offset[(a, b)] = len(mnames)
            for img in itertools.product(range(sizes[b]), repeat=sizes[a]):
                sep = "" if sizes[b] <= 10 else "."
                mnames.append(f"{names[a]}>{names[b]}:{sep.join(map(str, img))}")
                dom.append(a)
                cod.append(b)
                tables.append(np.asarray(img, dtype=np.int64))
    M = len(mnames)
    comp = np.full((M, M), -1, dtype=np.int64)
    for a in range(n):
        for b in range(n):
            fa = offset[(a, b)]
            nf = sizes[b] ** sizes[a]
            F = np.array([tables[fa + i] for i in range(nf)], dtype=np.int64).reshape(nf, sizes[a])
            for c in range(n):
                ga = offset[(b, c)]
                ng = sizes[c] ** sizes[b]
                G = np.array([tables[ga + i] for i in range(ng)], dtype=np.int64).reshape(ng, sizes[b])
                H = G[:, F] if sizes[b] else np.zeros((ng, nf, sizes[a]), dtype=np.int64)   # [g, f, x]
                weights = sizes[c] ** np.arange(sizes[a] - 1, -1, -1, dtype=np.int64)
                code = (H * weights).sum(axis=2) if sizes[a] else np.zeros((ng, nf), dtype=np.int64)
                comp[ga:ga + ng, fa:fa + nf] = offset[(a, c)] + code

    def find(a, b, table):
        w = sizes[b] ** np.arange(sizes[a] - 1, -1, -1, dtype=np.int64)
        return offset[(a, b)] + int((np.asarray(table, dtype=np.int64) * w).sum())

    ident = np.array([find(a, a, np.arange(sizes[a])) for a in range(n)], dtype=np.int64)
    bang = np.array([find(a, t, np.zeros(sizes[a], dtype=np.int64)) for a in range(n)], dtype=np.int64)
    products = {}
    for (a, b), (p, t1, t2) in prod.items():
        products[(a, b)] = (p, find(p, a, t1), find(p, b, t2))
    cat = FinCategory(tuple(names), tuple(mnames), np.asarray(dom, dtype=np.int64),
                      np.asarray(cod, dtype=np.int64), comp, ident, t, bang, products, name)
    return SetCategory(cat, tuple(o[1] for o in objs), tuple(tables))
