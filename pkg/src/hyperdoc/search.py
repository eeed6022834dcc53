"""Exhaustive search for doctrine morphisms with prescribed parts.

Used to confirm that mediators are unique at fixture scale.  The functor is
found by backtracking with composition propagation; the fiber components by
backtracking over domain masks with arc consistency on the naturality
(functional) and monotonicity constraints.  Every complete candidate is
checked with :func:`check_morphism`.
"""
from __future__ import annotations

import numpy as np

from .doctrine import Doctrine, DoctrineMorphism, check_morphism


def functor_solutions(src, dst, F_obj, fixed: dict, limit: int = 2) -> list:
    """Morphism tables ``F_mor`` extending ``fixed`` that respect endpoints,
    identities and composition.  At most ``limit`` are returned."""
    F_obj = np.asarray(F_obj, dtype=np.int64)
    M = len(src.morphisms)
    gi, fi = np.nonzero(src.comp >= 0)
    hi = src.comp[gi, fi]
    doms = [dst.hom(int(F_obj[src.dom[f]]), int(F_obj[src.cod[f]])) for f in range(M)]
    start = np.full(M, -1, dtype=np.int64)
    for a in range(len(src.objects)):
        start[src.ident[a]] = dst.ident[F_obj[a]]
    for f, v in fixed.items():
        if start[f] >= 0 and start[f] != v:
            return []
        start[f] = v
    for f in range(M):
        if start[f] >= 0 and start[f] not in doms[f]:
            return []

    def propagate(F):
        while True:
            g, f, h = F[gi], F[fi], F[hi]
            known = (g >= 0) & (f >= 0)
            comp = np.where(known, dst.comp[np.maximum(g, 0), np.maximum(f, 0)], -1)
            if (known & (comp < 0)).any():
                return False
            bad = known & (h >= 0) & (comp != h)
            if bad.any():
                return False
            new = known & (h < 0)
            if not new.any():
                return True
            F[hi[new]] = comp[new]

    out = []

    def go(F):
        if len(out) >= limit:
            return
        if not propagate(F):
            return
        free = np.flatnonzero(F < 0)
        if not len(free):
            out.append(F.copy())
            return
        f = int(min(free, key=lambda k: len(doms[k])))
        for v in doms[f].tolist():
            G = F.copy()
            G[f] = v
            go(G)

    go(start)
    return out


def component_solutions(src: Doctrine, dst: Doctrine, F_obj, F_mor, fixed: dict,
                        layers, limit: int = 2) -> list:
    """Fiber component tuples making ``(F, comp)`` a morphism preserving ``layers``.

    ``fixed`` maps ``(object, element) -> target element``.
    """
    F_obj = np.asarray(F_obj, dtype=np.int64)
    F_mor = np.asarray(F_mor, dtype=np.int64)
    sc = src.base
    n = len(sc.objects)
    off = np.cumsum([0] + [len(f) for f in src.fibers])
    V = int(off[-1])
    tsize = [len(dst.fibers[int(F_obj[a])]) for a in range(n)]
    width = max(tsize) if tsize else 1
    dom0 = np.zeros((V, width), dtype=bool)
    for a in range(n):
        dom0[off[a]:off[a + 1], :tsize[a]] = True
    # functional constraints x[u] = h[x[v]]
    funs = []      # (u, v, h)
    for f in range(len(sc.morphisms)):
        a, b = int(sc.dom[f]), int(sc.cod[f])
        R = src.R(f)
        h = dst.R(int(F_mor[f]))
        for y in range(len(R)):
            funs.append((int(off[a] + R[y]), int(off[b] + y), h))
    order = []     # (lo, hi, obj): x[lo] <= x[hi]
    for a in range(n):
        L = src.fibers[a].leq
        for y, z in np.argwhere(L & ~np.eye(len(L), dtype=bool)).tolist():
            order.append((int(off[a] + y), int(off[a] + z), a))
    for (a, y), v in fixed.items():
        row = np.zeros(width, dtype=bool)
        row[v] = True
        dom0[off[a] + y] &= row
    if "primary" in layers:
        for a in range(n):
            if src.ops[a].top is not None and dst.ops[int(F_obj[a])].top is not None:
                row = np.zeros(width, dtype=bool)
                row[dst.ops[int(F_obj[a])].top] = True
                dom0[off[a] + src.ops[a].top] &= row
    if "bounded" in layers:
        for a in range(n):
            if src.ops[a].bottom is not None and dst.ops[int(F_obj[a])].bottom is not None:
                row = np.zeros(width, dtype=bool)
                row[dst.ops[int(F_obj[a])].bottom] = True
                dom0[off[a] + src.ops[a].bottom] &= row
    by_var = [[] for _ in range(V)]
    for k, (u, v, h) in enumerate(funs):
        by_var[u].append(("f", k))
        by_var[v].append(("f", k))
    for k, (lo, hi, a) in enumerate(order):
        by_var[lo].append(("o", k))
        by_var[hi].append(("o", k))
    dleq = [dst.fibers[int(F_obj[a])].leq for a in range(n)]

    def revise(D, kind, k):
        changed = []
        if kind == "f":
            u, v, h = funs[k]
            nv = len(h)
            # x[v] must map into D[u]; x[u] must be an image of D[v]
            okv = np.zeros(width, dtype=bool)
            okv[:nv] = D[u][h]
            newv = D[v] & okv
            img = np.zeros(width, dtype=bool)
            img[h[D[v][:nv]]] = True
            newu = D[u] & img
        else:
            lo, hi, a = order[k]
            L = dleq[a]
            m = len(L)
            lov, hiv = D[lo][:m], D[hi][:m]
            newlo = D[lo].copy()
            newlo[:m] &= (L & hiv[None, :]).any(axis=1)
            newhi = D[hi].copy()
            newhi[:m] &= (L & lov[:, None]).any(axis=0)
            u, v, newu, newv = lo, hi, newlo, newhi
        for var, new in ((u, newu), (v, newv)):
            if (new != D[var]).any():
                D[var] = new
                changed.append(var)
        return changed

    def ac(D, queue):
        queue = list(queue)
        seen = set(queue)
        while queue:
            var = queue.pop()
            seen.discard(var)
            for kind, k in by_var[var]:
                for w in revise(D, kind, k):
                    if not D[w].any():
                        return False
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
        return bool(D.any(axis=1).all())

    out = []

    def go(D):
        if len(out) >= limit:
            return
        sizes = D.sum(axis=1)
        if (sizes == 0).any():
            return
        if (sizes == 1).all():
            vals = D.argmax(axis=1)
            comp = tuple(vals[off[a]:off[a + 1]].copy() for a in range(n))
            m = DoctrineMorphism(src, dst, F_obj, F_mor, comp, frozenset(layers))
            if check_morphism(m, layers).ok:
                out.append(comp)
            return
        var = int(np.argmin(np.where(sizes > 1, sizes, np.iinfo(np.int64).max)))
        for val in np.flatnonzero(D[var]).tolist():
            E = D.copy()
            E[var] = False
            E[var, val] = True
            if ac(E, [var]):
                go(E)

    D = dom0.copy()
    if ac(D, range(V)):
        go(D)
    return out


def morphism_solutions(src: Doctrine, dst: Doctrine, F_obj, fixed_mor: dict, fixed_comp: dict,
                       layers, limit: int = 2, functor_limit: int = 256) -> list:
    """All ``DoctrineMorphism``s (up to ``limit``) with the prescribed parts."""
    out = []
    for F_mor in functor_solutions(src.base, dst.base, F_obj, fixed_mor, limit=functor_limit):
        for comp in component_solutions(src, dst, F_obj, F_mor, fixed_comp, layers, limit=limit - len(out)):
            out.append(DoctrineMorphism(src, dst, F_obj, F_mor, comp, frozenset(layers), "found"))
            if len(out) >= limit:
                return out
    return out
