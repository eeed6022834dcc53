"""Single-table mutations of a doctrine, for testing the law checkers.

Each mutation edits exactly one witness table (one reindexing table, one
fiber's order, one ops record, one delta entry, or one quantifier table) and
returns a new :class:`Doctrine`.  A mutation that finds no suitable target
returns ``None``.
"""
from __future__ import annotations

import dataclasses

import numpy as np

from .doctrine import Doctrine
from .order import FinPoset


def _big(P, min_size=2):
    return [a for a, f in enumerate(P.fibers) if len(f) >= min_size]


def _other(v, n):
    return (int(v) + 1) % n


def _set_ops(P, a, **kw):
    ops = list(P.ops)
    ops[a] = dataclasses.replace(ops[a], **kw)
    return P.replace(ops=tuple(ops), name=P.name + "~")


def reind_entry(P):
    """One output of a non-identity reindexing table changed."""
    cat = P.base
    ids = set(cat.ident.tolist())
    for f in range(len(cat.morphisms)):
        n = len(P.fibers[cat.dom[f]])
        if f in ids or n < 2:
            continue
        R = P.R(f).copy()
        top = P.ops[cat.cod[f]].top
        k = top if top is not None else 0
        R[k] = _other(R[k], n)
        reind = list(P.reind)
        reind[f] = R
        return P.replace(reind=tuple(reind), name=P.name + "~")


def reind_identity(P):
    """An identity's reindexing table made into a transposition."""
    cat = P.base
    for a in _big(P):
        f = int(cat.ident[a])
        R = P.R(f).copy()
        R[[0, 1]] = R[[1, 0]]
        reind = list(P.reind)
        reind[f] = R
        return P.replace(reind=tuple(reind), name=P.name + "~")


def reind_swap(P):
    """A reindexing table replaced by that of a different parallel morphism."""
    cat = P.base
    for f in range(len(cat.morphisms)):
        for g in range(len(cat.morphisms)):
            if f != g and cat.dom[f] == cat.dom[g] and cat.cod[f] == cat.cod[g] \
                    and not np.array_equal(P.R(f), P.R(g)):
                reind = list(P.reind)
                reind[f] = P.R(g).copy()
                return P.replace(reind=tuple(reind), name=P.name + "~")


def leq_cover(P):
    """One covering pair removed from a fiber order (still a partial order)."""
    for a in _big(P):
        L = P.fibers[a].leq
        n = len(L)
        strict = L & ~np.eye(n, dtype=bool)
        for x, y in np.argwhere(strict).tolist():
            if not (strict[x] & strict[:, y]).any():
                M = L.copy()
                M[x, y] = False
                fibers = list(P.fibers)
                fibers[a] = FinPoset(P.fibers[a].elements, M)
                ops = list(P.ops)
                ops[a] = dataclasses.replace(ops[a], over=fibers[a])
                return P.replace(fibers=tuple(fibers), ops=tuple(ops), name=P.name + "~")


def top_moved(P):
    for a in _big(P):
        if P.ops[a].top is not None:
            return _set_ops(P, a, top=_other(P.ops[a].top, len(P.fibers[a])))


def bottom_moved(P):
    for a in _big(P):
        if P.ops[a].bottom is not None:
            return _set_ops(P, a, bottom=_other(P.ops[a].bottom, len(P.fibers[a])))


def _entry(P, field):
    for a in _big(P):
        T = getattr(P.ops[a], field)
        if T is None:
            continue
        T = T.copy()
        n = len(P.fibers[a])
        T[0, n - 1] = _other(T[0, n - 1], n)
        return _set_ops(P, a, **{field: T})


def meet_entry(P):
    return _entry(P, "meet")


def join_entry(P):
    return _entry(P, "join")


def imp_entry(P):
    return _entry(P, "imp")


def delta_moved(P):
    cat = P.base
    for a, d in sorted(P.delta.items()):
        p = cat.products[(a, a)][0]
        n = len(P.fibers[p])
        if n >= 2:
            delta = dict(P.delta)
            delta[a] = _other(d, n)
            return P.replace(delta=delta, name=P.name + "~")


def _quant_entry(P, attr):
    tab = getattr(P, attr)
    for key in sorted(tab):
        c = key[0]
        n = len(P.fibers[c])
        if n < 2:
            continue
        q = tab[key].copy()
        q[len(q) - 1] = _other(q[len(q) - 1], n)
        new = dict(tab)
        new[key] = q
        return P.replace(**{attr: new, "name": P.name + "~"})


def exists_entry(P):
    return _quant_entry(P, "exists_")


def forall_entry(P):
    return _quant_entry(P, "forall_")


def exists_constant(P):
    """An existential table flattened to the constant bottom map."""
    for key in sorted(P.exists_):
        c = key[0]
        b = P.ops[c].bottom
        if b is None or len(P.fibers[c]) < 2:
            continue
        new = dict(P.exists_)
        new[key] = np.full_like(P.exists_[key], b)
        return P.replace(exists_=new, name=P.name + "~")


MUTATIONS = {
    "reind_entry": reind_entry,
    "reind_identity": reind_identity,
    "reind_swap": reind_swap,
    "leq_cover": leq_cover,
    "top": top_moved,
    "bottom": bottom_moved,
    "meet": meet_entry,
    "join": join_entry,
    "imp": imp_entry,
    "delta": delta_moved,
    "exists": exists_entry,
    "exists_constant": exists_constant,
    "forall": forall_entry,
}


def mutants(P: Doctrine) -> dict:
    """All applicable mutants of ``P`` keyed by mutation name."""
    out = {}
    for name, fn in MUTATIONS.items():
        Q = fn(P)
        if Q is not None:
            out[name] = Q
    return out
