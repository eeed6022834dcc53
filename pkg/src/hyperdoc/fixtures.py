"""Canned doctrines used by tests, demos and the CLI."""
from __future__ import annotations

import numpy as np

from .doctrine import Doctrine, LAYERS
from .fincat import FinCategory, from_tables
from .order import FinPoset, LatticeOps, derive_lattice_ops
from .sets import MAX_CARRIER, SetCategory, finset_category

ALL_LAYERS = frozenset(LAYERS)


def _subset_name(labels, mask: int) -> str:
    return "{" + ",".join(l for i, l in enumerate(labels) if mask >> i & 1) + "}"


def powerset_poset(labels) -> FinPoset:
    n = len(labels)
    masks = np.arange(1 << n)
    leq = (masks[:, None] & ~masks[None, :]) == 0
    return FinPoset(tuple(_subset_name(labels, m) for m in masks.tolist()), leq)


def powerset_ops(p: FinPoset, n: int) -> LatticeOps:
    masks = np.arange(1 << n, dtype=np.int64)
    full = (1 << n) - 1
    return LatticeOps(p, top=full, meet=masks[:, None] & masks[None, :], bottom=0,
                      join=masks[:, None] | masks[None, :], imp=(~masks[:, None] | masks[None, :]) & full)


def preimage_table(fn: np.ndarray, n_cod: int) -> np.ndarray:
    S = np.arange(1 << n_cod, dtype=np.int64)
    if not len(fn):
        return np.zeros(len(S), dtype=np.int64)
    bits = (S[:, None] >> fn[None, :]) & 1
    return (bits << np.arange(len(fn), dtype=np.int64)[None, :]).sum(axis=1)


def image_table(fn: np.ndarray, n_cod: int) -> np.ndarray:
    n = len(fn)
    S = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(len(S), dtype=np.int64)
    for x in range(n):
        out |= ((S >> x) & 1) << fn[x]
    return out


def subsets_doctrine(S: SetCategory, name: str = "subsets") -> Doctrine:
    """Powersets with preimage, image along projections, and the diagonal."""
    cat = S.cat
    sizes = [len(e) for e in S.elements]
    fibers = tuple(powerset_poset(e) for e in S.elements)
    ops = tuple(powerset_ops(p, n) for p, n in zip(fibers, sizes))
    reind = tuple(preimage_table(S.fn[f], sizes[int(cat.cod[f])]) for f in range(len(cat.morphisms)))
    delta, ex, fa = {}, {}, {}
    for (c, b), (p, p1, p2) in cat.products.items():
        f1 = S.fn[p1]
        E = image_table(f1, sizes[c])
        full_p, full_c = (1 << sizes[p]) - 1, (1 << sizes[c]) - 1
        comp = full_p & ~np.arange(1 << sizes[p], dtype=np.int64)
        ex[(c, b)] = E
        fa[(c, b)] = full_c & ~E[comp]
        if c == b:
            diag = np.flatnonzero(S.fn[p1] == S.fn[p2])
            delta[c] = int(sum(1 << int(x) for x in diag))
    return Doctrine(cat, fibers, reind, ops, delta, ex, fa, ALL_LAYERS, name)


def gen_subset_doctrine(carriers=(("*",), (0, 1)), cap: int = MAX_CARRIER,
                        allow_empty: bool = False) -> Doctrine:
    """Subsets doctrine on a product-closed family of nonempty finite sets."""
    S = finset_category(carriers, cap=cap, allow_empty=allow_empty)
    P = subsets_doctrine(S)
    return P


def single_object_category(name: str = "t") -> FinCategory:
    i = f"id_{name}"
    return from_tables([name], {i: (name, name)}, {(i, i): i}, {name: i}, name, {name: i},
                       {(name, name): (name, i, i)}, name="point")


def constant_doctrine(cat: FinCategory, poset: FinPoset, ops: LatticeOps | None = None,
                      layers=ALL_LAYERS, name: str = "const") -> Doctrine:
    """Same fiber over every object, identity reindexing, identity quantifiers.

    Valid over a thin base (every hom has at most one arrow)."""
    ops = ops or derive_lattice_ops(poset)
    n = len(poset)
    fibers = tuple(poset for _ in cat.objects)
    opsl = tuple(ops for _ in cat.objects)
    reind = tuple(np.arange(n) for _ in cat.morphisms)
    ids = {k: np.arange(n) for k in cat.products}
    delta = {}
    if ops.top is not None:
        delta = {a: ops.top for a in range(len(cat.objects)) if (a, a) in cat.products}
    return Doctrine(cat, fibers, reind, opsl, delta, dict(ids), dict(ids), frozenset(layers), name)


def gen_chain_fixture() -> Doctrine:
    """A point base whose only fiber is the chain ``0 < 1/2 < 1``."""
    p = FinPoset.chain(("0", "1/2", "1"))
    layers = {"functorial", "primary", "bounded", "implicational", "joins", "heyting",
              "elementary", "existential", "universal"}
    return constant_doctrine(single_object_category("t"), p, layers=layers, name="chain")


def gen_trivial_doctrine() -> Doctrine:
    """One object, one arrow, singleton fiber."""
    p = FinPoset(("*",), np.ones((1, 1), dtype=bool))
    return constant_doctrine(single_object_category("t"), p, name="trivial")


def thin_category(objects, below, terminal, name: str = "thin") -> FinCategory:
    """Meet-semilattice as a category; ``below`` maps object -> set of objects above it.

    Products are meets, so every pair gets one.
    """
    objects = list(objects)
    ix = {o: i for i, o in enumerate(objects)}
    n = len(objects)
    L = np.eye(n, dtype=bool)
    for a, ups in below.items():
        for b in ups:
            L[ix[a], ix[b]] = True
    for k in range(n):
        L |= L[:, k:k + 1] & L[k:k + 1, :]
    mors = {}
    for a in objects:
        for b in objects:
            if L[ix[a], ix[b]]:
                mors[f"{a}<{b}"] = (a, b)
    compose = {}
    for f, (a, b) in mors.items():
        for g, (b2, c) in mors.items():
            if b2 == b:
                compose[(g, f)] = f"{a}<{c}"
    ident = {a: f"{a}<{a}" for a in objects}
    bang = {a: f"{a}<{terminal}" for a in objects}
    products = {}
    for a in objects:
        for b in objects:
            lower = [c for c in objects if L[ix[c], ix[a]] and L[ix[c], ix[b]]]
            glb = [c for c in lower if all(L[ix[d], ix[c]] for d in lower)]
            if not glb:
                raise ValueError(f"{a} and {b} have no meet")
            m = glb[0]
            products[(a, b)] = (m, f"{m}<{a}", f"{m}<{b}")
    return from_tables(objects, mors, compose, ident, terminal, bang, products, name=name)


def kripke_doctrine(worlds, extents, below, terminal="t", name: str = "kripke") -> Doctrine:
    """Thin base; the fiber over ``A`` is the powerset of the worlds where ``A`` is inhabited.

    ``extents`` maps object -> set of worlds, and must send meets to
    intersections.  Reindexing restricts, exists includes, forall adds the
    worlds outside ``B``.  The result is Boolean, elementary with ``delta = top``,
    existential and universal.  Objects without a global point make it non-rich.
    """
    worlds = list(worlds)
    cat = thin_category(list(extents), below, terminal, name=name)
    wi = {w: i for i, w in enumerate(worlds)}
    ext = [sorted(wi[w] for w in extents[o]) for o in cat.objects]
    for (a, b), (m, _, _) in cat.products.items():
        if set(ext[m]) != set(ext[a]) & set(ext[b]):
            raise ValueError("extents must turn meets into intersections")
    fibers, ops = [], []
    for o, e in zip(cat.objects, ext):
        labels = [str(worlds[i]) for i in e]
        p = powerset_poset(labels)
        fibers.append(p)
        ops.append(powerset_ops(p, len(e)))

    def restrict(src, dst):
        # subsets of ext[dst] to subsets of ext[src] (src below dst)
        pos = [ext[dst].index(w) for w in ext[src]]
        return preimage_table(np.asarray(pos, dtype=np.int64), len(ext[dst]))

    def include(src, dst):
        pos = [ext[dst].index(w) for w in ext[src]]
        return image_table(np.asarray(pos, dtype=np.int64), len(ext[dst]))

    reind = tuple(restrict(int(cat.dom[f]), int(cat.cod[f])) for f in range(len(cat.morphisms)))
    ex, fa, delta = {}, {}, {}
    for (c, b), (m, _, _) in cat.products.items():
        E = include(m, c)
        ex[(c, b)] = E
        outside = sum(1 << k for k, w in enumerate(ext[c]) if w not in ext[b])
        fa[(c, b)] = E | outside
        if c == b:
            delta[c] = (1 << len(ext[m])) - 1
    return Doctrine(cat, tuple(fibers), reind, tuple(ops), delta, ex, fa, ALL_LAYERS, name)


def gen_thin_fixture() -> Doctrine:
    """Two objects ``e < t`` over worlds ``{u, v}``; ``e`` lives only at ``u``.

    There is no arrow ``t -> e``, so the doctrine is not rich.
    """
    return kripke_doctrine(["u", "v"], {"t": {"u", "v"}, "e": {"u"}}, {"e": {"t"}}, name="thin")


def gen_antichain_fixture() -> Doctrine:
    """Point base with a 3-element antichain fiber: consistent, not two-valued."""
    p = FinPoset(("a", "b", "c"), np.eye(3, dtype=bool))
    return constant_doctrine(single_object_category("t"), p, LatticeOps(p), layers={"functorial"},
                             name="antichain")


def gen_bool_point(n_atoms: int = 2) -> Doctrine:
    """Point base whose fiber is the powerset of ``n_atoms`` atoms."""
    labels = [chr(ord("x") + i) if n_atoms <= 3 else f"a{i}" for i in range(n_atoms)]
    p = powerset_poset(labels)
    return constant_doctrine(single_object_category("t"), p, powerset_ops(p, n_atoms), name="cube")
