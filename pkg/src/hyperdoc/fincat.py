"""Finite categories with chosen (possibly partial) binary products.

Objects and morphisms are addressed by name in the public helpers and by
integer index inside the tables.  Composition is a dense ``M x M`` table
with ``-1`` where ``g o f`` is undefined.

A finite category that has *all* binary products is thin, so the
interesting fixtures (finite sets on ``{*}``, ``{0,1}``) carry a product
table defined only on some pairs.  Every law check runs over the pairs
that are present.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np


class StructuralError(ValueError):
    """Malformed input: dangling ids, wrong table shapes, missing entries."""


class ProductError(ValueError):
    """Tupling has zero or several candidates."""


@dataclass(frozen=True, eq=False)
class FinCategory:
    objects: tuple
    morphisms: tuple
    dom: np.ndarray
    cod: np.ndarray
    comp: np.ndarray
    ident: np.ndarray
    terminal: int
    bang: np.ndarray
    products: Mapping = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        M = len(self.morphisms)
        if self.comp.shape != (M, M):
            raise StructuralError(f"composition table has shape {self.comp.shape}, expected {(M, M)}")
        n = len(self.objects)
        for arr, what in ((self.ident, "identity"), (self.bang, "unique-map")):
            if len(arr) != n:
                raise StructuralError(f"{what} table must have one entry per object")
        if not 0 <= self.terminal < n:
            raise StructuralError("terminal object out of range")
        if M and (self.dom.min() < 0 or self.dom.max() >= n or self.cod.min() < 0 or self.cod.max() >= n):
            raise StructuralError("dom/cod refers to an undeclared object")
        if M and (self.comp.max() >= M or self.comp.min() < -1):
            raise StructuralError("composition table refers to an undeclared morphism")
        for (a, b), (p, p1, p2) in self.products.items():
            if not (0 <= a < n and 0 <= b < n and 0 <= p < n and 0 <= p1 < M and 0 <= p2 < M):
                raise StructuralError(f"product entry {(a, b)} has dangling ids")

    # -- lookups -----------------------------------------------------------
    @cached_property
    def obj_index(self) -> dict:
        return {o: i for i, o in enumerate(self.objects)}

    @cached_property
    def mor_index(self) -> dict:
        return {m: i for i, m in enumerate(self.morphisms)}

    @cached_property
    def _homs(self) -> dict:
        out = {}
        for i, (a, b) in enumerate(zip(self.dom.tolist(), self.cod.tolist())):
            out.setdefault((a, b), []).append(i)
        return {k: np.asarray(v, dtype=np.int64) for k, v in out.items()}

    def hom(self, a: int, b: int) -> np.ndarray:
        return self._homs.get((a, b), np.zeros(0, dtype=np.int64))

    def obj(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self.obj_index[name]
        except KeyError:
            raise StructuralError(f"unknown object {name!r}") from None

    def mor(self, name) -> int:
        if isinstance(name, (int, np.integer)):
            return int(name)
        try:
            return self.mor_index[name]
        except KeyError:
            raise StructuralError(f"unknown morphism {name!r}") from None

    def compose(self, g: int, f: int) -> int:
        """``g o f``."""
        h = int(self.comp[g, f])
        if h < 0:
            raise StructuralError(f"{self.morphisms[g]} o {self.morphisms[f]} is not composable")
        return h

    def chain(self, *fs: int) -> int:
        """Compose right to left: ``chain(h, g, f) = h o g o f``."""
        out = fs[-1]
        for g in reversed(fs[:-1]):
            out = self.compose(g, out)
        return out

    def has_product(self, a: int, b: int) -> bool:
        return (a, b) in self.products

    def product(self, a: int, b: int):
        try:
            return self.products[(a, b)]
        except KeyError:
            raise ProductError(
                f"no chosen product for ({self.objects[a]}, {self.objects[b]})") from None

    @cached_property
    def _tuple_cache(self) -> dict:
        return {}

    def tuple(self, f: int, g: int) -> int:
        """The unique ``h`` with ``pr1 o h = f`` and ``pr2 o h = g``."""
        c = int(self.dom[f])
        if int(self.dom[g]) != c:
            raise ProductError("tupling needs a common domain")
        a, b = int(self.cod[f]), int(self.cod[g])
        key = (a, b, c)
        table = self._tuple_cache.get(key)
        if table is None:
            p, p1, p2 = self.product(a, b)
            table = {}
            for h in self.hom(c, p).tolist():
                k = (int(self.comp[p1, h]), int(self.comp[p2, h]))
                table.setdefault(k, []).append(h)
            self._tuple_cache[key] = table
        hs = table.get((f, g), [])
        if len(hs) != 1:
            raise ProductError(
                f"tupling <{self.morphisms[f]},{self.morphisms[g]}> has {len(hs)} candidates")
        return hs[0]

    def cross(self, f: int, g: int) -> int:
        """``f x g = <f o pr1, g o pr2>`` between chosen products."""
        a, b = int(self.dom[f]), int(self.dom[g])
        _, p1, p2 = self.product(a, b)
        return self.tuple(self.compose(f, p1), self.compose(g, p2))

    def diagonal(self, a: int) -> int:
        i = int(self.ident[a])
        return self.tuple(i, i)

    def associator(self, a: int, b: int, c: int) -> int:
        """``(A x B) x C -> A x (B x C)`` built by tupling."""
        ab, p1, p2 = self.product(a, b)
        _, q1, q2 = self.product(ab, c)
        bc = self.tuple(self.compose(p2, q1), q2)
        return self.tuple(self.compose(p1, q1), bc)

    def is_iso(self, f: int):
        """Return the inverse of ``f`` or ``None``."""
        a, b = int(self.dom[f]), int(self.cod[f])
        for g in self.hom(b, a).tolist():
            if self.comp[g, f] == self.ident[a] and self.comp[f, g] == self.ident[b]:
                return g
        return None

    def __repr__(self):
        return f"FinCategory({self.name or '?'}: {len(self.objects)} objects, {len(self.morphisms)} morphisms)"


def from_tables(objects: Iterable, morphisms: Mapping, compose: Mapping, identity: Mapping,
                terminal, bang: Mapping, products: Mapping | None = None, name: str = "") -> FinCategory:
    """Build a category from name-keyed tables.

    ``morphisms`` maps name -> (dom, cod); ``compose`` maps (g, f) -> g o f;
    ``products`` maps (A, B) -> (AxB, pr1, pr2).  Dangling ids raise
    :class:`StructuralError`; law violations are left to :func:`validate_category`.
    """
    objects = tuple(objects)
    oi = {o: i for i, o in enumerate(objects)}
    if len(oi) != len(objects):
        raise StructuralError("duplicate object id")
    mnames = tuple(morphisms)
    mi = {m: i for i, m in enumerate(mnames)}

    def O(x, where):
        if x not in oi:
            raise StructuralError(f"{where}: undeclared object {x!r}")
        return oi[x]

    def Mo(x, where):
        if x not in mi:
            raise StructuralError(f"{where}: undeclared morphism {x!r}")
        return mi[x]

    dom = np.array([O(morphisms[m][0], f"morphism {m}") for m in mnames], dtype=np.int64)
    cod = np.array([O(morphisms[m][1], f"morphism {m}") for m in mnames], dtype=np.int64)
    M = len(mnames)
    comp = np.full((M, M), -1, dtype=np.int64)
    for (g, f), h in compose.items():
        comp[Mo(g, "compose"), Mo(f, "compose")] = Mo(h, "compose")
    for f in range(M):
        for g in range(M):
            if dom[g] == cod[f] and comp[g, f] < 0:
                raise StructuralError(
                    f"composition table is missing {mnames[g]} o {mnames[f]}")
    ident = np.array([Mo(identity[o], "identity") if o in identity else -1 for o in objects], dtype=np.int64)
    if (ident < 0).any():
        raise StructuralError("identity table is missing an object")
    bang_arr = np.array([Mo(bang[o], "unique-map") if o in bang else -1 for o in objects], dtype=np.int64)
    if (bang_arr < 0).any():
        raise StructuralError("unique-map table is missing an object")
    prods = {}
    for (a, b), (p, p1, p2) in (products or {}).items():
        prods[(O(a, "product"), O(b, "product"))] = (O(p, "product"), Mo(p1, "product"), Mo(p2, "product"))
    return FinCategory(objects, mnames, dom, cod, comp, ident, O(terminal, "terminal"), bang_arr, prods, name)


# -- validation --------------------------------------------------------------

@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    def __bool__(self):  # truthy when clean
        return not self.violations

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set:
        return {v[0] for v in self.violations}


def validate_category(cat: FinCategory, limit: int | None = None) -> ValidationReport:
    """Brute-force check of every category and chosen-product law.

    Violations are tuples ``(kind, *names)``.
    """
    rep = ValidationReport()
    out = rep.violations
    C, dom, cod = cat.comp, cat.dom, cat.cod
    M = len(cat.morphisms)
    names = cat.morphisms

    def full():
        return limit is not None and len(out) >= limit

    composable = cod[None, :] == dom[:, None]  # [g, f]
    defined = C >= 0
    bad = np.argwhere(composable != defined)
    for g, f in bad.tolist():
        out.append(("composability", names[g], names[f]))
    ok = composable & defined
    for g, f in np.argwhere(ok).tolist():
        h = C[g, f]
        if dom[h] != dom[f] or cod[h] != cod[g]:
            out.append(("composite-endpoints", names[g], names[f]))
    if full():
        return rep

    for a, i in enumerate(cat.ident.tolist()):
        if dom[i] != a or cod[i] != a:
            out.append(("identity-endpoints", cat.objects[a]))
    for f in range(M):
        if C[f, cat.ident[dom[f]]] != f or C[cat.ident[cod[f]], f] != f:
            out.append(("identity", names[f]))
    if full():
        return rep

    # associativity, one h at a time
    idx = np.arange(M)
    for h in range(M):
        hg = C[h]                                   # h o g for every g
        sel = hg >= 0
        if not sel.any():
            continue
        gs = idx[sel]
        left = C[hg[sel]][:, :]                     # (h o g) o f  [g, f]
        gf = C[gs]                                  # g o f
        mask = gf >= 0
        right = np.where(mask, C[h][np.where(mask, gf, 0)], -1)
        diff = mask & (left != right)
        if diff.any():
            for gi, f in np.argwhere(diff).tolist():
                out.append(("associativity", names[h], names[gs[gi]], names[f]))
                if full():
                    return rep

    t = cat.terminal
    for a in range(len(cat.objects)):
        hs = cat.hom(a, t).tolist()
        b = int(cat.bang[a])
        if hs != [b]:
            out.append(("terminal", cat.objects[a], len(hs)))
    if full():
        return rep

    for (a, b), (p, p1, p2) in sorted(cat.products.items()):
        if dom[p1] != p or cod[p1] != a or dom[p2] != p or cod[p2] != b:
            out.append(("projection-endpoints", cat.objects[a], cat.objects[b]))
            continue
        for c in range(len(cat.objects)):
            seen = {}
            for h in cat.hom(c, p).tolist():
                seen.setdefault((int(C[p1, h]), int(C[p2, h])), []).append(h)
            for f in cat.hom(c, a).tolist():
                for g in cat.hom(c, b).tolist():
                    n = len(seen.get((f, g), ()))
                    if n != 1:
                        out.append(("tupling", cat.objects[a], cat.objects[b], names[f], names[g], n))
                        if full():
                            return rep
    return rep


# -- name-level helpers ---------------------------------------------------------

def tuple_(cat: FinCategory, f, g) -> str:
    """Name-level tupling ``<f, g>``."""
    return cat.morphisms[cat.tuple(cat.mor(f), cat.mor(g))]


def hom_set(cat: FinCategory, A, B) -> list:
    """All morphisms ``A -> B`` in index order."""
    return [cat.morphisms[i] for i in cat.hom(cat.obj(A), cat.obj(B)).tolist()]


# -- restriction and Kleisli -----------------------------------------------------

def full_subcategory(cat: FinCategory, keep: Iterable[int], name: str = ""):
    """Full subcategory on ``keep`` with the products that stay inside.

    Returns ``(sub, obj_map, mor_map)`` where the maps send new indices to old.
    """
    keep = sorted(set(int(k) for k in keep))
    if cat.terminal not in keep:
        raise StructuralError("a full subcategory must keep the terminal object")
    onew = {o: i for i, o in enumerate(keep)}
    mor_old = [f for f in range(len(cat.morphisms)) if cat.dom[f] in onew and cat.cod[f] in onew]
    mnew = {f: i for i, f in enumerate(mor_old)}
    old = np.asarray(mor_old, dtype=np.int64)
    sub = cat.comp[np.ix_(old, old)] if len(old) else np.zeros((0, 0), dtype=np.int64)
    remap = np.full(len(cat.morphisms) + 1, -1, dtype=np.int64)
    remap[old] = np.arange(len(old))
    comp = np.where(sub >= 0, remap[sub], -1)
    prods = {}
    for (a, b), (p, p1, p2) in cat.products.items():
        if a in onew and b in onew and p in onew:
            prods[(onew[a], onew[b])] = (onew[p], mnew[p1], mnew[p2])
    out = FinCategory(
        tuple(cat.objects[o] for o in keep),
        tuple(cat.morphisms[f] for f in mor_old),
        np.array([onew[int(cat.dom[f])] for f in mor_old], dtype=np.int64),
        np.array([onew[int(cat.cod[f])] for f in mor_old], dtype=np.int64),
        comp,
        np.array([mnew[int(cat.ident[o])] for o in keep], dtype=np.int64),
        onew[cat.terminal],
        np.array([mnew[int(cat.bang[o])] for o in keep], dtype=np.int64),
        prods,
        name or cat.name,
    )
    return out, np.asarray(keep, dtype=np.int64), old


@dataclass(frozen=True, eq=False)
class KleisliPresentation:
    """Kleisli category of the reader comonad ``X x -``.

    ``objects[i]`` is the base object behind Kleisli object ``i`` and
    ``backing[k]`` the base arrow ``X x A -> B`` behind Kleisli arrow ``k``.
    Only objects ``A`` with ``X x A`` chosen in the base are kept.
    """
    base: FinCategory
    sort: int
    category: FinCategory
    objects: np.ndarray
    backing: np.ndarray
    constant: int | None

    @property
    def distinguished_constant(self):
        return self.constant

    def xa(self, k_obj: int):
        """``(X x A, pr1, pr2)`` in the base for Kleisli object ``k_obj``."""
        return self.base.product(self.sort, int(self.objects[k_obj]))


def kleisli_reader(cat: FinCategory, X) -> KleisliPresentation:
    X = cat.obj(X)
    base_objs = [a for a in range(len(cat.objects)) if cat.has_product(X, a)]
    if cat.terminal not in base_objs:
        raise ProductError(f"{cat.objects[X]} x t is not chosen; no Kleisli category")
    on = {a: i for i, a in enumerate(base_objs)}

    morphs, dom, cod, backing = [], [], [], []
    for a in base_objs:
        xa = cat.product(X, a)[0]
        for b in base_objs:
            for f in cat.hom(xa, b).tolist():
                morphs.append(f"{cat.morphisms[f]}/{cat.objects[a]}")
                dom.append(on[a])
                cod.append(on[b])
                backing.append(f)
    M = len(morphs)
    by_backing = {}
    for k in range(M):
        by_backing[(dom[k], backing[k])] = k

    comp = np.full((M, M), -1, dtype=np.int64)
    for kf in range(M):
        a, b = base_objs[dom[kf]], base_objs[cod[kf]]
        _, p1, _ = cat.product(X, a)
        lift = cat.tuple(p1, backing[kf])        # <pr1, f>: X x A -> X x B
        row = cat.comp[:, lift]
        for kg in range(M):
            if dom[kg] != cod[kf]:
                continue
            comp[kg, kf] = by_backing[(dom[kf], int(row[backing[kg]]))]

    ident = np.array([by_backing[(on[a], cat.product(X, a)[2])] for a in base_objs], dtype=np.int64)
    t = on[cat.terminal]
    bang = np.array([by_backing[(on[a], int(cat.bang[cat.product(X, a)[0]]))] for a in base_objs],
                    dtype=np.int64)

    prods = {}
    for a in base_objs:
        for b in base_objs:
            if not cat.has_product(a, b):
                continue
            p, p1, p2 = cat.product(a, b)
            if p not in on:
                continue
            xa = cat.product(X, a)[0]
            if not cat.has_product(xa, b):
                continue  # needed to transport quantifiers
            _, _, xp2 = cat.product(X, p)
            k1 = by_backing[(on[p], cat.compose(p1, xp2))]
            k2 = by_backing[(on[p], cat.compose(p2, xp2))]
            prods[(on[a], on[b])] = (on[p], k1, k2)

    K = FinCategory(tuple(cat.objects[a] for a in base_objs), tuple(morphs),
                    np.asarray(dom, dtype=np.int64), np.asarray(cod, dtype=np.int64), comp, ident, t, bang,
                    prods, name=f"{cat.name}[{cat.objects[X]}]")
    const = None
    if X in on:
        # t ~> X backed by pr1 : X x t -> X (id_X when X x t is X itself)
        const = by_backing[(t, cat.product(X, cat.terminal)[1])]
    return KleisliPresentation(cat, X, K, np.asarray(base_objs, dtype=np.int64),
                               np.asarray(backing, dtype=np.int64), const)


def nary_product(cat: FinCategory, objs):
    """Left-nested product ``((A1 x A2) x A3) ...`` and its projections."""
    objs = [cat.obj(o) for o in objs]
    if not objs:
        t = cat.terminal
        return t, []
    cur = objs[0]
    projs = [int(cat.ident[cur])]
    for b in objs[1:]:
        p, p1, p2 = cat.product(cur, b)
        projs = [cat.compose(q, p1) for q in projs] + [p2]
        cur = p
    return cur, projs
