"""Doctrine documents: a JSON tree with category, fibers, reindexing, structure and meta.

Objects, morphisms and fiber elements keep their declared order, since the
order is what every deterministic scan uses.  Unordered collections
(composition triples, product entries, order pairs, quantifier tables) are
sorted on output.  Serialization is byte-stable: sorted keys, one scalar list
per line, trailing newline.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .doctrine import LAYERS, Doctrine
from .fincat import StructuralError, from_tables
from .fixtures import gen_chain_fixture, gen_subset_doctrine   # re-exported generators
from .order import FinPoset, LatticeOps, OrderError, derive_lattice_ops

FORMAT = "hyperdoc/1"
EXTENSION = ".hdoc.json"
MEDIA_TYPE = "application/vnd.hyperdoc+json"

__all__ = ["parse_doctrine", "serialize_doctrine", "normalize", "load", "dump", "DocumentError",
           "DocumentSyntaxError", "DanglingIdError", "DeriveError", "gen_subset_doctrine",
           "gen_chain_fixture", "FORMAT", "EXTENSION", "MEDIA_TYPE"]


class DocumentError(ValueError):
    pass


class DocumentSyntaxError(DocumentError):
    def __init__(self, msg, line, col):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line, self.col = line, col


class DanglingIdError(DocumentError):
    def __init__(self, ref, where):
        super().__init__(f"undeclared id {ref!r} in {where}")
        self.ref, self.where = ref, where


class DeriveError(DocumentError):
    pass


# -- writing ----------------------------------------------------------------------------

def _emit(x: Any, ind: int = 0) -> str:
    pad, pad1 = " " * ind, " " * (ind + 1)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{pad1}{json.dumps(k)}: {_emit(x[k], ind + 1)}" for k in sorted(x)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, list):
        if all(not isinstance(v, (dict, list)) for v in x):
            return json.dumps(x, separators=(", ", ": "))
        return "[\n" + ",\n".join(pad1 + _emit(v, ind + 1) for v in x) + "\n" + pad + "]"
    return json.dumps(x)


def to_tree(P: Doctrine) -> dict:
    cat = P.base
    O, M = cat.objects, cat.morphisms
    comp = [[M[g], M[f], M[int(cat.comp[g, f])]] for g, f in np.argwhere(cat.comp >= 0).tolist()]
    category = {
        "objects": list(O),
        "morphisms": {M[f]: [O[int(cat.dom[f])], O[int(cat.cod[f])]] for f in range(len(M))},
        "morphism_order": list(M),
        "compose": sorted(comp),
        "identity": {O[a]: M[int(cat.ident[a])] for a in range(len(O))},
        "terminal": O[cat.terminal],
        "bang": {O[a]: M[int(cat.bang[a])] for a in range(len(O))},
        "products": sorted([O[a], O[b], O[p], M[p1], M[p2]] for (a, b), (p, p1, p2) in cat.products.items()),
    }
    fibers = {}
    for a in range(len(O)):
        f = P.fibers[a]
        pairs = [[f.elements[x], f.elements[y]] for x, y in np.argwhere(f.leq).tolist() if x != y]
        fibers[O[a]] = {"elements": list(f.elements), "leq": sorted(pairs)}
    reind = {}
    for g in range(len(M)):
        src, dst = P.fibers[int(cat.cod[g])], P.fibers[int(cat.dom[g])]
        reind[M[g]] = {src.elements[y]: dst.elements[int(v)] for y, v in enumerate(P.R(g).tolist())}
    ops = {}
    for a in range(len(O)):
        o, el = P.ops[a], P.fibers[a].elements
        d = derive_lattice_ops(P.fibers[a])
        entry = {}
        for k in ("top", "bottom"):
            v = getattr(o, k)
            if v is not None:
                entry[k] = "derive" if getattr(d, k) == v else el[int(v)]
        for k in ("meet", "join", "imp"):
            T = getattr(o, k)
            if T is None:
                continue
            D = getattr(d, k)
            if D is not None and np.array_equal(D, T):
                entry[k] = "derive"
            else:
                entry[k] = sorted([el[x], el[y], el[int(T[x, y])]] for x in range(len(el)) for y in range(len(el)))
        ops[O[a]] = entry
    def qtab(tab):
        out = []
        for (c, b), T in sorted(tab.items()):
            p = cat.product(c, b)[0]
            src, dst = P.fibers[p].elements, P.fibers[c].elements
            out.append({"over": [O[c], O[b]], "table": {src[x]: dst[int(v)] for x, v in enumerate(T.tolist())}})
        return sorted(out, key=lambda e: e["over"])
    structure = {
        "layers": sorted(P.layers, key=LAYERS.index),
        "ops": ops,
        "delta": {O[a]: P.fibers[cat.product(a, a)[0]].elements[int(d)] for a, d in P.delta.items()},
        "exists": qtab(P.exists_),
        "forall": qtab(P.forall_),
    }
    meta = {"name": P.name}
    note = P.meta.get("note") if isinstance(P.meta, dict) else None
    if note:
        meta["note"] = note
    return {"format": FORMAT, "meta": meta, "category": category, "fibers": fibers,
            "reindexing": reind, "structure": structure}


def serialize_doctrine(P: Doctrine) -> str:
    return _emit(to_tree(P)) + "\n"


def normalize(text: str) -> str:
    return serialize_doctrine(parse_doctrine(text))


def dump(P: Doctrine, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_doctrine(P))


# -- reading ----------------------------------------------------------------------------

def _get(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise DocumentError(f"missing {key!r} in {where}")
    return d[key]


def _lookup(ix: dict, ref, where: str) -> int:
    try:
        return ix[ref]
    except (KeyError, TypeError):
        raise DanglingIdError(ref, where) from None


def from_tree(doc: dict) -> Doctrine:
    if not isinstance(doc, dict):
        raise DocumentError("document must be an object")
    fmt = doc.get("format", FORMAT)
    if fmt != FORMAT:
        raise DocumentError(f"unknown format {fmt!r}")
    C = _get(doc, "category", "document")
    objects = list(_get(C, "objects", "category"))
    oix = {o: i for i, o in enumerate(objects)}
    if len(oix) != len(objects):
        raise DocumentError("duplicate object ids")
    mors = _get(C, "morphisms", "category")
    order = C.get("morphism_order", sorted(mors))
    if sorted(order) != sorted(mors):
        raise DocumentError("morphism_order does not list exactly the declared morphisms")
    for m in order:
        dc = mors[m]
        if not isinstance(dc, list) or len(dc) != 2:
            raise DocumentError(f"morphism {m!r} needs [dom, cod]")
        for o in dc:
            _lookup(oix, o, f"morphism {m!r}")
    mset = set(mors)
    compose = {}
    for tr in _get(C, "compose", "category"):
        if not isinstance(tr, list) or len(tr) != 3:
            raise DocumentError(f"composition entry {tr!r} needs [g, f, g.f]")
        for r in tr:
            if r not in mset:
                raise DanglingIdError(r, f"compose entry {tr}")
        compose[(tr[0], tr[1])] = tr[2]
    ident = _get(C, "identity", "category")
    bang = _get(C, "bang", "category")
    for table, nm in ((ident, "identity"), (bang, "bang")):
        for o, m in table.items():
            _lookup(oix, o, nm)
            if m not in mset:
                raise DanglingIdError(m, f"{nm} of {o}")
    term = _get(C, "terminal", "category")
    _lookup(oix, term, "terminal")
    products = {}
    for e in _get(C, "products", "category"):
        if not isinstance(e, list) or len(e) != 5:
            raise DocumentError(f"product entry {e!r} needs [A, B, AxB, pr1, pr2]")
        for o in e[:3]:
            _lookup(oix, o, f"product entry {e}")
        for m in e[3:]:
            if m not in mset:
                raise DanglingIdError(m, f"product entry {e}")
        products[(e[0], e[1])] = (e[2], e[3], e[4])
    try:
        cat = from_tables(objects, {m: tuple(mors[m]) for m in order}, compose, ident, term, bang, products,
                          name=doc.get("meta", {}).get("name", ""))
    except StructuralError as exc:
        raise DocumentError(str(exc)) from None

    Fd = _get(doc, "fibers", "document")
    fibers = []
    for o in objects:
        f = _get(Fd, o, "fibers")
        els = list(_get(f, "elements", f"fiber {o}"))
        eix = {e: i for i, e in enumerate(els)}
        leq = np.eye(len(els), dtype=bool)
        for pr in _get(f, "leq", f"fiber {o}"):
            leq[_lookup(eix, pr[0], f"leq of {o}"), _lookup(eix, pr[1], f"leq of {o}")] = True
        try:
            fibers.append(FinPoset(tuple(els), leq))
        except OrderError as exc:
            raise DocumentError(f"fiber {o}: {exc}") from None
    for o in Fd:
        _lookup(oix, o, "fibers")

    Rd = _get(doc, "reindexing", "document")
    reind = []
    for m in cat.morphisms:
        r = _get(Rd, m, "reindexing")
        src, dst = fibers[int(cat.cod[cat.mor(m)])], fibers[int(cat.dom[cat.mor(m)])]
        sx, dx = src.index, dst.index
        tab = np.full(len(src), -1, dtype=np.int64)
        for k, v in r.items():
            tab[_lookup(sx, k, f"reindexing of {m}")] = _lookup(dx, v, f"reindexing of {m}")
        if (tab < 0).any():
            raise DocumentError(f"reindexing of {m} is not total")
        reind.append(tab)
    for m in Rd:
        if m not in mset:
            raise DanglingIdError(m, "reindexing")

    S = doc.get("structure", {})
    layers = list(S.get("layers", []))
    for l in layers:
        if l not in LAYERS:
            raise DocumentError(f"unknown layer {l!r}")
    ops_d = S.get("ops", {})
    ops = []
    for a, o in enumerate(objects):
        f = fibers[a]
        spec = ops_d.get(o, {})
        if spec == "derive":
            spec = {k: "derive" for k in ("top", "meet", "bottom", "join", "imp")}
        d = None
        kw = {}
        for k in ("top", "bottom"):
            v = spec.get(k)
            if v is None:
                kw[k] = None
            elif v == "derive":
                d = d or derive_lattice_ops(f)
                if getattr(d, k) is None:
                    raise DeriveError(f"fiber {o} has no {k}")
                kw[k] = getattr(d, k)
            else:
                kw[k] = _lookup(f.index, v, f"{k} of {o}")
        for k in ("meet", "join", "imp"):
            v = spec.get(k)
            if v is None:
                kw[k] = None
            elif v == "derive":
                d = d or derive_lattice_ops(f)
                if getattr(d, k) is None:
                    raise DeriveError(f"fiber {o} has no {k}")
                kw[k] = getattr(d, k)
            else:
                T = np.full((len(f), len(f)), -1, dtype=np.int64)
                for x, y, z in v:
                    w = f"{k} of {o}"
                    T[_lookup(f.index, x, w), _lookup(f.index, y, w)] = _lookup(f.index, z, w)
                if (T < 0).any():
                    raise DocumentError(f"{k} table of {o} is not total")
                kw[k] = T
        ops.append(LatticeOps(f, kw["top"], kw["meet"], kw["bottom"], kw["join"], kw["imp"]))
    delta = {}
    for o, e in S.get("delta", {}).items():
        a = _lookup(oix, o, "delta")
        if (a, a) not in cat.products:
            raise DocumentError(f"delta of {o} needs a chosen {o}x{o}")
        delta[a] = _lookup(fibers[cat.product(a, a)[0]].index, e, f"delta of {o}")

    def qtabs(key):
        out = {}
        for ent in S.get(key, []):
            c, b = (_lookup(oix, x, key) for x in _get(ent, "over", key))
            if (c, b) not in cat.products:
                raise DocumentError(f"{key} over ({objects[c]}, {objects[b]}) needs a chosen product")
            src, dst = fibers[cat.product(c, b)[0]], fibers[c]
            T = np.full(len(src), -1, dtype=np.int64)
            for k, v in _get(ent, "table", key).items():
                T[_lookup(src.index, k, key)] = _lookup(dst.index, v, key)
            if (T < 0).any():
                raise DocumentError(f"{key} table over ({objects[c]}, {objects[b]}) is not total")
            out[(c, b)] = T
        return out
    meta = doc.get("meta", {})
    extra = {"note": meta["note"]} if "note" in meta else {}
    try:
        return Doctrine(cat, tuple(fibers), tuple(reind), tuple(ops), delta, qtabs("exists"), qtabs("forall"),
                        frozenset(layers), meta.get("name", ""), extra)
    except StructuralError as exc:
        raise DocumentError(str(exc)) from None


def parse_doctrine(text: str) -> Doctrine:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    return from_tree(doc)


def load(path) -> Doctrine:
    with open(path, encoding="utf-8") as fh:
        return parse_doctrine(fh.read())
