"""Constant and axiom addition, Henkin steps, mediators, directed colimits, the
double-negation fragment.

Everything here returns fresh immutable values.  Products in the finite
bases are partial, so adding a constant of sort ``X`` keeps only the objects
``A`` for which ``X x A`` is chosen; the returned morphism then starts from
the full subcategory on those objects (``restrict``).  When nothing is
dropped the source is the input doctrine itself.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .doctrine import (Doctrine, DoctrineMorphism, MissingWitness, compose_morphisms, comparison,
                       consistency_status, identity_morphism)
from .fincat import FinCategory, StructuralError, full_subcategory, kleisli_reader
from .order import FinPoset, LatticeOps


class ConstructionError(ValueError):
    pass


class AxiomNotSatisfied(ConstructionError):
    """The target of an axiom mediator does not force the axiom to top."""


# -- restriction ----------------------------------------------------------------------

def restrict(P: Doctrine, keep: Iterable[int]):
    """Full sub-doctrine on the base objects ``keep``.

    Returns ``(Q, obj_old, mor_old)``; returns ``P`` itself when nothing is dropped.
    """
    keep = sorted(set(int(k) for k in keep))
    cat = P.base
    if keep == list(range(len(cat.objects))):
        return P, np.arange(len(cat.objects)), np.arange(len(cat.morphisms))
    sub, obj_old, mor_old = full_subcategory(cat, keep)
    onew = {int(o): i for i, o in enumerate(obj_old)}
    delta = {onew[a]: d for a, d in P.delta.items() if a in onew and (onew[a], onew[a]) in sub.products}
    ex = {(onew[c], onew[b]): v for (c, b), v in P.exists_.items()
          if c in onew and b in onew and (onew[c], onew[b]) in sub.products}
    fa = {(onew[c], onew[b]): v for (c, b), v in P.forall_.items()
          if c in onew and b in onew and (onew[c], onew[b]) in sub.products}
    Q = Doctrine(sub, tuple(P.fibers[o] for o in obj_old), tuple(P.reind[f] for f in mor_old),
                 tuple(P.ops[o] for o in obj_old), delta, ex, fa, P.layers,
                 f"{P.name}|", {"restricted_from": P})
    return Q, obj_old, mor_old


def inclusion(Q: Doctrine, P: Doctrine, obj_old, mor_old) -> DoctrineMorphism:
    return DoctrineMorphism(Q, P, obj_old, mor_old, tuple(np.arange(len(f)) for f in Q.fibers),
                            Q.layers, "incl")


def restrict_morphism(m: DoctrineMorphism, keep_dst_objects: Iterable[int]):
    """Restrict the source of ``m`` to objects landing in ``keep_dst_objects``.

    Returns ``(m', Q, obj_old)`` where ``Q`` is the restricted source.
    """
    keep_dst = set(int(k) for k in keep_dst_objects)
    keep = [a for a in range(len(m.src.base.objects)) if int(m.F_obj[a]) in keep_dst]
    Q, obj_old, mor_old = restrict(m.src, keep)
    if Q is m.src:
        return m, Q, obj_old
    m2 = DoctrineMorphism(Q, m.dst, m.F_obj[obj_old], m.F_mor[mor_old],
                          tuple(m.comp[int(o)] for o in obj_old), m.preserved_layers, m.name)
    return m2, Q, obj_old


def chain_morphisms(m: DoctrineMorphism, n: DoctrineMorphism) -> DoctrineMorphism:
    """``n o m`` where ``n`` may start from a restriction of ``m.dst``."""
    if n.src is m.dst:
        return compose_morphisms(n, m)
    base = n.src.meta.get("restricted_from")
    if base is not m.dst:
        raise StructuralError("morphisms do not chain")
    names = {o: i for i, o in enumerate(m.dst.base.objects)}
    keep = [names[o] for o in n.src.base.objects]
    m2, Q, _ = restrict_morphism(m, keep)
    # re-index m2 into n.src
    onew = {o: i for i, o in enumerate(keep)}
    mnew = {o: i for i, o in enumerate(n.src.base.morphisms)}
    F_obj = np.array([onew[int(x)] for x in m2.F_obj], dtype=np.int64)
    F_mor = np.array([mnew[m.dst.base.morphisms[int(x)]] for x in m2.F_mor], dtype=np.int64)
    m3 = DoctrineMorphism(Q, n.src, F_obj, F_mor, m2.comp, m2.preserved_layers, m2.name)
    return compose_morphisms(n, m3)


# -- adding a constant -----------------------------------------------------------------

def add_constant(P: Doctrine, X):
    """``(P_X, m)``: reader-comonad Kleisli base, fibers ``P(X x A)``."""
    cat = P.base
    X = cat.obj(X)
    K = kleisli_reader(cat, X)
    Kc = K.category
    S = K.objects
    src, obj_old, mor_old = restrict(P, S)
    xa = [cat.product(X, int(a)) for a in S]
    fibers = tuple(P.fibers[p] for p, _, _ in xa)
    ops = tuple(P.ops[p] for p, _, _ in xa)
    reind = []
    for k in range(len(Kc.morphisms)):
        i = int(Kc.dom[k])
        reind.append(P.R(cat.tuple(xa[i][1], int(K.backing[k]))))
    delta = {}
    for i in range(len(S)):
        a = int(S[i])
        if (i, i) in Kc.products and a in P.delta:
            pb = int(S[Kc.products[(i, i)][0]])
            x2 = cat.product(X, pb)[2]
            delta[i] = int(P.R(x2)[P.delta[a]])
    ex, fa = {}, {}
    for (i, j) in Kc.products:
        c, b = int(S[i]), int(S[j])
        xc = cat.product(X, c)[0]
        assoc = P.R(cat.associator(X, c, b))
        if (xc, b) in P.exists_:
            ex[(i, j)] = P.exists_[(xc, b)][assoc]
        if (xc, b) in P.forall_:
            fa[(i, j)] = P.forall_[(xc, b)][assoc]
    PX = Doctrine(Kc, fibers, tuple(reind), ops, delta, ex, fa, P.layers,
                  f"{P.name}[{cat.objects[X]}]",
                  {"kleisli": K, "sort": cat.objects[X], "constant": K.constant, "parent": P})
    by_backing = {(int(Kc.dom[k]), int(K.backing[k])): k for k in range(len(Kc.morphisms))}
    F_mor = []
    for f_new, f in enumerate(mor_old.tolist()):
        i = int(src.base.dom[f_new])
        F_mor.append(by_backing[(i, cat.compose(f, xa[i][2]))])
    comp = tuple(P.R(q2) for _, _, q2 in xa)
    m = DoctrineMorphism(src, PX, np.arange(len(S)), np.asarray(F_mor, dtype=np.int64), comp,
                         P.layers, f"const[{cat.objects[X]}]")
    return PX, m


# -- adding an axiom -------------------------------------------------------------------------

def _down_restrict(P: Doctrine, u: Sequence[int]):
    keep = [np.flatnonzero(P.fibers[a].leq[:, int(u[a])]) for a in range(len(P.fibers))]
    pos = []
    for a, k in enumerate(keep):
        p = np.full(len(P.fibers[a]), -1, dtype=np.int64)
        p[k] = np.arange(len(k))
        pos.append(p)
    return keep, pos


def add_axiom(P: Doctrine, phi):
    """``(P_phi, m)``: fibers cut down to ``P(!)phi``, ``m = (id, P(!)phi ^ -)``."""
    cat = P.base
    t = cat.terminal
    phi = P.fibers[t].el(phi)
    for a, o in enumerate(P.ops):
        if o.top is None or o.meet is None:
            raise MissingWitness(f"adding an axiom needs top and meets (fiber {cat.objects[a]})")
    u = [int(P.R(int(cat.bang[a]))[phi]) for a in range(len(cat.objects))]
    keep, pos = _down_restrict(P, u)
    fibers, ops = [], []
    for a, k in enumerate(keep):
        f = P.fibers[a]
        fp = FinPoset(tuple(f.elements[i] for i in k), f.leq[np.ix_(k, k)])
        o = P.ops[a]
        ix = np.ix_(k, k)
        meet = pos[a][o.meet[ix]]
        bottom = None if o.bottom is None else int(pos[a][o.bottom])
        join = None if o.join is None else pos[a][o.join[ix]]
        imp = None if o.imp is None else pos[a][o.meet[o.imp[ix], u[a]]]
        fibers.append(fp)
        ops.append(LatticeOps(fp, int(pos[a][u[a]]), meet, bottom, join, imp))
    reind = []
    for f in range(len(cat.morphisms)):
        a, b = int(cat.dom[f]), int(cat.cod[f])
        reind.append(pos[a][P.R(f)[keep[b]]])
    delta = {}
    for a, d in P.delta.items():
        aa = cat.product(a, a)[0]
        delta[a] = int(pos[aa][P.meet(aa, d, u[aa])])
    ex, fa = {}, {}
    for (c, b), E in P.exists_.items():
        p = cat.product(c, b)[0]
        ex[(c, b)] = pos[c][E[keep[p]]]
    for (c, b), A in P.forall_.items():
        p = cat.product(c, b)[0]
        fa[(c, b)] = pos[c][P.ops[c].meet[A[keep[p]], u[c]]]
    name = P.fibers[t].elements[phi]
    Pphi = Doctrine(cat, tuple(fibers), tuple(reind), tuple(ops), delta, ex, fa, P.layers,
                    f"{P.name}/{name}", {"axiom": name, "parent": P, "kept": keep})
    comp = tuple(pos[a][P.ops[a].meet[u[a], np.arange(len(P.fibers[a]))]] for a in range(len(cat.objects)))
    m = DoctrineMorphism(P, Pphi, np.arange(len(cat.objects)), np.arange(len(cat.morphisms)), comp,
                         P.layers, f"ax[{name}]")
    return Pphi, m


# -- double negation --------------------------------------------------------------------------

def double_negation_fragment(P: Doctrine):
    """Fibers of ``not not``-closed elements; ``m = (id, not not)``."""
    cat = P.base
    for a, o in enumerate(P.ops):
        if o.imp is None or o.bottom is None or o.top is None or o.meet is None:
            raise MissingWitness(f"the double-negation fragment needs implication and bottom "
                                 f"(fiber {cat.objects[a]})")
    nn = []
    for o in P.ops:
        neg = o.neg_table
        nn.append(neg[neg])
    keep = [np.flatnonzero(nn[a] == np.arange(len(nn[a]))) for a in range(len(nn))]
    pos = []
    for a, k in enumerate(keep):
        p = np.full(len(P.fibers[a]), -1, dtype=np.int64)
        p[k] = np.arange(len(k))
        pos.append(p)
    fibers, ops = [], []
    for a, k in enumerate(keep):
        f, o = P.fibers[a], P.ops[a]
        fp = FinPoset(tuple(f.elements[i] for i in k), f.leq[np.ix_(k, k)])
        ix = np.ix_(k, k)
        neg = o.neg_table
        meet = o.meet[ix]
        join = pos[a][neg[o.meet[neg[k][:, None], neg[k][None, :]]]]   # not(not a ^ not b)
        ops.append(LatticeOps(fp, int(pos[a][o.top]), pos[a][meet], int(pos[a][o.bottom]), join,
                              pos[a][o.imp[ix]]))
        fibers.append(fp)
    reind = [pos[int(cat.dom[f])][P.R(f)[keep[int(cat.cod[f])]]] for f in range(len(cat.morphisms))]
    if any((r < 0).any() for r in reind):
        raise ConstructionError("reindexing does not preserve double-negation-closed elements")
    delta = {}
    for a, d in P.delta.items():
        aa = cat.product(a, a)[0]
        delta[a] = int(pos[aa][nn[aa][d]])
    ex, fa = {}, {}
    for (c, b), E in P.exists_.items():
        p = cat.product(c, b)[0]
        ex[(c, b)] = pos[c][nn[c][E[keep[p]]]]
    for (c, b), A in P.forall_.items():
        p = cat.product(c, b)[0]
        v = pos[c][A[keep[p]]]
        if (v < 0).any():
            raise ConstructionError("forall leaves the double-negation-closed elements")
        fa[(c, b)] = v
    layers = {"functorial", "primary", "bounded", "implicational", "joins", "heyting", "boolean"}
    layers |= set(P.layers) & {"elementary", "existential", "universal"}
    Q = Doctrine(cat, tuple(fibers), tuple(reind), tuple(ops), delta, ex, fa, frozenset(layers),
                 f"{P.name}~~", {"parent": P})
    comp = tuple(pos[a][nn[a]] for a in range(len(cat.objects)))
    preserved = {"functorial", "primary", "bounded", "implicational"}
    preserved |= set(P.layers) & {"elementary", "existential", "joins"}
    m = DoctrineMorphism(P, Q, np.arange(len(cat.objects)), np.arange(len(cat.morphisms)), comp,
                         frozenset(preserved) & (set(P.layers) | {"functorial"}), "notnot")
    return Q, m


# -- Henkin steps -----------------------------------------------------------------------------

@dataclass
class HenkinStep:
    sort: str
    phi: str
    label: tuple
    psi: str
    constant: str


@dataclass
class HenkinTrace:
    steps: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)
    truncated: bool = False
    dropped: list = field(default_factory=list)
    constants: list = field(default_factory=list)   # current image of each step's constant
    statuses: list = field(default_factory=list)    # consistency status after each step

    def fresh(self, sort: str) -> tuple:
        k = self.counters.get(sort, 0)
        self.counters[sort] = k + 1
        return (sort, k)

    def labels(self) -> list:
        return [s.label for s in self.steps]


def henkin_axiom(P: Doctrine, B: int, phi: int) -> int:
    """``psi = P(pr1)(E phi) -> phi`` as an element of ``P(B x t)``."""
    cat = P.base
    t = cat.terminal
    tb, s1, s2 = cat.product(t, B)
    bt, r1, r2 = cat.product(B, t)
    o = P.ops[tb]
    if o.imp is None:
        raise MissingWitness("henkin step needs implication")
    phi_tb = int(P.R(s2)[phi])
    e = int(P.exists(t, B)[phi_tb])
    psi_tb = int(o.imp[int(P.R(s1)[e]), phi_tb])
    swap = cat.tuple(r2, r1)          # B x t -> t x B
    return int(P.R(swap)[psi_tb])


def henkin_step(P: Doctrine, B, phi, trace: HenkinTrace | None = None):
    """Add a constant of sort ``B`` and the axiom that it witnesses ``phi``.

    Returns ``(P', m, step)``; ``m`` starts from ``P`` restricted to the objects
    that survive the constant.
    """
    cat = P.base
    B = cat.obj(B)
    phi = P.fibers[B].el(phi)
    if (B, B) not in cat.products:
        raise ConstructionError(f"{cat.objects[B]} x {cat.objects[B]} is not chosen; the sort would not survive")
    for a, o in enumerate(P.ops):
        if o.imp is None:
            raise MissingWitness(f"henkin step needs implication (fiber {cat.objects[a]})")
    psi_bt = henkin_axiom(P, B, phi)
    PB, m1 = add_constant(P, B)
    Kc = PB.base
    t = Kc.terminal
    # P_B(t) is P(B x t): the same fiber
    P2, m2 = add_axiom(PB, psi_bt)
    m = compose_morphisms(m2, m1)
    label = trace.fresh(cat.objects[B]) if trace is not None else (cat.objects[B], 0)
    const = PB.meta["constant"]
    P2 = P2.replace(name=f"{P.name}+{label[0]}{label[1]}",
                    meta={**P2.meta, "constant": const, "henkin": (cat.objects[B], P.fibers[B].elements[phi])})
    m = DoctrineMorphism(m.src, P2, m.F_obj, m.F_mor, m.comp, m.preserved_layers, f"henkin[{label[0]}{label[1]}]")
    step = HenkinStep(cat.objects[B], P.fibers[B].elements[phi], label,
                      PB.fibers[t].elements[psi_bt], Kc.morphisms[const])
    if trace is not None:
        trace.steps.append(step)
    return P2, m, step


def henkin_postcondition(P2: Doctrine, m: DoctrineMorphism, B: int, phi: int, const: int):
    """``(holds, equality)`` for ``E phi' <= P'(c) phi'`` in the new doctrine.

    ``B`` and ``phi`` index the source of ``m``.
    """
    cat = P2.base
    t = cat.terminal
    b2 = int(m.F_obj[B])
    x = int(m.comp[B][phi])
    tb, _, s2 = cat.product(t, b2)
    e = int(P2.exists(t, b2)[P2.R(s2)[x]])
    r = int(P2.R(const)[x])
    return bool(P2.fibers[t].leq[e, r]), e == r


def _name_map(names):
    return {n: i for i, n in enumerate(names)}


def henkin_saturate(P: Doctrine, targets="all", budget: int | None = None,
                    per_object_budget: dict | None = None):
    """Fold :func:`henkin_step` over ``targets`` of the original doctrine.

    ``targets`` is ``"all"`` (every element of every fiber, by object then
    element index) or a list of ``(object, element)`` pairs.  Stops after
    ``budget`` steps with ``trace.truncated`` set.  Targets whose sort has been
    dropped by an earlier step (partial products) are listed in
    ``trace.dropped``.
    """
    cat = P.base
    if isinstance(targets, str) and targets.lower() == "all":
        targets = [(a, x) for a in range(len(cat.objects)) for x in range(len(P.fibers[a]))]
    else:
        targets = [(cat.obj(a), P.fibers[cat.obj(a)].el(x)) for a, x in targets]
    trace = HenkinTrace()
    cur = P
    m = identity_morphism(P)
    const_images = []     # (doctrine-base morphism index) of earlier constants in cur
    per = dict(per_object_budget or {})
    used = {}
    for (a, x) in targets:
        if budget is not None and len(trace.steps) >= budget:
            trace.truncated = True
            break
        sort = cat.objects[a]
        if sort in per and used.get(sort, 0) >= per[sort]:
            trace.truncated = True
            continue
        src_names = _name_map(m.src.base.objects)
        if sort not in src_names:
            trace.dropped.append((sort, P.fibers[a].elements[x]))
            continue
        a_src = src_names[sort]
        b_cur = int(m.F_obj[a_src])
        phi_cur = int(m.comp[a_src][x])
        try:
            nxt, step_m, step = henkin_step(cur, b_cur, phi_cur, trace)
        except ConstructionError:
            trace.dropped.append((sort, P.fibers[a].elements[x]))
            continue
        used[sort] = used.get(sort, 0) + 1
        # carry earlier constants forward
        carried = []
        for c in const_images:
            if c is None:
                carried.append(None)
                continue
            names = _name_map(step_m.src.base.morphisms)
            nm = cur.base.morphisms[c]
            carried.append(int(step_m.F_mor[names[nm]]) if nm in names else None)
        carried.append(nxt.meta["constant"])
        const_images = carried
        m = chain_morphisms(m, step_m)
        cur = nxt
        trace.statuses.append(consistency_status(cur, cross_check=False))
    trace.constants = [None if c is None else cur.base.morphisms[c] for c in const_images]
    return cur, m, trace


def saturation_coverage(P: Doctrine, Psat: Doctrine, m: DoctrineMorphism, trace: HenkinTrace):
    """Rich check on the images of original elements: ``{(sort, elem): witness name or None}``."""
    from .doctrine import rich_witness
    out = {}
    src_names = _name_map(m.src.base.objects)
    for a, obj in enumerate(P.base.objects):
        if obj not in src_names:
            for x, e in enumerate(P.fibers[a].elements):
                out[(obj, e)] = None
            continue
        a_src = src_names[obj]
        b = int(m.F_obj[a_src])
        for x, e in enumerate(P.fibers[a].elements):
            d, _ = rich_witness(Psat, b, int(m.comp[a_src][x]))
            out[(obj, e)] = None if d is None else Psat.base.morphisms[d]
    return out


# -- mediators ---------------------------------------------------------------------------------

def _restrict_source(G: DoctrineMorphism, src: Doctrine, obj_old, mor_old) -> DoctrineMorphism:
    if src is G.src:
        return G
    return DoctrineMorphism(src, G.dst, G.F_obj[obj_old], G.F_mor[mor_old],
                            tuple(G.comp[int(o)] for o in obj_old), G.preserved_layers, G.name)


def mediate_constant(PX: Doctrine, m: DoctrineMorphism, G: DoctrineMorphism, c) -> DoctrineMorphism:
    """The ``G'`` with ``G' o m = G`` (on the source of ``m``) and ``G'(constant) = c``.

    ``PX, m`` come from :func:`add_constant`; ``G : P -> R``.  ``c`` is an arrow
    of ``R``'s base from the terminal (or from ``G t``) to ``G X``.
    Components are ``g'_A = R(k_A) o g_{X x A}`` with
    ``k_A = phi^-1 o <c o !, id> : G A -> G(X x A)``.
    """
    P = PX.meta["parent"]
    if G.src is not P:
        raise StructuralError("the target morphism must start from the doctrine the constant was added to")
    cat, K = P.base, PX.meta["kleisli"]
    R = G.dst
    rc = R.base
    X = K.sort
    c = rc.mor(c) if isinstance(c, str) else int(c)
    GX, Gt = int(G.F_obj[X]), int(G.F_obj[cat.terminal])
    if int(rc.cod[c]) != GX or int(rc.dom[c]) not in (rc.terminal, Gt):
        raise ConstructionError(f"constant {rc.morphisms[c]} has the wrong endpoints for sort {cat.objects[X]}")
    S = K.objects
    kappa = []
    for a in S.tolist():
        Ga = int(G.F_obj[a])
        _, inv = comparison(G, X, a)
        if inv is None:
            raise ConstructionError(f"G does not preserve {cat.objects[X]} x {cat.objects[a]}")
        cbang = rc.compose(c, int(rc.bang[Ga])) if int(rc.dom[c]) == rc.terminal else \
            rc.compose(c, rc.compose(int(_point_back(rc, Gt)), int(rc.bang[Ga])))
        kappa.append(rc.compose(inv, rc.tuple(cbang, int(rc.ident[Ga]))))
    Kc = PX.base
    F_obj = np.array([int(G.F_obj[int(a)]) for a in S], dtype=np.int64)
    F_mor = np.array([rc.compose(int(G.F_mor[int(K.backing[k])]), kappa[int(Kc.dom[k])])
                      for k in range(len(Kc.morphisms))], dtype=np.int64)
    comp = []
    for i, a in enumerate(S.tolist()):
        xa = cat.product(X, a)[0]
        comp.append(R.R(kappa[i])[G.comp[xa]])
    return DoctrineMorphism(PX, R, F_obj, F_mor, tuple(comp), G.preserved_layers & PX.layers,
                            f"med[{G.name}]")


def _point_back(rc: FinCategory, Gt: int) -> int:
    """The inverse of ``! : G t -> t`` (``G`` preserves the terminal up to iso)."""
    inv = rc.is_iso(int(rc.bang[Gt]))
    if inv is None:
        raise ConstructionError("G does not preserve the terminal object")
    return inv


def constant_equations(PX: Doctrine, m: DoctrineMorphism, G: DoctrineMorphism, c, H: DoctrineMorphism) -> bool:
    """``H o m = G`` on the source of ``m`` and ``H(constant)`` is ``c`` (modulo ``G t = t``)."""
    rc = G.dst.base
    c = rc.mor(c) if isinstance(c, str) else int(c)
    obj_old = np.array([G.src.base.obj(o) for o in m.src.base.objects])
    mor_old = np.array([G.src.base.mor(f) for f in m.src.base.morphisms])
    Gr = _restrict_source(G, m.src, obj_old, mor_old)
    HG = compose_morphisms(H, m)
    if not (np.array_equal(HG.F_obj, Gr.F_obj) and np.array_equal(HG.F_mor, Gr.F_mor)):
        return False
    if not all(np.array_equal(x, y) for x, y in zip(HG.comp, Gr.comp)):
        return False
    k = int(H.F_mor[PX.meta["constant"]])
    Gt = int(G.F_obj[G.src.base.terminal])
    if int(rc.dom[c]) == int(rc.dom[k]):
        return k == c
    return k == rc.compose(c, int(rc.bang[Gt]))


def mediator_candidates(PX: Doctrine, m: DoctrineMorphism, G: DoctrineMorphism, c,
                        layers=None, limit: int = 2) -> list:
    """Every morphism ``PX -> R`` satisfying the constant equations, up to ``limit``."""
    from .search import morphism_solutions
    rc = G.dst.base
    c = rc.mor(c) if isinstance(c, str) else int(c)
    P = G.src
    S = PX.meta["kleisli"].objects
    F_obj = np.array([int(G.F_obj[int(a)]) for a in S], dtype=np.int64)
    fixed_mor = {}
    for f_new in range(len(m.src.base.morphisms)):
        f = P.base.mor(m.src.base.morphisms[f_new])
        fixed_mor[int(m.F_mor[f_new])] = int(G.F_mor[f])
    Gt = int(G.F_obj[P.base.terminal])
    fixed_mor[int(PX.meta["constant"])] = c if int(rc.dom[c]) == Gt else rc.compose(c, int(rc.bang[Gt]))
    fixed_comp = {}
    for a_new in range(len(m.src.base.objects)):
        a = P.base.obj(m.src.base.objects[a_new])
        b = int(m.F_obj[a_new])
        for x in range(len(m.src.fibers[a_new])):
            y = int(m.comp[a_new][x])
            v = int(G.comp[a][x])
            if fixed_comp.get((b, y), v) != v:
                return []
            fixed_comp[(b, y)] = v
    layers = layers if layers is not None else sorted(G.preserved_layers & PX.layers)
    return morphism_solutions(PX, G.dst, F_obj, fixed_mor, fixed_comp, layers, limit=limit)


def mediate_axiom(Pphi: Doctrine, m: DoctrineMorphism, G: DoctrineMorphism) -> DoctrineMorphism:
    """``G'`` with ``G' o (id, f_phi) = G``; ``g'_A`` is ``g_A`` on the downset."""
    P = Pphi.meta["parent"]
    if G.src is not P:
        raise StructuralError("the target morphism must start from the doctrine the axiom was added to")
    cat = P.base
    t = cat.terminal
    phi = P.fibers[t].el(Pphi.meta["axiom"])
    R = G.dst
    Gt = int(G.F_obj[t])
    top = R.ops[Gt].top
    if top is None or not R.fibers[Gt].leq[top, int(G.comp[t][phi])]:
        raise AxiomNotSatisfied(
            f"axiom {Pphi.meta['axiom']} is not satisfied in the target of {G.name or 'G'}")
    keep = Pphi.meta["kept"]
    comp = tuple(G.comp[a][keep[a]] for a in range(len(cat.objects)))
    return DoctrineMorphism(Pphi, R, G.F_obj, G.F_mor, comp, G.preserved_layers & Pphi.layers,
                            f"med[{G.name}]")


def axiom_mediator_candidates(Pphi: Doctrine, m: DoctrineMorphism, G: DoctrineMorphism,
                              layers=None, limit: int = 2) -> list:
    from .search import morphism_solutions
    fixed_mor = {f: int(G.F_mor[f]) for f in range(len(G.F_mor))}
    fixed_comp = {}
    for a in range(len(m.comp)):
        for x in range(len(m.comp[a])):
            y, v = int(m.comp[a][x]), int(G.comp[a][x])
            if fixed_comp.get((a, y), v) != v:
                return []
            fixed_comp[(a, y)] = v
    layers = layers if layers is not None else sorted(G.preserved_layers & Pphi.layers)
    return morphism_solutions(Pphi, G.dst, G.F_obj, fixed_mor, fixed_comp, layers, limit=limit)


def morphisms_equal(m: DoctrineMorphism, n: DoctrineMorphism) -> bool:
    return (np.array_equal(m.F_obj, n.F_obj) and np.array_equal(m.F_mor, n.F_mor)
            and len(m.comp) == len(n.comp)
            and all(np.array_equal(x, y) for x, y in zip(m.comp, n.comp)))


def invert(m: DoctrineMorphism) -> DoctrineMorphism:
    """Inverse of an isomorphism of doctrines."""
    from .doctrine import is_isomorphism
    if not is_isomorphism(m):
        raise ConstructionError(f"{m.name or 'morphism'} is not an isomorphism")
    S, D = m.src, m.dst
    F_obj = np.argsort(m.F_obj)
    F_mor = np.argsort(m.F_mor)
    comp = tuple(np.argsort(m.comp[int(F_obj[b])]) for b in range(len(D.base.objects)))
    return DoctrineMorphism(D, S, F_obj, F_mor, comp, m.preserved_layers, f"inv[{m.name}]")


# -- finite directed colimits ----------------------------------------------------------------

class DiagramError(StructuralError):
    pass


@dataclass
class FiniteDirectedDiagram:
    nodes: list                  # index -> Doctrine
    leq: np.ndarray              # preorder on indices
    edges: dict                  # (i, j) with i <= j -> DoctrineMorphism node i -> node j
    name: str = "diagram"

    def __post_init__(self):
        self.leq = np.asarray(self.leq, dtype=bool)

    def upper_bounds(self, idx) -> list:
        idx = list(idx)
        return [k for k in range(len(self.nodes)) if all(self.leq[i, k] for i in idx)]

    def maximum(self) -> int:
        """Least index above every node (exists because the index is finite and directed)."""
        ub = self.upper_bounds(range(len(self.nodes)))
        if not ub:
            raise DiagramError("no maximum node")
        return ub[0]


def validate_diagram(d: FiniteDirectedDiagram) -> list:
    """Problems as strings; empty when the diagram is a valid finite directed diagram."""
    L, n = d.leq, len(d.nodes)
    errs = []
    if L.shape != (n, n):
        return ["index relation has the wrong shape"]
    if not L.diagonal().all():
        errs.append("index relation is not reflexive")
    if ((L.astype(int) @ L.astype(int) > 0) & ~L).any():
        errs.append("index relation is not transitive")
    for i in range(n):
        for j in range(n):
            if not d.upper_bounds([i, j]):
                errs.append(f"nodes {i} and {j} have no upper bound")
    for i in range(n):
        for j in range(n):
            if not L[i, j]:
                if (i, j) in d.edges:
                    errs.append(f"edge {i}->{j} without {i} <= {j}")
                continue
            e = d.edges.get((i, j))
            if e is None:
                errs.append(f"missing edge {i}->{j}")
                continue
            if e.src is not d.nodes[i] or e.dst is not d.nodes[j]:
                errs.append(f"edge {i}->{j} has the wrong endpoints")
    if errs:
        return errs
    for i in range(n):
        if not morphisms_equal(d.edges[(i, i)], identity_morphism(d.nodes[i])):
            errs.append(f"edge {i}->{i} is not the identity")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if L[i, j] and L[j, k]:
                    if not morphisms_equal(compose_morphisms(d.edges[(j, k)], d.edges[(i, j)]), d.edges[(i, k)]):
                        errs.append(f"edges {i}->{j}->{k} do not compose to {i}->{k}")
    return errs


def chain_diagram(morphisms: Sequence[DoctrineMorphism], name: str = "chain") -> FiniteDirectedDiagram:
    """``P0 -> P1 -> ... -> Pn`` with all composites filled in."""
    nodes = [morphisms[0].src] + [m.dst for m in morphisms]
    n = len(nodes)
    for i, m in enumerate(morphisms):
        if m.src is not nodes[i]:
            raise DiagramError(f"step {i} does not start where the previous one ended")
    edges = {(i, i): identity_morphism(nodes[i]) for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            edges[(i, j)] = morphisms[j - 1] if j == i + 1 else compose_morphisms(morphisms[j - 1], edges[(i, j - 1)])
    return FiniteDirectedDiagram(nodes, np.triu(np.ones((n, n), dtype=bool)), edges, name)


class _UF:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            self.p[max(a, b)] = min(a, b)


@dataclass
class Colimit:
    doctrine: Doctrine
    cocone: dict                 # index -> DoctrineMorphism node -> colimit
    object_classes: list         # class -> [(i, A)]
    morphism_classes: list
    element_classes: list        # per colimit object: class -> [(i, A, x)]
    diagram: FiniteDirectedDiagram


def directed_colimit(d: FiniteDirectedDiagram) -> Colimit:
    """Quotient of the disjoint union of the nodes.

    Items ``(i, x)`` and ``(j, y)`` are identified when some ``k >= i, j`` sends
    them to the same item.  Operations on classes are computed at the first
    upper bound (index order) where the chosen representatives meet.
    Representatives are the least index, then the least id.
    """
    errs = validate_diagram(d)
    if errs:
        raise DiagramError("; ".join(errs))
    nodes, E, n = d.nodes, d.edges, len(d.nodes)

    def classes(items, image):
        """``image(i, x, k)`` pushes item ``x`` of node ``i`` to node ``k``."""
        uf = _UF(len(items))
        for k in range(n):
            seen = {}
            for u, (i, *x) in enumerate(items):
                if d.leq[i, k]:
                    key = image(i, tuple(x), k)
                    if key in seen:
                        uf.union(seen[key], u)
                    else:
                        seen[key] = u
        groups = {}
        for u in range(len(items)):
            groups.setdefault(uf.find(u), []).append(items[u])
        out = sorted(groups.values(), key=lambda g: min(g))
        cls = {}
        for c, g in enumerate(out):
            for it in g:
                cls[it] = c
        return [sorted(g) for g in out], cls

    obj_items = [(i, a) for i in range(n) for a in range(len(nodes[i].base.objects))]
    ocls_list, ocls = classes(obj_items, lambda i, x, k: int(E[(i, k)].F_obj[x[0]]))
    mor_items = [(i, f) for i in range(n) for f in range(len(nodes[i].base.morphisms))]
    mcls_list, mcls = classes(mor_items, lambda i, x, k: int(E[(i, k)].F_mor[x[0]]))
    el_items = [(i, a, x) for i in range(n) for a in range(len(nodes[i].base.objects))
                for x in range(len(nodes[i].fibers[a]))]
    ecls_list, ecls = classes(el_items, lambda i, x, k: (int(E[(i, k)].F_obj[x[0]]), int(E[(i, k)].comp[x[0]][x[1]])))

    def meet_at(reps, check):
        """First upper bound of the rep indices where ``check(k)`` holds."""
        for k in d.upper_bounds([r[0] for r in reps]):
            if check(k):
                return k
        raise DiagramError("representatives never meet; the diagram is not directed")

    def push_obj(i, a, k):
        return int(E[(i, k)].F_obj[a])

    def push_mor(i, f, k):
        return int(E[(i, k)].F_mor[f])

    def push_el(i, a, x, k):
        return int(E[(i, k)].comp[a][x])

    NO, NM = len(ocls_list), len(mcls_list)
    orep = [g[0] for g in ocls_list]
    mrep = [g[0] for g in mcls_list]
    dom = np.empty(NM, dtype=np.int64)
    cod = np.empty(NM, dtype=np.int64)
    for c, (i, f) in enumerate(mrep):
        cat = nodes[i].base
        dom[c] = ocls[(i, int(cat.dom[f]))]
        cod[c] = ocls[(i, int(cat.cod[f]))]
    comp = np.full((NM, NM), -1, dtype=np.int64)
    for g in range(NM):
        for f in range(NM):
            if cod[f] != dom[g]:
                continue
            (i, ff), (j, gg) = mrep[f], mrep[g]
            k = meet_at([(i,), (j,)], lambda k: nodes[k].base.cod[push_mor(i, ff, k)] ==
                        nodes[k].base.dom[push_mor(j, gg, k)])
            h = nodes[k].base.compose(push_mor(j, gg, k), push_mor(i, ff, k))
            comp[g, f] = mcls[(k, h)]
    ident = np.array([mcls[(i, int(nodes[i].base.ident[a]))] for i, a in orep], dtype=np.int64)
    i0 = orep[0][0]
    terminal = ocls[(i0, nodes[i0].base.terminal)]
    bang = np.array([mcls[(i, int(nodes[i].base.bang[a]))] for i, a in orep], dtype=np.int64)
    products = {}
    for A in range(NO):
        for B in range(NO):
            (i, a), (j, b) = orep[A], orep[B]
            for k in d.upper_bounds([i, j]):
                ka, kb = push_obj(i, a, k), push_obj(j, b, k)
                if (ka, kb) in nodes[k].base.products:
                    p, p1, p2 = nodes[k].base.products[(ka, kb)]
                    products[(A, B)] = (ocls[(k, p)], mcls[(k, p1)], mcls[(k, p2)])
                    break
    names_o = tuple(_cls_name(nodes, "o", r) for r in orep)
    names_m = tuple(_cls_name(nodes, "m", r) for r in mrep)
    cat = FinCategory(names_o, names_m, dom, cod, comp, ident, terminal, bang, products, name=f"colim({d.name})")

    # fibers
    fib_items = [[] for _ in range(NO)]
    erep = [g[0] for g in ecls_list]
    for c, (i, a, x) in enumerate(erep):
        fib_items[ocls[(i, a)]].append(c)
    local = {}
    for A in range(NO):
        for pos, c in enumerate(fib_items[A]):
            local[c] = pos

    def el_at(c, k):
        i, a, x = erep[c]
        return push_obj(i, a, k), push_el(i, a, x, k)

    def common(cs, extra_idx=()):
        idx = [erep[c][0] for c in cs] + list(extra_idx)

        def ok(k):
            objs = {el_at(c, k)[0] for c in cs}
            return len(objs) == 1
        return meet_at([(i,) for i in idx], ok)

    fibers, ops = [], []
    for A in range(NO):
        cs = fib_items[A]
        m_ = len(cs)
        leq = np.zeros((m_, m_), dtype=bool)
        for u, cu in enumerate(cs):
            for v, cv in enumerate(cs):
                k = common([cu, cv])
                a, x = el_at(cu, k)
                _, y = el_at(cv, k)
                leq[u, v] = nodes[k].fibers[a].leq[x, y]
        fp = FinPoset(tuple(_el_name(nodes, erep[c]) for c in cs), leq)
        fibers.append(fp)
        i, a = orep[A]
        o = nodes[i].ops[a]

        def lift(k, a_k, x):
            return local[ecls[(k, a_k, int(x))]]

        def binop(name):
            if getattr(o, name) is None:
                return None
            T = np.empty((m_, m_), dtype=np.int64)
            for u, cu in enumerate(cs):
                for v, cv in enumerate(cs):
                    k = common([cu, cv])
                    a_k, x = el_at(cu, k)
                    _, y = el_at(cv, k)
                    T[u, v] = lift(k, a_k, getattr(nodes[k].ops[a_k], name)[x, y])
            return T

        def const(name):
            val = getattr(o, name)
            return None if val is None else local[ecls[(i, a, int(val))]]
        ops.append(LatticeOps(fp, const("top"), binop("meet"), const("bottom"), binop("join"), binop("imp")))

    reind = []
    for F in range(NM):
        i, f = mrep[F]
        A, B = int(dom[F]), int(cod[F])
        R = np.empty(len(fib_items[B]), dtype=np.int64)
        for v, cv in enumerate(fib_items[B]):
            j = erep[cv][0]
            k = meet_at([(i,), (j,)], lambda k: int(nodes[k].base.cod[push_mor(i, f, k)]) == el_at(cv, k)[0])
            fk = push_mor(i, f, k)
            _, y = el_at(cv, k)
            R[v] = local[ecls[(k, int(nodes[k].base.dom[fk]), int(nodes[k].R(fk)[y]))]]
        reind.append(R)

    delta = {}
    for A in range(NO):
        if (A, A) not in products:
            continue
        i, a = orep[A]
        if a in nodes[i].delta:
            aa = nodes[i].base.product(a, a)[0]
            delta[A] = local[ecls[(i, aa, int(nodes[i].delta[a]))]]
    ex, fa = {}, {}
    for (C, B), (Pcls, _, _) in products.items():
        for tab, out in (("exists_", ex), ("forall_", fa)):
            T = np.empty(len(fib_items[Pcls]), dtype=np.int64)
            okk = True
            for v, cv in enumerate(fib_items[Pcls]):
                (ic, c_), (ib, b_) = orep[C], orep[B]
                j = erep[cv][0]
                hit = None
                for k in d.upper_bounds([ic, ib, j]):
                    kc, kb = push_obj(ic, c_, k), push_obj(ib, b_, k)
                    if (kc, kb) in nodes[k].base.products and nodes[k].base.products[(kc, kb)][0] == el_at(cv, k)[0] \
                            and (kc, kb) in getattr(nodes[k], tab):
                        hit = (k, kc, int(getattr(nodes[k], tab)[(kc, kb)][el_at(cv, k)[1]]))
                        break
                if hit is None:
                    okk = False
                    break
                T[v] = local[ecls[hit]]
            if okk:
                out[(C, B)] = T
    layers = frozenset.intersection(*[frozenset(P.layers) for P in nodes])
    colim = Doctrine(cat, tuple(fibers), tuple(reind), tuple(ops), delta, ex, fa, layers,
                     f"colim({d.name})", {"diagram": d})

    cocone = {}
    for i in range(n):
        Pi = nodes[i]
        F_obj = [ocls[(i, a)] for a in range(len(Pi.base.objects))]
        F_mor = [mcls[(i, f)] for f in range(len(Pi.base.morphisms))]
        comp_i = tuple(np.array([local[ecls[(i, a, x)]] for x in range(len(Pi.fibers[a]))], dtype=np.int64)
                       for a in range(len(Pi.base.objects)))
        cocone[i] = DoctrineMorphism(Pi, colim, F_obj, F_mor, comp_i, Pi.layers & layers, f"leg{i}")
    return Colimit(colim, cocone, ocls_list, mcls_list, [[ecls_list[c] for c in cs] for cs in fib_items], d)


def _cls_name(nodes, kind, rep):
    i, x = rep
    cat = nodes[i].base
    return f"{i}:{cat.objects[x] if kind == 'o' else cat.morphisms[x]}"


def _el_name(nodes, rep):
    i, a, x = rep
    return f"{i}:{nodes[i].fibers[a].elements[x]}"


def colimit_mediator(col: Colimit, cocone: dict) -> DoctrineMorphism:
    """The morphism out of the colimit induced by a compatible cocone ``i -> (node i -> R)``.

    ``g_[A]([x]) = g_i(x)`` for the representative ``(i, A, x)``.
    """
    d = col.diagram
    for i in range(len(d.nodes)):
        for j in range(len(d.nodes)):
            if d.leq[i, j] and not morphisms_equal(compose_morphisms(cocone[j], d.edges[(i, j)]), cocone[i]):
                raise DiagramError(f"cocone legs {i} and {j} are not compatible")
    R = next(iter(cocone.values())).dst
    P = col.doctrine
    F_obj = [int(cocone[g[0][0]].F_obj[g[0][1]]) for g in col.object_classes]
    F_mor = [int(cocone[g[0][0]].F_mor[g[0][1]]) for g in col.morphism_classes]
    comp = tuple(np.array([int(cocone[g[0][0]].comp[g[0][1]][g[0][2]]) for g in cls], dtype=np.int64)
                 for cls in col.element_classes)
    layers = frozenset.intersection(*[m.preserved_layers for m in cocone.values()]) & P.layers
    return DoctrineMorphism(P, R, F_obj, F_mor, comp, layers, "colim-med")
